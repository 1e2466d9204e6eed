//! Command-line front end. `main` only parses arguments and calls [`run`].
//!
//! Every subcommand prints its primary artifact to stdout and writes a bundle
//! (artifacts, `manifest.json`, `timings.json`) to `--out`. Exit status: 0 on
//! success, 1 when any requested computation failed, 2 on configuration
//! errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{
    config_hash, default_resonator, fsr_ghz, lambda0_nm, load_config, RunSettings,
};
use crate::dispersion::{
    find_overlap_windows, integrated_dispersion, resonance_frequency, transmission_spectrum,
};
use crate::duan::{covariance_from_rows, minimize_duan, quadrature_covariance, DuanResult};
use crate::error::{Error, Result};
use crate::fluct::{build_m, intracavity_pair_photons, noise_spectrum, SpectrumRecord};
use crate::linalg::RMat4;
use crate::model::{
    damping_rates, normalize, FamilyLabel, NormalizedDrive, OperatingPoint, ResonatorSpec,
};
use crate::oracle::{
    brute_force_duan, fd_jacobian, from_steady, integrate_mean_field, langevin_covariance,
    vector_field, LangevinOptions,
};
use crate::output::{num, to_json_pretty, unix_now, Bundle, CsvTable, Timings, TIMINGS_FILE};
use crate::phases::{best_joint_pump_from_grids, linspace};
use crate::reproduce::{
    self, amplitude_max, joint_pump_csv, phase_diagram_bundle, Context, Figure, DELTA_RANGE_HZ,
    MAP_GRID,
};
use crate::steady::{parametric_branch, pump_only_branches, SteadyState};

#[derive(Debug, Parser)]
#[command(
    name = "qfcomb",
    version,
    about = "Quantum frequency combs in a multi-family Kerr microring"
)]
pub struct Cli {
    /// Resonator/run configuration (JSON). Defaults to the shipped resonator.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts and the manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for grid sweeps. Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Analysis frequency in units of the total damping rate.
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Family parameters and the resonance grid with integrated dispersion.
    Dispersion {
        #[arg(long = "family")]
        families: Vec<FamilyLabel>,
        /// Grid covers L in [-l_max, l_max].
        #[arg(long, default_value_t = 50)]
        l_max: i64,
    },
    /// Windows where one resonance of every family falls within a tolerance.
    Overlap {
        #[arg(long = "family")]
        families: Vec<FamilyLabel>,
        #[arg(long, default_value_t = 130.0)]
        f_lo_thz: f64,
        #[arg(long, default_value_t = 260.0)]
        f_hi_thz: f64,
        #[arg(long, default_value_t = 1.0)]
        tolerance_ghz: f64,
    },
    /// Through-port transmission of each family.
    Transmission {
        #[arg(long = "family")]
        families: Vec<FamilyLabel>,
        #[arg(long)]
        f_lo_thz: f64,
        #[arg(long)]
        f_hi_thz: f64,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
    },
    /// All steady-state branches at one operating point.
    Steady(PointArgs),
    /// Output noise spectrum and quadrature covariance.
    Spectrum(PointArgs),
    /// Optimized Duan value of an operating point or of a given covariance.
    Duan {
        #[command(flatten)]
        point: PointArgs,
        /// 4×4 covariance over (X1, Y1, X2, Y2) as inline JSON rows or a file path.
        #[arg(long)]
        sigma: Option<String>,
    },
    /// NE/ET/MI map over pump detuning and amplitude.
    PhaseDiagram {
        #[arg(long, default_value = "TE00")]
        family: FamilyLabel,
        #[arg(long = "l", default_values_t = [1u32])]
        ls: Vec<u32>,
        #[command(flatten)]
        axes: AxisArgs,
    },
    /// Shared detuning and per-family amplitudes maximizing the worst entanglement.
    BestPump {
        #[arg(long = "family", default_values_t = [FamilyLabel::TE00, FamilyLabel::TE10, FamilyLabel::TM10])]
        families: Vec<FamilyLabel>,
        #[arg(long = "l", default_values_t = [1u32, 3, 6])]
        ls: Vec<u32>,
        #[command(flatten)]
        axes: AxisArgs,
    },
    /// Independent verification engines.
    Oracle {
        #[command(subcommand)]
        op: OracleOp,
    },
    /// Regenerates a figure bundle (or all of them).
    Reproduce {
        /// fig2..fig7 or all.
        #[arg(long, default_value = "all")]
        figure: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleOp {
    /// RK4 integration of the mean-field equations from a steady state.
    MeanField {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Relative perturbation of the initial state.
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
    },
    /// Finite-difference fluctuation matrix against the analytic one.
    Jacobian {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
    },
    /// Stochastic intracavity covariance against the Lyapunov solution.
    Langevin {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 2e-3)]
        dt: f64,
    },
    /// Exhaustive angle grid for the Duan value.
    BruteDuan {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
    },
}

/// Either a laboratory point (family, L, detuning, amplitude) or a raw
/// normalized drive (`--f-norm`, `--dtp`, `--dtl`).
#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[arg(long, default_value = "TE00")]
    pub family: FamilyLabel,
    #[arg(long = "l", default_value_t = 1)]
    pub l: u32,
    #[arg(long, default_value_t = 0.0)]
    pub detuning_ghz: f64,
    /// Pump amplitude on the configured drive convention's axis.
    #[arg(long, alias = "apin-v-per-m", default_value_t = 0.0)]
    pub apin: f64,
    #[arg(long, requires_all = ["dtp", "dtl"])]
    pub f_norm: Option<f64>,
    #[arg(long, requires = "f_norm")]
    pub dtp: Option<f64>,
    #[arg(long, requires = "f_norm")]
    pub dtl: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct AxisArgs {
    #[arg(long, default_value_t = DELTA_RANGE_HZ.0 / 1e9)]
    pub delta_min_ghz: f64,
    #[arg(long, default_value_t = DELTA_RANGE_HZ.1 / 1e9)]
    pub delta_max_ghz: f64,
    #[arg(long, default_value_t = MAP_GRID)]
    pub n_delta: usize,
    #[arg(long, default_value_t = 0.0)]
    pub apin_min: f64,
    /// Defaults to the drive convention's standard range.
    #[arg(long)]
    pub apin_max: Option<f64>,
    #[arg(long, default_value_t = MAP_GRID)]
    pub n_apin: usize,
}

impl AxisArgs {
    fn axes(&self, resonator: &ResonatorSpec) -> (Vec<f64>, Vec<f64>) {
        let amax = self
            .apin_max
            .unwrap_or_else(|| amplitude_max(resonator.drive_convention));
        (
            linspace(
                self.delta_min_ghz * 1e9,
                self.delta_max_ghz * 1e9,
                self.n_delta,
            ),
            linspace(self.apin_min, amax, self.n_apin),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
struct ResolvedPoint {
    family: FamilyLabel,
    l: Option<u32>,
    delta_p0_hz: Option<f64>,
    a_pin: Option<f64>,
    drive: NormalizedDrive,
    coupling_fraction: f64,
}

impl PointArgs {
    fn resolve(&self, resonator: &ResonatorSpec) -> Result<ResolvedPoint> {
        let fam = *resonator.family(self.family)?;
        let coupling_fraction = damping_rates(&fam).coupling_fraction();
        if let (Some(f), Some(dtp), Some(dtl)) = (self.f_norm, self.dtp, self.dtl) {
            if !(f >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "--f-norm must be >= 0 (got {f})"
                )));
            }
            return Ok(ResolvedPoint {
                family: self.family,
                l: None,
                delta_p0_hz: None,
                a_pin: None,
                drive: NormalizedDrive::raw(f, dtp, dtl),
                coupling_fraction,
            });
        }
        let op = OperatingPoint::new(fam, self.l, self.detuning_ghz * 1e9, self.apin)?;
        Ok(ResolvedPoint {
            family: self.family,
            l: Some(self.l),
            delta_p0_hz: Some(op.delta_p0),
            a_pin: Some(op.a_pin),
            drive: normalize(&op, resonator),
            coupling_fraction,
        })
    }
}

/// Parsed configuration plus global overrides.
struct Session {
    resonator: ResonatorSpec,
    settings: RunSettings,
    hash: String,
    workers: usize,
    format: Format,
}

impl Session {
    fn ctx(&self) -> Context<'_> {
        Context {
            resonator: &self.resonator,
            settings: &self.settings,
            config_hash: &self.hash,
            workers: self.workers,
        }
    }

    fn families(&self, requested: &[FamilyLabel]) -> Result<Vec<crate::model::ModalFamily>> {
        if requested.is_empty() {
            return Ok(self.resonator.families.clone());
        }
        requested
            .iter()
            .map(|&l| self.resonator.family(l).copied())
            .collect()
    }
}

/// What a subcommand produced: stdout text plus the bundle to write.
struct Outcome {
    stdout: String,
    bundle: Bundle,
}

fn table_or_json<T: Serialize>(format: Format, table: &CsvTable, value: &T) -> String {
    match format {
        Format::Csv => table.render(),
        Format::Json => to_json_pretty(value),
    }
}

fn json_outcome<T: Serialize>(name: &str, value: &T) -> Outcome {
    let text = to_json_pretty(value);
    let mut bundle = Bundle::default();
    bundle.add(name, text.clone());
    Outcome {
        stdout: text,
        bundle,
    }
}

fn rows(m: &RMat4) -> [[f64; 4]; 4] {
    let mut r = [[0.0; 4]; 4];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m[(i, j)];
        }
    }
    r
}

fn parse_sigma(arg: &str) -> Result<RMat4> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Error::Io(format!("{arg}: {e}")))?
    };
    let rows: [[f64; 4]; 4] =
        serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("--sigma: {e}")))?;
    covariance_from_rows(&rows)
}

fn lowest_state(p: &ResolvedPoint) -> SteadyState {
    pump_only_branches(p.drive.f_norm, p.drive.dtp)[0]
}

fn covariance_at(p: &ResolvedPoint, omega: f64) -> Result<RMat4> {
    let sys = build_m(&lowest_state(p), p.drive.dtl, p.coupling_fraction);
    let max_re = sys.max_eig_re();
    if !(max_re < 0.0) {
        return Err(Error::UnstableState { max_re });
    }
    quadrature_covariance(&noise_spectrum(&sys, omega)?)
}

fn dispersion_cmd(s: &Session, families: &[FamilyLabel], l_max: i64) -> Result<Outcome> {
    let fams = s.families(families)?;
    let order = s.resonator.truncation_order;
    let mut summary = CsvTable::new([
        "family",
        "fsr_ghz",
        "f0_hz",
        "lambda0_nm",
        "d1_rad_per_s",
        "d2_rad_per_s",
        "d3_rad_per_s",
        "d4_rad_per_s",
        "d5_rad_per_s",
        "q_total",
        "linewidth_hz",
        "a_eff_um2",
        "n_eff",
        "eta_rad_per_s",
    ]);
    let mut grid = CsvTable::new(["family", "L", "f_Hz", "Dint_rad_s"]);
    #[derive(Serialize)]
    struct Row {
        family: FamilyLabel,
        l: i64,
        f_hz: f64,
        dint_rad_per_s: f64,
    }
    let mut json_rows = Vec::new();
    for f in &fams {
        summary.push(vec![
            f.label.to_string(),
            num(fsr_ghz(f)),
            num(f.f0),
            num(lambda0_nm(f)),
            num(f.d[0]),
            num(f.d[1]),
            num(f.d[2]),
            num(f.d[3]),
            num(f.d[4]),
            num(f.q_total),
            num(damping_rates(f).total / (2.0 * std::f64::consts::PI)),
            num(f.a_eff * 1e12),
            num(f.n_eff),
            num(f.eta),
        ]);
        for l in -l_max..=l_max {
            let f_hz = resonance_frequency(f, l, order) / (2.0 * std::f64::consts::PI);
            let dint = integrated_dispersion(f, l, order);
            grid.push(vec![
                f.label.to_string(),
                l.to_string(),
                num(f_hz),
                num(dint),
            ]);
            json_rows.push(Row {
                family: f.label,
                l,
                f_hz,
                dint_rad_per_s: dint,
            });
        }
    }
    let mut bundle = Bundle::default();
    bundle.add("dispersion_summary.csv", summary.render());
    bundle.add("dispersion.csv", grid.render());
    Ok(Outcome {
        stdout: table_or_json(s.format, &grid, &json_rows),
        bundle,
    })
}

fn overlap_cmd(
    s: &Session,
    families: &[FamilyLabel],
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Outcome> {
    let fams = s.families(families)?;
    if !(hi > lo) || !(tol > 0.0) {
        return Err(Error::EmptyRange(format!(
            "[{lo}, {hi}] THz with tolerance {tol} GHz"
        )));
    }
    let windows = find_overlap_windows(
        &fams,
        lo * 1e12,
        hi * 1e12,
        tol * 1e9,
        s.resonator.truncation_order,
    );
    let mut t = CsvTable::new(["center_Hz", "width_Hz", "families", "detunings_Hz"]);
    for w in &windows {
        let fam: Vec<String> = w
            .members
            .iter()
            .map(|m| format!("{}:{}", m.family, m.l))
            .collect();
        let det: Vec<String> = w.members.iter().map(|m| num(m.detuning_hz)).collect();
        t.push(vec![
            num(w.center_hz),
            num(w.width_hz),
            fam.join(";"),
            det.join(";"),
        ]);
    }
    let mut bundle = Bundle::default();
    bundle.add("overlap.csv", t.render());
    Ok(Outcome {
        stdout: table_or_json(s.format, &t, &windows),
        bundle,
    })
}

fn transmission_cmd(
    s: &Session,
    families: &[FamilyLabel],
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Outcome> {
    let fams = s.families(families)?;
    let traces =
        transmission_spectrum(&fams, lo * 1e12, hi * 1e12, n, s.resonator.truncation_order)?;
    let mut t = CsvTable::new(["family", "f_Hz", "transmission"]);
    #[derive(Serialize)]
    struct Trace<'a> {
        family: FamilyLabel,
        f_hz: &'a [f64],
        transmission: &'a [f64],
    }
    let mut json = Vec::new();
    for tr in &traces {
        for (f, v) in tr.f_hz.iter().zip(&tr.transmission) {
            t.push(vec![tr.family.to_string(), num(*f), num(*v)]);
        }
        json.push(Trace {
            family: tr.family,
            f_hz: &tr.f_hz,
            transmission: &tr.transmission,
        });
    }
    let mut bundle = Bundle::default();
    bundle.add("transmission.csv", t.render());
    Ok(Outcome {
        stdout: table_or_json(s.format, &t, &json),
        bundle,
    })
}

fn steady_cmd(s: &Session, p: &PointArgs) -> Result<Outcome> {
    let pt = p.resolve(&s.resonator)?;
    let mut branches = pump_only_branches(pt.drive.f_norm, pt.drive.dtp);
    branches.extend(parametric_branch(&pt.drive)?);
    #[derive(Serialize)]
    struct Out {
        point: ResolvedPoint,
        branches: Vec<SteadyState>,
        pair_photons: Option<f64>,
    }
    let sys = build_m(&branches[0], pt.drive.dtl, pt.coupling_fraction);
    let pair_photons = intracavity_pair_photons(&sys).ok();
    Ok(json_outcome(
        "steady.json",
        &Out {
            point: pt,
            branches,
            pair_photons,
        },
    ))
}

fn spectrum_cmd(s: &Session, p: &PointArgs) -> Result<Outcome> {
    let pt = p.resolve(&s.resonator)?;
    let sys = build_m(&lowest_state(&pt), pt.drive.dtl, pt.coupling_fraction);
    let spec = noise_spectrum(&sys, s.settings.omega_norm)?;
    let cov = quadrature_covariance(&spec)?;
    #[derive(Serialize)]
    struct Out {
        omega: f64,
        s: Vec<[f64; 2]>,
        covariance: [[f64; 4]; 4],
        max_eig_re_norm: f64,
    }
    let rec = SpectrumRecord::from(&spec);
    Ok(json_outcome(
        "spectrum.json",
        &Out {
            omega: rec.omega_norm,
            s: rec.s,
            covariance: rows(&cov),
            max_eig_re_norm: sys.max_eig_re(),
        },
    ))
}

fn duan_cmd(s: &Session, p: &PointArgs, sigma: Option<&str>) -> Result<Outcome> {
    let cov = match sigma {
        Some(arg) => parse_sigma(arg)?,
        None => covariance_at(&p.resolve(&s.resonator)?, s.settings.omega_norm)?,
    };
    let r: DuanResult = minimize_duan(&cov);
    Ok(json_outcome("duan.json", &r))
}

fn phase_cmd(s: &Session, family: FamilyLabel, ls: &[u32], axes: &AxisArgs) -> Result<Outcome> {
    let (deltas, amps) = axes.axes(&s.resonator);
    let (bundle, grids) = phase_diagram_bundle(&s.ctx(), family, ls, &deltas, &amps, "")?;
    let stdout = match s.format {
        Format::Csv => {
            let name = format!("phase_{}_L{}.csv", family, grids[0].l);
            String::from_utf8_lossy(&bundle.files[&name]).into_owned()
        }
        Format::Json => to_json_pretty(&grids),
    };
    Ok(Outcome { stdout, bundle })
}

fn best_pump_cmd(
    s: &Session,
    families: &[FamilyLabel],
    ls: &[u32],
    axes: &AxisArgs,
) -> Result<Outcome> {
    if families.is_empty() || ls.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one family and one L".into(),
        ));
    }
    let (deltas, amps) = axes.axes(&s.resonator);
    let ctx = s.ctx();
    let mut bundle = Bundle::default();
    let mut grids = BTreeMap::new();
    for &f in families {
        let (b, g) = phase_diagram_bundle(&ctx, f, ls, &deltas, &amps, "")?;
        bundle.merge(b);
        grids.insert(f, g);
    }
    let best = best_joint_pump_from_grids(&grids, s.settings.eps_ne, s.settings.mi_margin_cells)?;
    let t = joint_pump_csv(&best, s.resonator.drive_convention);
    bundle.add("best_pump.csv", t.render());
    bundle.add("best_pump.json", to_json_pretty(&best));
    Ok(Outcome {
        stdout: table_or_json(s.format, &t, &best),
        bundle,
    })
}

fn oracle_cmd(s: &Session, op: &OracleOp) -> Result<Outcome> {
    match op {
        OracleOp::MeanField {
            point,
            t_end,
            dt,
            perturb,
        } => {
            let pt = point.resolve(&s.resonator)?;
            let state = lowest_state(&pt);
            let mut init = from_steady(&state);
            init.alpha_p *= 1.0 + perturb;
            let traj = integrate_mean_field(init, &pt.drive, *t_end, *dt)?;
            let last = *traj.last();
            #[derive(Serialize)]
            struct Out {
                start: crate::oracle::MeanFieldState,
                end: crate::oracle::MeanFieldState,
                end_ap2_norm: f64,
                end_vector_field_norm: f64,
                steady_ap2_norm: f64,
            }
            Ok(json_outcome(
                "oracle_mean_field.json",
                &Out {
                    start: init,
                    end: last,
                    end_ap2_norm: last.alpha_p.norm_sqr(),
                    end_vector_field_norm: vector_field(&last, &pt.drive).max_norm(),
                    steady_ap2_norm: state.ap2,
                },
            ))
        }
        OracleOp::Jacobian { point, h } => {
            let pt = point.resolve(&s.resonator)?;
            let state = lowest_state(&pt);
            let fd = fd_jacobian(&state, &pt.drive, *h);
            let m = build_m(&state, pt.drive.dtl, pt.coupling_fraction).m;
            let max_abs_diff = (fd - m).iter().map(|z| z.norm()).fold(0.0, f64::max);
            let flat = |a: &crate::linalg::CMat4| -> Vec<[f64; 2]> {
                (0..16)
                    .map(|k| a[(k / 4, k % 4)])
                    .map(|z| [z.re, z.im])
                    .collect()
            };
            #[derive(Serialize)]
            struct Out {
                analytic: Vec<[f64; 2]>,
                finite_difference: Vec<[f64; 2]>,
                max_abs_diff: f64,
            }
            Ok(json_outcome(
                "oracle_jacobian.json",
                &Out {
                    analytic: flat(&m),
                    finite_difference: flat(&fd),
                    max_abs_diff,
                },
            ))
        }
        OracleOp::Langevin { point, samples, dt } => {
            let pt = point.resolve(&s.resonator)?;
            let state = lowest_state(&pt);
            let opts = LangevinOptions {
                n_samples: *samples,
                dt: *dt,
                seed: s.settings.seed,
                ..LangevinOptions::default()
            };
            let est = langevin_covariance(&state, &pt.drive, pt.coupling_fraction, &opts)?;
            let lyap =
                build_m(&state, pt.drive.dtl, pt.coupling_fraction).intracavity_covariance()?;
            let z = (est.covariance - lyap)
                .component_div(&est.stderr.map(|x| x.max(f64::MIN_POSITIVE)));
            #[derive(Serialize)]
            struct Out {
                options: LangevinOptions,
                covariance: [[f64; 4]; 4],
                stderr: [[f64; 4]; 4],
                lyapunov: [[f64; 4]; 4],
                max_abs_z: f64,
            }
            Ok(json_outcome(
                "oracle_langevin.json",
                &Out {
                    options: opts,
                    covariance: rows(&est.covariance),
                    stderr: rows(&est.stderr),
                    lyapunov: rows(&lyap),
                    max_abs_z: z.iter().map(|x| x.abs()).fold(0.0, f64::max),
                },
            ))
        }
        OracleOp::BruteDuan { point, grid } => {
            let pt = point.resolve(&s.resonator)?;
            let cov = covariance_at(&pt, s.settings.omega_norm)?;
            let (c, tp, tm) = brute_force_duan(&cov, *grid);
            #[derive(Serialize)]
            struct Out {
                grid: usize,
                c_min: f64,
                theta_plus: f64,
                theta_minus: f64,
                optimizer: DuanResult,
            }
            Ok(json_outcome(
                "oracle_brute_duan.json",
                &Out {
                    grid: *grid,
                    c_min: c,
                    theta_plus: tp,
                    theta_minus: tm,
                    optimizer: minimize_duan(&cov),
                },
            ))
        }
    }
}

fn reproduce_cmd(s: &Session, figure: &str) -> Result<Outcome> {
    let figs: Vec<Figure> = if figure.eq_ignore_ascii_case("all") {
        Figure::ALL.to_vec()
    } else {
        vec![figure.parse()?]
    };
    let mut bundle = Bundle::default();
    for f in figs {
        log::info!("reproducing {f}");
        match reproduce::reproduce(f, &s.ctx()) {
            Ok(b) => bundle.merge(b),
            Err(e) => {
                log::error!("{f}: {e}");
                bundle.failures += 1;
                bundle.add(format!("{f}/error.txt"), format!("{e}\n"));
            }
        }
    }
    let listing: Vec<&str> = bundle.files.keys().map(String::as_str).collect();
    Ok(Outcome {
        stdout: listing.join("\n") + "\n",
        bundle,
    })
}

fn session(cli: &Cli) -> Result<Session> {
    let (mut settings, resonator) = match &cli.config {
        Some(path) => {
            let (rc, spec) = load_config(path)?;
            (rc.settings, spec)
        }
        None => (RunSettings::default(), default_resonator()),
    };
    if let Some(w) = cli.omega {
        settings.omega_norm = w;
    }
    if let Some(seed) = cli.seed {
        settings.seed = seed;
    }
    let v = settings.violations();
    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    let workers = cli.workers.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    if workers == 0 {
        return Err(Error::InvalidArgument("--workers must be >= 1".into()));
    }
    let hash = config_hash(&resonator, &settings);
    Ok(Session {
        resonator,
        settings,
        hash,
        workers,
        format: cli.format,
    })
}

fn command_line(cli: &Cli) -> String {
    match &cli.command {
        Command::Dispersion { .. } => "dispersion",
        Command::Overlap { .. } => "overlap",
        Command::Transmission { .. } => "transmission",
        Command::Steady(_) => "steady",
        Command::Spectrum(_) => "spectrum",
        Command::Duan { .. } => "duan",
        Command::PhaseDiagram { .. } => "phase-diagram",
        Command::BestPump { .. } => "best-pump",
        Command::Oracle { .. } => "oracle",
        Command::Reproduce { .. } => "reproduce",
    }
    .to_string()
}

fn execute(cli: &Cli, s: &Session) -> Result<Outcome> {
    match &cli.command {
        Command::Dispersion { families, l_max } => dispersion_cmd(s, families, *l_max),
        Command::Overlap {
            families,
            f_lo_thz,
            f_hi_thz,
            tolerance_ghz,
        } => overlap_cmd(s, families, *f_lo_thz, *f_hi_thz, *tolerance_ghz),
        Command::Transmission {
            families,
            f_lo_thz,
            f_hi_thz,
            samples,
        } => transmission_cmd(s, families, *f_lo_thz, *f_hi_thz, *samples),
        Command::Steady(p) => steady_cmd(s, p),
        Command::Spectrum(p) => spectrum_cmd(s, p),
        Command::Duan { point, sigma } => duan_cmd(s, point, sigma.as_deref()),
        Command::PhaseDiagram { family, ls, axes } => phase_cmd(s, *family, ls, axes),
        Command::BestPump { families, ls, axes } => best_pump_cmd(s, families, ls, axes),
        Command::Oracle { op } => oracle_cmd(s, op),
        Command::Reproduce { figure } => reproduce_cmd(s, figure),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let started = unix_now();
    let s = match session(cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let outcome = match execute(cli, &s) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return if e.is_config_error() { 2 } else { 1 };
        }
    };
    print!("{}", outcome.stdout);
    let written = outcome
        .bundle
        .write(&cli.out, &s.hash, &command_line(cli))
        .and_then(|_| {
            let t = Timings {
                started_unix_s: started,
                finished_unix_s: unix_now(),
            };
            fs::write(cli.out.join(TIMINGS_FILE), to_json_pretty(&t)).map_err(Error::from)
        });
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 1;
    }
    if outcome.bundle.failures > 0 {
        eprintln!(
            "error: {} computations failed (see outputs)",
            outcome.bundle.failures
        );
        return 1;
    }
    0
}
