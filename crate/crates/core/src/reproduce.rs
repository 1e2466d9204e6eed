//! Figure drivers. Each builds a [`Bundle`] of CSV, SVG and JSON files at a
//! fixed desk-scale grid so runs are cheap and byte-reproducible.
//!
//! | figure | content | grid |
//! |---|---|---|
//! | fig2 | `D_int` of every family over 130 to 260 THz | every resonance |
//! | fig3 | through-port dips near 214.6 THz, ±2.5 linewidths | 401 samples per family |
//! | fig4 | TE00, `L = 1` phase map plus cuts through an ET and an MI cell | 64 × 64 |
//! | fig5 | TE00 phase maps for `L = 1..6` | 64 × 64 each |
//! | fig6 | detuning scans at the joint optimum, `L = 1` | 128 detunings |
//! | fig7 | TE00 / TE10 / TM10 maps at `L = 1, 3, 6` and the joint optimum | 64 × 64 each |

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::config::RunSettings;
use crate::dispersion::{integrated_dispersion, resonances_in, transmission_spectrum};
use crate::duan::{minimize_duan, quadrature_covariance};
use crate::error::{Error, Result};
use crate::fluct::{build_m, intracavity_pair_photons, noise_spectrum};
use crate::model::{
    damping_rates, normalize, DriveConvention, FamilyLabel, OperatingPoint, ResonatorSpec,
};
use crate::output::{
    a_pin_column, heatmap_svg, line_plot_svg, num, phase_csv, to_json_pretty, Bundle, CsvTable,
    Series,
};
use crate::phases::{
    best_joint_pump_from_grids, linspace, sweep, ClassifyOptions, JointPump, Phase, SweepGrid,
};
use crate::steady::{parametric_branch, pump_only_branches, SteadyState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Self::Fig2,
        Self::Fig3,
        Self::Fig4,
        Self::Fig5,
        Self::Fig6,
        Self::Fig7,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidArgument(format!("unknown figure '{s}' (expected fig2..fig7)"))
            })
    }
}

/// Detuning axis of the phase maps (Hz).
pub const DELTA_RANGE_HZ: (f64, f64) = (-0.5e9, 1.5e9);
pub const MAP_GRID: usize = 64;
pub const SCAN_POINTS: usize = 128;
pub const JOINT_FAMILIES: [FamilyLabel; 3] =
    [FamilyLabel::TE00, FamilyLabel::TE10, FamilyLabel::TM10];
pub const JOINT_LS: [u32; 3] = [1, 3, 6];
/// `fig2` frequency span (Hz).
pub const DISPERSION_RANGE_HZ: (f64, f64) = (130e12, 260e12);
/// `fig3` center (Hz).
pub const TRANSMISSION_CENTER_HZ: f64 = 214.6e12;

/// Upper end of the amplitude axis for a drive convention.
pub fn amplitude_max(convention: DriveConvention) -> f64 {
    match convention {
        DriveConvention::PhotonFlux => 4e9,
        DriveConvention::PlaneWave => 1e10,
    }
}

/// Default `(deltas, amplitudes)` of the phase maps at `n × n`.
pub fn default_axes(convention: DriveConvention, n: usize) -> (Vec<f64>, Vec<f64>) {
    (
        linspace(DELTA_RANGE_HZ.0, DELTA_RANGE_HZ.1, n),
        linspace(0.0, amplitude_max(convention), n),
    )
}

/// Shared inputs of every driver.
#[derive(Debug, Clone)]
pub struct Context<'a> {
    pub resonator: &'a ResonatorSpec,
    pub settings: &'a RunSettings,
    pub config_hash: &'a str,
    pub workers: usize,
}

impl Context<'_> {
    pub fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions {
            eps_ne: self.settings.eps_ne,
            omega: self.settings.omega_norm,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepMeta<'a> {
    config_hash: &'a str,
    family: FamilyLabel,
    l: u32,
    eps_ne: f64,
    omega_norm: f64,
    drive_convention: DriveConvention,
    delta_p0_hz_range: [f64; 2],
    a_pin_range: [f64; 2],
    shape: [usize; 2],
    ne_cells: usize,
    et_cells: usize,
    mi_cells: usize,
    failed_cells: usize,
    min_c_min: f64,
}

/// Sweeps `family` at every `L` and adds one CSV, SVG and metadata JSON per
/// grid under `prefix`. Failed cells are counted, not fatal.
pub fn phase_diagram_bundle(
    ctx: &Context,
    family: FamilyLabel,
    ls: &[u32],
    deltas: &[f64],
    amplitudes: &[f64],
    prefix: &str,
) -> Result<(Bundle, Vec<SweepGrid>)> {
    let grids = sweep(
        ctx.resonator,
        family,
        ls,
        deltas,
        amplitudes,
        &ctx.classify_options(),
        ctx.workers,
    )?;
    let mut b = Bundle::default();
    for g in &grids {
        add_grid(&mut b, ctx, g, prefix);
    }
    Ok((b, grids))
}

fn add_grid(b: &mut Bundle, ctx: &Context, g: &SweepGrid, prefix: &str) {
    let conv = ctx.resonator.drive_convention;
    let stem = format!("{prefix}phase_{}_L{}", g.family, g.l);
    let failed = g.points.iter().filter(|p| p.error.is_some()).count();
    b.failures += failed;
    b.add(format!("{stem}.csv"), phase_csv(g, conv).render());
    let title = format!(
        "{} L={} C_min (omega_norm={})",
        g.family, g.l, ctx.settings.omega_norm
    );
    b.add(
        format!("{stem}.svg"),
        heatmap_svg(
            g,
            &ctx.settings.heatmap_buckets,
            ctx.settings.eps_ne,
            ctx.config_hash,
            &title,
        ),
    );
    let meta = SweepMeta {
        config_hash: ctx.config_hash,
        family: g.family,
        l: g.l,
        eps_ne: ctx.settings.eps_ne,
        omega_norm: ctx.settings.omega_norm,
        drive_convention: conv,
        delta_p0_hz_range: [g.deltas[0], *g.deltas.last().unwrap()],
        a_pin_range: [g.amplitudes[0], *g.amplitudes.last().unwrap()],
        shape: [g.deltas.len(), g.amplitudes.len()],
        ne_cells: g.count(Phase::NE),
        et_cells: g.count(Phase::ET),
        mi_cells: g.count(Phase::MI),
        failed_cells: failed,
        min_c_min: g
            .points
            .iter()
            .map(|p| p.c_min)
            .filter(|c| c.is_finite())
            .fold(f64::INFINITY, f64::min),
    };
    b.add(format!("{stem}.json"), to_json_pretty(&meta));
}

/// Steady states and pair statistics at one operating point.
#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub delta_p0_hz: f64,
    pub a_pin: f64,
    pub f_norm: f64,
    pub dtp_norm: f64,
    pub dtl_norm: f64,
    pub branches: Vec<SteadyState>,
    /// Lowest pump-only root.
    pub ap2_norm: f64,
    /// Largest parametric `A²`, zero below threshold.
    pub a2_norm: f64,
    /// Fluctuation-driven intracavity pair photons at the lowest pump-only root.
    pub pair_photons: f64,
    pub c_min: f64,
}

pub fn point_report(op: &OperatingPoint, resonator: &ResonatorSpec, omega: f64) -> PointReport {
    let d = normalize(op, resonator);
    let pump = pump_only_branches(d.f_norm, d.dtp);
    let pairs = parametric_branch(&d).unwrap_or_default();
    let sys = build_m(
        &pump[0],
        d.dtl,
        damping_rates(&op.family).coupling_fraction(),
    );
    let pair_photons = intracavity_pair_photons(&sys).unwrap_or(f64::NAN);
    let c_min = if sys.is_stable() {
        noise_spectrum(&sys, omega)
            .and_then(|s| quadrature_covariance(&s))
            .map(|s| minimize_duan(&s).c_min)
            .unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    let mut branches = pump.clone();
    branches.extend(pairs.iter().copied());
    PointReport {
        delta_p0_hz: op.delta_p0,
        a_pin: op.a_pin,
        f_norm: d.f_norm,
        dtp_norm: d.dtp,
        dtl_norm: d.dtl,
        ap2_norm: pump[0].ap2,
        a2_norm: pairs.iter().map(|s| s.a2).fold(0.0, f64::max),
        pair_photons,
        c_min,
        branches,
    }
}

pub fn fig2(ctx: &Context) -> Result<Bundle> {
    let order = ctx.resonator.truncation_order;
    let mut t = CsvTable::new(["family", "L", "f_Hz", "Dint_rad_s"]);
    let mut series = Vec::new();
    for fam in &ctx.resonator.families {
        let mut pts = Vec::new();
        for (l, f) in resonances_in(fam, DISPERSION_RANGE_HZ.0, DISPERSION_RANGE_HZ.1, order) {
            let dint = integrated_dispersion(fam, l, order);
            t.push(vec![
                fam.label.to_string(),
                l.to_string(),
                num(f),
                num(dint),
            ]);
            pts.push((f / 1e12, dint / (2.0 * PI * 1e9)));
        }
        series.push(Series {
            name: fam.label.to_string(),
            points: pts,
        });
    }
    let mut b = Bundle::default();
    b.add("fig2/dispersion.csv", t.render());
    b.add(
        "fig2/dispersion.svg",
        line_plot_svg(
            &series,
            "f (THz)",
            "D_int / 2pi (GHz)",
            ctx.config_hash,
            "Integrated dispersion",
        ),
    );
    Ok(b)
}

pub fn fig3(ctx: &Context) -> Result<Bundle> {
    const SAMPLES: usize = 401;
    let order = ctx.resonator.truncation_order;
    let mut t = CsvTable::new(["family", "l", "f_hz", "offset_hz", "transmission"]);
    let mut series = Vec::new();
    for fam in &ctx.resonator.families {
        let fsr = fam.fsr_hz();
        let (l, f_res) = resonances_in(
            fam,
            TRANSMISSION_CENTER_HZ - fsr,
            TRANSMISSION_CENTER_HZ + fsr,
            order,
        )
        .into_iter()
        .min_by(|a, b| {
            (a.1 - TRANSMISSION_CENTER_HZ)
                .abs()
                .total_cmp(&(b.1 - TRANSMISSION_CENTER_HZ).abs())
        })
        .ok_or_else(|| Error::EmptyRange(format!("{}: no resonance near 214.6 THz", fam.label)))?;
        let width = damping_rates(fam).total / (2.0 * PI);
        let tr = transmission_spectrum(
            std::slice::from_ref(fam),
            f_res - 2.5 * width,
            f_res + 2.5 * width,
            SAMPLES,
            order,
        )?;
        let mut pts = Vec::with_capacity(SAMPLES);
        for (&f, &v) in tr[0].f_hz.iter().zip(&tr[0].transmission) {
            t.push(vec![
                fam.label.to_string(),
                l.to_string(),
                num(f),
                num(f - f_res),
                num(v),
            ]);
            pts.push(((f - f_res) / width, v));
        }
        series.push(Series {
            name: format!("{} L={l}", fam.label),
            points: pts,
        });
    }
    let mut b = Bundle::default();
    b.add("fig3/transmission.csv", t.render());
    b.add(
        "fig3/transmission.svg",
        line_plot_svg(
            &series,
            "(f - f_res) / linewidth",
            "transmission",
            ctx.config_hash,
            "Through-port transmission",
        ),
    );
    Ok(b)
}

/// ET and MI reference cells of a grid. ET: the cell nearest to the middle of
/// the ET cells' bounding box, MI: the MI cell with the lowest amplitude
/// (then lowest detuning).
type Cell = (usize, usize);

fn star_cells(g: &SweepGrid) -> (Option<Cell>, Option<Cell>) {
    let na = g.amplitudes.len();
    let cells = |ph: Phase| {
        g.points
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.phase == ph)
            .map(move |(k, _)| (k / na, k % na))
    };
    let et: Vec<_> = cells(Phase::ET).collect();
    let et_star = if et.is_empty() {
        None
    } else {
        let ci = (et.iter().map(|c| c.0).min().unwrap() + et.iter().map(|c| c.0).max().unwrap())
            as f64
            / 2.0;
        let cj = (et.iter().map(|c| c.1).min().unwrap() + et.iter().map(|c| c.1).max().unwrap())
            as f64
            / 2.0;
        et.iter().copied().min_by(|a, b| {
            let da = (a.0 as f64 - ci).powi(2) + (a.1 as f64 - cj).powi(2);
            let db = (b.0 as f64 - ci).powi(2) + (b.1 as f64 - cj).powi(2);
            da.total_cmp(&db)
        })
    };
    let mi_star = cells(Phase::MI).min_by_key(|&(i, j)| (j, i));
    (et_star, mi_star)
}

fn cut_table(conv: DriveConvention) -> CsvTable {
    CsvTable::new(vec![
        "scan".to_string(),
        "delta_p0_hz".into(),
        a_pin_column(conv).into(),
        "root".into(),
        "branch".into(),
        "ap2_norm".into(),
        "a2_norm".into(),
        "stable".into(),
    ])
}

fn add_cut(
    ctx: &Context,
    table: &mut CsvTable,
    family: FamilyLabel,
    scan: &str,
    ops: impl Iterator<Item = (f64, f64)>,
    x_of: impl Fn(f64, f64) -> f64,
) -> Result<Vec<Series>> {
    let fam = *ctx.resonator.family(family)?;
    let mut per_root: Vec<Vec<(f64, f64)>> = vec![Vec::new(); 3];
    for (delta, a) in ops {
        let op = OperatingPoint::new(fam, 1, delta, a)?;
        let d = normalize(&op, ctx.resonator);
        let roots = pump_only_branches(d.f_norm, d.dtp);
        let x = x_of(delta, a);
        for (k, s) in roots
            .iter()
            .chain(parametric_branch(&d).unwrap_or_default().iter())
            .enumerate()
        {
            table.push(vec![
                scan.into(),
                num(delta),
                num(a),
                k.to_string(),
                format!("{:?}", s.branch),
                num(s.ap2),
                num(s.a2),
                s.stable.to_string(),
            ]);
        }
        for (k, series) in per_root.iter_mut().enumerate() {
            series.push((x, roots.get(k).map_or(f64::NAN, |s| s.ap2)));
        }
    }
    Ok(per_root
        .into_iter()
        .enumerate()
        .map(|(k, points)| Series {
            name: format!("pump root {k}"),
            points,
        })
        .collect())
}

pub fn fig4(ctx: &Context) -> Result<Bundle> {
    let conv = ctx.resonator.drive_convention;
    let (deltas, amps) = default_axes(conv, MAP_GRID);
    let (mut b, grids) =
        phase_diagram_bundle(ctx, FamilyLabel::TE00, &[1], &deltas, &amps, "fig4/")?;
    let g = &grids[0];
    let (et, mi) = star_cells(g);
    let mut stars = BTreeMap::new();
    let mut table = cut_table(conv);
    for (name, cell) in [("et", et), ("mi", mi)] {
        let Some((i, j)) = cell else { continue };
        stars.insert(name, g.get(i, j).clone());
        let fine_a = linspace(amps[0], *amps.last().unwrap(), SCAN_POINTS);
        let fine_d = linspace(deltas[0], *deltas.last().unwrap(), SCAN_POINTS);
        let s_amp = add_cut(
            ctx,
            &mut table,
            FamilyLabel::TE00,
            &format!("{name}_amplitude"),
            fine_a.iter().map(|&a| (deltas[i], a)),
            |_, a| a,
        )?;
        let s_det = add_cut(
            ctx,
            &mut table,
            FamilyLabel::TE00,
            &format!("{name}_detuning"),
            fine_d.iter().map(|&d| (d, amps[j])),
            |d, _| d / 1e9,
        )?;
        b.add(
            format!("fig4/cut_{name}_amplitude.svg"),
            line_plot_svg(
                &s_amp,
                a_pin_column(conv),
                "A_p^2 (norm)",
                ctx.config_hash,
                &format!("{name} cell, amplitude scan"),
            ),
        );
        b.add(
            format!("fig4/cut_{name}_detuning.svg"),
            line_plot_svg(
                &s_det,
                "delta_p0 (GHz)",
                "A_p^2 (norm)",
                ctx.config_hash,
                &format!("{name} cell, detuning scan"),
            ),
        );
    }
    b.add("fig4/cuts.csv", table.render());
    b.add("fig4/stars.json", to_json_pretty(&stars));
    Ok(b)
}

pub fn fig5(ctx: &Context) -> Result<Bundle> {
    let (deltas, amps) = default_axes(ctx.resonator.drive_convention, MAP_GRID);
    let ls: Vec<u32> = (1..=6).collect();
    let (mut b, grids) =
        phase_diagram_bundle(ctx, FamilyLabel::TE00, &ls, &deltas, &amps, "fig5/")?;
    let mut t = CsvTable::new(["l", "ne_cells", "et_cells", "mi_cells"]);
    for g in &grids {
        t.push(vec![
            g.l.to_string(),
            g.count(Phase::NE).to_string(),
            g.count(Phase::ET).to_string(),
            g.count(Phase::MI).to_string(),
        ]);
    }
    b.add("fig5/phase_areas.csv", t.render());
    Ok(b)
}

/// Joint-pump grids for [`JOINT_FAMILIES`] at [`JOINT_LS`] plus the optimum.
pub fn joint_pump(ctx: &Context, n: usize) -> Result<(Bundle, Result<JointPump>)> {
    let (deltas, amps) = default_axes(ctx.resonator.drive_convention, n);
    let mut b = Bundle::default();
    let mut grids = BTreeMap::new();
    for fam in JOINT_FAMILIES {
        let (fb, g) = phase_diagram_bundle(ctx, fam, &JOINT_LS, &deltas, &amps, "fig7/")?;
        b.merge(fb);
        grids.insert(fam, g);
    }
    let best =
        best_joint_pump_from_grids(&grids, ctx.settings.eps_ne, ctx.settings.mi_margin_cells);
    Ok((b, best))
}

pub fn joint_pump_csv(best: &JointPump, conv: DriveConvention) -> CsvTable {
    let mut t = CsvTable::new(["family", "delta_p0_hz", a_pin_column(conv), "worst_c_min"]);
    for f in &best.families {
        t.push(vec![
            f.family.to_string(),
            num(best.delta_p0),
            num(f.a_pin),
            num(f.worst_c_min),
        ]);
    }
    t
}

pub fn fig7(ctx: &Context) -> Result<Bundle> {
    let (mut b, best) = joint_pump(ctx, MAP_GRID)?;
    match best {
        Ok(best) => {
            b.add(
                "fig7/best_pump.csv",
                joint_pump_csv(&best, ctx.resonator.drive_convention).render(),
            );
            b.add("fig7/best_pump.json", to_json_pretty(&best));
        }
        Err(e) => {
            b.failures += 1;
            b.add(
                "fig7/best_pump.json",
                to_json_pretty(&BTreeMap::from([("error", e.to_string())])),
            );
        }
    }
    Ok(b)
}

pub fn fig6(ctx: &Context) -> Result<Bundle> {
    let (_, best) = joint_pump(ctx, MAP_GRID)?;
    let best = best?;
    let conv = ctx.resonator.drive_convention;
    let deltas = linspace(DELTA_RANGE_HZ.0, DELTA_RANGE_HZ.1, SCAN_POINTS);
    let mut t = CsvTable::new(vec![
        "family".to_string(),
        "delta_p0_hz".into(),
        a_pin_column(conv).into(),
        "ap2_norm".into(),
        "a2_norm".into(),
        "pair_photons".into(),
        "c_min".into(),
    ]);
    let mut ap2 = Vec::new();
    let mut a2 = Vec::new();
    let mut photons = Vec::new();
    let mut cmin = Vec::new();
    let mut b = Bundle::default();
    for fp in &best.families {
        let fam = *ctx.resonator.family(fp.family)?;
        let reports: Vec<PointReport> = deltas
            .iter()
            .map(|&d| {
                OperatingPoint::new(fam, 1, d, fp.a_pin)
                    .map(|op| point_report(&op, ctx.resonator, ctx.settings.omega_norm))
            })
            .collect::<Result<_>>()?;
        let name = fp.family.to_string();
        let series = |f: &dyn Fn(&PointReport) -> f64| Series {
            name: name.clone(),
            points: reports
                .iter()
                .map(|r| (r.delta_p0_hz / 1e9, f(r)))
                .collect(),
        };
        ap2.push(series(&|r| r.ap2_norm));
        a2.push(series(&|r| r.a2_norm));
        photons.push(series(&|r| r.pair_photons));
        cmin.push(series(&|r| r.c_min));
        for r in &reports {
            t.push(vec![
                name.clone(),
                num(r.delta_p0_hz),
                num(r.a_pin),
                num(r.ap2_norm),
                num(r.a2_norm),
                num(r.pair_photons),
                num(r.c_min),
            ]);
        }
    }
    b.add("fig6/scans.csv", t.render());
    let h = ctx.config_hash;
    b.add(
        "fig6/pump_power.svg",
        line_plot_svg(
            &ap2,
            "delta_p0 (GHz)",
            "A_p^2 (norm)",
            h,
            "Intracavity pump",
        ),
    );
    b.add(
        "fig6/pair_power.svg",
        line_plot_svg(
            &a2,
            "delta_p0 (GHz)",
            "A^2 (norm)",
            h,
            "Mean-field signal/idler",
        ),
    );
    b.add(
        "fig6/pair_photons.svg",
        line_plot_svg(
            &photons,
            "delta_p0 (GHz)",
            "pair photons",
            h,
            "Fluctuation pair photons",
        ),
    );
    b.add(
        "fig6/c_min.svg",
        line_plot_svg(&cmin, "delta_p0 (GHz)", "C_min", h, "Optimized Duan value"),
    );
    b.add("fig6/best_pump.json", to_json_pretty(&best));
    Ok(b)
}

pub fn reproduce(figure: Figure, ctx: &Context) -> Result<Bundle> {
    match figure {
        Figure::Fig2 => fig2(ctx),
        Figure::Fig3 => fig3(ctx),
        Figure::Fig4 => fig4(ctx),
        Figure::Fig5 => fig5(ctx),
        Figure::Fig6 => fig6(ctx),
        Figure::Fig7 => fig7(ctx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{config_hash, default_resonator};

    fn with_ctx<T>(f: impl FnOnce(&Context) -> T) -> T {
        let r = default_resonator();
        let s = RunSettings::default();
        let h = config_hash(&r, &s);
        f(&Context {
            resonator: &r,
            settings: &s,
            config_hash: &h,
            workers: 1,
        })
    }

    #[test]
    fn figure_names_round_trip() {
        for f in Figure::ALL {
            assert_eq!(f.as_str().parse::<Figure>().unwrap(), f);
        }
        assert!("fig8".parse::<Figure>().is_err());
    }

    #[test]
    fn fig2_covers_all_families() {
        let b = with_ctx(fig2).unwrap();
        let csv = std::str::from_utf8(&b.files["fig2/dispersion.csv"])
            .unwrap()
            .to_string();
        for l in FamilyLabel::ALL {
            assert!(csv.lines().filter(|r| r.starts_with(l.as_str())).count() > 1000);
        }
        // L = 0 has zero integrated dispersion
        assert!(csv
            .lines()
            .any(|r| r.starts_with("TE00,0,") && r.ends_with(",0.0")));
    }

    #[test]
    fn fig3_dips_reach_the_extinction() {
        let b = with_ctx(fig3).unwrap();
        let csv = std::str::from_utf8(&b.files["fig3/transmission.csv"])
            .unwrap()
            .to_string();
        let min = csv
            .lines()
            .skip(1)
            .map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap())
            .fold(1.0, f64::min);
        // 1 − 4·0.55·0.45 = 0.01
        assert!((min - 0.01).abs() < 1e-3, "{min}");
    }

    #[test]
    fn small_phase_bundle_is_deterministic() {
        let run = |workers| {
            let r = default_resonator();
            let s = RunSettings::default();
            let h = config_hash(&r, &s);
            let ctx = Context {
                resonator: &r,
                settings: &s,
                config_hash: &h,
                workers,
            };
            let (d, a) = default_axes(r.drive_convention, 6);
            phase_diagram_bundle(&ctx, FamilyLabel::TE00, &[1, 2], &d, &a, "x/")
                .unwrap()
                .0
        };
        assert_eq!(run(1), run(3));
    }
}
