//! NE / ET / MI classification over the pump detuning / amplitude plane.
//!
//! A point is MI when the pump has more than one steady state, when a
//! signal/idler steady state exists, or when the pump-only state amplifies
//! pair fluctuations. Otherwise the optimized Duan value decides between
//! no entanglement (NE) and tunable entanglement (ET).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duan::{minimize_duan, quadrature_covariance};
use crate::error::{Error, Result};
use crate::fluct::{build_m, noise_spectrum};
use crate::model::{
    damping_rates, normalize, FamilyLabel, NormalizedDrive, OperatingPoint, ResonatorSpec,
};
use crate::steady::{parametric_branch, pump_only_branches};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    NE,
    ET,
    MI,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::NE => "NE",
            Phase::ET => "ET",
            Phase::MI => "MI",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// NE/ET boundary on `C_min`.
    pub eps_ne: f64,
    /// Analysis frequency in units of the total damping rate.
    pub omega: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            eps_ne: 1e-3,
            omega: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    /// Hz.
    pub delta_p0: f64,
    pub a_pin: f64,
    pub phase: Phase,
    /// `NaN` for MI points.
    pub c_min: f64,
    /// Pump-only plus parametric steady states.
    pub n_branches: usize,
    pub has_parametric: bool,
    /// Largest real part of the fluctuation spectrum at the lowest pump-only state.
    pub max_eig_re: f64,
    /// Set when a solver failed; the point is then reported as MI.
    pub error: Option<String>,
}

impl PhasePoint {
    /// The recorded evidence agrees with the assigned phase.
    pub fn is_consistent(&self, eps_ne: f64) -> bool {
        let mi = self.n_branches > 1
            || self.has_parametric
            || self.max_eig_re >= 0.0
            || self.error.is_some();
        match self.phase {
            Phase::MI => mi,
            Phase::NE => !mi && self.c_min >= -eps_ne,
            Phase::ET => !mi && self.c_min < -eps_ne,
        }
    }
}

/// Classification of a normalized operating point. `coupling_ratio` is `γ/Γ`.
pub fn classify_normalized(
    drive: &NormalizedDrive,
    coupling_ratio: f64,
    opts: &ClassifyOptions,
) -> PhasePoint {
    let mut point = PhasePoint {
        delta_p0: f64::NAN,
        a_pin: f64::NAN,
        phase: Phase::MI,
        c_min: f64::NAN,
        n_branches: 0,
        has_parametric: false,
        max_eig_re: f64::NAN,
        error: None,
    };
    let pump = pump_only_branches(drive.f_norm, drive.dtp);
    let pairs = match parametric_branch(drive) {
        Ok(p) => p,
        Err(e) => {
            point.n_branches = pump.len();
            point.error = Some(e.to_string());
            return point;
        }
    };
    point.n_branches = pump.len() + pairs.len();
    point.has_parametric = !pairs.is_empty();
    let sys = build_m(&pump[0], drive.dtl, coupling_ratio);
    point.max_eig_re = sys.max_eig_re();
    if point.n_branches > 1 || point.has_parametric || point.max_eig_re >= 0.0 {
        return point;
    }
    let sigma = match noise_spectrum(&sys, opts.omega).and_then(|s| quadrature_covariance(&s)) {
        Ok(s) => s,
        Err(e) => {
            point.error = Some(e.to_string());
            return point;
        }
    };
    point.c_min = minimize_duan(&sigma).c_min;
    point.phase = if point.c_min >= -opts.eps_ne {
        Phase::NE
    } else {
        Phase::ET
    };
    point
}

pub fn classify_point(
    op: &OperatingPoint,
    resonator: &ResonatorSpec,
    opts: &ClassifyOptions,
) -> PhasePoint {
    let drive = normalize(op, resonator);
    let ratio = damping_rates(&op.family).coupling_fraction();
    let mut p = classify_normalized(&drive, ratio, opts);
    p.delta_p0 = op.delta_p0;
    p.a_pin = op.a_pin;
    p
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub family: FamilyLabel,
    pub l: u32,
    /// Hz, strictly increasing.
    pub deltas: Vec<f64>,
    /// Strictly increasing.
    pub amplitudes: Vec<f64>,
    /// Detuning-major: index `i_delta * amplitudes.len() + i_amp`.
    pub points: Vec<PhasePoint>,
}

impl SweepGrid {
    pub fn get(&self, i_delta: usize, i_amp: usize) -> &PhasePoint {
        &self.points[i_delta * self.amplitudes.len() + i_amp]
    }

    pub fn count(&self, phase: Phase) -> usize {
        self.points.iter().filter(|p| p.phase == phase).count()
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} axis is empty")));
    }
    if axis.iter().any(|x| !x.is_finite()) || axis.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(format!(
            "{name} axis must be finite and strictly increasing"
        )));
    }
    Ok(())
}

/// Evenly spaced axis including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))
}

/// Classifies every cell for each requested `L`. Output does not depend on `workers`.
pub fn sweep(
    resonator: &ResonatorSpec,
    family: FamilyLabel,
    ls: &[u32],
    deltas: &[f64],
    amplitudes: &[f64],
    opts: &ClassifyOptions,
    workers: usize,
) -> Result<Vec<SweepGrid>> {
    check_axis("detuning", deltas)?;
    check_axis("amplitude", amplitudes)?;
    let fam = *resonator.family(family)?;
    for &l in ls {
        OperatingPoint::new(fam, l, 0.0, 0.0)?;
    }
    let (nd, na) = (deltas.len(), amplitudes.len());
    let cells: Vec<(u32, usize, usize)> = ls
        .iter()
        .flat_map(|&l| (0..nd).flat_map(move |i| (0..na).map(move |j| (l, i, j))))
        .collect();
    let points: Vec<PhasePoint> = pool(workers)?.install(|| {
        cells
            .par_iter()
            .map(|&(l, i, j)| {
                let op = OperatingPoint {
                    family: fam,
                    l,
                    delta_p0: deltas[i],
                    a_pin: amplitudes[j],
                };
                classify_point(&op, resonator, opts)
            })
            .collect()
    });
    Ok(ls
        .iter()
        .zip(points.chunks(nd * na))
        .map(|(&l, chunk)| SweepGrid {
            family,
            l,
            deltas: deltas.to_vec(),
            amplitudes: amplitudes.to_vec(),
            points: chunk.to_vec(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyPump {
    pub family: FamilyLabel,
    pub a_pin: f64,
    /// Largest `C_min` over the requested `L` at this amplitude.
    pub worst_c_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointPump {
    /// Shared detuning (Hz).
    pub delta_p0: f64,
    pub families: Vec<FamilyPump>,
    /// Largest `worst_c_min` across families.
    pub score: f64,
}

/// Cells that are MI, failed, or within `margin` cells (Chebyshev) of one, in any grid.
fn excluded_cells(grids: &[SweepGrid], margin: usize) -> Vec<bool> {
    let (nd, na) = (grids[0].deltas.len(), grids[0].amplitudes.len());
    let mut bad = vec![false; nd * na];
    for g in grids {
        for i in 0..nd {
            for j in 0..na {
                if g.get(i, j).phase != Phase::MI {
                    continue;
                }
                for ii in i.saturating_sub(margin)..=(i + margin).min(nd - 1) {
                    for jj in j.saturating_sub(margin)..=(j + margin).min(na - 1) {
                        bad[ii * na + jj] = true;
                    }
                }
            }
        }
    }
    bad
}

/// Shared-detuning optimum from precomputed grids (one `Vec` per family, one
/// grid per `L`, all on the same axes).
pub fn best_joint_pump_from_grids(
    grids: &BTreeMap<FamilyLabel, Vec<SweepGrid>>,
    eps_ne: f64,
    margin: usize,
) -> Result<JointPump> {
    let first = grids
        .values()
        .find_map(|v| v.first())
        .ok_or_else(|| Error::NoFeasiblePoint("no families requested".into()))?;
    let (deltas, amps) = (&first.deltas, &first.amplitudes);
    for g in grids.values().flatten() {
        if &g.deltas != deltas || &g.amplitudes != amps {
            return Err(Error::InvalidArgument(
                "all grids must share the same axes".into(),
            ));
        }
    }
    if grids.values().any(|v| v.is_empty()) {
        return Err(Error::NoFeasiblePoint("a family has no grids".into()));
    }
    let na = amps.len();
    let excluded: BTreeMap<FamilyLabel, Vec<bool>> = grids
        .iter()
        .map(|(f, g)| (*f, excluded_cells(g, margin)))
        .collect();
    let mut best: Option<JointPump> = None;
    for i in 0..deltas.len() {
        let mut fams = Vec::new();
        for (fam, gs) in grids {
            let bad = &excluded[fam];
            let mut choice: Option<FamilyPump> = None;
            for j in 0..na {
                if bad[i * na + j] {
                    continue;
                }
                let worst = gs
                    .iter()
                    .map(|g| g.get(i, j).c_min)
                    .fold(f64::NEG_INFINITY, f64::max);
                if choice.as_ref().is_none_or(|c| worst < c.worst_c_min) {
                    choice = Some(FamilyPump {
                        family: *fam,
                        a_pin: amps[j],
                        worst_c_min: worst,
                    });
                }
            }
            match choice {
                Some(c) => fams.push(c),
                None => break,
            }
        }
        if fams.len() != grids.len() {
            continue;
        }
        let score = fams
            .iter()
            .map(|f| f.worst_c_min)
            .fold(f64::NEG_INFINITY, f64::max);
        if best.as_ref().is_none_or(|b| score < b.score) {
            best = Some(JointPump {
                delta_p0: deltas[i],
                families: fams,
                score,
            });
        }
    }
    match best {
        None => Err(Error::NoFeasiblePoint(
            "every detuning has a family with only MI cells".into(),
        )),
        Some(b) if b.score >= -eps_ne => Err(Error::NoFeasiblePoint(format!(
            "best shared detuning is not entangling (C_min = {:.3e})",
            b.score
        ))),
        Some(b) => Ok(b),
    }
}

/// Shared pump detuning and per-family amplitudes that make the least
/// entangled mode pair as entangled as possible, staying `margin` cells away
/// from MI.
#[allow(clippy::too_many_arguments)]
pub fn best_joint_pump(
    resonator: &ResonatorSpec,
    families: &[FamilyLabel],
    ls: &[u32],
    deltas: &[f64],
    amplitudes: &[f64],
    opts: &ClassifyOptions,
    margin: usize,
    workers: usize,
) -> Result<JointPump> {
    if families.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one family is required".into(),
        ));
    }
    if ls.is_empty() {
        return Err(Error::InvalidArgument("at least one L is required".into()));
    }
    let mut grids = BTreeMap::new();
    for &f in families {
        grids.insert(
            f,
            sweep(resonator, f, ls, deltas, amplitudes, opts, workers)?,
        );
    }
    best_joint_pump_from_grids(&grids, opts.eps_ne, margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_resonator;
    use crate::steady::fold_points;

    fn opts() -> ClassifyOptions {
        ClassifyOptions::default()
    }

    #[test]
    fn undriven_point_is_ne() {
        let r = default_resonator();
        let op = OperatingPoint::new(*r.family(FamilyLabel::TE00).unwrap(), 1, 0.3e9, 0.0).unwrap();
        let p = classify_point(&op, &r, &opts());
        assert_eq!(p.phase, Phase::NE);
        assert!(p.c_min.abs() < 1e-9);
        assert!(p.is_consistent(1e-3));
    }

    #[test]
    fn bistable_window_is_mi() {
        let dtp = 4.0;
        let [(_, q1), (_, q2)] = fold_points(dtp).unwrap();
        let f = (0.5 * (q1 + q2)).sqrt();
        let p = classify_normalized(&NormalizedDrive::raw(f, dtp, dtp), 0.55, &opts());
        assert_eq!(p.phase, Phase::MI);
        assert!(p.n_branches >= 3);
    }

    #[test]
    fn weak_resonant_drive_is_et() {
        let p = classify_normalized(&NormalizedDrive::raw(0.6, 0.2, 0.2), 0.55, &opts());
        assert_eq!(p.phase, Phase::ET);
        assert!(p.c_min < -1e-3);
        assert!(p.is_consistent(1e-3));
    }

    #[test]
    fn depends_only_on_normalized_drive() {
        let d = NormalizedDrive::raw(0.9, 1.1, 1.09);
        let a = format!("{:?}", classify_normalized(&d, 0.55, &opts()));
        assert_eq!(a, format!("{:?}", classify_normalized(&d, 0.55, &opts())));
    }

    #[test]
    fn one_cell_sweep_matches_point() {
        let r = default_resonator();
        let g = sweep(&r, FamilyLabel::TE00, &[2], &[0.2e9], &[0.8e9], &opts(), 1).unwrap();
        let op =
            OperatingPoint::new(*r.family(FamilyLabel::TE00).unwrap(), 2, 0.2e9, 0.8e9).unwrap();
        assert_eq!(
            format!("{:?}", g[0].points),
            format!("{:?}", vec![classify_point(&op, &r, &opts())])
        );
    }

    #[test]
    fn sweep_rejects_bad_axes() {
        let r = default_resonator();
        assert!(sweep(&r, FamilyLabel::TE00, &[1], &[], &[1.0], &opts(), 1).is_err());
        assert!(sweep(&r, FamilyLabel::TE00, &[1], &[1.0, 0.0], &[1.0], &opts(), 1).is_err());
        assert!(sweep(&r, FamilyLabel::TE00, &[0], &[1.0], &[1.0], &opts(), 1).is_err());
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let r = default_resonator();
        let d = linspace(-0.3e9, 1.2e9, 9);
        let a = linspace(0.0, 3e9, 7);
        let g1 = sweep(&r, FamilyLabel::TE00, &[1, 3], &d, &a, &opts(), 1).unwrap();
        let g4 = sweep(&r, FamilyLabel::TE00, &[1, 3], &d, &a, &opts(), 4).unwrap();
        assert_eq!(format!("{g1:?}"), format!("{g4:?}"));
    }

    #[test]
    fn single_family_single_l_is_argmin() {
        let r = default_resonator();
        let d = linspace(-0.3e9, 1.2e9, 7);
        let a = linspace(0.0, 3e9, 9);
        let grids = sweep(&r, FamilyLabel::TE00, &[1], &d, &a, &opts(), 2).unwrap();
        let best = best_joint_pump_from_grids(
            &BTreeMap::from([(FamilyLabel::TE00, grids.clone())]),
            1e-3,
            0,
        )
        .unwrap();
        let min = grids[0]
            .points
            .iter()
            .filter(|p| p.phase != Phase::MI)
            .map(|p| p.c_min)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best.score, min);
        assert_eq!(best.families.len(), 1);
    }

    #[test]
    fn all_ne_is_infeasible() {
        let r = default_resonator();
        let e = best_joint_pump(
            &r,
            &[FamilyLabel::TE00],
            &[1],
            &[0.1e9],
            &[0.0],
            &opts(),
            0,
            1,
        );
        assert!(matches!(e, Err(Error::NoFeasiblePoint(_))));
    }
}
