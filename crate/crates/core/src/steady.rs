//! Steady states of the normalized pump / signal / idler mean-field system.
//!
//! In units where time is `1/Γ` and photon numbers are scaled by `Γ/η`, the
//! classical fields obey
//!
//! ```text
//! α̇_p = i[(|α_p|² + 2|α₋|² + 2|α₊|²)α_p + 2ᾱ_p α₋α₊] − α_p − iΔ̃_p α_p + F
//! α̇₋ = i[(2|α_p|² + |α₋|² + 2|α₊|²)α₋ + α_p² ᾱ₊] − α₋ − iΔ̃_L α₋
//! ```
//!
//! (and `α₊` by symmetry). With `x = A_p²`, `y = A²`, `φ = θ₋ + θ₊ − 2θ_p`
//! and `ψ = θ_in − θ_p` the fixed points satisfy
//!
//! ```text
//! x² = 1 + (Δ̃_L − 2x − 3y)²
//! F² = x[(1 + 2y/x)² + (Δ̃_p − x − (2y/x)(Δ̃_L − 3y))²]
//! sin φ = 1/x,  cos φ = (Δ̃_L − 3y − 2x)/x
//! F sin ψ = √x (Δ̃_p − x − (2y/x)(Δ̃_L − 3y)),  F cos ψ = √x (1 + 2y/x)
//! ```
//!
//! The first equation is solved identically by `x = cosh u`,
//! `y = (Δ̃_L − 2 cosh u + sinh u)/3`, which turns the parametric branch
//! into a one-dimensional root search in `u` on a bounded interval.

use nalgebra::SMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, I};
use crate::model::NormalizedDrive;

/// Damped-Newton polishing limits.
pub const NEWTON_STEP_TOL: f64 = 1e-12;
pub const NEWTON_RESIDUAL_TOL: f64 = 1e-9;
pub const NEWTON_MAX_ITER: usize = 100;

/// Samples of the branch parameter `u` used to bracket parametric roots.
const BRANCH_SAMPLES: usize = 2048;
/// Solutions with `A²` below this are treated as the pump-only branch.
const MIN_PAIR_POWER: f64 = 1e-13;

/// Default upper drive for [`threshold`].
pub const DEFAULT_F_MAX: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    PumpOnly,
    Parametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    /// Intracavity pump `A_p²` (normalized).
    pub ap2: f64,
    /// Signal = idler `A²` (normalized).
    pub a2: f64,
    /// `θ₋ + θ₊ − 2θ_p`. Zero and `phi_defined = false` on the pump-only branch.
    pub phi: f64,
    /// `θ_in − θ_p`.
    pub psi: f64,
    pub branch: Branch,
    pub stable: bool,
    pub phi_defined: bool,
}

impl SteadyState {
    /// Residuals of the two amplitude equations (first is `0` on the pump-only branch).
    pub fn residuals(&self, drive: &NormalizedDrive) -> [f64; 2] {
        let (x, y) = (self.ap2, self.a2);
        match self.branch {
            Branch::PumpOnly => {
                let q = x * (1.0 + (drive.dtp - x).powi(2));
                [0.0, q - drive.f_norm * drive.f_norm]
            }
            Branch::Parametric => parametric_residual(x, y, drive),
        }
    }
}

/// `x(1 + (Δ − x)²)`, the drive `F²` needed for pump power `x` with no pairs.
pub fn kerr_drive_sq(x: f64, dtp: f64) -> f64 {
    x * (1.0 + (dtp - x) * (dtp - x))
}

/// Turning points `(x, F²)` of the Kerr response, lower-power fold first.
/// `None` when `Δ̃_p ≤ √3` (no bistability).
pub fn fold_points(dtp: f64) -> Option<[(f64, f64); 2]> {
    if dtp < 3f64.sqrt() {
        return None;
    }
    let r = (dtp * dtp - 3.0).max(0.0).sqrt();
    let x_hi_fold = (2.0 * dtp - r) / 3.0; // local max of F²(x)
    let x_lo_fold = (2.0 * dtp + r) / 3.0; // local min of F²(x)
    Some([
        (x_hi_fold, kerr_drive_sq(x_hi_fold, dtp)),
        (x_lo_fold, kerr_drive_sq(x_lo_fold, dtp)),
    ])
}

/// Root of `kerr_drive_sq(x) = target` on `[lo, hi]` where it is monotone.
fn monotone_root(lo: f64, hi: f64, target: f64, dtp: f64) -> f64 {
    let g = |x: f64| kerr_drive_sq(x, dtp) - target;
    let dg = |x: f64| 1.0 + (dtp - x) * (dtp - x) - 2.0 * x * (dtp - x);
    let (mut a, mut b) = (lo, hi);
    let ga = g(a);
    if ga == 0.0 {
        return a;
    }
    let a_negative = ga < 0.0;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if (gx < 0.0) == a_negative {
            a = x;
        } else {
            b = x;
        }
        let d = dg(x);
        let newton = x - gx / d;
        let next = if d != 0.0 && newton > a.min(b) && newton < a.max(b) {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(1e-300)
            || (b - a).abs() <= 2.0 * f64::EPSILON * x.abs()
        {
            return next;
        }
        x = next;
    }
    x
}

fn pump_only_state(x: f64, dtp: f64, f_norm: f64, stable: bool) -> SteadyState {
    let psi = if f_norm > 0.0 && x > 0.0 {
        (dtp - x).atan2(1.0)
    } else {
        0.0
    };
    SteadyState {
        ap2: x,
        a2: 0.0,
        phi: 0.0,
        psi,
        branch: Branch::PumpOnly,
        stable,
        phi_defined: false,
    }
}

/// All nonnegative roots of `F² = x(1 + (Δ̃_p − x)²)`, ascending in `x`.
/// The middle root of a bistable triple (negative slope) is unstable.
pub fn pump_only_branches(f_norm: f64, dtp: f64) -> Vec<SteadyState> {
    let target = f_norm * f_norm;
    if target == 0.0 {
        return vec![pump_only_state(0.0, dtp, f_norm, true)];
    }
    let upper_bracket = |from: f64| {
        let mut hi = from.max(1.0);
        while kerr_drive_sq(hi, dtp) < target {
            hi *= 2.0;
        }
        hi
    };
    match fold_points(dtp) {
        None => {
            let x = monotone_root(0.0, upper_bracket(dtp.max(0.0)), target, dtp);
            vec![pump_only_state(x, dtp, f_norm, true)]
        }
        Some([(x1, q1), (x2, q2)]) => {
            let mut out = Vec::with_capacity(3);
            if target <= q1 {
                let x = if target == q1 {
                    x1
                } else {
                    monotone_root(0.0, x1, target, dtp)
                };
                out.push(pump_only_state(x, dtp, f_norm, target < q1));
            }
            if target > q2 && target < q1 {
                out.push(pump_only_state(
                    monotone_root(x1, x2, target, dtp),
                    dtp,
                    f_norm,
                    false,
                ));
            }
            if target >= q2 {
                let x = if target == q2 {
                    x2
                } else {
                    monotone_root(x2, upper_bracket(x2), target, dtp)
                };
                out.push(pump_only_state(x, dtp, f_norm, target > q2));
            }
            out
        }
    }
}

/// `(x, y)` on the curve that solves the first amplitude equation.
fn branch_point(u: f64, dtl: f64) -> (f64, f64) {
    (u.cosh(), (dtl - 2.0 * u.cosh() + u.sinh()) / 3.0)
}

fn drive_sq_on_branch(x: f64, y: f64, dtp: f64, dtl: f64) -> f64 {
    let a = 1.0 + 2.0 * y / x;
    let b = dtp - x - 2.0 * y / x * (dtl - 3.0 * y);
    x * (a * a + b * b)
}

/// Interval of `u` where `A² > 0`. Empty unless `Δ̃_L > √3`.
fn branch_domain(dtl: f64) -> Option<(f64, f64)> {
    let disc = dtl * dtl - 3.0;
    if dtl <= 0.0 || disc <= 0.0 {
        return None;
    }
    let r = disc.sqrt();
    let e_hi = dtl + r;
    let e_lo = 3.0 / e_hi; // dtl − r without cancellation
    Some((e_lo.ln(), e_hi.ln()))
}

fn parametric_residual(x: f64, y: f64, drive: &NormalizedDrive) -> [f64; 2] {
    let s = drive.dtl - 2.0 * x - 3.0 * y;
    [
        x * x - 1.0 - s * s,
        drive_sq_on_branch(x, y, drive.dtp, drive.dtl) - drive.f_norm * drive.f_norm,
    ]
}

fn parametric_jacobian(x: f64, y: f64, drive: &NormalizedDrive) -> [[f64; 2]; 2] {
    let (dtp, dtl) = (drive.dtp, drive.dtl);
    let s = dtl - 2.0 * x - 3.0 * y;
    let a = 1.0 + 2.0 * y / x;
    let b = dtp - x - 2.0 * y / x * (dtl - 3.0 * y);
    let (a_x, a_y) = (-2.0 * y / (x * x), 2.0 / x);
    let b_x = -1.0 + 2.0 * y / (x * x) * (dtl - 3.0 * y);
    let b_y = (12.0 * y - 2.0 * dtl) / x;
    [
        [2.0 * x + 4.0 * s, 6.0 * s],
        [
            a * a + b * b + 2.0 * x * (a * a_x + b * b_x),
            2.0 * x * (a * a_y + b * b_y),
        ],
    ]
}

/// Damped Newton on the two amplitude equations.
fn polish(mut x: f64, mut y: f64, drive: &NormalizedDrive) -> Result<(f64, f64)> {
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut r = parametric_residual(x, y, drive);
    for _ in 0..NEWTON_MAX_ITER {
        let j = parametric_jacobian(x, y, drive);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dy = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let (nx, ny) = (x - lambda * dx, y - lambda * dy);
            let nr = parametric_residual(nx, ny, drive);
            if nx > 0.0 && norm(nr) < norm(r) {
                x = nx;
                y = ny;
                r = nr;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        let step = (lambda * dx).abs().max((lambda * dy).abs());
        if !accepted || step < NEWTON_STEP_TOL * x.max(1.0) {
            break;
        }
    }
    // the residual of F² scales with F², so compare relative to the drive
    let scale = 1.0_f64.max(drive.f_norm * drive.f_norm).max(x * x);
    if norm(r) <= NEWTON_RESIDUAL_TOL * scale {
        Ok((x, y))
    } else {
        Err(Error::NoConvergence {
            iterations: NEWTON_MAX_ITER,
            residual: norm(r),
        })
    }
}

fn bisect<F: Fn(f64) -> f64>(g: F, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section minimum of `g` on `[a, b]`.
fn golden_min<F: Fn(f64) -> f64>(g: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    if gc < gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// Roots `u` of `F²(u) − F²` on the branch domain.
fn branch_roots(drive: &NormalizedDrive) -> Vec<f64> {
    let Some((ua, ub)) = branch_domain(drive.dtl) else {
        return Vec::new();
    };
    let target = drive.f_norm * drive.f_norm;
    let g = |u: f64| {
        let (x, y) = branch_point(u, drive.dtl);
        drive_sq_on_branch(x, y, drive.dtp, drive.dtl) - target
    };
    let n = BRANCH_SAMPLES;
    let us: Vec<f64> = (0..=n)
        .map(|i| ua + (ub - ua) * i as f64 / n as f64)
        .collect();
    let gs: Vec<f64> = us.iter().map(|&u| g(u)).collect();
    let mut roots = Vec::new();
    for i in 0..n {
        let (g0, g1) = (gs[i], gs[i + 1]);
        if g0 == 0.0 {
            roots.push(us[i]);
        } else if g0.signum() != g1.signum() && g1 != 0.0 {
            roots.push(bisect(g, us[i], us[i + 1]));
        }
    }
    // extrema between samples can hide a pair of close roots
    for i in 1..n {
        let (gm, g0, gp) = (gs[i - 1], gs[i], gs[i + 1]);
        let local_min = g0 > 0.0 && g0 <= gm && g0 <= gp;
        let local_max = g0 < 0.0 && g0 >= gm && g0 >= gp;
        if !(local_min || local_max) {
            continue;
        }
        let sign = if local_min { 1.0 } else { -1.0 };
        let (u_ext, g_ext) = golden_min(|u| sign * g(u), us[i - 1], us[i + 1]);
        if g_ext < 0.0 {
            roots.push(bisect(g, us[i - 1], u_ext));
            roots.push(bisect(g, u_ext, us[i + 1]));
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    roots
}

/// Nontrivial `A² > 0` steady states at the given drive.
pub fn parametric_branch(drive: &NormalizedDrive) -> Result<Vec<SteadyState>> {
    if !(drive.f_norm > 0.0) {
        return Ok(Vec::new());
    }
    let mut out: Vec<SteadyState> = Vec::new();
    for u in branch_roots(drive) {
        let (x0, y0) = branch_point(u, drive.dtl);
        if y0 <= MIN_PAIR_POWER {
            continue;
        }
        let (x, y) = polish(x0, y0, drive)?;
        if y <= MIN_PAIR_POWER {
            continue;
        }
        if out
            .iter()
            .any(|s| (s.ap2 - x).abs() < 1e-9 && (s.a2 - y).abs() < 1e-9)
        {
            continue;
        }
        let phi = 1f64.atan2(drive.dtl - 3.0 * y - 2.0 * x);
        let a = 1.0 + 2.0 * y / x;
        let b = drive.dtp - x - 2.0 * y / x * (drive.dtl - 3.0 * y);
        let mut state = SteadyState {
            ap2: x,
            a2: y,
            phi,
            psi: b.atan2(a),
            branch: Branch::Parametric,
            stable: false,
            phi_defined: true,
        };
        state.stable = parametric_is_stable(&state, drive);
        out.push(state);
    }
    out.sort_by(|a, b| a.ap2.total_cmp(&b.ap2));
    Ok(out)
}

/// Complex mean fields `(α_p, α₋, α₊)` with the input phase as reference and
/// the pair phase split evenly between signal and idler.
pub fn mean_fields(state: &SteadyState) -> [Complex64; 3] {
    let theta_p = -state.psi;
    let theta_pair = 0.5 * (state.phi + 2.0 * theta_p);
    let ap = Complex64::from_polar(state.ap2.sqrt(), theta_p);
    let a = Complex64::from_polar(state.a2.sqrt(), theta_pair);
    [ap, a, a]
}

/// Real 6×6 Jacobian of the mean-field flow on `(Re, Im)` of `(α_p, α₋, α₊)`.
pub fn mean_field_jacobian(state: &SteadyState, drive: &NormalizedDrive) -> SMatrix<f64, 6, 6> {
    let [p, m, q] = mean_fields(state);
    let (np, nm, nq) = (p.norm_sqr(), m.norm_sqr(), q.norm_sqr());
    let one = Complex64::new(1.0, 0.0);
    // rows: field; columns: (∂/∂z, ∂/∂z̄) for p, m, q
    let rows = [
        [
            (
                I * (2.0 * np + 2.0 * nm + 2.0 * nq) - one - I * drive.dtp,
                I * (p * p + 2.0 * m * q),
            ),
            (I * 2.0 * (m.conj() * p + p.conj() * q), I * 2.0 * m * p),
            (I * 2.0 * (q.conj() * p + p.conj() * m), I * 2.0 * q * p),
        ],
        [
            (I * 2.0 * (p.conj() * m + p * q.conj()), I * 2.0 * p * m),
            (
                I * (2.0 * np + 2.0 * nm + 2.0 * nq) - one - I * drive.dtl,
                I * m * m,
            ),
            (I * 2.0 * q.conj() * m, I * (2.0 * q * m + p * p)),
        ],
        [
            (I * 2.0 * (p.conj() * q + p * m.conj()), I * 2.0 * p * q),
            (I * 2.0 * m.conj() * q, I * (2.0 * m * q + p * p)),
            (
                I * (2.0 * np + 2.0 * nm + 2.0 * nq) - one - I * drive.dtl,
                I * q * q,
            ),
        ],
    ];
    let mut j = SMatrix::<f64, 6, 6>::zeros();
    for (r, row) in rows.iter().enumerate() {
        for (c, &(dz, dzbar)) in row.iter().enumerate() {
            let b = linalg::wirtinger_block(dz, dzbar);
            for (i, bi) in b.iter().enumerate() {
                for (k, v) in bi.iter().enumerate() {
                    j[(2 * r + i, 2 * c + k)] = *v;
                }
            }
        }
    }
    j
}

/// Stable when every mode decays except the neutral signal/idler phase
/// difference mode that any parametric state carries.
fn parametric_is_stable(state: &SteadyState, drive: &NormalizedDrive) -> bool {
    let j = mean_field_jacobian(state, drive);
    let eig = j.complex_eigenvalues();
    let mut neutral = 0;
    for z in eig.iter() {
        if z.norm() < 1e-7 {
            neutral += 1;
        } else if z.re >= 0.0 {
            return false;
        }
    }
    neutral <= 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub f_threshold: f64,
    pub exists: bool,
}

fn has_parametric(f: f64, dtp: f64, dtl: f64) -> bool {
    parametric_branch(&NormalizedDrive::raw(f, dtp, dtl))
        .map(|v| !v.is_empty())
        .unwrap_or(false)
}

/// Smallest drive that admits a parametric steady state, searched up to `f_max`.
pub fn threshold(dtp: f64, dtl: f64, f_max: f64) -> ThresholdReport {
    let none = ThresholdReport {
        f_threshold: f64::NAN,
        exists: false,
    };
    let Some((ua, ub)) = branch_domain(dtl) else {
        return none;
    };
    // estimate from the minimum of F²(u), then bisect on existence
    let g = |u: f64| {
        let (x, y) = branch_point(u, dtl);
        drive_sq_on_branch(x, y, dtp, dtl)
    };
    let n = BRANCH_SAMPLES;
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for i in 0..=n {
        let v = g(ua + (ub - ua) * i as f64 / n as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let h = (ub - ua) / n as f64;
    let lo_u = (ua + h * (best_i as f64 - 1.0)).max(ua);
    let hi_u = (ua + h * (best_i as f64 + 1.0)).min(ub);
    let (_, refined) = golden_min(g, lo_u, hi_u);
    let estimate = best.min(refined).sqrt();
    if !(estimate <= f_max) {
        return none;
    }
    let mut hi = (estimate * (1.0 + 1e-6)).min(f_max);
    let mut grow = 0;
    while !has_parametric(hi, dtp, dtl) {
        if hi >= f_max || grow > 60 {
            return none;
        }
        hi = (hi * (1.0 + 1e-4 * 2f64.powi(grow))).min(f_max);
        grow += 1;
    }
    let mut lo = estimate * (1.0 - 1e-3);
    while lo > 0.0 && has_parametric(lo, dtp, dtl) {
        lo *= 0.5;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if has_parametric(mid, dtp, dtl) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ThresholdReport {
        f_threshold: hi,
        exists: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_drive_single_root() {
        for dtp in [-3.0, 0.0, 1.0, 5.0] {
            let r = pump_only_branches(0.0, dtp);
            assert_eq!(r.len(), 1);
            assert_eq!(r[0].ap2, 0.0);
            assert!(r[0].stable);
        }
    }

    #[test]
    fn bistability_onset() {
        let s3 = 3f64.sqrt();
        let [(x1, q1), (x2, q2)] = fold_points(s3).unwrap();
        assert_relative_eq!(x1, 2.0 * s3 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(x2, 2.0 * s3 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(q1, 8.0 * s3 / 9.0, max_relative = 1e-12);
        assert_relative_eq!(q2, 8.0 * s3 / 9.0, max_relative = 1e-12);
        assert!(fold_points(s3 - 1e-9).is_none());
    }

    #[test]
    fn root_count_by_dense_scan() {
        let s3 = 3f64.sqrt();
        for i in 0..120 {
            let dtp = -2.0 + 8.0 * i as f64 / 119.0;
            for k in 1..300 {
                let f = 6.0 * k as f64 / 300.0;
                let n = pump_only_branches(f, dtp).len();
                if dtp <= s3 {
                    assert_eq!(n, 1, "dtp={dtp} f={f}");
                }
                assert!((1..=3).contains(&n));
            }
        }
        // inside the window there are three roots, middle one unstable
        let [(_, q1), (_, q2)] = fold_points(4.0).unwrap();
        let f = (0.5 * (q1 + q2)).sqrt();
        let r = pump_only_branches(f, 4.0);
        assert_eq!(r.len(), 3);
        assert_eq!(
            r.iter().map(|s| s.stable).collect::<Vec<_>>(),
            vec![true, false, true]
        );
    }

    #[test]
    fn pump_only_residual_and_phase() {
        for &(f, dtp) in &[(0.3, -1.0), (1.5, 0.5), (2.5, 4.0), (7.0, 2.0), (0.01, 9.0)] {
            let drive = NormalizedDrive::raw(f, dtp, dtp);
            let roots = pump_only_branches(f, dtp);
            for w in roots.windows(2) {
                assert!(w[0].ap2 < w[1].ap2);
            }
            for s in roots {
                let q = kerr_drive_sq(s.ap2, dtp);
                assert!(
                    (q - f * f).abs() <= 1e-10 * (f * f).max(1.0),
                    "{q} vs {}",
                    f * f
                );
                assert_eq!(s.residuals(&drive)[0], 0.0);
                // F cos ψ = A_p, F sin ψ = A_p (Δ − x)
                let ap = s.ap2.sqrt();
                assert!((f * s.psi.cos() - ap).abs() < 1e-9);
                assert!((f * s.psi.sin() - ap * (dtp - s.ap2)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn parametric_empty_below_threshold_and_detuning() {
        assert!(parametric_branch(&NormalizedDrive::raw(0.5, 3.0, 3.0))
            .unwrap()
            .is_empty());
        assert!(parametric_branch(&NormalizedDrive::raw(5.0, 1.0, 1.0))
            .unwrap()
            .is_empty());
        assert!(parametric_branch(&NormalizedDrive::raw(0.0, 3.0, 3.0))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn parametric_solutions_satisfy_system() {
        let mut found = 0;
        for &(dtp, dtl) in &[(3.0, 2.9), (4.0, 3.95), (2.5, 2.0), (6.0, 5.5), (2.0, 3.0)] {
            for k in 1..40 {
                let f = 0.25 * k as f64;
                let drive = NormalizedDrive::raw(f, dtp, dtl);
                for s in parametric_branch(&drive).unwrap() {
                    found += 1;
                    assert!(s.ap2 >= 1.0 - 1e-12, "clamped pump violated: {}", s.ap2);
                    let [r1, r2] = s.residuals(&drive);
                    assert!(
                        r1.abs() < 1e-9 && r2.abs() < 1e-9 * f.max(1.0).powi(2),
                        "{r1} {r2}"
                    );
                    assert_relative_eq!(s.phi.sin(), 1.0 / s.ap2, max_relative = 1e-9);
                    assert!((s.phi.cos() - (dtl - 3.0 * s.a2 - 2.0 * s.ap2) / s.ap2).abs() < 1e-9);
                    let (x, y) = (s.ap2, s.a2);
                    let ap = x.sqrt();
                    let sin_psi = ap / f * (dtp - x - 2.0 * y / x * (dtl - 3.0 * y));
                    let cos_psi = ap / f * (1.0 + 2.0 * y / x);
                    assert!((s.psi.sin() - sin_psi).abs() < 1e-8);
                    assert!((s.psi.cos() - cos_psi).abs() < 1e-8);
                }
            }
        }
        assert!(found > 20, "only {found} parametric solutions exercised");
    }

    #[test]
    fn threshold_far_detuned_and_resonant() {
        assert!(!threshold(0.0, 0.0, DEFAULT_F_MAX).exists);
        assert!(!threshold(1e6, 1e6, DEFAULT_F_MAX).exists);
        assert!(!threshold(0.0, -50.0, DEFAULT_F_MAX).exists);
    }

    #[test]
    fn threshold_brackets_existence() {
        for &(dtp, dtl) in &[(2.0, 1.99), (3.0, 2.9), (5.0, 4.97), (2.5, 3.5)] {
            let t = threshold(dtp, dtl, DEFAULT_F_MAX);
            assert!(t.exists, "{dtp} {dtl}");
            assert!(t.f_threshold > 0.0);
            let below =
                parametric_branch(&NormalizedDrive::raw(0.999 * t.f_threshold, dtp, dtl)).unwrap();
            let above =
                parametric_branch(&NormalizedDrive::raw(1.001 * t.f_threshold, dtp, dtl)).unwrap();
            assert!(below.is_empty());
            assert!(!above.is_empty());
        }
    }

    #[test]
    fn mean_field_jacobian_matches_pump_only_kerr_block() {
        // with no pairs the pump block is the classic Kerr Jacobian
        let s = pump_only_branches(1.2, 0.7)[0];
        let drive = NormalizedDrive::raw(1.2, 0.7, 0.7);
        let j = mean_field_jacobian(&s, &drive);
        let eig: Vec<_> = j
            .fixed_view::<2, 2>(0, 0)
            .into_owned()
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect();
        let x = s.ap2;
        // eigenvalues of the Kerr pump block: −1 ± sqrt(x² − (Δ − 2x)²)
        let root = Complex64::new(x * x - (0.7 - 2.0 * x).powi(2), 0.0).sqrt();
        let mut want = [
            Complex64::new(-1.0, 0.0) + root,
            Complex64::new(-1.0, 0.0) - root,
        ];
        let mut got = [eig[0], eig[1]];
        want.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        got.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        for (a, b) in want.iter().zip(got.iter()) {
            assert!((a - b).norm() < 1e-12, "{a} {b}");
        }
    }

    proptest::proptest! {
        #[test]
        fn unit_circle_phases(f in 0.05f64..6.0, dtp in -3.0f64..8.0, off in 0.0f64..0.3) {
            let drive = NormalizedDrive::raw(f, dtp, dtp - off);
            let mut all = pump_only_branches(f, dtp);
            all.extend(parametric_branch(&drive).unwrap());
            for s in all {
                proptest::prop_assert!(s.ap2 >= 0.0 && s.a2 >= 0.0);
                proptest::prop_assert!((s.phi.sin().powi(2) + s.phi.cos().powi(2) - 1.0).abs() < 1e-12);
                proptest::prop_assert!((s.psi.sin().powi(2) + s.psi.cos().powi(2) - 1.0).abs() < 1e-12);
            }
        }
    }
}
