//! Quadrature covariances and the Duan inseparability witness.
//!
//! For rotation angles `θ₊, θ₋`
//!
//! ```text
//! X₋ʳᵒᵗ = cos θ₋ X₋ − sin θ₋ Y₋,   Y₊ʳᵒᵗ = cos θ₊ Y₊ + sin θ₊ X₊
//! C(θ₊, θ₋) = Δ²X₋ʳᵒᵗ + Δ²Y₊ʳᵒᵗ − |cos(θ₊ − θ₋)|
//! ```
//!
//! with `X± = (X₁ ± X₂)/√2`, `Y± = (Y₁ ± Y₂)/√2`. Separable states have
//! `C ≥ 0` for all angles.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::Vector4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluct::NoiseSpectrum;
use crate::linalg::{quadrature_map, RMat4};

/// Largest tolerated anti-Hermitian part of the symmetrized spectrum.
pub const SYMMETRY_TOL: f64 = 1e-6;
/// Coarse grid size of [`minimize_duan`].
pub const COARSE_GRID: usize = 64;
/// Step at which the local refinement stops (rad).
pub const REFINE_STEP_TOL: f64 = 1e-6;
/// `c_min` below `-ENTANGLED_TOL` counts as entangled.
pub const ENTANGLED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuanResult {
    pub c_min: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub entangled: bool,
}

/// Real covariance over `(X₁, Y₁, X₂, Y₂)` from the symmetrized spectrum
/// `½(S(ω) + S(−ω)ᵀ)`. The quadrature form must be Hermitian.
pub fn quadrature_covariance(spec: &NoiseSpectrum) -> Result<RMat4> {
    let h = (spec.s + spec.s_neg.transpose()) * Complex64::from(0.5);
    let u = quadrature_map();
    let q = u * h * u.transpose();
    let residual = (q - q.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if !(residual <= SYMMETRY_TOL) {
        return Err(Error::NotSymmetric { residual });
    }
    let sigma = q.map(|z| z.re);
    Ok((sigma + sigma.transpose()) * 0.5)
}

/// The four collective quadrature directions in `(X₁, Y₁, X₂, Y₂)`.
fn collective() -> [Vector4<f64>; 4] {
    let s = FRAC_1_SQRT_2;
    [
        Vector4::new(s, 0.0, -s, 0.0), // X₋
        Vector4::new(0.0, s, 0.0, -s), // Y₋
        Vector4::new(s, 0.0, s, 0.0),  // X₊
        Vector4::new(0.0, s, 0.0, s),  // Y₊
    ]
}

/// `C` reduced to two 2×2 quadratic forms, cheap to evaluate repeatedly.
#[derive(Debug, Clone, Copy)]
struct Reduced {
    xm: f64,
    ym: f64,
    xym: f64,
    xp: f64,
    yp: f64,
    xyp: f64,
}

impl Reduced {
    fn new(sigma: &RMat4) -> Self {
        let [xm, ym, xp, yp] = collective();
        let q = |a: &Vector4<f64>, b: &Vector4<f64>| (a.transpose() * sigma * b)[(0, 0)];
        Self {
            xm: q(&xm, &xm),
            ym: q(&ym, &ym),
            xym: q(&xm, &ym),
            xp: q(&xp, &xp),
            yp: q(&yp, &yp),
            xyp: q(&xp, &yp),
        }
    }

    fn eval(&self, tp: f64, tm: f64) -> f64 {
        let (sm, cm) = tm.sin_cos();
        let (sp, cp) = tp.sin_cos();
        let var_minus = cm * cm * self.xm - 2.0 * cm * sm * self.xym + sm * sm * self.ym;
        let var_plus = cp * cp * self.yp + 2.0 * cp * sp * self.xyp + sp * sp * self.xp;
        var_minus + var_plus - (tp - tm).cos().abs()
    }
}

pub fn duan_value(sigma: &RMat4, theta_plus: f64, theta_minus: f64) -> f64 {
    Reduced::new(sigma).eval(theta_plus, theta_minus)
}

fn wrap(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Minimizes `C` over both angles: a coarse grid, then compass search from
/// the best few grid points.
pub fn minimize_duan(sigma: &RMat4) -> DuanResult {
    let r = Reduced::new(sigma);
    let n = COARSE_GRID;
    let h = TAU / n as f64;
    let mut cells: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            cells.push((r.eval(i as f64 * h, j as f64 * h), i, j));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    const DIRS: [(f64, f64); 8] = [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (1.0, 1.0),
        (-1.0, -1.0),
        (1.0, -1.0),
        (-1.0, 1.0),
    ];
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for &(c0, i, j) in cells.iter().take(4) {
        let (mut c, mut tp, mut tm) = (c0, i as f64 * h, j as f64 * h);
        let mut step = h;
        while step >= REFINE_STEP_TOL {
            let mut moved = false;
            for (dp, dm) in DIRS {
                let (np, nm) = (tp + dp * step, tm + dm * step);
                let v = r.eval(np, nm);
                if v < c {
                    c = v;
                    tp = np;
                    tm = nm;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if c < best.0 {
            best = (c, tp, tm);
        }
    }
    let (c_min, tp, tm) = best;
    DuanResult {
        c_min,
        theta_plus: wrap(tp),
        theta_minus: wrap(tm),
        entangled: c_min < -ENTANGLED_TOL,
    }
}

/// Builds a covariance from four rows, checking symmetry.
pub fn covariance_from_rows(rows: &[[f64; 4]; 4]) -> Result<RMat4> {
    let m = RMat4::from_fn(|i, j| rows[i][j]);
    let residual = (m - m.transpose()).abs().max();
    if residual > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { residual });
    }
    Ok((m + m.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluct::{build_m, noise_spectrum};
    use crate::steady::{pump_only_branches, Branch, SteadyState};
    use proptest::prelude::*;

    fn vacuum() -> RMat4 {
        RMat4::identity() * 0.5
    }

    /// Two-mode squeezed vacuum with squeezing `r`.
    fn tmsv(r: f64) -> RMat4 {
        let (c, s) = ((2.0 * r).cosh() * 0.5, (2.0 * r).sinh() * 0.5);
        RMat4::new(
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        )
    }

    #[test]
    fn vacuum_values() {
        assert!(duan_value(&vacuum(), 0.0, 0.0).abs() < 1e-15);
        assert!((duan_value(&vacuum(), std::f64::consts::FRAC_PI_2, 0.0) - 1.0).abs() < 1e-15);
        let r = minimize_duan(&vacuum());
        assert!(r.c_min.abs() < 1e-9);
        assert!(!r.entangled);
    }

    #[test]
    fn diagonal_states() {
        for v in [0.5, 0.7, 1.3, 4.0] {
            let r = minimize_duan(&(RMat4::identity() * v));
            assert!((r.c_min - (2.0 * v - 1.0)).abs() < 1e-9, "{v}: {}", r.c_min);
        }
    }

    #[test]
    fn squeezed_pair_closed_form() {
        // C_min = e^{-2r} - 1 for two-mode squeezed vacuum
        for r in [0.1, 0.5, 1.0] {
            let d = minimize_duan(&tmsv(r));
            assert!(
                (d.c_min - ((-2.0 * r).exp() - 1.0)).abs() < 1e-9,
                "{r}: {}",
                d.c_min
            );
            assert!(d.entangled);
            assert!((0.0..TAU).contains(&d.theta_plus) && (0.0..TAU).contains(&d.theta_minus));
        }
    }

    #[test]
    fn vacuum_spectrum_covariance_is_half_identity() {
        let s = SteadyState {
            ap2: 0.0,
            a2: 0.0,
            phi: 0.0,
            psi: 0.0,
            branch: Branch::PumpOnly,
            stable: true,
            phi_defined: false,
        };
        let sys = build_m(&s, 0.3, 0.55);
        for w in [0.0, 0.4, -2.0] {
            let sigma = quadrature_covariance(&noise_spectrum(&sys, w).unwrap()).unwrap();
            assert!((sigma - vacuum()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn driven_output_is_entangled_and_physical() {
        let s = pump_only_branches(0.8, 0.5)[0];
        let sys = build_m(&s, 0.5, 0.55);
        let sigma = quadrature_covariance(&noise_spectrum(&sys, 0.0).unwrap()).unwrap();
        let eig = sigma.symmetric_eigenvalues();
        assert!(eig.min() > -1e-9);
        assert!((sigma[(0, 0)] - sigma[(2, 2)]).abs() < 1e-12);
        assert!(sigma[(0, 2)] * sigma[(1, 3)] < 0.0);
        assert!(minimize_duan(&sigma).entangled);
    }

    #[test]
    fn malformed_spectrum_rejected() {
        let s = SteadyState {
            ap2: 0.0,
            a2: 0.0,
            phi: 0.0,
            psi: 0.0,
            branch: Branch::PumpOnly,
            stable: true,
            phi_defined: false,
        };
        let mut n = noise_spectrum(&build_m(&s, 0.3, 0.55), 0.0).unwrap();
        n.s[(0, 1)] += Complex64::new(0.0, 1e-3);
        assert!(matches!(
            quadrature_covariance(&n),
            Err(Error::NotSymmetric { .. })
        ));
    }

    fn physical_sigma() -> impl Strategy<Value = RMat4> {
        (proptest::collection::vec(-1.0f64..1.0, 16), 0.0f64..1.2).prop_map(|(v, r)| {
            // symplectic-ish mix of a squeezed pair and random added noise keeps σ physical
            let a = RMat4::from_iterator(v);
            tmsv(r) + a * a.transpose() * 0.2
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn optimizer_dominates_random_angles(sigma in physical_sigma(), angles in proptest::collection::vec((0.0f64..TAU, 0.0f64..TAU), 50)) {
            let m = minimize_duan(&sigma);
            for (tp, tm) in angles {
                prop_assert!(m.c_min <= duan_value(&sigma, tp, tm) + 1e-12);
            }
        }

        #[test]
        fn periodic_and_half_turn_invariant(sigma in physical_sigma(), tp in 0.0f64..TAU, tm in 0.0f64..TAU) {
            let c = duan_value(&sigma, tp, tm);
            prop_assert!((c - duan_value(&sigma, tp + TAU, tm)).abs() < 1e-12);
            prop_assert!((c - duan_value(&sigma, tp, tm - TAU)).abs() < 1e-12);
            prop_assert!((c - duan_value(&sigma, tp + std::f64::consts::PI, tm + std::f64::consts::PI)).abs() < 1e-12);
        }

        #[test]
        fn subsystem_exchange_invariant(sigma in physical_sigma()) {
            let p = RMat4::new(
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0,
            );
            let a = minimize_duan(&sigma).c_min;
            let b = minimize_duan(&(p * sigma * p)).c_min;
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn added_noise_never_helps(sigma in physical_sigma(), eps in 0.0f64..0.5) {
            let a = minimize_duan(&sigma).c_min;
            let b = minimize_duan(&(sigma + RMat4::identity() * eps)).c_min;
            prop_assert!(b >= a - 1e-9);
        }
    }
}
