//! Linearized signal/idler fluctuations around a steady state and the output
//! noise spectrum.
//!
//! The fluctuation vector is `(δã₋, δã₋†, δã₊, δã₊†)` in the frame co-rotating
//! with the steady-state phases. The pump is classical. Inputs enter through
//! the coupler (`t_in = √(2γ/Γ)`) and intrinsic loss (`t_loss = √(2μ/Γ)`),
//! both in vacuum.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat4, RMat4, I};
use crate::steady::SteadyState;

const SWAP_DAGGER: [usize; 4] = [1, 0, 3, 2];
const SWAP_SIDE: [usize; 4] = [2, 3, 0, 1];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationSystem {
    /// Drift matrix, time in units of `1/Γ`.
    pub m: CMat4,
    /// `√(2γ/Γ)`; also the output coupling.
    pub t_in: f64,
    /// `√(2μ/Γ)`.
    pub t_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpectrum {
    pub omega: f64,
    /// `S(ω)`.
    pub s: CMat4,
    /// `S(−ω)`, kept for symmetrization.
    pub s_neg: CMat4,
}

/// Vacuum input correlations: `⟨δa(ω) δa†(−ω)⟩ = 1`, all else zero.
pub fn vacuum_correlations() -> CMat4 {
    let mut c = CMat4::zeros();
    c[(0, 1)] = Complex64::new(1.0, 0.0);
    c[(2, 3)] = Complex64::new(1.0, 0.0);
    c
}

/// Drift matrix of the signal/idler fluctuations at a steady state.
///
/// `coupling_ratio` is `γ/Γ`.
pub fn build_m(state: &SteadyState, dtl: f64, coupling_ratio: f64) -> FluctuationSystem {
    let (x, y) = (state.ap2, state.a2);
    let row0 = [
        Complex64::new(-1.0, 2.0 * x + 4.0 * y - dtl),
        I * y,
        I * 2.0 * y,
        I * (2.0 * y + x * Complex64::from_polar(1.0, -state.phi)),
    ];
    let mut m = CMat4::zeros();
    for j in 0..4 {
        m[(0, j)] = row0[j];
        m[(1, j)] = row0[SWAP_DAGGER[j]].conj();
        m[(2, j)] = row0[SWAP_SIDE[j]];
    }
    for j in 0..4 {
        m[(3, j)] = m[(2, SWAP_DAGGER[j])].conj();
    }
    let t_in = (2.0 * coupling_ratio).sqrt();
    let t_loss = (2.0 * (1.0 - coupling_ratio)).sqrt();
    FluctuationSystem { m, t_in, t_loss }
}

impl FluctuationSystem {
    /// The real drift `U M U†` acting on `(X₋, Y₋, X₊, Y₊)` quadratures.
    pub fn quadrature_drift(&self) -> RMat4 {
        linalg::to_quadrature_generator(&self.m)
    }

    pub fn max_eig_re(&self) -> f64 {
        linalg::max_real_eigenvalue(&self.quadrature_drift())
    }

    pub fn is_stable(&self) -> bool {
        self.max_eig_re() < 0.0
    }

    fn resolvent(&self, omega: f64) -> Result<CMat4> {
        let a = CMat4::identity() * Complex64::new(0.0, omega) - self.m;
        let inv = a.try_inverse().ok_or(Error::SingularResolvent { omega })?;
        if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(inv)
        } else {
            Err(Error::SingularResolvent { omega })
        }
    }

    fn output_at(&self, omega: f64) -> Result<(CMat4, CMat4)> {
        let g = self.resolvent(omega)?;
        let reflect = g * Complex64::from(self.t_in * self.t_in) - CMat4::identity();
        let loss = g * Complex64::from(self.t_in * self.t_loss);
        Ok((reflect, loss))
    }

    fn output_spectrum(&self, omega: f64) -> Result<CMat4> {
        let c = vacuum_correlations();
        let (r, l) = self.output_at(omega)?;
        let (rn, ln) = self.output_at(-omega)?;
        Ok(r * c * rn.transpose() + l * c * ln.transpose())
    }

    /// Intracavity spectrum `G(ω) (t_in² + t_loss²) C G(−ω)ᵀ` with `G = (iω − M)⁻¹`.
    pub fn intracavity_spectrum(&self, omega: f64) -> Result<CMat4> {
        let d = Complex64::from(self.t_in * self.t_in + self.t_loss * self.t_loss);
        let g = self.resolvent(omega)?;
        let gn = self.resolvent(-omega)?;
        Ok(g * vacuum_correlations() * d * gn.transpose())
    }

    /// Symmetrized equal-time intracavity covariance over `(X₋, Y₋, X₊, Y₊)`.
    pub fn intracavity_covariance(&self) -> Result<RMat4> {
        let a = self.quadrature_drift();
        let max_re = linalg::max_real_eigenvalue(&a);
        if !(max_re < 0.0) {
            return Err(Error::UnstableState { max_re });
        }
        let d = RMat4::identity() * (0.5 * (self.t_in * self.t_in + self.t_loss * self.t_loss));
        linalg::lyapunov(&a, &d).ok_or(Error::UnstableState { max_re })
    }
}

/// Output noise spectral density at analysis frequency `omega` (units of Γ).
pub fn noise_spectrum(sys: &FluctuationSystem, omega: f64) -> Result<NoiseSpectrum> {
    Ok(NoiseSpectrum {
        omega,
        s: sys.output_spectrum(omega)?,
        s_neg: sys.output_spectrum(-omega)?,
    })
}

/// `⟨δã₋† δã₋⟩` inside the cavity.
pub fn intracavity_pair_photons(sys: &FluctuationSystem) -> Result<f64> {
    let sigma = sys.intracavity_covariance()?;
    Ok(0.5 * (sigma[(0, 0)] + sigma[(1, 1)] - 1.0))
}

/// `S(ω)` flattened row-major as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRecord {
    pub omega_norm: f64,
    pub s: Vec<[f64; 2]>,
}

impl From<&NoiseSpectrum> for SpectrumRecord {
    fn from(n: &NoiseSpectrum) -> Self {
        let mut s = Vec::with_capacity(16);
        for i in 0..4 {
            for j in 0..4 {
                let z = n.s[(i, j)];
                s.push([z.re, z.im]);
            }
        }
        SpectrumRecord {
            omega_norm: n.omega,
            s,
        }
    }
}

/// Dagger and side symmetries of a drift matrix, as the largest violation.
pub fn symmetry_defect(m: &Matrix4<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let dag = m[(SWAP_DAGGER[i], SWAP_DAGGER[j])] - m[(i, j)].conj();
            let side = m[(SWAP_SIDE[i], SWAP_SIDE[j])] - m[(i, j)];
            worst = worst.max(dag.norm()).max(side.norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::{pump_only_branches, threshold, Branch};

    fn pump_state(x: f64, y: f64, phi: f64) -> SteadyState {
        SteadyState {
            ap2: x,
            a2: y,
            phi,
            psi: 0.0,
            branch: Branch::PumpOnly,
            stable: true,
            phi_defined: y > 0.0,
        }
    }

    #[test]
    fn documented_entries() {
        let sys = build_m(&pump_state(0.5, 0.0, 0.3), 1.0, 0.55);
        assert!((sys.m[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let want = I * 0.5 * Complex64::from_polar(1.0, -0.3);
        assert!((sys.m[(0, 3)] - want).norm() < 1e-15);
        assert_eq!(sys.m[(0, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(sys.m[(0, 2)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn empty_cavity_is_diagonal() {
        let sys = build_m(&pump_state(0.0, 0.0, 0.0), 0.7, 0.55);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(sys.m[(i, j)].norm(), 0.0);
                }
            }
            assert_eq!(sys.m[(i, i)].re, -1.0);
        }
        assert_eq!(sys.m[(0, 0)].im, -0.7);
        assert_eq!(sys.m[(1, 1)].im, 0.7);
    }

    #[test]
    fn symmetries_exact() {
        for &(x, y, phi) in &[(0.3, 0.0, 0.0), (1.4, 0.7, 2.1), (3.0, 2.0, -1.0)] {
            let sys = build_m(&pump_state(x, y, phi), 1.3, 0.55);
            assert_eq!(symmetry_defect(&sys.m), 0.0);
        }
    }

    #[test]
    fn coupling_matrices_sum_to_two() {
        let sys = build_m(&pump_state(0.1, 0.0, 0.0), 0.0, 0.55);
        assert!((sys.t_in.powi(2) + sys.t_loss.powi(2) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn vacuum_in_vacuum_out() {
        let sys = build_m(&pump_state(0.0, 0.0, 0.0), 0.4, 0.55);
        for k in 0..200 {
            let w = -20.0 + 40.0 * k as f64 / 199.0;
            let n = noise_spectrum(&sys, w).unwrap();
            assert!((n.s - vacuum_correlations())
                .iter()
                .all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn bounded_spectrum_at_stable_point() {
        let s = pump_only_branches(0.8, 0.5)[0];
        let sys = build_m(&s, 0.5, 0.55);
        assert!(sys.is_stable());
        for k in 0..1000 {
            let w = -50.0 + 100.0 * k as f64 / 999.0;
            let n = noise_spectrum(&sys, w).unwrap();
            assert!(n
                .s
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite() && z.norm() < 1e6));
        }
    }

    #[test]
    fn no_drive_no_photons() {
        let sys = build_m(&pump_state(0.0, 0.0, 0.0), 2.0, 0.55);
        assert!(intracavity_pair_photons(&sys).unwrap().abs() < 1e-14);
        let sigma = sys.intracavity_covariance().unwrap();
        assert!((sigma - RMat4::identity() * 0.5).norm() < 1e-14);
    }

    #[test]
    fn photons_grow_with_pump_on_resonance() {
        let mut prev = -1.0;
        for k in 0..50 {
            let x = 0.95 * k as f64 / 49.0;
            let n =
                intracavity_pair_photons(&build_m(&pump_state(x, 0.0, 0.0), 0.0, 0.55)).unwrap();
            assert!(n > prev, "x={x}: {n} <= {prev}");
            prev = n;
        }
    }

    #[test]
    fn photons_diverge_at_threshold() {
        // pair detuning just above √3 makes the slowest decay rate vanish quadratically
        let (dtp, dtl) = (0.5, 1.74);
        let t = threshold(dtp, dtl, 100.0);
        assert!(t.exists);
        let f = 0.999 * t.f_threshold;
        let roots = pump_only_branches(f, dtp);
        assert_eq!(roots.len(), 1);
        let n = intracavity_pair_photons(&build_m(&roots[0], dtl, 0.55)).unwrap();
        assert!(n > 1e3, "{n}");
    }

    #[test]
    fn unstable_state_is_reported() {
        let sys = build_m(&pump_state(1.5, 0.0, 0.0), 3.0, 0.55);
        assert!(sys.max_eig_re() > 0.0);
        assert!(matches!(
            intracavity_pair_photons(&sys),
            Err(Error::UnstableState { .. })
        ));
    }
}
