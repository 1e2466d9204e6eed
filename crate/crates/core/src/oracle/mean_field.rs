use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMat4;
use crate::model::NormalizedDrive;
use crate::steady::SteadyState;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldState {
    pub alpha_p: Complex64,
    pub alpha_minus: Complex64,
    pub alpha_plus: Complex64,
}

impl MeanFieldState {
    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            alpha_p: z,
            alpha_minus: z,
            alpha_plus: z,
        }
    }

    fn axpy(&self, k: f64, d: &Self) -> Self {
        Self {
            alpha_p: self.alpha_p + d.alpha_p * k,
            alpha_minus: self.alpha_minus + d.alpha_minus * k,
            alpha_plus: self.alpha_plus + d.alpha_plus * k,
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.alpha_p
            .norm()
            .max(self.alpha_minus.norm())
            .max(self.alpha_plus.norm())
    }

    fn is_finite(&self) -> bool {
        [self.alpha_p, self.alpha_minus, self.alpha_plus]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Right-hand side of the classical three-mode equations (noise dropped,
/// real drive on the pump).
pub fn vector_field(s: &MeanFieldState, drive: &NormalizedDrive) -> MeanFieldState {
    let (p, m, q) = (s.alpha_p, s.alpha_minus, s.alpha_plus);
    let (np, nm, nq) = (p.norm_sqr(), m.norm_sqr(), q.norm_sqr());
    let dp = J * ((np + 2.0 * nm + 2.0 * nq) * p + 2.0 * p.conj() * m * q) - p - J * drive.dtp * p
        + drive.f_norm;
    let dm = J * ((2.0 * np + nm + 2.0 * nq) * m + p * p * q.conj()) - m - J * drive.dtl * m;
    let dq = J * ((2.0 * np + 2.0 * nm + nq) * q + p * p * m.conj()) - q - J * drive.dtl * q;
    MeanFieldState {
        alpha_p: dp,
        alpha_minus: dm,
        alpha_plus: dq,
    }
}

/// Complex amplitudes of a steady state, taking the input field as the phase
/// reference and splitting the pair phase evenly.
pub fn from_steady(state: &SteadyState) -> MeanFieldState {
    let theta_p = -state.psi;
    let theta_side = state.phi / 2.0 + theta_p;
    MeanFieldState {
        alpha_p: Complex64::from_polar(state.ap2.sqrt(), theta_p),
        alpha_minus: Complex64::from_polar(state.a2.sqrt(), theta_side),
        alpha_plus: Complex64::from_polar(state.a2.sqrt(), theta_side),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<MeanFieldState>,
}

impl Trajectory {
    pub fn last(&self) -> &MeanFieldState {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }
}

fn rk4_step(s: &MeanFieldState, drive: &NormalizedDrive, dt: f64) -> MeanFieldState {
    let k1 = vector_field(s, drive);
    let k2 = vector_field(&s.axpy(dt / 2.0, &k1), drive);
    let k3 = vector_field(&s.axpy(dt / 2.0, &k2), drive);
    let k4 = vector_field(&s.axpy(dt, &k3), drive);
    MeanFieldState {
        alpha_p: s.alpha_p
            + (k1.alpha_p + 2.0 * k2.alpha_p + 2.0 * k3.alpha_p + k4.alpha_p) * (dt / 6.0),
        alpha_minus: s.alpha_minus
            + (k1.alpha_minus + 2.0 * k2.alpha_minus + 2.0 * k3.alpha_minus + k4.alpha_minus)
                * (dt / 6.0),
        alpha_plus: s.alpha_plus
            + (k1.alpha_plus + 2.0 * k2.alpha_plus + 2.0 * k3.alpha_plus + k4.alpha_plus)
                * (dt / 6.0),
    }
}

/// Fixed-step RK4 from `init` to `t_end`, recording every step.
pub fn integrate_mean_field(
    init: MeanFieldState,
    drive: &NormalizedDrive,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and t_end > 0 (got {dt}, {t_end})"
        )));
    }
    let steps = (t_end / dt).ceil() as usize;
    let mut traj = Trajectory {
        t: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
    };
    traj.t.push(0.0);
    traj.states.push(init);
    let mut s = init;
    for k in 1..=steps {
        s = rk4_step(&s, drive, dt);
        let t = k as f64 * dt;
        if !s.is_finite() {
            return Err(Error::NonFinite { t });
        }
        traj.t.push(t);
        traj.states.push(s);
    }
    Ok(traj)
}

/// Integrates until the vector field drops below `tol` or `t_max` is reached,
/// keeping only the final state.
pub fn relax(
    init: MeanFieldState,
    drive: &NormalizedDrive,
    dt: f64,
    t_max: f64,
    tol: f64,
) -> Result<MeanFieldState> {
    let mut s = init;
    let steps = (t_max / dt).ceil() as usize;
    for k in 0..steps {
        if k % 64 == 0 && vector_field(&s, drive).max_norm() < tol {
            return Ok(s);
        }
        s = rk4_step(&s, drive, dt);
        if !s.is_finite() {
            return Err(Error::NonFinite { t: k as f64 * dt });
        }
    }
    Ok(s)
}

/// Central-difference Jacobian of the signal/idler flow in the frame
/// co-rotating with the steady-state phases, over `(δa₋, δa₋*, δa₊, δa₊*)`.
/// The pump is held at its steady value.
pub fn fd_jacobian(state: &SteadyState, drive: &NormalizedDrive, h: f64) -> CMat4 {
    let base = from_steady(state);
    // both sidebands carry the phase φ/2 + θ_p
    let rot = Complex64::from_polar(1.0, state.phi / 2.0 - state.psi);
    // rotated-frame outputs as functions of rotated-frame perturbations
    let flow = |dm: Complex64, dq: Complex64| -> [Complex64; 4] {
        let mut s = base;
        s.alpha_minus += dm * rot;
        s.alpha_plus += dq * rot;
        let v = vector_field(&s, drive);
        let fm = v.alpha_minus / rot;
        let fq = v.alpha_plus / rot;
        [fm, fm.conj(), fq, fq.conj()]
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut out = CMat4::zeros();
    for (col_pair, which) in [(0usize, 0usize), (2, 1)] {
        let pert = |d: Complex64| {
            if which == 0 {
                flow(d, zero)
            } else {
                flow(zero, d)
            }
        };
        let fx_plus = pert(Complex64::new(h, 0.0));
        let fx_minus = pert(Complex64::new(-h, 0.0));
        let fy_plus = pert(Complex64::new(0.0, h));
        let fy_minus = pert(Complex64::new(0.0, -h));
        for row in 0..4 {
            let dx = (fx_plus[row] - fx_minus[row]) / (2.0 * h);
            let dy = (fy_plus[row] - fy_minus[row]) / (2.0 * h);
            out[(row, col_pair)] = (dx - J * dy) * 0.5;
            out[(row, col_pair + 1)] = (dx + J * dy) * 0.5;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_cavity_decays() {
        let init = MeanFieldState {
            alpha_p: Complex64::new(1.0, -0.5),
            alpha_minus: Complex64::new(0.3, 0.2),
            alpha_plus: Complex64::new(-0.1, 0.4),
        };
        let traj =
            integrate_mean_field(init, &NormalizedDrive::raw(0.0, 0.7, 0.6), 20.0, 0.01).unwrap();
        assert!(traj.last().max_norm() < 1e-8);
    }

    #[test]
    fn blow_up_is_reported() {
        let init = MeanFieldState {
            alpha_p: Complex64::new(1e3, 0.0),
            ..MeanFieldState::zero()
        };
        let r = integrate_mean_field(init, &NormalizedDrive::raw(0.0, 0.0, 0.0), 10.0, 1.0);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn linear_jacobian_is_exact() {
        let s = SteadyState {
            ap2: 0.0,
            a2: 0.0,
            phi: 0.0,
            psi: 0.0,
            branch: crate::steady::Branch::PumpOnly,
            stable: true,
            phi_defined: false,
        };
        let d = NormalizedDrive::raw(0.0, 0.0, 1.3);
        for h in [1e-8, 1e-6, 1e-4] {
            let j = fd_jacobian(&s, &d, h);
            for i in 0..4 {
                for k in 0..4 {
                    let want = if i != k {
                        Complex64::new(0.0, 0.0)
                    } else if i % 2 == 0 {
                        Complex64::new(-1.0, -1.3)
                    } else {
                        Complex64::new(-1.0, 1.3)
                    };
                    assert!(
                        (j[(i, k)] - want).norm() < 1e-8,
                        "h={h} ({i},{k}) {}",
                        j[(i, k)]
                    );
                }
            }
        }
    }
}
