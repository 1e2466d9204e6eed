use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMat4, RMat4};
use crate::model::NormalizedDrive;
use crate::steady::SteadyState;

use super::mean_field::fd_jacobian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LangevinOptions {
    /// Independent trajectories.
    pub n_samples: usize,
    /// Discarded transient per trajectory.
    pub t_burn: f64,
    /// Averaging window per trajectory.
    pub t_window: f64,
    pub dt: f64,
    pub seed: u64,
    /// Finite-difference step for the drift.
    pub fd_step: f64,
}

impl Default for LangevinOptions {
    fn default() -> Self {
        Self {
            n_samples: 10_000,
            t_burn: 10.0,
            t_window: 20.0,
            dt: 2e-3,
            seed: 1,
            fd_step: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinEstimate {
    /// Equal-time covariance over `(X₋, Y₋, X₊, Y₊)` inside the cavity.
    pub covariance: RMat4,
    /// Standard error of each entry across trajectories.
    pub stderr: RMat4,
    pub n_samples: usize,
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Real drift on `(Re u₋, Im u₋, Re u₊, Im u₊)` from the complex rows of `m`.
fn real_drift(m: &CMat4) -> Matrix4<f64> {
    let mut a = Matrix4::zeros();
    for (r, row) in [0usize, 2].into_iter().enumerate() {
        for (c, col) in [0usize, 2].into_iter().enumerate() {
            let (k, kc) = (m[(row, col)], m[(row, col + 1)]);
            // k u + kc ū with u = x + iy
            let dx = k + kc;
            let dy = Complex64::new(0.0, 1.0) * (k - kc);
            a[(2 * r, 2 * c)] = dx.re;
            a[(2 * r, 2 * c + 1)] = dy.re;
            a[(2 * r + 1, 2 * c)] = dx.im;
            a[(2 * r + 1, 2 * c + 1)] = dy.im;
        }
    }
    a
}

/// Euler–Maruyama estimate of the stationary intracavity quadrature
/// covariance of the linearized pair fluctuations, driven by vacuum noise
/// through the coupler and the intrinsic loss channel.
///
/// `coupling_ratio` is `γ/Γ`. Quadratures are `X = √2 Re u`, `Y = √2 Im u`.
pub fn langevin_covariance(
    state: &SteadyState,
    drive: &NormalizedDrive,
    coupling_ratio: f64,
    opts: &LangevinOptions,
) -> Result<LangevinEstimate> {
    if opts.n_samples < 2 || !(opts.dt > 0.0) || !(opts.t_window > 0.0) || !(opts.t_burn >= 0.0) {
        return Err(Error::InvalidArgument(
            "langevin: need n_samples ≥ 2, dt > 0, t_window > 0".into(),
        ));
    }
    let m = fd_jacobian(state, drive, opts.fd_step);
    let a = real_drift(&m);
    let max_re = a
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(max_re < 0.0) {
        return Err(Error::UnstableState { max_re });
    }
    // each real noise component has variance (t_in² + t_loss²)·dt/4 = dt/2
    let t_sq_sum = 2.0 * coupling_ratio + 2.0 * (1.0 - coupling_ratio);
    let noise_sd = (t_sq_sum * opts.dt / 4.0).sqrt();
    let burn_steps = (opts.t_burn / opts.dt).round() as usize;
    let window_steps = ((opts.t_window / opts.dt).round() as usize).max(1);
    let dt = opts.dt;

    let per_traj: Vec<[f64; 16]> = (0..opts.n_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let mut u = nalgebra::Vector4::<f64>::zeros();
            let mut acc = [Compensated::default(); 16];
            for step in 0..burn_steps + window_steps {
                let mut xi = nalgebra::Vector4::<f64>::zeros();
                for x in xi.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *x = z * noise_sd;
                }
                u += a * u * dt + xi;
                if step >= burn_steps {
                    for i in 0..4 {
                        for j in 0..4 {
                            // X = √2 Re u  ⇒  ⟨XX⟩ = 2⟨Re u Re u⟩
                            acc[4 * i + j].add(2.0 * u[i] * u[j]);
                        }
                    }
                }
            }
            let mut out = [0.0; 16];
            for (o, a) in out.iter_mut().zip(acc.iter()) {
                *o = a.value() / window_steps as f64;
            }
            out
        })
        .collect();

    let n = per_traj.len() as f64;
    let mut mean = RMat4::zeros();
    let mut stderr = RMat4::zeros();
    for idx in 0..16 {
        let mut s = Compensated::default();
        for t in &per_traj {
            s.add(t[idx]);
        }
        let mu = s.value() / n;
        let mut v = Compensated::default();
        for t in &per_traj {
            v.add((t[idx] - mu) * (t[idx] - mu));
        }
        let var = v.value() / (n - 1.0);
        mean[(idx / 4, idx % 4)] = mu;
        stderr[(idx / 4, idx % 4)] = (var / n).sqrt();
    }
    Ok(LangevinEstimate {
        covariance: mean,
        stderr,
        n_samples: opts.n_samples,
    })
}
