use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use rayon::prelude::*;

use crate::linalg::RMat4;

fn quad(sigma: &RMat4, v: &[f64; 4]) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for k in 0..4 {
            acc += v[i] * sigma[(i, k)] * v[k];
        }
    }
    acc
}

/// Exhaustive minimum of the Duan combination over a `grid_n × grid_n`
/// angle grid. Returns `(c_min, theta_plus, theta_minus)`.
pub fn brute_force_duan(sigma: &RMat4, grid_n: usize) -> (f64, f64, f64) {
    let n = grid_n.max(1);
    let h = TAU / n as f64;
    let s = FRAC_1_SQRT_2;
    let rows: Vec<(f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let tp = i as f64 * h;
            let (sp, cp) = tp.sin_cos();
            // rotated Y₊ direction in (X₁, Y₁, X₂, Y₂)
            let yp = [sp * s, cp * s, sp * s, cp * s];
            let var_p = quad(sigma, &yp);
            let mut best = (f64::INFINITY, tp, 0.0);
            for k in 0..n {
                let tm = k as f64 * h;
                let (sm, cm) = tm.sin_cos();
                // rotated X₋ direction
                let xm = [cm * s, -sm * s, -cm * s, sm * s];
                let c = var_p + quad(sigma, &xm) - (tp - tm).cos().abs();
                if c < best.0 {
                    best = (c, tp, tm);
                }
            }
            best
        })
        .collect();
    rows.into_iter().fold(
        (f64::INFINITY, 0.0, 0.0),
        |a, b| if b.0 < a.0 { b } else { a },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_minimum_on_diagonal() {
        let (c, tp, tm) = brute_force_duan(&(RMat4::identity() * 0.5), 64);
        assert!(c.abs() < 1e-15);
        assert_eq!(tp, tm);
    }
}
