//! Small fixed-size linear algebra shared by the fluctuation, steady-state
//! and entanglement modules.

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;

pub type CMat4 = Matrix4<Complex64>;
pub type RMat4 = Matrix4<f64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Maps `(a₁, a₁†, a₂, a₂†)` to `(X₁, Y₁, X₂, Y₂)` with `X = (a+a†)/√2`,
/// `Y = −i(a−a†)/√2`. Unitary.
pub fn quadrature_map() -> CMat4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let one = Complex64::new(s, 0.0);
    let mi = Complex64::new(0.0, -s);
    let pi = Complex64::new(0.0, s);
    let z = Complex64::new(0.0, 0.0);
    CMat4::new(
        one, one, z, z, //
        mi, pi, z, z, //
        z, z, one, one, //
        z, z, mi, pi,
    )
}

/// The real generator `U M U†` acting on quadratures. Imaginary parts are
/// rounding noise when `M` has the dagger-conjugation symmetry.
pub fn to_quadrature_generator(m: &CMat4) -> RMat4 {
    let u = quadrature_map();
    (u * m * u.adjoint()).map(|z| z.re)
}

pub fn max_real_eigenvalue(a: &RMat4) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn eigenvalues4(a: &RMat4) -> Vec<Complex64> {
    a.complex_eigenvalues().iter().copied().collect()
}

/// Solves `A Σ + Σ Aᵀ + D = 0` for symmetric `Σ` via the Kronecker form.
/// Returns `None` if the 16×16 system is singular.
pub fn lyapunov(a: &RMat4, d: &RMat4) -> Option<RMat4> {
    let n = 4;
    let mut k = DMatrix::<f64>::zeros(n * n, n * n);
    // vec(AΣ) = (I⊗A) vec Σ, vec(ΣAᵀ) = (A⊗I) vec Σ with column-major vec
    for i in 0..n {
        for j in 0..n {
            for p in 0..n {
                // (I⊗A): row (j*n+i), col (j*n+p) += A[i,p]
                k[(j * n + i, j * n + p)] += a[(i, p)];
                // (A⊗I): row (j*n+i), col (p*n+i) += A[j,p]
                k[(j * n + i, p * n + i)] += a[(j, p)];
            }
        }
    }
    let rhs = DVector::from_iterator(n * n, d.iter().map(|x| -x));
    let sol = k.lu().solve(&rhs)?;
    let s = RMat4::from_iterator(sol.iter().copied());
    Some((s + s.transpose()) * 0.5)
}

/// Complex `dz/dt` coefficients `(∂f/∂z, ∂f/∂z̄)` turned into the real 2×2
/// block acting on `(Re z, Im z)`.
pub fn wirtinger_block(dz: Complex64, dzbar: Complex64) -> [[f64; 2]; 2] {
    let dx = dz + dzbar;
    let dy = I * (dz - dzbar);
    [[dx.re, dy.re], [dx.im, dy.im]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_map_is_unitary() {
        let u = quadrature_map();
        let e = u * u.adjoint() - CMat4::identity();
        assert!(e.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn lyapunov_scalar_blocks() {
        let a = RMat4::from_diagonal(&nalgebra::Vector4::new(-1.0, -2.0, -0.5, -4.0));
        let s = lyapunov(&a, &RMat4::identity()).unwrap();
        for (i, k) in [1.0, 2.0, 0.5, 4.0].iter().enumerate() {
            assert!((s[(i, i)] - 0.5 / k).abs() < 1e-14);
        }
    }

    #[test]
    fn lyapunov_residual_general() {
        let a = RMat4::new(
            -1.0, 0.3, 0.2, -0.4, //
            -0.7, -1.2, 0.5, 0.1, //
            0.0, 0.2, -0.9, 0.6, //
            0.3, -0.1, -0.6, -1.1,
        );
        let d = RMat4::identity() * 2.0;
        let s = lyapunov(&a, &d).unwrap();
        let r = a * s + s * a.transpose() + d;
        assert!(r.norm() < 1e-12, "{r}");
    }
}
