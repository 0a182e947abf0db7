//! Small dense complex matrices (dimension ≤ 4) on the stack.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat<const N: usize> = SMatrix<C64, N, N>;
pub type CVec<const N: usize> = SVector<C64, N>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real_diag<const N: usize>(d: [f64; N]) -> CMat<N> {
    let mut m = CMat::<N>::zeros();
    for (k, v) in d.iter().enumerate() {
        m[(k, k)] = c(*v, 0.0);
    }
    m
}

/// Max-abs entry of `A − B`.
pub fn max_abs_diff<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `‖U†U − I‖_max`.
pub fn unitarity_error<const N: usize>(u: &CMat<N>) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &CMat::<N>::identity())
}

/// `‖A − A†‖_max`.
pub fn hermiticity_error<const N: usize>(a: &CMat<N>) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

pub fn is_diagonal<const N: usize>(a: &CMat<N>, tol: f64) -> bool {
    (0..N).all(|i| (0..N).all(|j| i == j || a[(i, j)].norm() <= tol))
}

/// One Newton–Schulz step towards the unitary polar factor.
///
/// For `U†U = I + E` the result has defect `O(E²)`, so a single step per
/// integrator step keeps a propagator on the unitary group to rounding.
pub fn polar_project<const N: usize>(u: &CMat<N>) -> CMat<N> {
    let gram = u.adjoint() * u;
    let three = CMat::<N>::identity() * c(3.0, 0.0);
    u * (three - gram) * c(0.5, 0.0)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues<const N: usize>(a: &CMat<N>) -> Vec<f64> {
    let sym = (a + a.adjoint()) * c(0.5, 0.0);
    let dm = nalgebra::DMatrix::from_fn(N, N, |i, j| sym[(i, j)]);
    let mut ev: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Spectral (operator 2-) norm of a small matrix.
pub fn operator_norm<const N: usize>(a: &CMat<N>) -> f64 {
    let gram = a.adjoint() * a;
    hermitian_eigenvalues(&gram).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Rotates `a` into the basis given by the columns of `basis`: `B† A B`.
pub fn in_basis<const N: usize>(a: &CMat<N>, basis: &CMat<N>) -> CMat<N> {
    basis.adjoint() * a * basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_schulz_restores_unitarity() {
        let theta: f64 = 0.3;
        let mut u = CMat::<2>::new(
            c(theta.cos(), 0.0),
            c(0.0, -theta.sin()),
            c(0.0, -theta.sin()),
            c(theta.cos(), 0.0),
        );
        u *= c(1.0 + 1e-6, 0.0);
        let before = unitarity_error(&u);
        let after = unitarity_error(&polar_project(&u));
        assert!(before > 1e-6);
        assert!(after < 1e-11, "{after}");
    }

    #[test]
    fn operator_norm_of_diagonal() {
        let v = real_diag([0.0, 1.0, 2.0, 3.0]);
        assert!((operator_norm(&v) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_sorted() {
        let h = CMat::<2>::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let ev = hermitian_eigenvalues(&h);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }
}
