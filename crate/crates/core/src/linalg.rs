//! Small dense linear-algebra helpers shared by the domain modules.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::{CMatrix, CVector};

/// Entrywise max norm `‖M‖_max`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Entrywise max norm of a vector.
pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖M − M^H‖_max`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Hermitian part `(M + M^H)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted ascending
/// with matching eigenvector columns. The input is hermitized first so that
/// matrices Hermitian only up to round-off are handled uniformly.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let se = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Number of eigenvalues of the Hermitian part strictly above `threshold`.
pub fn eigen_rank(m: &CMatrix, threshold: f64) -> usize {
    hermitian_eigenvalues(m)
        .iter()
        .filter(|&&lam| lam > threshold)
        .count()
}

/// Standard basis vector `e_k` of length `n`.
pub fn basis_vector(n: usize, k: usize) -> CVector {
    let mut v = DVector::zeros(n);
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// Max-norm distance to the identity.
pub fn identity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - CMatrix::identity(m.nrows(), m.ncols())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_eigen_sorts_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 0.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        let mut rec = CMatrix::zeros(2, 2);
        for k in 0..2 {
            let v = vecs.column(k);
            rec += (v * v.adjoint()).scale(vals[k]);
        }
        assert!(max_abs(&(&rec - &m)) < 1e-12);
    }

    #[test]
    fn eigen_rank_counts_positive_directions() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(1e-14, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        assert_eq!(eigen_rank(&m, 1e-10), 1);
    }

    #[test]
    fn empty_matrix_is_handled() {
        let m = CMatrix::zeros(0, 0);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals.is_empty());
        assert_eq!(vecs.nrows(), 0);
    }
}
