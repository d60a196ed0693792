//! Complex sesquilinear form algebra on the truncated test space
//! `V_N = span(e_0, ..., e_{N-1})`: evaluation, polarization, positivity
//! testing, and the rank-revealing quotient by the null space.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg;
use crate::{CMatrix, CVector, Error, Result};

/// A sesquilinear form on `V_N`, stored as the matrix of its basis values
/// `M[m][n] = Φ(e_m, e_n)`, antilinear in the first slot:
/// `Φ(φ, ψ) = Σ conj(a_m) M[m][n] b_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    matrix: CMatrix,
}

impl Form {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Input(format!(
                "form matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let matrix = CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0));
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn entry(&self, m: usize, n: usize) -> Complex64 {
        self.matrix[(m, n)]
    }

    /// `Φ(φ, ψ) = φ^H M ψ`.
    pub fn evaluate(&self, phi: &CVector, psi: &CVector) -> Result<Complex64> {
        let n = self.dim();
        if phi.len() != n {
            return Err(Error::DimensionMismatch {
                context: "evaluate: first argument",
                expected: n,
                got: phi.len(),
            });
        }
        if psi.len() != n {
            return Err(Error::DimensionMismatch {
                context: "evaluate: second argument",
                expected: n,
                got: psi.len(),
            });
        }
        Ok((phi.adjoint() * &self.matrix * psi)[(0, 0)])
    }

    pub fn scale(&self, factor: f64) -> Form {
        Form {
            matrix: self.matrix.scale(factor),
        }
    }

    pub fn add(&self, other: &Form) -> Form {
        assert_eq!(self.dim(), other.dim(), "form dimensions must agree");
        Form {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }

    /// Diagonal value `Φ(e_n, e_n)` as a real number.
    pub fn diagonal(&self, n: usize) -> f64 {
        self.matrix[(n, n)].re
    }
}

/// Recover the full form from its quadratic diagonal via the polarization
/// identity `Φ(φ, ψ) = ¼ Σ_{k=0}^{3} i^k Q(i^k φ + ψ)`, arranged so that the
/// form stays antilinear in the first slot.
pub fn polarize<F>(diag: F, dim: usize) -> Form
where
    F: Fn(&CVector) -> Complex64,
{
    let powers = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut matrix = CMatrix::zeros(dim, dim);
    for m in 0..dim {
        for n in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for &ik in &powers {
                let mut v = CVector::zeros(dim);
                v[m] += ik;
                v[n] += Complex64::new(1.0, 0.0);
                acc += ik * diag(&v);
            }
            matrix[(m, n)] = acc.scale(0.25);
        }
    }
    Form { matrix }
}

/// Outcome of a positivity test: the boolean verdict plus the diagnostics
/// it was based on.
#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub positive: bool,
    pub lambda_min: f64,
    pub hermitian_defect: f64,
    /// Scale `‖M‖_max` the tolerances were measured against.
    pub scale: f64,
}

/// A form is positive when it is Hermitian within `tol·‖M‖_max` and the
/// smallest eigenvalue of its Hermitian part is above `−tol·‖M‖_max`.
pub fn is_positive(form: &Form, tol: f64) -> PositivityReport {
    let scale = form.max_abs();
    let hermitian_defect = linalg::hermitian_defect(&form.matrix);
    let lambda_min = linalg::min_eigenvalue(&form.matrix);
    let positive = hermitian_defect <= tol * scale && lambda_min >= -tol * scale;
    PositivityReport {
        positive,
        lambda_min,
        hermitian_defect,
        scale,
    }
}

/// Orthonormal quotient basis of `V_N / N_Φ` produced by Gram–Schmidt in the
/// form inner product.
///
/// `vectors` holds the surviving vectors `g_k` as columns (coefficients in
/// the `e`-basis); `functionals` holds one row per survivor with
/// `functionals[k][n] = Φ(g_k, e_n) = ⟨d_k|e_n⟩`, so that a plain dot product
/// `functionals[k] · φ` evaluates `Φ(g_k, φ)`.
#[derive(Debug, Clone)]
pub struct QuotientBasis {
    pub rank: usize,
    /// `dim × rank`; column `k` is `g_k`.
    pub vectors: CMatrix,
    /// `rank × dim`; row `k` evaluates `φ ↦ Φ(g_k, φ)`.
    pub functionals: CMatrix,
    /// Index map `n_k`: the Gram–Schmidt step at which survivor `k` arose.
    pub survivor_indices: Vec<usize>,
    /// Steps whose squared form norm fell within a decade of the rank
    /// threshold; borderline ranks are reported, not resolved.
    pub borderline_steps: Vec<usize>,
}

impl QuotientBasis {
    /// `⟨d_k|φ⟩ = Φ(g_k, φ)`.
    pub fn apply_functional(&self, k: usize, phi: &CVector) -> Complex64 {
        (self.functionals.row(k) * phi)[(0, 0)]
    }

    /// Ket coefficient sequence of `|d_k⟩` (conjugate of the functional row).
    pub fn d_ket(&self, k: usize) -> CVector {
        CVector::from_fn(self.functionals.ncols(), |n, _| {
            self.functionals[(k, n)].conj()
        })
    }
}

/// Rank-revealing Gram–Schmidt in the form inner product: `f_0 = {e_0}⁰`,
/// `f_n = {e_n − Σ_{k<n} Φ(f_k, e_n) f_k}⁰` with `{φ}⁰ = Φ(φ,φ)^{−1/2} φ`
/// when `Φ(φ,φ)` clears the rank threshold and `0` otherwise; zero vectors
/// are skipped and the survivors returned with their functionals. One
/// re-orthogonalization pass restores numerical orthogonality.
///
/// A step counts as zero when its squared form norm is at most
/// `tol · max(diagonal of M)`.
pub fn orthonormalize(form: &Form, tol: f64) -> Result<QuotientBasis> {
    let report = is_positive(form, tol.max(1e-12));
    if !report.positive {
        return Err(Error::NotPositive {
            lambda_min: report.lambda_min,
            hermitian_defect: report.hermitian_defect,
            label: None,
        });
    }
    let n = form.dim();
    let m = linalg::hermitian_part(&form.matrix);
    let scale = (0..n).map(|i| m[(i, i)].re).fold(0.0f64, f64::max);
    let threshold = tol * scale;

    let mut vectors: Vec<CVector> = Vec::new();
    // Cached M·g_k so that Φ(g_k, x) = (M g_k)^H x is a single dot product.
    let mut mg: Vec<CVector> = Vec::new();
    let mut survivor_indices = Vec::new();
    let mut borderline_steps = Vec::new();

    for j in 0..n {
        let mut r = linalg::basis_vector(n, j);
        // Classical pass (all coefficients taken against the unmodified e_j),
        // then one re-orthogonalization pass against the residual.
        for _pass in 0..2 {
            let coeffs: Vec<Complex64> = mg.iter().map(|w| w.dotc(&r)).collect();
            for (g, coeff) in vectors.iter().zip(coeffs) {
                r -= g.clone() * coeff;
            }
        }
        let norm_sq = (r.adjoint() * &m * &r)[(0, 0)].re.max(0.0);
        if scale > 0.0 && norm_sq > 0.1 * threshold && norm_sq < 10.0 * threshold {
            borderline_steps.push(j);
        }
        if norm_sq > threshold {
            let g = r / Complex64::new(norm_sq.sqrt(), 0.0);
            mg.push(&m * &g);
            vectors.push(g);
            survivor_indices.push(j);
        }
    }

    let rank = vectors.len();
    let mut vec_mat = CMatrix::zeros(n, rank);
    let mut fun_mat = CMatrix::zeros(rank, n);
    for (k, (g, w)) in vectors.iter().zip(mg.iter()).enumerate() {
        vec_mat.set_column(k, g);
        for col in 0..n {
            fun_mat[(k, col)] = w[col].conj();
        }
    }
    Ok(QuotientBasis {
        rank,
        vectors: vec_mat,
        functionals: fun_mat,
        survivor_indices,
        borderline_steps,
    })
}

// Matrix JSON: {"dim": N, "entries": [[[re,im], ...], ...]} row-major.
#[derive(Serialize, Deserialize)]
struct FormJson {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for Form {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im]).collect())
            .collect();
        FormJson { dim: n, entries }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Form {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = FormJson::deserialize(deserializer)?;
        if raw.entries.len() != raw.dim || raw.entries.iter().any(|row| row.len() != raw.dim) {
            return Err(D::Error::custom(format!(
                "matrix entries must be {0}x{0} to match \"dim\"",
                raw.dim
            )));
        }
        let matrix = CMatrix::from_fn(raw.dim, raw.dim, |i, j| {
            Complex64::new(raw.entries[i][j][0], raw.entries[i][j][1])
        });
        Ok(Form { matrix })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vec2(a: Complex64, b: Complex64) -> CVector {
        CVector::from_vec(vec![a, b])
    }

    #[test]
    fn evaluate_identity_orthogonality() {
        let f = Form::identity(2);
        let phi = vec2(c(1.0, 0.0), c(0.0, 0.0));
        let psi = vec2(c(0.0, 0.0), c(1.0, 0.0));
        assert_eq!(f.evaluate(&phi, &psi).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn evaluate_identity_diagonal_sum() {
        let f = Form::identity(2);
        let v = vec2(c(1.0, 0.0), c(1.0, 0.0));
        assert_eq!(f.evaluate(&v, &v).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn evaluate_is_antilinear_in_first_slot() {
        // M = [[0,1],[1,0]], φ = (i,0), ψ = (0,1) → conj(i)·1 = −i.
        let f = Form::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let phi = vec2(c(0.0, 1.0), c(0.0, 0.0));
        let psi = vec2(c(0.0, 0.0), c(1.0, 0.0));
        let got = f.evaluate(&phi, &psi).unwrap();
        assert!((got - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let f = Form::identity(2);
        let short = CVector::zeros(1);
        let ok = CVector::zeros(2);
        assert!(f.evaluate(&short, &ok).is_err());
        assert!(f.evaluate(&ok, &short).is_err());
    }

    #[test]
    fn polarize_round_trips_identity() {
        let f = Form::identity(2);
        let rec = polarize(|v| f.evaluate(v, v).unwrap(), 2);
        assert!(linalg::max_abs(&(rec.matrix() - f.matrix())) < 1e-14);
    }

    #[test]
    fn polarize_expands_modulus_square() {
        // diag(φ) = |φ_0 + φ_1|² → all-ones matrix.
        let rec = polarize(|v| c((v[0] + v[1]).norm_sqr(), 0.0), 2);
        let want = Form::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(linalg::max_abs(&(rec.matrix() - want.matrix())) < 1e-14);
    }

    #[test]
    fn polarize_round_trips_complex_hermitian() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)],
        );
        let f = Form::new(m).unwrap();
        let rec = polarize(|v| f.evaluate(v, v).unwrap(), 2);
        assert!(linalg::max_abs(&(rec.matrix() - f.matrix())) < 1e-14);
    }

    #[test]
    fn is_positive_identity() {
        let rep = is_positive(&Form::identity(3), 1e-10);
        assert!(rep.positive);
        assert!((rep.lambda_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn is_positive_rejects_indefinite() {
        let rep = is_positive(&Form::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]), 1e-10);
        assert!(!rep.positive);
        assert!((rep.lambda_min + 1.0).abs() < 1e-12);
    }

    #[test]
    fn is_positive_rejects_non_hermitian() {
        let rep = is_positive(&Form::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]), 1e-10);
        assert!(!rep.positive);
        assert!(rep.hermitian_defect > 0.5);
    }

    #[test]
    fn zero_form_is_positive_with_rank_zero() {
        let f = Form::zeros(3);
        assert!(is_positive(&f, 1e-10).positive);
        let q = orthonormalize(&f, 1e-10).unwrap();
        assert_eq!(q.rank, 0);
        assert!(q.vectors.ncols() == 0);
    }

    #[test]
    fn orthonormalize_rank_one_all_ones() {
        // M = [[1,1],[1,1]] → rank 1, g_0 = e_0, functional row (1,1);
        // f_1 = {e_1 − e_0}⁰ has zero form norm and is skipped.
        let f = Form::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let q = orthonormalize(&f, 1e-10).unwrap();
        assert_eq!(q.rank, 1);
        assert_eq!(q.survivor_indices, vec![0]);
        assert!((q.vectors[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((q.vectors[(1, 0)]).norm() < 1e-12);
        assert!((q.functionals[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((q.functionals[(0, 1)] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn orthonormalize_identity_is_standard_basis() {
        let f = Form::identity(4);
        let q = orthonormalize(&f, 1e-10).unwrap();
        assert_eq!(q.rank, 4);
        assert!(linalg::identity_defect(&q.vectors) < 1e-12);
        assert!(linalg::identity_defect(&q.functionals) < 1e-12);
    }

    #[test]
    fn orthonormalize_rejects_non_positive() {
        let f = Form::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            orthonormalize(&f, 1e-10),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn biorthogonality_and_reconstruction() {
        let f = Form::from_real_rows(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 1.0, 2.0]]);
        let q = orthonormalize(&f, 1e-10).unwrap();
        assert_eq!(q.rank, 3);
        let delta = &q.functionals * &q.vectors;
        assert!(linalg::identity_defect(&delta) < 1e-9);
        // Φ = Σ_k d_k d_k^H entrywise.
        let rec = q.functionals.adjoint() * &q.functionals;
        assert!(linalg::max_abs(&(&rec - f.matrix())) < 1e-10);
    }

    #[test]
    fn form_json_round_trip() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.5, -0.25), c(0.5, 0.25), c(2.0, 0.0)],
        );
        let f = Form::new(m).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        let back: Form = serde_json::from_str(&text).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn form_json_rejects_ragged_entries() {
        let text = r#"{"dim": 2, "entries": [[[1.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}"#;
        assert!(serde_json::from_str::<Form>(text).is_err());
    }
}
