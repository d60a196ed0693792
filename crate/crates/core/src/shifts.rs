//! Weighted-shift moment matrices on the circle: the windowed matrix
//! `c_{mn}`, the principal-minor product formula, the
//! NotPositive/Semispectral/Spectral classifier, and exact arc integrals of
//! the associated form measure.
//!
//! The doubly infinite index set is truncated to the window `[-L, L]`; the
//! weight `c_l` is defined for `l ∈ [-L, L-1]` so that every product
//! `c_{mn} = ∏_{l=m}^{n-1} c_l` with `m, n` in the window is available.

use num_complex::Complex64;
use serde::Serialize;

use crate::forms::{self, Form};
use crate::{CMatrix, Error, Result};

use std::f64::consts::PI;

/// Shift weights on the window `[-L, L]`: `S e_n = c_{n-1} e_{n-1}`.
#[derive(Debug, Clone)]
pub struct ShiftWeights {
    half_width: usize,
    /// `c_l` for `l = -L, ..., L-1`, stored left to right.
    c: Vec<Complex64>,
}

impl ShiftWeights {
    pub fn new(half_width: usize, c: Vec<Complex64>) -> Result<Self> {
        if c.len() != 2 * half_width {
            return Err(Error::DimensionMismatch {
                context: "shift weights (need 2L entries for window [-L, L])",
                expected: 2 * half_width,
                got: c.len(),
            });
        }
        Ok(Self { half_width, c })
    }

    /// Constant weight on the whole window.
    pub fn uniform(half_width: usize, c: Complex64) -> Self {
        Self {
            half_width,
            c: vec![c; 2 * half_width],
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Matrix side length `2L + 1`.
    pub fn size(&self) -> usize {
        2 * self.half_width + 1
    }

    /// `c_l` for a window index `l ∈ [-L, L-1]`.
    pub fn weight(&self, l: i64) -> Complex64 {
        let idx = l + self.half_width as i64;
        self.c[idx as usize]
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.c
    }

    /// The truncated matrix of `S` itself: `S e_n = c_{n-1} e_{n-1}`.
    pub fn shift_matrix(&self) -> CMatrix {
        let size = self.size();
        let mut s = CMatrix::zeros(size, size);
        for col in 1..size {
            s[(col - 1, col)] = self.c[col - 1];
        }
        s
    }
}

/// The Hermitian moment matrix `c_{mm} = 1`, `c_{mn} = ∏_{l=m}^{n-1} c_l`
/// for `m < n`, `c_{nm} = conj(c_{mn})`.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    half_width: usize,
    entries: CMatrix,
}

impl MomentMatrix {
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Entry in window coordinates `m, n ∈ [-L, L]`.
    pub fn entry(&self, m: i64, n: i64) -> Complex64 {
        let l = self.half_width as i64;
        self.entries[((m + l) as usize, (n + l) as usize)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn as_form(&self) -> Form {
        Form::new(self.entries.clone()).expect("moment matrix is square")
    }
}

/// Builds the windowed moment matrix by the product recurrence
/// `c_{m,n+1} = c_{m,n} · c_n` (no divisions, so zero weights are exact).
pub fn moment_matrix(w: &ShiftWeights) -> MomentMatrix {
    let size = w.size();
    let l = w.half_width as i64;
    let mut entries = CMatrix::identity(size, size);
    for row in 0..size {
        let m = row as i64 - l;
        let mut prod = Complex64::new(1.0, 0.0);
        for n in (m + 1)..=l {
            prod *= w.weight(n - 1);
            entries[(row, (n + l) as usize)] = prod;
            entries[((n + l) as usize, row)] = prod.conj();
        }
    }
    MomentMatrix {
        half_width: w.half_width,
        entries,
    }
}

/// Principal minor on the rows/columns `k_1 < ... < k_s` (window
/// coordinates): the determinant computed by LU alongside the closed
/// product `∏_{l=1}^{s-1} (1 - |c_{k_l, k_{l+1}}|²)`.
pub fn principal_minor(m: &MomentMatrix, indices: &[i64]) -> Result<(Complex64, f64)> {
    let l = m.half_width as i64;
    if indices.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Input(
            "principal minor indices must be strictly increasing".into(),
        ));
    }
    if indices.iter().any(|&k| k < -l || k > l) {
        return Err(Error::Input(format!(
            "principal minor indices must lie in the window [{}, {}]",
            -l, l
        )));
    }
    let s = indices.len();
    let sub = CMatrix::from_fn(s, s, |i, j| m.entry(indices[i], indices[j]));
    let det = sub.determinant();
    let formula = indices
        .windows(2)
        .map(|p| 1.0 - m.entry(p[0], p[1]).norm_sqr())
        .product();
    Ok((det, formula))
}

/// Classification of the windowed form measure of a weighted shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShiftClass {
    /// Some `|c_l| > 1`: the moment matrix is not positive semidefinite.
    NotPositive,
    /// All `|c_l| ≤ 1` with some `< 1`: positive, extends to a semispectral
    /// measure that is not spectral.
    Semispectral,
    /// All `|c_l| = 1`: the shift is unitary and the measure spectral.
    Spectral,
}

/// Contraction test on the weights, with `tol` absorbing round-off on the
/// unit circle: `Spectral` iff every `|c_l| = 1`, `NotPositive` iff some
/// `|c_l| > 1`, `Semispectral` otherwise.
pub fn classify(w: &ShiftWeights, tol: f64) -> ShiftClass {
    let mods: Vec<f64> = w.weights().iter().map(|c| c.norm()).collect();
    if mods.iter().any(|&m| m > 1.0 + tol) {
        ShiftClass::NotPositive
    } else if mods.iter().all(|&m| (m - 1.0).abs() <= tol) {
        ShiftClass::Spectral
    } else {
        ShiftClass::Semispectral
    }
}

/// A circular arc `[t0, t1) ⊆ [0, 2π]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CircleArc {
    pub t0: f64,
    pub t1: f64,
}

impl CircleArc {
    pub fn new(t0: f64, t1: f64) -> Result<Self> {
        if !(0.0..=2.0 * PI + 1e-12).contains(&t0)
            || !(0.0..=2.0 * PI + 1e-12).contains(&t1)
            || t1 < t0
        {
            return Err(Error::Input(format!(
                "arc must satisfy 0 ≤ t0 ≤ t1 ≤ 2π, got [{t0}, {t1})"
            )));
        }
        Ok(Self { t0, t1 })
    }

    pub fn full_circle() -> Self {
        Self {
            t0: 0.0,
            t1: 2.0 * PI,
        }
    }

    pub fn length(&self) -> f64 {
        self.t1 - self.t0
    }

    /// `I_q = (1/2π) ∫_{t0}^{t1} e^{iqt} dt` in closed form.
    pub fn fourier_integral(&self, q: i64) -> Complex64 {
        if q == 0 {
            Complex64::new(self.length() / (2.0 * PI), 0.0)
        } else {
            let qf = q as f64;
            let e1 = Complex64::new(0.0, qf * self.t1).exp();
            let e0 = Complex64::new(0.0, qf * self.t0).exp();
            (e1 - e0) / Complex64::new(0.0, 2.0 * PI * qf)
        }
    }
}

/// The arc form `E_S([t0, t1))` with entries `c_{mn} · I_{m-n}(arc)`. The
/// full circle returns the identity on the window.
pub fn arc_form(w: &ShiftWeights, arc: CircleArc) -> Form {
    let mm = moment_matrix(w);
    let size = w.size();
    let l = w.half_width as i64;
    let matrix = CMatrix::from_fn(size, size, |i, j| {
        let m = i as i64 - l;
        let n = j as i64 - l;
        mm.entry(m, n) * arc.fourier_integral(m - n)
    });
    Form::new(matrix).expect("square by construction")
}

/// The k-th moment form: entries `c_{mn}` on the diagonal `k + m - n = 0`,
/// zero elsewhere. Away from the window boundary it is the matrix of `S^k`
/// (`k > 0`), `(S*)^{-k}` (`k < 0`), or the identity (`k = 0`).
pub fn moment_form(w: &ShiftWeights, k: i64) -> Result<Form> {
    let span = 2 * w.half_width as i64;
    if k.abs() > span {
        return Err(Error::Input(format!(
            "moment order |{k}| exceeds the window span {span}"
        )));
    }
    let mm = moment_matrix(w);
    let size = w.size();
    let l = w.half_width as i64;
    let matrix = CMatrix::from_fn(size, size, |i, j| {
        let m = i as i64 - l;
        let n = j as i64 - l;
        if k + m - n == 0 {
            mm.entry(m, n)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Form::new(matrix)
}

/// PSD oracle for the classifier: positivity of the full windowed moment
/// matrix as a form.
pub fn psd_oracle(w: &ShiftWeights, tol: f64) -> bool {
    forms::is_positive(&moment_matrix(w).as_form(), tol).positive
}
