//! The sparse symmetric matrix whose coefficient sequence of all ones is a
//! generalized eigenvector for eigenvalue 1 while every finite section keeps
//! its spectrum strictly inside the unit interval.
//!
//! Construction: a growth sequence of positive integers `a_i` determines
//! block boundaries `σ_i = Σ_{k≤i} a_k`, the parent map `φ(j)` (the unique
//! `i` with `σ_{i-1} < j ≤ σ_i`), and the value recurrence
//! `b_0 = 1/a_0`, `b_j = (1 − b_{φ(j)})/a_j`. Row `i` carries the value
//! `b_i` on columns `(σ_{i-1}, σ_i]`, the symmetric mirror `b_{φ(i)}` at
//! column `φ(i)`, and zero diagonal. Each row then sums to exactly 1, while
//! the square sum of all entries is at most `Σ_i 2/a_i`.
//!
//! When every `a_i` is a power of two the recurrence is carried out in exact
//! dyadic rationals, making the row-sum identity verifiable symbolically and
//! the floating-point row sums exactly 1.0.

use num_complex::Complex64;
use serde::Serialize;

use crate::eigen::OperatorMatrix;
use crate::linalg;
use crate::{CMatrix, Error, Result};

/// Exact dyadic rational `num / 2^exp` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dyadic {
    pub num: u128,
    pub exp: u32,
}

impl Dyadic {
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    fn normalize(mut self) -> Self {
        while self.exp > 0 && self.num % 2 == 0 {
            self.num /= 2;
            self.exp -= 1;
        }
        self
    }

    /// `1 − self`; requires `self ≤ 1`.
    fn one_minus(self) -> Option<Self> {
        let denom = 1u128.checked_shl(self.exp)?;
        if self.num > denom {
            return None;
        }
        Some(
            Dyadic {
                num: denom - self.num,
                exp: self.exp,
            }
            .normalize(),
        )
    }

    /// Division by a power of two `2^s`.
    fn div_pow2(self, s: u32) -> Option<Self> {
        let exp = self.exp.checked_add(s)?;
        if exp > 120 {
            return None;
        }
        Some(Dyadic { num: self.num, exp }.normalize())
    }

    /// Multiplication by an integer.
    fn mul_int(self, k: u128) -> Option<Self> {
        Some(
            Dyadic {
                num: self.num.checked_mul(k)?,
                exp: self.exp,
            }
            .normalize(),
        )
    }

    fn add(self, other: Self) -> Option<Self> {
        let exp = self.exp.max(other.exp);
        let a = self.num.checked_shl(exp - self.exp)?;
        let b = other.num.checked_shl(exp - other.exp)?;
        Some(
            Dyadic {
                num: a.checked_add(b)?,
                exp,
            }
            .normalize(),
        )
    }

    pub fn is_one(self) -> bool {
        self.normalize() == Dyadic::ONE
    }

    /// Exact conversion; every value this module produces fits in an f64.
    pub fn to_f64(self) -> f64 {
        self.num as f64 / (1u128 << self.exp) as f64
    }
}

/// How the growth sequence `a_i` is produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GrowthSpec {
    /// `a_i = base · ratio^i`.
    Geometric { base: u64, ratio: u64 },
    /// Explicit finite list; building fails if it is too short for the
    /// requested truncation.
    Explicit(Vec<u64>),
}

impl GrowthSpec {
    fn term(&self, i: usize) -> Result<u64> {
        match self {
            GrowthSpec::Geometric { base, ratio } => ratio
                .checked_pow(i as u32)
                .and_then(|r| base.checked_mul(r))
                .ok_or_else(|| Error::Input(format!("growth term a_{i} overflows u64"))),
            GrowthSpec::Explicit(list) => list.get(i).copied().ok_or_else(|| {
                Error::Input(format!(
                    "explicit growth sequence of length {} is too short for index {i}",
                    list.len()
                ))
            }),
        }
    }
}

/// Materialized growth data: terms, partial sums, parent map, and the value
/// recurrence, exact when all terms are powers of two.
#[derive(Debug, Clone)]
pub struct GrowthSequence {
    spec: GrowthSpec,
    a: Vec<u64>,
    sigma: Vec<u64>,
    b: Vec<f64>,
    b_exact: Option<Vec<Dyadic>>,
}

impl GrowthSequence {
    /// Materializes blocks until the partial sums cover the index range
    /// `0..size`, i.e. up to the first `i` with `σ_i ≥ size`. Rows beyond
    /// the covered blocks carry only their mirror entry, whose value lives
    /// in an earlier block, so nothing more is ever needed.
    pub fn materialize(spec: GrowthSpec, size: usize) -> Result<Self> {
        let mut a = Vec::new();
        let mut sigma: Vec<u64> = Vec::new();
        let mut acc: u64 = 0;
        let mut i = 0usize;
        while acc < size as u64 {
            let t = spec.term(i)?;
            if t == 0 {
                return Err(Error::Input(format!("growth term a_{i} must be positive")));
            }
            a.push(t);
            acc = acc
                .checked_add(t)
                .ok_or_else(|| Error::Input("partial sums σ_i overflow u64".into()))?;
            sigma.push(acc);
            i += 1;
        }

        let len = a.len();
        let all_pow2 = a.iter().all(|&t| t.is_power_of_two());
        let mut b = Vec::with_capacity(len);
        let mut b_exact: Option<Vec<Dyadic>> = if all_pow2 { Some(Vec::new()) } else { None };
        for j in 0..len {
            let value = if j == 0 {
                Dyadic::ONE.div_pow2(a[0].trailing_zeros())
            } else {
                let parent = Self::parent_of(&sigma, j as u64);
                b_exact
                    .as_ref()
                    .and_then(|ex| ex[parent].one_minus())
                    .and_then(|v| v.div_pow2(a[j].trailing_zeros()))
            };
            if j == 0 {
                b.push(1.0 / a[0] as f64);
            } else {
                let parent = Self::parent_of(&sigma, j as u64);
                b.push((1.0 - b[parent]) / a[j] as f64);
            }
            if let Some(exact) = b_exact.as_mut() {
                // Keep the dyadic path only while values stay exactly
                // representable in f64.
                match value.filter(|v| v.num <= (1 << 52) && v.exp <= 52) {
                    Some(v) => exact.push(v),
                    None => b_exact = None,
                }
            }
        }
        // Exact values, when available, are the authoritative doubles.
        if let Some(exact) = &b_exact {
            for (dst, src) in b.iter_mut().zip(exact) {
                *dst = src.to_f64();
            }
        }
        Ok(Self {
            spec,
            a,
            sigma,
            b,
            b_exact,
        })
    }

    fn parent_of(sigma: &[u64], j: u64) -> usize {
        debug_assert!(j >= 1);
        sigma.partition_point(|&s| s < j)
    }

    pub fn spec(&self) -> &GrowthSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self, i: usize) -> u64 {
        self.a[i]
    }

    /// `σ_i`; `σ_{-1} = 0` is represented by calling with `i = None`.
    pub fn sigma(&self, i: usize) -> u64 {
        self.sigma[i]
    }

    /// The unique `i` with `σ_{i-1} < j ≤ σ_i`; always `< j`.
    pub fn phi(&self, j: usize) -> usize {
        Self::parent_of(&self.sigma, j as u64)
    }

    pub fn b(&self, j: usize) -> f64 {
        self.b[j]
    }

    pub fn b_exact(&self, j: usize) -> Option<Dyadic> {
        self.b_exact.as_ref().map(|v| v[j])
    }

    pub fn is_dyadic(&self) -> bool {
        self.b_exact.is_some()
    }

    /// The analytic square-sum bound `Σ_i 2/a_i`: closed form for geometric
    /// sequences, the finite sum over the list otherwise.
    pub fn square_sum_bound(&self) -> f64 {
        match &self.spec {
            GrowthSpec::Geometric { base, ratio } => {
                2.0 * *ratio as f64 / (*base as f64 * (*ratio as f64 - 1.0))
            }
            GrowthSpec::Explicit(list) => list.iter().map(|&t| 2.0 / t as f64).sum(),
        }
    }
}

/// A truncated section of the counterexample matrix in sparse row storage.
#[derive(Debug, Clone)]
pub struct CounterexampleMatrix {
    pub size: usize,
    /// Per-row `(column, value)` pairs, sorted by column.
    rows: Vec<Vec<(usize, f64)>>,
    /// Rows whose full support lies inside the truncation (`σ_i < size`).
    pub complete_rows: Vec<usize>,
    pub growth: GrowthSequence,
}

impl CounterexampleMatrix {
    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    /// `Σ_{i,j < k} m_ij²` over a leading section.
    pub fn partial_square_sum(&self, k: usize) -> f64 {
        self.rows[..k.min(self.size)]
            .iter()
            .flat_map(|row| row.iter())
            .filter(|(col, _)| *col < k)
            .map(|(_, v)| v * v)
            .sum()
    }

    /// Dense copy of the leading `k × k` section.
    pub fn dense_section(&self, k: usize) -> CMatrix {
        let k = k.min(self.size);
        let mut dense = CMatrix::zeros(k, k);
        for (i, row) in self.rows[..k].iter().enumerate() {
            for &(j, v) in row {
                if j < k {
                    dense[(i, j)] = Complex64::new(v, 0.0);
                }
            }
        }
        dense
    }

    /// Sparse symmetric matrix-vector product on the leading `k` section.
    fn section_matvec(&self, k: usize, x: &[f64], y: &mut [f64]) {
        y[..k].fill(0.0);
        for (i, row) in self.rows[..k].iter().enumerate() {
            let mut acc = 0.0;
            for &(j, v) in row {
                if j < k {
                    acc += v * x[j];
                }
            }
            y[i] = acc;
        }
    }
}

/// Builds the truncated matrix for a growth sequence: row `i` holds `b_i`
/// on columns `(σ_{i-1}, σ_i]`, the mirror value at column `φ(i)`, and zero
/// diagonal.
pub fn build(spec: GrowthSpec, size: usize) -> Result<CounterexampleMatrix> {
    if size == 0 {
        return Err(Error::Input("truncation size must be at least 1".into()));
    }
    let growth = GrowthSequence::materialize(spec, size)?;
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); size];
    for i in 0..size {
        if i >= 1 {
            let parent = growth.phi(i);
            rows[i].push((parent, growth.b(parent)));
        }
        // The right part exists inside the truncation only for rows whose
        // block was materialized; later rows start beyond the window.
        if i < growth.len() {
            let lo = if i == 0 { 0 } else { growth.sigma(i - 1) };
            let hi = growth.sigma(i);
            for j in (lo + 1)..=hi {
                if (j as usize) < size && (j as usize) != i {
                    rows[i].push((j as usize, growth.b(i)));
                }
            }
        }
        rows[i].sort_by_key(|&(col, _)| col);
    }
    let complete_rows = (0..size)
        .filter(|&i| i < growth.len() && growth.sigma(i) < size as u64)
        .collect();
    Ok(CounterexampleMatrix {
        size,
        rows,
        complete_rows,
        growth,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub passed: bool,
    pub max_defect: f64,
}

/// Verification of the construction's four defining properties on a
/// truncated section.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    /// `m_ij = m_ji` with zero diagonal and entries in `[0, 1]`.
    pub symmetry: PropertyCheck,
    /// Row `i` has at most `a_i + 1` nonzeros.
    pub support: PropertyCheck,
    /// Complete rows sum to 1; exact when the recurrence is dyadic.
    pub row_sums: PropertyCheck,
    /// Row sums verified symbolically in dyadic arithmetic (when available).
    pub row_sums_exact: Option<bool>,
    /// Partial square sum below 1, monotone in the section size, below the
    /// analytic bound when that bound holds.
    pub square_sum: PropertyCheck,
    pub partial_square_sum: f64,
    pub square_sum_bound: f64,
    /// Whether the analytic bound itself is below 1.
    pub bound_below_one: bool,
    pub passed: bool,
}

pub fn verify_properties(m: &CounterexampleMatrix) -> PropertyReport {
    let size = m.size;

    let mut symmetry_defect = 0.0f64;
    for (i, row) in m.rows.iter().enumerate() {
        for &(j, v) in row {
            if !(0.0..=1.0).contains(&v) || (j == i && v != 0.0) {
                symmetry_defect = f64::INFINITY;
                continue;
            }
            let mirrored = m.rows[j]
                .iter()
                .find(|&&(col, _)| col == i)
                .map(|&(_, w)| w);
            match mirrored {
                Some(w) => symmetry_defect = symmetry_defect.max((v - w).abs()),
                None => symmetry_defect = f64::INFINITY,
            }
        }
    }

    let support_ok = m.rows.iter().enumerate().all(|(i, row)| {
        let bound = if i < m.growth.len() {
            m.growth.a(i) + 1
        } else {
            // Rows past the materialized blocks hold only their mirror.
            1
        };
        row.len() as u64 <= bound
    });

    let mut row_sum_defect = 0.0f64;
    for &i in &m.complete_rows {
        let sum: f64 = m.rows[i].iter().map(|&(_, v)| v).sum();
        row_sum_defect = row_sum_defect.max((sum - 1.0).abs());
    }
    // Symbolic identity b_{φ(i)} + a_i · b_i = 1 on complete rows.
    let row_sums_exact = if m.growth.is_dyadic() {
        let all = m.complete_rows.iter().all(|&i| {
            let own = m
                .growth
                .b_exact(i)
                .and_then(|b| b.mul_int(m.growth.a(i) as u128));
            let total = if i == 0 {
                own
            } else {
                let parent = m.growth.phi(i);
                own.and_then(|v| m.growth.b_exact(parent).and_then(|p| v.add(p)))
            };
            total.map(Dyadic::is_one).unwrap_or(false)
        });
        Some(all)
    } else {
        None
    };

    let bound = m.growth.square_sum_bound();
    let full = m.partial_square_sum(size);
    let mut monotone = true;
    let mut prev = 0.0;
    let mut k = 1;
    while k <= size {
        let s = m.partial_square_sum(k);
        if s < prev - 1e-15 {
            monotone = false;
        }
        prev = s;
        k *= 2;
    }
    let bound_below_one = bound < 1.0;
    let square_ok = full < 1.0 && monotone && (!bound_below_one || full <= bound + 1e-12);

    let symmetry = PropertyCheck {
        passed: symmetry_defect == 0.0,
        max_defect: symmetry_defect,
    };
    let support = PropertyCheck {
        passed: support_ok,
        max_defect: 0.0,
    };
    let row_sums = PropertyCheck {
        passed: row_sum_defect <= 1e-14 && row_sums_exact != Some(false),
        max_defect: row_sum_defect,
    };
    let square_sum = PropertyCheck {
        passed: square_ok,
        max_defect: full,
    };
    let passed = symmetry.passed && support.passed && row_sums.passed && square_sum.passed;
    PropertyReport {
        symmetry,
        support,
        row_sums,
        row_sums_exact,
        square_sum,
        partial_square_sum: full,
        square_sum_bound: bound,
        bound_below_one,
        passed,
    }
}

/// All eigenvalues of the dense `k × k` section, ascending. Dense
/// conversion is capped at 4096.
pub fn truncated_spectrum(m: &CounterexampleMatrix, k: usize) -> Result<Vec<f64>> {
    if k > 4096 {
        return Err(Error::Input(format!(
            "dense section eigensolve is capped at 4096, got {k}"
        )));
    }
    let dense = m.dense_section(k);
    Ok(linalg::hermitian_eigenvalues(&dense))
}

/// Extreme-eigenvalue estimate from the Lanczos sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremeEigenvalues {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub max_abs: f64,
    /// Residual bound `|β_m s_m|` for the extreme Ritz pairs.
    pub residual: f64,
    pub iterations: usize,
}

/// Extreme eigenvalues of the leading `k × k` section by Lanczos iteration
/// with full reorthogonalization on the sparse rows.
pub fn max_abs_eigenvalue(m: &CounterexampleMatrix, k: usize) -> Result<ExtremeEigenvalues> {
    let k = k.min(m.size);
    if k == 0 {
        return Err(Error::Input("empty section".into()));
    }
    let max_iter = k.min(300);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter);
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    // Deterministic start vector with components on every coordinate.
    let mut v: Vec<f64> = (0..k)
        .map(|i| 1.0 + 0.5 * ((i * 2654435761) % 1013) as f64 / 1013.0)
        .collect();
    let norm = (v.iter().map(|x| x * x).sum::<f64>()).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let mut w = vec![0.0; k];
    let mut extremes = (0.0f64, 0.0f64);
    let mut residual = f64::INFINITY;
    for it in 0..max_iter {
        m.section_matvec(k, &v, &mut w);
        if let Some(prev) = basis.last() {
            let beta = betas.last().copied().unwrap_or(0.0);
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= beta * pi;
            }
        }
        let alpha: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= alpha * vi;
        }
        basis.push(v.clone());
        alphas.push(alpha);
        // Full reorthogonalization.
        for q in &basis {
            let c: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
        let beta = (w.iter().map(|x| x * x).sum::<f64>()).sqrt();

        let check_now = beta < 1e-14 || it + 1 == max_iter || (it + 1) % 10 == 0;
        if check_now {
            let (lo, hi, res) = tridiagonal_extremes(&alphas, &betas, beta);
            let stable = (lo - extremes.0).abs() < 1e-13 && (hi - extremes.1).abs() < 1e-13;
            extremes = (lo, hi);
            residual = res;
            if beta < 1e-14 || stable && it > 20 {
                return Ok(ExtremeEigenvalues {
                    lambda_min: lo,
                    lambda_max: hi,
                    max_abs: lo.abs().max(hi.abs()),
                    residual: res,
                    iterations: it + 1,
                });
            }
        }
        betas.push(beta);
        v = w.iter().map(|x| x / beta).collect();
    }
    Ok(ExtremeEigenvalues {
        lambda_min: extremes.0,
        lambda_max: extremes.1,
        max_abs: extremes.0.abs().max(extremes.1.abs()),
        residual,
        iterations: max_iter,
    })
}

/// Extreme eigenvalues of the Lanczos tridiagonal plus the classic residual
/// bound `|β_m · (last component of the extreme Ritz vector)|`.
fn tridiagonal_extremes(alphas: &[f64], betas: &[f64], last_beta: f64) -> (f64, f64, f64) {
    let m = alphas.len();
    let mut tri = nalgebra::DMatrix::<f64>::zeros(m, m);
    for (i, &a) in alphas.iter().enumerate() {
        tri[(i, i)] = a;
    }
    for (i, &b) in betas.iter().take(m - 1).enumerate() {
        tri[(i, i + 1)] = b;
        tri[(i + 1, i)] = b;
    }
    let se = tri.symmetric_eigen();
    let mut lo = (f64::INFINITY, 0usize);
    let mut hi = (f64::NEG_INFINITY, 0usize);
    for (idx, &val) in se.eigenvalues.iter().enumerate() {
        if val < lo.0 {
            lo = (val, idx);
        }
        if val > hi.0 {
            hi = (val, idx);
        }
    }
    let res_lo = (last_beta * se.eigenvectors[(m - 1, lo.1)]).abs();
    let res_hi = (last_beta * se.eigenvectors[(m - 1, hi.1)]).abs();
    (lo.0, hi.0, res_lo.max(res_hi))
}

/// Eigencheck report for the all-ones sequence.
#[derive(Debug, Clone, Serialize)]
pub struct EigencheckReport {
    pub complete_rows: Vec<usize>,
    pub incomplete_rows: usize,
    /// Every checked coordinate equals 1.0 exactly in f64.
    pub exact: bool,
    pub max_deviation: f64,
}

/// Applies the extension to the all-ones sequence on rows whose support
/// lies inside the truncation: each such coordinate must equal 1, which
/// certifies `|e⟩` as a generalized eigenvector for eigenvalue 1 row by
/// row.
pub fn eigencheck_e(m: &CounterexampleMatrix, k: usize) -> EigencheckReport {
    let k = k.min(m.size);
    let complete: Vec<usize> = m
        .complete_rows
        .iter()
        .copied()
        .filter(|&i| i < k && m.growth.sigma(i) < k as u64)
        .collect();
    let mut max_deviation = 0.0f64;
    let mut exact = true;
    for &i in &complete {
        let coord: f64 = m.rows[i]
            .iter()
            .filter(|&&(j, _)| j < k)
            .map(|&(_, v)| v)
            .sum();
        if coord != 1.0 {
            exact = false;
        }
        max_deviation = max_deviation.max((coord - 1.0).abs());
    }
    EigencheckReport {
        incomplete_rows: k - complete.len(),
        complete_rows: complete,
        exact,
        max_deviation,
    }
}

/// Dense section wrapped as an operator for the generalized-eigenvector
/// interface.
pub fn section_operator(m: &CounterexampleMatrix, k: usize) -> Result<OperatorMatrix> {
    OperatorMatrix::new(m.dense_section(k))
}
