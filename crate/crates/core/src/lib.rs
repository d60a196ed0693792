//! Discrete positive sesquilinear form measures and their spectral machinery.
//!
//! The library works over a finite test space `V_N = span(e_0, ..., e_{N-1})`
//! with complex coefficients and a finite atomic outcome space
//! `Ω = {ω_1, ..., ω_M}`. Everything downstream of those two truncations is
//! computed exactly (up to floating point): the scalar measure μ and the
//! per-atom densities `C_ω`, the Naimark dilation `(K, F, J)` with its
//! verification and uniqueness unitary, the pointwise rank decomposition and
//! its direct-integral model, trace-one density operators along two
//! independent routes, weighted-shift moment matrices on the circle,
//! generalized eigenvector expansions of finite normal matrices, and the
//! sparse symmetric counterexample matrix whose generalized eigenvalue 1
//! stays outside the spectrum of every finite section.
//!
//! # Conventions
//!
//! Sesquilinear forms are antilinear in the **first** argument:
//! `Φ(φ, ψ) = Σ_{m,n} conj(a_m) M[m][n] b_n` for `φ = Σ a_m e_m`,
//! `ψ = Σ b_n e_n`. Functionals are stored as rows `row[n] = ⟨d|e_n⟩`; the
//! ket coefficient sequence of `|d⟩` is the entrywise conjugate of that row,
//! so `⟨d|φ⟩ = row · a` (plain dot product) and the matrix of the form
//! `|d⟩⟨d|` is `d d^H`.

pub mod counterexample;
pub mod dilation;
pub mod eigen;
mod error;
pub mod forms;
pub mod linalg;
pub mod pointwise;
pub mod psfm;
pub mod shifts;
pub mod traceclass;

pub use error::{Error, Result};

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
/// Dense complex column vector used throughout.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
