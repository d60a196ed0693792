//! Per-atom rank decomposition of the densities `C_ω` and the
//! direct-integral model it induces.
//!
//! Each atom is decomposed by the same rank-revealing Gram–Schmidt used for
//! single forms: survivors `g_k(ω)`, functional rows
//! `d_rows[k][n] = ⟨d_k(ω)|e_n⟩ = C_ω(g_k(ω), e_n)`, and the multiplicity
//! `n(ω)` = ε-rank of `C_ω`. The `√μ({ω})` weighting is folded into the
//! model embedding `J_1` so the block space carries the plain Euclidean
//! inner product; the unweighted rows are retained because the trace-class
//! and eigenexpansion layers use them unweighted.

use num_complex::Complex64;
use serde::Serialize;

use crate::dilation::{self, NaimarkDilation};
use crate::forms;
use crate::linalg;
use crate::psfm::{self, DiscretePSFM, MuMeasure, WeightSequence};
use crate::{CMatrix, CVector, Error, Result};

/// Rank data of one atom's density `C_ω`.
#[derive(Debug, Clone)]
pub struct AtomDecomposition {
    pub label: String,
    /// Multiplicity `n(ω)`.
    pub rank: usize,
    /// `n(ω) × dim`; row `k` holds `⟨d_k(ω)|e_n⟩`.
    pub d_rows: CMatrix,
    /// `dim × n(ω)`; column `k` is `g_k(ω)`.
    pub g_vectors: CMatrix,
}

/// The pointwise decomposition of a measure: one rank block per atom plus
/// the scalar measure weights.
#[derive(Debug, Clone)]
pub struct PointwiseDecomposition {
    pub dim: usize,
    pub atoms: Vec<AtomDecomposition>,
    pub mu: MuMeasure,
}

impl PointwiseDecomposition {
    /// `Σ_ω n(ω)`, the dimension of the block space.
    pub fn total_rank(&self) -> usize {
        self.atoms.iter().map(|a| a.rank).sum()
    }
}

/// Decomposes every density `C_ω`. μ-null atoms are materialized with
/// `n(ω) = 0` so atom indices stay stable across modules.
pub fn decompose(
    e: &DiscretePSFM,
    alpha: &WeightSequence,
    tol_rank: f64,
) -> Result<PointwiseDecomposition> {
    let measure = psfm::mu(e, alpha)?;
    let densities = psfm::density(e, alpha)?;
    let atoms = e
        .atoms()
        .iter()
        .zip(&densities)
        .map(|(atom, c)| {
            let q = forms::orthonormalize(c, tol_rank)?;
            Ok(AtomDecomposition {
                label: atom.label.clone(),
                rank: q.rank,
                d_rows: q.functionals,
                g_vectors: q.vectors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointwiseDecomposition {
        dim: e.dim(),
        atoms,
        mu: measure,
    })
}

/// `Σ_{ω∈X} Σ_{k<n(ω)} ⟨φ|d_k(ω)⟩ ⟨d_k(ω)|ψ⟩ μ({ω})`, which reproduces
/// `E_X(φ, ψ)`. With `φ = ψ` the value is real and nonnegative.
pub fn reconstruct(
    p: &PointwiseDecomposition,
    x: &[usize],
    phi: &CVector,
    psi: &CVector,
) -> Result<Complex64> {
    if phi.len() != p.dim || psi.len() != p.dim {
        return Err(Error::DimensionMismatch {
            context: "reconstruct arguments",
            expected: p.dim,
            got: phi.len().max(psi.len()),
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for &w in x {
        let atom = &p.atoms[w];
        let dphi = &atom.d_rows * phi;
        let dpsi = &atom.d_rows * psi;
        let mut block = Complex64::new(0.0, 0.0);
        for k in 0..atom.rank {
            block += dphi[k].conj() * dpsi[k];
        }
        acc += block.scale(p.mu.weights[w]);
    }
    Ok(acc)
}

/// The direct-integral model `(L²_{n(·)}, F_1, J_1)` in block coordinates:
/// `J_1 φ` has atom-ω block `(⟨d_k(ω)|φ⟩ √μ({ω}))_k` and `F_1({ω})` is the
/// coordinate projection onto that block.
#[derive(Debug, Clone)]
pub struct DirectIntegralModel {
    /// Fiber dimension `n(ω)` per atom.
    pub block_dims: Vec<usize>,
    /// `Σ n(ω) × dim` embedding.
    pub j1: CMatrix,
    /// Block coordinate projections, one per atom.
    pub f1_atoms: Vec<CMatrix>,
}

impl DirectIntegralModel {
    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    /// View the model as a Naimark dilation (the triple it realizes), with
    /// provenance `(atom index, fiber index)`.
    pub fn to_dilation(&self) -> NaimarkDilation {
        let mut provenance = Vec::with_capacity(self.total_dim());
        for (w, &b) in self.block_dims.iter().enumerate() {
            for k in 0..b {
                provenance.push((w, k));
            }
        }
        NaimarkDilation {
            kdim: self.total_dim(),
            f_atoms: self.f1_atoms.clone(),
            j: self.j1.clone(),
            basis_provenance: provenance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelCheck {
    pub passed: bool,
    pub max_defect: f64,
}

/// Itemized checks for the direct-integral model.
#[derive(Debug, Clone, Serialize)]
pub struct ModelChecks {
    /// `⟨J_1 φ | F_1({ω}) J_1 ψ⟩ = E_{{ω}}(φ, ψ)` on basis pairs.
    pub reconstruction: ModelCheck,
    /// The family `{F_1({ω}) J_1 e_i}` spans the full block space.
    pub density: ModelCheck,
    /// Unitary equivalence with the Gram-route dilation.
    pub equivalence: ModelCheck,
    pub passed: bool,
}

/// Builds the direct-integral model of a decomposition and checks it against
/// the measure it came from, including unitary equivalence with the
/// Gram-route dilation.
pub fn direct_integral_model(
    p: &PointwiseDecomposition,
    e: &DiscretePSFM,
    alpha: &WeightSequence,
    tol: f64,
) -> Result<(DirectIntegralModel, ModelChecks)> {
    if e.dim() != p.dim || e.len() != p.atoms.len() {
        return Err(Error::DimensionMismatch {
            context: "decomposition vs measure",
            expected: e.dim(),
            got: p.dim,
        });
    }
    let total: usize = p.total_rank();
    let block_dims: Vec<usize> = p.atoms.iter().map(|a| a.rank).collect();

    let mut j1 = CMatrix::zeros(total, p.dim);
    let mut f1_atoms = Vec::with_capacity(p.atoms.len());
    let mut offset = 0;
    for (w, atom) in p.atoms.iter().enumerate() {
        let sqrt_mu = p.mu.weights[w].sqrt();
        j1.view_mut((offset, 0), (atom.rank, p.dim))
            .copy_from(&atom.d_rows.scale(sqrt_mu));
        let mut f = CMatrix::zeros(total, total);
        for k in 0..atom.rank {
            f[(offset + k, offset + k)] = Complex64::new(1.0, 0.0);
        }
        f1_atoms.push(f);
        offset += atom.rank;
    }
    let model = DirectIntegralModel {
        block_dims,
        j1,
        f1_atoms,
    };

    // (i) blockwise reconstruction on basis pairs.
    let scale = e.total().max_abs().max(1.0);
    let mut rec_defect = 0.0f64;
    let mut off = 0;
    for (w, atom) in p.atoms.iter().enumerate() {
        let block = model.j1.view((off, 0), (atom.rank, p.dim));
        let gram = block.adjoint() * block;
        rec_defect = rec_defect.max(linalg::max_abs(&(&gram - e.atoms()[w].form.matrix())));
        off += atom.rank;
    }

    // (ii) density: each atom block of J_1 has full row rank n(ω).
    let mut density_defect = 0.0f64;
    let mut off = 0;
    for atom in &p.atoms {
        if atom.rank > 0 {
            let block = model.j1.view((off, 0), (atom.rank, p.dim)).into_owned();
            let gram = &block * block.adjoint();
            let gscale = linalg::max_abs(&gram).max(1e-300);
            let rank = linalg::eigen_rank(&gram, tol.max(1e-12) * gscale);
            density_defect = density_defect.max(atom.rank.abs_diff(rank) as f64);
        }
        off += atom.rank;
    }

    // (iii) unitary equivalence with the Gram-route dilation.
    let gram_dilation = dilation::dilate(e, alpha, tol)?;
    let (eq_defect, eq_passed) =
        match dilation::unitary_equivalence(&gram_dilation, &model.to_dilation(), e, tol) {
            Ok(eq) => (eq.max_defect, true),
            Err(Error::EquivalenceFailed { max_defect, .. }) => (max_defect, false),
            Err(other) => return Err(other),
        };

    let reconstruction = ModelCheck {
        passed: rec_defect <= tol * scale,
        max_defect: rec_defect,
    };
    let density = ModelCheck {
        passed: density_defect == 0.0,
        max_defect: density_defect,
    };
    let equivalence = ModelCheck {
        passed: eq_passed,
        max_defect: eq_defect,
    };
    let passed = reconstruction.passed && density.passed && equivalence.passed;
    Ok((
        model,
        ModelChecks {
            reconstruction,
            density,
            equivalence,
            passed,
        },
    ))
}

/// Orthonormal-basis criterion for a semispectral measure: the measure is
/// spectral iff the `N` vectors `J_1 e_n` form an orthonormal basis of the
/// block space (Gram = I and count = `Σ n(ω)`).
pub fn onb_check(p: &PointwiseDecomposition, e: &DiscretePSFM, tol: f64) -> Result<bool> {
    if !e.is_semispectral(tol.max(1e-12)) {
        return Err(Error::Precondition(
            "onb_check requires a normalized (semispectral) measure: E_Ω = I".into(),
        ));
    }
    let mut j1 = CMatrix::zeros(p.total_rank(), p.dim);
    let mut off = 0;
    for (w, atom) in p.atoms.iter().enumerate() {
        j1.view_mut((off, 0), (atom.rank, p.dim))
            .copy_from(&atom.d_rows.scale(p.mu.weights[w].sqrt()));
        off += atom.rank;
    }
    let gram_ok = linalg::identity_defect(&(j1.adjoint() * &j1)) <= tol;
    Ok(gram_ok && p.total_rank() == p.dim)
}
