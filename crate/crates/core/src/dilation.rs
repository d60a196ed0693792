//! The measure-theoretic Naimark dilation `(K, F, J)`, its verifier, the
//! uniqueness unitary between any two dilations of the same measure, and the
//! spectral-vs-semispectral detector.
//!
//! `K` is realized concretely as the coefficient space of the quotiented
//! spanning family `{e_i χ_{{ω}}}`, ordered atom-major then basis-index. That
//! ordering makes every `F({ω})` a 0/1 diagonal block projection and turns
//! minimality into a rank check.

use num_complex::Complex64;
use serde::Serialize;

use crate::forms::{self, Form};
use crate::linalg;
use crate::psfm::{self, DiscretePSFM, WeightSequence};
use crate::{CMatrix, Error, Result};

/// A Naimark dilation: the dimension of `K`, one projection matrix per atom,
/// and the embedding `J : V → K`.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    pub kdim: usize,
    /// One `kdim × kdim` projection per atom.
    pub f_atoms: Vec<CMatrix>,
    /// `kdim × dim` embedding.
    pub j: CMatrix,
    /// For each K-coordinate, the spanning vector `(atom index, basis index)`
    /// that survived the quotient.
    pub basis_provenance: Vec<(usize, usize)>,
}

/// Builds the dilation of `E`: assembles the `(M·N) × (M·N)` Gram matrix
/// `θ((e_i, ω), (e_j, ω′)) = δ_{ωω′} C_ω(e_i, e_j) μ({ω})`, quotients by its
/// null space with the rank-revealing Gram–Schmidt, and reads off the atom
/// projections and the embedding `J φ = [φ χ_Ω]`.
pub fn dilate(e: &DiscretePSFM, alpha: &WeightSequence, tol_rank: f64) -> Result<NaimarkDilation> {
    let n = e.dim();
    let m = e.len();
    let measure = psfm::mu(e, alpha)?;
    let densities = psfm::density(e, alpha)?;

    // Block-diagonal Gram of the spanning family; the (ω, ω) block is
    // C_ω μ({ω}), which is the atom form itself away from μ-null atoms.
    let mut theta = CMatrix::zeros(m * n, m * n);
    for (w, c) in densities.iter().enumerate() {
        let block = c.matrix().scale(measure.weights[w]);
        theta.view_mut((w * n, w * n), (n, n)).copy_from(&block);
    }
    let q = forms::orthonormalize(&Form::new(theta)?, tol_rank)?;
    let kdim = q.rank;

    // Survivors of the block-diagonal Gram are supported inside single
    // blocks, so each K-coordinate belongs to the atom of its seed index.
    let basis_provenance: Vec<(usize, usize)> = q
        .survivor_indices
        .iter()
        .map(|&t| (t / n, t % n))
        .collect();

    let mut f_atoms = vec![CMatrix::zeros(kdim, kdim); m];
    for (k, &(atom, _)) in basis_provenance.iter().enumerate() {
        f_atoms[atom][(k, k)] = Complex64::new(1.0, 0.0);
    }

    let mut j = CMatrix::zeros(kdim, n);
    for k in 0..kdim {
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for w in 0..m {
                acc += q.functionals[(k, w * n + i)];
            }
            j[(k, i)] = acc;
        }
    }

    Ok(NaimarkDilation {
        kdim,
        f_atoms,
        j,
        basis_provenance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DilationCheck {
    pub passed: bool,
    pub max_defect: f64,
}

/// Itemized verification report for a dilation against its measure.
#[derive(Debug, Clone, Serialize)]
pub struct DilationReport {
    pub kdim: usize,
    /// `⟨Jφ|F({ω})Jψ⟩ = E_{{ω}}(φ, ψ)` on all basis pairs.
    pub reconstruction: DilationCheck,
    /// Each `F` idempotent and self-adjoint, mutually orthogonal, summing to I.
    pub projection: DilationCheck,
    /// The vectors `F({ω}) J e_i` span all of `K`.
    pub minimality: DilationCheck,
    /// `‖J e_i‖² = E_Ω(e_i, e_i)`.
    pub norm_eq: DilationCheck,
    pub passed: bool,
}

/// Checks a dilation against `E`: reconstruction on basis pairs,
/// projection-valuedness, minimality of `K`, and the embedding norm
/// identity. Failures are itemized in the report, never raised.
pub fn verify_dilation(
    e: &DiscretePSFM,
    d: &NaimarkDilation,
    tol: f64,
) -> Result<DilationReport> {
    let n = e.dim();
    let m = e.len();
    if d.j.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "dilation embedding columns",
            expected: n,
            got: d.j.ncols(),
        });
    }
    if d.f_atoms.len() != m {
        return Err(Error::DimensionMismatch {
            context: "dilation atom count",
            expected: m,
            got: d.f_atoms.len(),
        });
    }
    if d.j.nrows() != d.kdim || d.f_atoms.iter().any(|f| f.nrows() != d.kdim || f.ncols() != d.kdim)
    {
        return Err(Error::DimensionMismatch {
            context: "dilation space",
            expected: d.kdim,
            got: d.j.nrows(),
        });
    }

    let total = e.total();
    let scale = total.max_abs().max(1.0);

    // (i) reconstruction on all basis pairs, atom by atom.
    let mut rec_defect = 0.0f64;
    for (w, atom) in e.atoms().iter().enumerate() {
        let gram = d.j.adjoint() * &d.f_atoms[w] * &d.j;
        rec_defect = rec_defect.max(linalg::max_abs(&(&gram - atom.form.matrix())));
    }

    // (ii) projection-valuedness: F² = F = F^H, mutual orthogonality, sum I.
    let mut proj_defect = 0.0f64;
    let mut sum = CMatrix::zeros(d.kdim, d.kdim);
    for f in &d.f_atoms {
        proj_defect = proj_defect.max(linalg::max_abs(&(f * f - f)));
        proj_defect = proj_defect.max(linalg::hermitian_defect(f));
        sum += f;
    }
    proj_defect = proj_defect.max(linalg::identity_defect(&sum));
    for a in 0..m {
        for b in (a + 1)..m {
            proj_defect = proj_defect.max(linalg::max_abs(&(&d.f_atoms[a] * &d.f_atoms[b])));
        }
    }

    // (iii) minimality: the family {F({ω}) J e_i} spans K.
    let mut outer = CMatrix::zeros(d.kdim, d.kdim);
    for f in &d.f_atoms {
        let block = f * &d.j;
        outer += &block * block.adjoint();
    }
    let span_scale = linalg::max_abs(&outer).max(1e-300);
    let span_rank = linalg::eigen_rank(&outer, tol.max(1e-12) * span_scale);
    let minimality_defect = d.kdim.abs_diff(span_rank) as f64;

    // (iv) ‖J e_i‖² = E_Ω(e_i, e_i).
    let jj = d.j.adjoint() * &d.j;
    let mut norm_defect = 0.0f64;
    for i in 0..n {
        norm_defect = norm_defect.max((jj[(i, i)].re - total.diagonal(i)).abs());
    }

    let reconstruction = DilationCheck {
        passed: rec_defect <= tol * scale,
        max_defect: rec_defect,
    };
    let projection = DilationCheck {
        passed: proj_defect <= tol,
        max_defect: proj_defect,
    };
    let minimality = DilationCheck {
        passed: minimality_defect == 0.0,
        max_defect: minimality_defect,
    };
    let norm_eq = DilationCheck {
        passed: norm_defect <= tol * scale,
        max_defect: norm_defect,
    };
    let passed =
        reconstruction.passed && projection.passed && minimality.passed && norm_eq.passed;
    Ok(DilationReport {
        kdim: d.kdim,
        reconstruction,
        projection,
        minimality,
        norm_eq,
        passed,
    })
}

/// The intertwining unitary between two dilations of the same measure,
/// together with the worst defect across its defining identities.
#[derive(Debug, Clone)]
pub struct UnitaryEquivalence {
    pub u: CMatrix,
    pub unitarity_defect: f64,
    pub embedding_defect: f64,
    pub intertwining_defect: f64,
    pub max_defect: f64,
}

/// Constructs the unitary `U : K_1 → K_2` determined on the spanning family
/// by `U F_1(X) J_1 φ = F_2(X) J_2 φ`. The isometry property is forced by
/// both Grams equaling the block Gram of `E`; the common orthonormalization
/// coefficients therefore map both families onto orthonormal bases, and `U`
/// is their change of basis. Fails if dimensions differ or any defect
/// exceeds `tol`.
pub fn unitary_equivalence(
    d1: &NaimarkDilation,
    d2: &NaimarkDilation,
    e: &DiscretePSFM,
    tol: f64,
) -> Result<UnitaryEquivalence> {
    if d1.kdim != d2.kdim {
        return Err(Error::DimensionMismatch {
            context: "dilation dimensions",
            expected: d1.kdim,
            got: d2.kdim,
        });
    }
    let n = e.dim();
    let m = e.len();

    // Gram of the spanning family {F(ω) J e_i} in either dilation is the
    // block-diagonal matrix of atom forms.
    let mut theta = CMatrix::zeros(m * n, m * n);
    for (w, atom) in e.atoms().iter().enumerate() {
        theta
            .view_mut((w * n, w * n), (n, n))
            .copy_from(atom.form.matrix());
    }
    let q = forms::orthonormalize(&Form::new(theta)?, 1e-10)?;
    if q.rank != d1.kdim {
        return Err(Error::EquivalenceFailed {
            max_defect: q.rank.abs_diff(d1.kdim) as f64,
            tol,
        });
    }

    let family = |d: &NaimarkDilation| -> CMatrix {
        let mut v = CMatrix::zeros(d.kdim, m * n);
        for w in 0..m {
            let block = &d.f_atoms[w] * &d.j;
            v.view_mut((0, w * n), (d.kdim, n)).copy_from(&block);
        }
        v
    };
    let q1 = family(d1) * &q.vectors;
    let q2 = family(d2) * &q.vectors;
    let iso_defect = linalg::identity_defect(&(q1.adjoint() * &q1))
        .max(linalg::identity_defect(&(q2.adjoint() * &q2)));

    let u = &q2 * q1.adjoint();
    let unitarity_defect = linalg::identity_defect(&(u.adjoint() * &u))
        .max(linalg::identity_defect(&(&u * u.adjoint())))
        .max(iso_defect);
    let embedding_defect = linalg::max_abs(&(&u * &d1.j - &d2.j));
    let mut intertwining_defect = 0.0f64;
    for w in 0..m {
        intertwining_defect =
            intertwining_defect.max(linalg::max_abs(&(&u * &d1.f_atoms[w] - &d2.f_atoms[w] * &u)));
    }
    let max_defect = unitarity_defect
        .max(embedding_defect)
        .max(intertwining_defect);
    let scale = e.total().max_abs().max(1.0);
    if max_defect > tol * scale {
        return Err(Error::EquivalenceFailed { max_defect, tol });
    }
    Ok(UnitaryEquivalence {
        u,
        unitarity_defect,
        embedding_defect,
        intertwining_defect,
        max_defect,
    })
}

/// Detects whether a semispectral measure is spectral from its dilation:
/// true iff `kdim = N` and `J` is unitary. The verdict is cross-checked
/// against the idempotency of every atom matrix; a disagreement is an
/// internal inconsistency.
pub fn is_spectral(e: &DiscretePSFM, d: &NaimarkDilation, tol: f64) -> Result<bool> {
    if !e.is_semispectral(tol.max(1e-12)) {
        return Err(Error::Precondition(
            "is_spectral requires a normalized (semispectral) measure: E_Ω = I".into(),
        ));
    }
    let n = e.dim();
    let dilation_route = d.kdim == n
        && linalg::identity_defect(&(d.j.adjoint() * &d.j)) <= tol
        && linalg::identity_defect(&(&d.j * d.j.adjoint())) <= tol;

    let oracle = e.atoms().iter().all(|atom| {
        let a = atom.form.matrix();
        linalg::max_abs(&(a * a - a)) <= tol.max(1e-12) * atom.form.max_abs().max(1.0)
    });

    if dilation_route != oracle {
        return Err(Error::Inconsistency(format!(
            "spectral detectors disagree: dilation route {dilation_route}, idempotency oracle {oracle}"
        )));
    }
    Ok(dilation_route)
}
