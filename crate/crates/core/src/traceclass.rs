//! Extension machinery on the Hilbert completion of the test space: the
//! diagonal trace-class operator Λ, the `H_γ` norm scale, and the trace-one
//! density operators `T(ω)`, computed along two independent routes and
//! cross-checked entrywise.
//!
//! Route one assembles `T(ω) = Σ_k |h_k(ω)⟩⟨h_k(ω)|` from the pointwise
//! functionals, with `h_k = Λ^{1/2} d_k` in ket coordinates. Route two is
//! the operator-measure route: `F({ω}) = Λ^{1/2} E_0({ω}) Λ^{1/2}` and
//! `T(ω) = F({ω}) / μ({ω})`, decomposed by a descending Hermitian
//! eigendecomposition. Both equal `Λ^{1/2} C_ω Λ^{1/2}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::linalg;
use crate::pointwise::PointwiseDecomposition;
use crate::psfm::{self, DiscretePSFM, WeightSequence};
use crate::{CMatrix, CVector, Error, Result};

/// The diagonal operator `Λ = Σ β_n |e_n⟩⟨e_n|` with
/// `β_n = α_n / (1 + E_Ω(e_n, e_n))`.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaOperator {
    pub betas: Vec<f64>,
}

impl LambdaOperator {
    pub fn dim(&self) -> usize {
        self.betas.len()
    }

    pub fn trace(&self) -> f64 {
        self.betas.iter().sum()
    }

    /// Diagonal matrix of `β_n^p`.
    pub fn power_matrix(&self, p: f64) -> CMatrix {
        CMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                Complex64::new(self.betas[i].powf(p), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// `β_n = α_n / (1 + E_Ω(e_n, e_n))`. For a semispectral measure this is
/// `α_n / 2`.
pub fn lambda_operator(e: &DiscretePSFM, alpha: &WeightSequence) -> Result<LambdaOperator> {
    if alpha.len() != e.dim() {
        return Err(Error::DimensionMismatch {
            context: "weight sequence",
            expected: e.dim(),
            got: alpha.len(),
        });
    }
    let total = e.total();
    let betas = (0..e.dim())
        .map(|n| alpha.alphas()[n] / (1.0 + total.diagonal(n)))
        .collect();
    Ok(LambdaOperator { betas })
}

/// `‖φ‖_{H_γ} = √(Σ |a_n|² / β_n^γ)`; γ = 0 recovers the Euclidean norm.
pub fn h_gamma_norm(phi: &CVector, lambda: &LambdaOperator, gamma: f64) -> Result<f64> {
    if phi.len() != lambda.dim() {
        return Err(Error::DimensionMismatch {
            context: "h_gamma_norm argument",
            expected: lambda.dim(),
            got: phi.len(),
        });
    }
    let sum: f64 = phi
        .iter()
        .zip(&lambda.betas)
        .map(|(a, &b)| a.norm_sqr() / b.powf(gamma))
        .sum();
    Ok(sum.sqrt())
}

/// A trace-one density operator for one atom, together with the vectors
/// whose outer products assemble it.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub label: String,
    /// `dim × dim` positive matrix with unit trace on μ-positive atoms.
    pub t: CMatrix,
    /// `dim × n(ω)`; column `k` is `h_k(ω)`.
    pub h_vectors: CMatrix,
}

impl DensityOperator {
    pub fn trace(&self) -> f64 {
        (0..self.t.nrows()).map(|i| self.t[(i, i)].re).sum()
    }

    pub fn rank(&self, tol: f64) -> usize {
        let scale = linalg::max_abs(&self.t).max(1e-300);
        linalg::eigen_rank(&self.t, tol * scale)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.t)
    }
}

/// Route one: `h_k(ω) = Λ^{1/2} d_k(ω)` (ket coordinates
/// `h_k[n] = conj(⟨d_k(ω)|e_n⟩) β_n^{1/2}`) and
/// `T(ω) = Σ_k |h_k⟩⟨h_k| = Λ^{1/2} C_ω Λ^{1/2}`. Verifies unit trace on
/// every μ-positive atom and the square-summability bound `‖h_k‖² ≤ 1`.
pub fn density_operators(
    p: &PointwiseDecomposition,
    lambda: &LambdaOperator,
    tol: f64,
) -> Result<Vec<DensityOperator>> {
    if lambda.dim() != p.dim {
        return Err(Error::DimensionMismatch {
            context: "lambda operator",
            expected: p.dim,
            got: lambda.dim(),
        });
    }
    let mut out = Vec::with_capacity(p.atoms.len());
    for (w, atom) in p.atoms.iter().enumerate() {
        let mut h = CMatrix::zeros(p.dim, atom.rank);
        for k in 0..atom.rank {
            for n in 0..p.dim {
                h[(n, k)] = atom.d_rows[(k, n)].conj().scale(lambda.betas[n].sqrt());
            }
        }
        let t = &h * h.adjoint();
        let density = DensityOperator {
            label: atom.label.clone(),
            t,
            h_vectors: h,
        };
        if p.mu.weights[w] > 0.0 {
            let trace_defect = (density.trace() - 1.0).abs();
            if trace_defect > tol {
                return Err(Error::Inconsistency(format!(
                    "atom {:?}: tr T = 1 fails with defect {:.3e}",
                    atom.label, trace_defect
                )));
            }
            for k in 0..atom.rank {
                let norm_sq = density.h_vectors.column(k).norm_squared();
                if norm_sq > 1.0 + tol {
                    return Err(Error::Inconsistency(format!(
                        "atom {:?}: ‖h_{k}‖² = {norm_sq:.6} exceeds 1",
                        atom.label
                    )));
                }
            }
        }
        out.push(density);
    }
    Ok(out)
}

/// Report of the operator-measure route, cross-checked against route one.
#[derive(Debug, Clone)]
pub struct PomRouteReport {
    pub densities: Vec<DensityOperator>,
    /// Worst entrywise disagreement between the two `T(ω)` routes.
    pub max_route_disagreement: f64,
    /// Worst defect of `⟨Λ^{-1/2}φ|T(ω)Λ^{-1/2}ψ⟩ μ({ω}) = ⟨φ|E_0({ω})ψ⟩`
    /// over basis pairs.
    pub reconstruction_defect: f64,
    /// `Σ_ω tr F({ω})`, the total variation of `F`.
    pub total_variation: f64,
    /// Upper bound `tr Λ · ‖E_0(Ω)‖`.
    pub total_variation_bound: f64,
}

/// Route two, for a measure whose forms are the operator matrices of a POM:
/// `F({ω}) = Λ^{1/2} E_0({ω}) Λ^{1/2}`, `T(ω) = F({ω}) / μ({ω})`, with
/// `h_k(ω)` from the descending eigendecomposition of `T(ω)` (so that
/// `‖h_{k-1}‖ ≥ ‖h_k‖ > 0` and distinct `h_k` are orthogonal). Fails if the
/// two routes disagree beyond `tol` or a trace deviates from one.
pub fn pom_density_route(
    e: &DiscretePSFM,
    alpha: &WeightSequence,
    tol_rank: f64,
    tol: f64,
) -> Result<PomRouteReport> {
    let lambda = lambda_operator(e, alpha)?;
    let measure = psfm::mu(e, alpha)?;
    let sqrt_lambda = lambda.power_matrix(0.5);
    let inv_sqrt_lambda = lambda.power_matrix(-0.5);

    // Independent §6-route densities to cross-check against.
    let p = crate::pointwise::decompose(e, alpha, tol_rank)?;
    let route_one = density_operators(&p, &lambda, tol)?;

    let mut densities = Vec::with_capacity(e.len());
    let mut max_route_disagreement = 0.0f64;
    let mut reconstruction_defect = 0.0f64;
    let mut total_variation = 0.0f64;

    for (w, atom) in e.atoms().iter().enumerate() {
        let f = &sqrt_lambda * atom.form.matrix() * &sqrt_lambda;
        total_variation += (0..e.dim()).map(|i| f[(i, i)].re).sum::<f64>();
        let mu_w = measure.weights[w];
        let t = if mu_w > 0.0 {
            f.scale(1.0 / mu_w)
        } else {
            CMatrix::zeros(e.dim(), e.dim())
        };

        // Descending spectral decomposition supplies the ordered, mutually
        // orthogonal h_k.
        let (vals, vecs) = linalg::hermitian_eigen(&t);
        let t_scale = linalg::max_abs(&t).max(1e-300);
        let kept: Vec<usize> = (0..vals.len())
            .rev()
            .filter(|&i| vals[i] > tol_rank * t_scale)
            .collect();
        let mut h = CMatrix::zeros(e.dim(), kept.len());
        for (k, &i) in kept.iter().enumerate() {
            let col = vecs.column(i) * Complex64::new(vals[i].sqrt(), 0.0);
            h.set_column(k, &col);
        }

        let density = DensityOperator {
            label: atom.label.clone(),
            t: t.clone(),
            h_vectors: h,
        };
        if mu_w > 0.0 {
            let trace_defect = (density.trace() - 1.0).abs();
            if trace_defect > tol {
                return Err(Error::Inconsistency(format!(
                    "atom {:?}: operator-route tr T = 1 fails with defect {trace_defect:.3e}",
                    atom.label
                )));
            }
            // Prop 7.1 identity on basis pairs.
            let back = (&inv_sqrt_lambda * &t * &inv_sqrt_lambda).scale(mu_w);
            reconstruction_defect =
                reconstruction_defect.max(linalg::max_abs(&(&back - atom.form.matrix())));
        }

        let disagreement = linalg::max_abs(&(&t - &route_one[w].t));
        max_route_disagreement = max_route_disagreement.max(disagreement);
        if disagreement > tol {
            return Err(Error::CrossCheckFailed {
                atom: atom.label.clone(),
                max_disagreement: disagreement,
            });
        }
        densities.push(density);
    }

    let op_norm = linalg::hermitian_eigenvalues(e.total().matrix())
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0);
    let total_variation_bound = lambda.trace() * op_norm;
    Ok(PomRouteReport {
        densities,
        max_route_disagreement,
        reconstruction_defect,
        total_variation,
        total_variation_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::Form;
    use crate::pointwise;
    use crate::psfm::Atom;

    fn single_identity(dim: usize) -> DiscretePSFM {
        DiscretePSFM::new(
            dim,
            vec![Atom {
                label: "w".into(),
                form: Form::identity(dim),
            }],
            1e-10,
        )
        .unwrap()
    }

    #[test]
    fn betas_follow_the_formula() {
        let e = single_identity(2);
        let alpha = WeightSequence::new(vec![0.5, 0.25]).unwrap();
        let lam = lambda_operator(&e, &alpha).unwrap();
        assert!((lam.betas[0] - 0.25).abs() < 1e-15);
        assert!((lam.betas[1] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn betas_with_zero_total_form_equal_alphas() {
        let e = DiscretePSFM::new(
            2,
            vec![Atom {
                label: "z".into(),
                form: Form::zeros(2),
            }],
            1e-10,
        )
        .unwrap();
        let alpha = WeightSequence::new(vec![0.5, 0.25]).unwrap();
        let lam = lambda_operator(&e, &alpha).unwrap();
        assert_eq!(lam.betas, vec![0.5, 0.25]);
    }

    #[test]
    fn beta_with_scaled_diagonal() {
        let e = DiscretePSFM::new(
            1,
            vec![Atom {
                label: "w".into(),
                form: Form::from_real_rows(&[&[3.0]]),
            }],
            1e-10,
        )
        .unwrap();
        let alpha = WeightSequence::new(vec![0.5]).unwrap();
        let lam = lambda_operator(&e, &alpha).unwrap();
        assert!((lam.betas[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn h_gamma_norm_examples() {
        let lam = LambdaOperator {
            betas: vec![0.25, 0.125],
        };
        let phi = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!((h_gamma_norm(&phi, &lam, 0.0).unwrap() - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((h_gamma_norm(&phi, &lam, 1.0).unwrap() - 12.0f64.sqrt()).abs() < 1e-15);
        assert!((h_gamma_norm(&phi, &lam, -1.0).unwrap() - 0.375f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_atom_density_has_unit_trace() {
        let e = single_identity(2);
        let alpha = WeightSequence::new(vec![0.5, 0.25]).unwrap();
        let lam = lambda_operator(&e, &alpha).unwrap();
        let p = pointwise::decompose(&e, &alpha, 1e-10).unwrap();
        let ds = density_operators(&p, &lam, 1e-10).unwrap();
        assert!((ds[0].trace() - 1.0).abs() < 1e-12);
        assert_eq!(ds[0].rank(1e-10), 2);
        // T = Λ^{1/2} C Λ^{1/2} with C = (8/3) I: diag(2/3, 1/3).
        assert!((ds[0].t[(0, 0)].re - 2.0 / 3.0).abs() < 1e-12);
        assert!((ds[0].t[(1, 1)].re - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn h_vectors_are_linearly_independent() {
        let e = DiscretePSFM::new(
            2,
            vec![Atom {
                label: "w".into(),
                form: Form::from_real_rows(&[&[0.5, 0.25], &[0.25, 0.5]]),
            }],
            1e-10,
        )
        .unwrap();
        let alpha = WeightSequence::dyadic(2);
        let lam = lambda_operator(&e, &alpha).unwrap();
        let p = pointwise::decompose(&e, &alpha, 1e-10).unwrap();
        let ds = density_operators(&p, &lam, 1e-10).unwrap();
        let gram = ds[0].h_vectors.adjoint() * &ds[0].h_vectors;
        let min = linalg::hermitian_eigenvalues(&gram)[0];
        assert!(min > 1e-6);
    }

    #[test]
    fn zero_atom_has_zero_density() {
        let e = DiscretePSFM::new(
            1,
            vec![
                Atom {
                    label: "z".into(),
                    form: Form::zeros(1),
                },
                Atom {
                    label: "p".into(),
                    form: Form::identity(1),
                },
            ],
            1e-10,
        )
        .unwrap();
        let alpha = WeightSequence::dyadic(1);
        let lam = lambda_operator(&e, &alpha).unwrap();
        let p = pointwise::decompose(&e, &alpha, 1e-10).unwrap();
        let ds = density_operators(&p, &lam, 1e-10).unwrap();
        assert_eq!(ds[0].h_vectors.ncols(), 0);
        assert_eq!(linalg::max_abs(&ds[0].t), 0.0);
    }

    #[test]
    fn both_routes_agree_on_bernoulli() {
        let e = DiscretePSFM::new(
            1,
            vec![
                Atom {
                    label: "w1".into(),
                    form: Form::from_real_rows(&[&[0.25]]),
                },
                Atom {
                    label: "w2".into(),
                    form: Form::from_real_rows(&[&[0.75]]),
                },
            ],
            1e-10,
        )
        .unwrap();
        let alpha = WeightSequence::dyadic(1);
        let report = pom_density_route(&e, &alpha, 1e-10, 1e-10).unwrap();
        assert!(report.max_route_disagreement < 1e-12);
        for d in &report.densities {
            assert!((d.t[(0, 0)].re - 1.0).abs() < 1e-12);
        }
        assert!(report.reconstruction_defect < 1e-12);
        assert!(report.total_variation <= report.total_variation_bound + 1e-12);
    }

    #[test]
    fn pom_route_orders_h_vectors_by_norm() {
        let e = DiscretePSFM::new(
            2,
            vec![Atom {
                label: "w".into(),
                form: Form::from_real_rows(&[&[0.75, 0.2], &[0.2, 0.25]]),
            }],
            1e-10,
        )
        .unwrap();
        let alpha = WeightSequence::dyadic(2);
        let report = pom_density_route(&e, &alpha, 1e-10, 1e-10).unwrap();
        let h = &report.densities[0].h_vectors;
        assert_eq!(h.ncols(), 2);
        let n0 = h.column(0).norm_squared();
        let n1 = h.column(1).norm_squared();
        assert!(n0 >= n1 && n1 > 0.0);
        let cross = h.column(0).dotc(&h.column(1));
        assert!(cross.norm() < 1e-12);
    }
}
