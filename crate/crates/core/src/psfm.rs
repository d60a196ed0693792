//! Discrete positive sesquilinear form measures over a finite atomic outcome
//! space, the canonical scalar measure μ, and the per-atom densities `C_ω`.

use serde::{Deserialize, Serialize};

use crate::forms::{self, Form};
use crate::linalg;
use crate::{CMatrix, Error, Result};

/// One outcome atom: a label and the positive form `E_{{ω}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Atom {
    pub label: String,
    pub form: Form,
}

/// A positive sesquilinear form measure on a finite atomic space: one
/// positive form per atom, with `E_X` for `X ⊆ Ω` the entrywise sum of the
/// member forms. σ-additivity is structural.
#[derive(Debug, Clone, Serialize)]
pub struct DiscretePSFM {
    dim: usize,
    atoms: Vec<Atom>,
}

impl DiscretePSFM {
    /// Validating constructor: every atom form must be positive within
    /// `tol_psd` and have the common dimension.
    pub fn new(dim: usize, atoms: Vec<Atom>, tol_psd: f64) -> Result<Self> {
        let psfm = Self::new_unchecked(dim, atoms)?;
        for atom in &psfm.atoms {
            let rep = forms::is_positive(&atom.form, tol_psd);
            if !rep.positive {
                return Err(Error::NotPositive {
                    lambda_min: rep.lambda_min,
                    hermitian_defect: rep.hermitian_defect,
                    label: Some(atom.label.clone()),
                });
            }
        }
        Ok(psfm)
    }

    /// Dimension checks only; positivity is deferred to the caller.
    pub fn new_unchecked(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        for atom in &atoms {
            if atom.form.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "psfm atom form",
                    expected: dim,
                    got: atom.form.dim(),
                });
            }
        }
        Ok(Self { dim, atoms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `E_X` for the subset given by atom indices.
    pub fn sum_over(&self, indices: &[usize]) -> Form {
        let mut acc = Form::zeros(self.dim);
        for &i in indices {
            acc = acc.add(&self.atoms[i].form);
        }
        acc
    }

    /// `E_Ω`.
    pub fn total(&self) -> Form {
        let all: Vec<usize> = (0..self.atoms.len()).collect();
        self.sum_over(&all)
    }

    /// Normalization test `E_Ω = I` within `tol` (semispectral detection);
    /// detected, never assumed.
    pub fn is_semispectral(&self, tol: f64) -> bool {
        linalg::identity_defect(self.total().matrix()) <= tol
    }
}

/// Truncated summable weight sequence `(α_n)`, all entries positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightSequence {
    alphas: Vec<f64>,
}

impl WeightSequence {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::Input(
                "weight sequence entries must be positive and finite".into(),
            ));
        }
        Ok(Self { alphas })
    }

    /// Default weights `α_n = 2^{-(n+1)}`; any truncation sums below 1.
    pub fn dyadic(len: usize) -> Self {
        Self {
            alphas: (0..len).map(|n| 0.5f64.powi(n as i32 + 1)).collect(),
        }
    }

    /// Geometric weights `α_n = r^{-(n+1)}` for `r > 1`.
    pub fn geometric(len: usize, ratio: f64) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(Error::Input("geometric weight ratio must exceed 1".into()));
        }
        Self::new((0..len).map(|n| ratio.powi(-(n as i32) - 1)).collect())
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }
}

/// The scalar measure μ as its per-atom weights.
#[derive(Debug, Clone, Serialize)]
pub struct MuMeasure {
    pub weights: Vec<f64>,
}

impl MuMeasure {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn check_alpha_len(e: &DiscretePSFM, alpha: &WeightSequence) -> Result<()> {
    if alpha.len() != e.dim() {
        return Err(Error::DimensionMismatch {
            context: "weight sequence",
            expected: e.dim(),
            got: alpha.len(),
        });
    }
    Ok(())
}

/// `μ({ω}) = Σ_n α_n E_{{ω}}(e_n, e_n) / (1 + E_Ω(e_n, e_n))`.
pub fn mu(e: &DiscretePSFM, alpha: &WeightSequence) -> Result<MuMeasure> {
    check_alpha_len(e, alpha)?;
    let total = e.total();
    let weights = e
        .atoms()
        .iter()
        .map(|atom| {
            let w: f64 = (0..e.dim())
                .map(|n| alpha.alphas()[n] * atom.form.diagonal(n) / (1.0 + total.diagonal(n)))
                .sum();
            // Diagonals of a positive-within-tolerance form may dip a few ulp
            // below zero; the measure itself is nonnegative.
            w.max(0.0)
        })
        .collect();
    Ok(MuMeasure { weights })
}

/// Radon–Nikodým densities `C_ω = E_{{ω}} / μ({ω})`, redefined to zero on
/// μ-null atoms. An atom with `μ({ω}) = 0` but a nonzero form violates the
/// mutual absolute continuity of μ and E and is reported as an error.
pub fn density(e: &DiscretePSFM, alpha: &WeightSequence) -> Result<Vec<Form>> {
    let measure = mu(e, alpha)?;
    let scale = e.total().max_abs().max(1.0);
    e.atoms()
        .iter()
        .zip(&measure.weights)
        .map(|(atom, &w)| {
            if w > 0.0 {
                Ok(atom.form.scale(1.0 / w))
            } else if atom.form.max_abs() <= 1e-14 * scale {
                Ok(Form::zeros(e.dim()))
            } else {
                Err(Error::Inconsistency(format!(
                    "atom {:?} has μ = 0 but a nonzero form (‖E‖_max = {:.3e})",
                    atom.label,
                    atom.form.max_abs()
                )))
            }
        })
        .collect()
}

/// Strictness: `E_Ω` positive definite, tested as
/// `λ_min(E_Ω) > tol·‖E_Ω‖_max`.
pub fn is_strict(e: &DiscretePSFM, tol: f64) -> bool {
    let total = e.total();
    let scale = total.max_abs();
    scale > 0.0 && linalg::min_eigenvalue(total.matrix()) > tol * scale
}

/// Quotient by the null space of `E_Ω`. Returns the quotient measure (which
/// is strict) together with the `rank × dim` projection matrix `P` mapping
/// coefficients onto the quotient basis, so that
/// `Ẽ_X(Pφ, Pψ) = E_X(φ, ψ)`. A strict input is returned unchanged with the
/// identity projection.
pub fn quotient_strict(e: &DiscretePSFM, tol: f64) -> Result<(DiscretePSFM, CMatrix)> {
    if is_strict(e, tol) {
        return Ok((e.clone(), CMatrix::identity(e.dim(), e.dim())));
    }
    let q = forms::orthonormalize(&e.total(), tol)?;
    let atoms = e
        .atoms()
        .iter()
        .map(|atom| {
            let reduced = q.vectors.adjoint() * atom.form.matrix() * &q.vectors;
            Ok(Atom {
                label: atom.label.clone(),
                form: Form::new(reduced)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let quotient = DiscretePSFM::new_unchecked(q.rank, atoms)?;
    Ok((quotient, q.functionals.clone()))
}

// PSFM JSON: {"dim": N, "alphas": [..] optional, "atoms": [{"label", "form"}]}.
#[derive(Serialize, Deserialize)]
struct PsfmJson {
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    alphas: Option<Vec<f64>>,
    atoms: Vec<Atom>,
}

/// A PSFM file: the measure plus an optional weight sequence override.
#[derive(Debug, Clone)]
pub struct PsfmFile {
    pub psfm: DiscretePSFM,
    pub alphas: Option<WeightSequence>,
}

impl PsfmFile {
    /// The file's weights if present, else the dyadic default.
    pub fn weights(&self) -> WeightSequence {
        self.alphas
            .clone()
            .unwrap_or_else(|| WeightSequence::dyadic(self.psfm.dim()))
    }
}

impl Serialize for PsfmFile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PsfmJson {
            dim: self.psfm.dim(),
            alphas: self.alphas.as_ref().map(|w| w.alphas().to_vec()),
            atoms: self.psfm.atoms().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PsfmFile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PsfmJson::deserialize(d)?;
        let psfm = DiscretePSFM::new_unchecked(raw.dim, raw.atoms).map_err(D::Error::custom)?;
        let alphas = match raw.alphas {
            Some(a) => Some(WeightSequence::new(a).map_err(D::Error::custom)?),
            None => None,
        };
        Ok(PsfmFile { psfm, alphas })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::is_positive;

    fn single_atom_identity(dim: usize) -> DiscretePSFM {
        DiscretePSFM::new(
            dim,
            vec![Atom {
                label: "w1".into(),
                form: Form::identity(dim),
            }],
            1e-10,
        )
        .unwrap()
    }

    fn two_point_bernoulli(p: f64) -> DiscretePSFM {
        DiscretePSFM::new(
            1,
            vec![
                Atom {
                    label: "w1".into(),
                    form: Form::from_real_rows(&[&[p]]),
                },
                Atom {
                    label: "w2".into(),
                    form: Form::from_real_rows(&[&[1.0 - p]]),
                },
            ],
            1e-10,
        )
        .unwrap()
    }

    #[test]
    fn mu_single_identity_atom() {
        let e = single_atom_identity(2);
        let alpha = WeightSequence::new(vec![0.5, 0.25]).unwrap();
        let m = mu(&e, &alpha).unwrap();
        assert!((m.total() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn mu_vanishes_on_zero_atom() {
        let e = DiscretePSFM::new(
            2,
            vec![
                Atom {
                    label: "z".into(),
                    form: Form::zeros(2),
                },
                Atom {
                    label: "i".into(),
                    form: Form::identity(2),
                },
            ],
            1e-10,
        )
        .unwrap();
        let m = mu(&e, &WeightSequence::dyadic(2)).unwrap();
        assert_eq!(m.weights[0], 0.0);
        assert!(m.weights[1] > 0.0);
    }

    #[test]
    fn mu_two_point_example() {
        let e = two_point_bernoulli(0.25);
        let alpha = WeightSequence::new(vec![0.5]).unwrap();
        let m = mu(&e, &alpha).unwrap();
        assert!((m.weights[0] - 1.0 / 16.0).abs() < 1e-15);
        assert!((m.weights[1] - 3.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn density_divides_by_mu() {
        let e = single_atom_identity(2);
        let alpha = WeightSequence::new(vec![0.5, 0.25]).unwrap();
        let c = density(&e, &alpha).unwrap();
        assert!((c[0].entry(0, 0).re - 8.0 / 3.0).abs() < 1e-12);
        assert!((c[0].entry(1, 1).re - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn density_on_two_point_atoms_reconstructs() {
        let e = two_point_bernoulli(0.25);
        let alpha = WeightSequence::new(vec![0.5]).unwrap();
        let m = mu(&e, &alpha).unwrap();
        let c = density(&e, &alpha).unwrap();
        // C_ω · μ({ω}) = E_{{ω}} entrywise; here both densities equal [4].
        for (i, atom) in e.atoms().iter().enumerate() {
            let back = c[i].scale(m.weights[i]);
            assert!((back.entry(0, 0) - atom.form.entry(0, 0)).norm() < 1e-15);
            assert!((c[i].entry(0, 0).re - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn density_zero_atom_is_zero_form() {
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
        let c = density(&e, &WeightSequence::dyadic(1)).unwrap();
        assert_eq!(c[0].max_abs(), 0.0);
        assert!(is_positive(&c[1], 1e-10).positive);
    }

    #[test]
    fn strictness_examples() {
        assert!(is_strict(&single_atom_identity(2), 1e-10));
        let degenerate = DiscretePSFM::new(
            2,
            vec![Atom {
                label: "d".into(),
                form: Form::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]),
            }],
            1e-10,
        )
        .unwrap();
        assert!(!is_strict(&degenerate, 1e-10));
        let offdiag = DiscretePSFM::new(
            2,
            vec![Atom {
                label: "o".into(),
                form: Form::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]),
            }],
            1e-10,
        )
        .unwrap();
        assert!(is_strict(&offdiag, 1e-10));
    }

    #[test]
    fn quotient_of_strict_measure_is_identity() {
        let e = single_atom_identity(3);
        let (q, p) = quotient_strict(&e, 1e-10).unwrap();
        assert_eq!(q.dim(), 3);
        assert!(linalg::identity_defect(&p) == 0.0);
    }

    #[test]
    fn quotient_drops_null_direction() {
        let e = DiscretePSFM::new(
            2,
            vec![Atom {
                label: "d".into(),
                form: Form::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]),
            }],
            1e-10,
        )
        .unwrap();
        let (q, p) = quotient_strict(&e, 1e-10).unwrap();
        assert_eq!(q.dim(), 1);
        assert!((q.atoms()[0].form.entry(0, 0).re - 1.0).abs() < 1e-12);
        assert!(is_strict(&q, 1e-10));
        assert_eq!(p.nrows(), 1);
        assert_eq!(p.ncols(), 2);
    }

    #[test]
    fn quotient_rank_one_all_ones_atom() {
        let e = DiscretePSFM::new(
            2,
            vec![Atom {
                label: "ones".into(),
                form: Form::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]),
            }],
            1e-10,
        )
        .unwrap();
        let (q, p) = quotient_strict(&e, 1e-10).unwrap();
        assert_eq!(q.dim(), 1);
        assert!(is_strict(&q, 1e-10));
        // Pullback Ẽ(Pφ, Pψ) = E(φ, ψ) on basis pairs.
        let pulled = p.adjoint() * q.atoms()[0].form.matrix() * &p;
        assert!(linalg::max_abs(&(&pulled - e.atoms()[0].form.matrix())) < 1e-12);
    }

    #[test]
    fn psfm_json_round_trip_with_optional_alphas() {
        let text = r#"{
            "dim": 1,
            "atoms": [
                {"label": "w1", "form": {"dim": 1, "entries": [[[0.25, 0.0]]]}},
                {"label": "w2", "form": {"dim": 1, "entries": [[[0.75, 0.0]]]}}
            ]
        }"#;
        let file: PsfmFile = serde_json::from_str(text).unwrap();
        assert_eq!(file.psfm.len(), 2);
        assert!(file.alphas.is_none());
        assert_eq!(file.weights().alphas(), &[0.5]);
        let out = serde_json::to_string(&file).unwrap();
        let back: PsfmFile = serde_json::from_str(&out).unwrap();
        assert_eq!(back.psfm.dim(), 1);
    }

    #[test]
    fn weight_sequence_rejects_nonpositive() {
        assert!(WeightSequence::new(vec![0.5, 0.0]).is_err());
        assert!(WeightSequence::new(vec![0.5, -1.0]).is_err());
    }
}
