//! Measure-pipeline subcommands: dilate, diagonalize, verify,
//! spectral-detect, and the normal-matrix expansion.

use std::path::Path;

use serde_json::{json, Value};

use psfm_core::dilation;
use psfm_core::eigen;
use psfm_core::forms;
use psfm_core::linalg;
use psfm_core::pointwise;
use psfm_core::psfm::{DiscretePSFM, WeightSequence};
use psfm_core::traceclass;
use psfm_core::Error;

use crate::config::RunConfig;
use crate::io::{self, InputError};
use crate::report::{complex_pair, matrix_json, sig17};

/// A command outcome destined for the report envelope.
pub type Outcome = Result<(Value, bool, Option<WeightSequence>), InputError>;

/// Loads and (by default) validates a measure file, resolving the weight
/// sequence from the flag, the file, or the dyadic default.
fn load_measure(path: &Path, config: &RunConfig) -> Result<(DiscretePSFM, WeightSequence), InputError> {
    let file = io::load_psfm(path)?;
    let psfm = if config.validate {
        for atom in file.psfm.atoms() {
            let rep = forms::is_positive(&atom.form, config.tol_psd);
            if !rep.positive {
                return Err(InputError(format!(
                    "atom {:?} is not positive: λ_min = {:.6e}, hermitian defect = {:.6e}",
                    atom.label, rep.lambda_min, rep.hermitian_defect
                )));
            }
        }
        file.psfm.clone()
    } else {
        file.psfm.clone()
    };
    let alphas = match &config.alpha {
        crate::config::AlphaSpec::Dyadic => file.weights(),
        explicit => explicit
            .resolve(psfm.dim())
            .map_err(InputError)?,
    };
    if alphas.len() != psfm.dim() {
        return Err(InputError(format!(
            "weight sequence length {} does not match dimension {}",
            alphas.len(),
            psfm.dim()
        )));
    }
    Ok((psfm, alphas))
}

fn check_json(name: &str, passed: bool, defect: f64) -> (String, Value) {
    (
        name.to_string(),
        json!({ "passed": passed, "max_defect": sig17(defect) }),
    )
}

pub fn dilate(path: &Path, config: &RunConfig) -> Outcome {
    let (e, alphas) = load_measure(path, config)?;
    let d = dilation::dilate(&e, &alphas, config.tol_rank).map_err(input)?;
    let report = dilation::verify_dilation(&e, &d, config.tol_verify).map_err(input)?;
    let checks: serde_json::Map<String, Value> = [
        check_json("reconstruction", report.reconstruction.passed, report.reconstruction.max_defect),
        check_json("projection", report.projection.passed, report.projection.max_defect),
        check_json("minimality", report.minimality.passed, report.minimality.max_defect),
        check_json("norm_eq", report.norm_eq.passed, report.norm_eq.max_defect),
    ]
    .into_iter()
    .collect();
    let payload = json!({
        "kdim": report.kdim,
        "checks": checks,
        "basis_provenance": d.basis_provenance
            .iter()
            .map(|&(atom, basis)| json!({ "atom": atom, "basis": basis }))
            .collect::<Vec<_>>(),
    });
    Ok((payload, report.passed, Some(alphas)))
}

pub fn diagonalize(path: &Path, config: &RunConfig) -> Outcome {
    let (e, alphas) = load_measure(path, config)?;
    let p = pointwise::decompose(&e, &alphas, config.tol_rank).map_err(input)?;
    let atoms: Vec<Value> = p
        .atoms
        .iter()
        .zip(&p.mu.weights)
        .map(|(atom, &mu)| {
            json!({
                "label": atom.label,
                "n": atom.rank,
                "mu": mu,
                "d_rows": matrix_json(&atom.d_rows),
            })
        })
        .collect();
    let payload = json!({
        "dim": p.dim,
        "total_rank": p.total_rank(),
        "mu_total": p.mu.total(),
        "atoms": atoms,
    });
    Ok((payload, true, Some(alphas)))
}

pub fn verify(path: &Path, config: &RunConfig) -> Outcome {
    let (e, alphas) = load_measure(path, config)?;
    let tol = config.tol_verify;

    let d = dilation::dilate(&e, &alphas, config.tol_rank).map_err(input)?;
    let dilation_report = dilation::verify_dilation(&e, &d, tol).map_err(input)?;

    let p = pointwise::decompose(&e, &alphas, config.tol_rank).map_err(input)?;
    let (_, model_checks) =
        pointwise::direct_integral_model(&p, &e, &alphas, tol).map_err(input)?;
    let rank_match = p.total_rank() == d.kdim;

    // Trace-class layer: both density routes and their invariants.
    let (trace_payload, trace_passed) =
        match traceclass::pom_density_route(&e, &alphas, config.tol_rank, tol) {
            Ok(route) => {
                let lambda = traceclass::lambda_operator(&e, &alphas).map_err(input)?;
                let _ = lambda;
                let payload = json!({
                    "max_route_disagreement": sig17(route.max_route_disagreement),
                    "reconstruction_defect": sig17(route.reconstruction_defect),
                    "total_variation": sig17(route.total_variation),
                    "total_variation_bound": sig17(route.total_variation_bound),
                });
                let passed = route.max_route_disagreement <= tol
                    && route.reconstruction_defect
                        <= tol * e.total().max_abs().max(1.0)
                    && route.total_variation
                        <= route.total_variation_bound * (1.0 + tol) + tol;
                (payload, passed)
            }
            Err(err @ (Error::Inconsistency(_) | Error::CrossCheckFailed { .. })) => {
                (json!({ "failure": err.to_string() }), false)
            }
            Err(other) => return Err(input(other)),
        };

    let passed = dilation_report.passed && model_checks.passed && rank_match && trace_passed;
    let payload = json!({
        "dilation": {
            "kdim": dilation_report.kdim,
            "passed": dilation_report.passed,
            "reconstruction": sig17(dilation_report.reconstruction.max_defect),
            "projection": sig17(dilation_report.projection.max_defect),
            "minimality": sig17(dilation_report.minimality.max_defect),
            "norm_eq": sig17(dilation_report.norm_eq.max_defect),
        },
        "direct_integral": {
            "passed": model_checks.passed,
            "reconstruction": sig17(model_checks.reconstruction.max_defect),
            "density": sig17(model_checks.density.max_defect),
            "equivalence": sig17(model_checks.equivalence.max_defect),
            "total_rank_equals_kdim": rank_match,
        },
        "trace_class": trace_payload,
    });
    Ok((payload, passed, Some(alphas)))
}

pub fn spectral_detect(path: &Path, config: &RunConfig) -> Outcome {
    let (e, alphas) = load_measure(path, config)?;
    if !e.is_semispectral(config.tol_verify.max(1e-9)) {
        return Err(InputError(
            "measure is not normalized (E_Ω ≠ I): spectral detection undefined".into(),
        ));
    }
    let d = dilation::dilate(&e, &alphas, config.tol_rank).map_err(input)?;
    let p = pointwise::decompose(&e, &alphas, config.tol_rank).map_err(input)?;

    let oracle = e.atoms().iter().all(|atom| {
        let a = atom.form.matrix();
        linalg::max_abs(&(a * a - a)) <= config.tol_verify.max(1e-12) * atom.form.max_abs().max(1.0)
    });
    let via_dilation = d.kdim == e.dim()
        && linalg::identity_defect(&(d.j.adjoint() * &d.j)) <= config.tol_verify
        && linalg::identity_defect(&(&d.j * d.j.adjoint())) <= config.tol_verify;
    let via_onb = pointwise::onb_check(&p, &e, config.tol_verify).map_err(input)?;
    let agree = via_dilation == via_onb && via_dilation == oracle;

    let payload = json!({
        "dilation_route": via_dilation,
        "onb_route": via_onb,
        "idempotency_oracle": oracle,
        "detectors_agree": agree,
        "kdim": d.kdim,
        "dim": e.dim(),
        "is_spectral": via_dilation,
    });
    Ok((payload, agree, Some(alphas)))
}

pub fn normal_expand(path: &Path, config: &RunConfig) -> Outcome {
    let form = io::load_form(path)?;
    let n = form.dim();
    let t = eigen::OperatorMatrix::new(form.matrix().clone()).map_err(input)?;
    let alphas = config.alpha.resolve(n).map_err(InputError)?;
    let sys = eigen::spectral_expand(&t, &alphas, config.tol_rank).map_err(input)?;
    let points: Vec<Value> = sys
        .points
        .iter()
        .map(|p| {
            json!({
                "lambda": complex_pair(p.lambda),
                "multiplicity": p.multiplicity,
                "mu": p.mu,
                "d_rows": matrix_json(&p.d_rows),
            })
        })
        .collect();
    let passed = sys.passes(config.tol_verify) && sys.total_multiplicity() == n;
    let payload = json!({
        "dim": n,
        "normality_defect": sig17(t.normality_defect()),
        "points": points,
        "residuals": {
            "moment": sig17(sys.residuals.moment),
            "identity": sig17(sys.residuals.identity),
            "eigen": sig17(sys.residuals.eigen),
            "adjoint_eigen": sig17(sys.residuals.adjoint_eigen),
        },
    });
    Ok((payload, passed, Some(alphas)))
}

/// Library failures at the input/precondition layer map to exit code 2.
fn input(err: Error) -> InputError {
    InputError(err.to_string())
}
