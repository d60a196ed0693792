//! Shift-family subcommands: classify, minor, arc, shift-eigen, haar.

use serde_json::{json, Value};

use psfm_core::eigen;
use psfm_core::forms;
use psfm_core::linalg;
use psfm_core::shifts::{self, CircleArc, ShiftClass};

use crate::cmd_measure::Outcome;
use crate::config::RunConfig;
use crate::io::{self, InputError};
use crate::report::{complex_pair, matrix_json, sig17};

pub fn classify(weights: &str, window: Option<usize>, config: &RunConfig) -> Outcome {
    let w = io::parse_weights(weights, window)?;
    let class = shifts::classify(&w, 1e-12);
    let oracle = shifts::psd_oracle(&w, config.tol_psd);
    let agree = (class != ShiftClass::NotPositive) == oracle;
    let payload = json!({
        "window": w.half_width(),
        "class": format!("{class:?}"),
        "psd_oracle": oracle,
        "classifier_agrees_with_oracle": agree,
    });
    Ok((payload, agree, None))
}

pub fn minor(
    weights: &str,
    window: Option<usize>,
    indices: Option<&str>,
    config: &RunConfig,
) -> Outcome {
    let w = io::parse_weights(weights, window)?;
    let mm = shifts::moment_matrix(&w);
    let l = w.half_width() as i64;
    let tol = config.tol_verify.max(1e-12);

    let evaluate = |picked: &[i64]| -> Result<(Value, bool), InputError> {
        let (det, formula) = shifts::principal_minor(&mm, picked)
            .map_err(|e| InputError(e.to_string()))?;
        let defect = (det - num_complex::Complex64::new(formula, 0.0)).norm();
        let ok = defect <= tol * formula.abs().max(1.0);
        Ok((
            json!({
                "indices": picked,
                "det": complex_pair(det),
                "formula": formula,
                "defect": sig17(defect),
            }),
            ok,
        ))
    };

    match indices {
        Some(text) => {
            let picked = io::parse_indices(text)?;
            let (entry, ok) = evaluate(&picked)?;
            Ok((json!({ "window": w.half_width(), "minor": entry }), ok, None))
        }
        None => {
            let size = 2 * w.half_width() + 1;
            if size > 13 {
                return Err(InputError(format!(
                    "enumerating all principal subsets needs window ≤ 6, got {}; pass --indices",
                    w.half_width()
                )));
            }
            let all: Vec<i64> = (-l..=l).collect();
            let mut worst = 0.0f64;
            let mut worst_entry = Value::Null;
            let mut passed = true;
            let mut count = 0u32;
            for mask in 1u32..(1 << size) {
                let picked: Vec<i64> = (0..size)
                    .filter(|&i| mask & (1 << i) != 0)
                    .map(|i| all[i])
                    .collect();
                let (entry, ok) = evaluate(&picked)?;
                passed &= ok;
                count += 1;
                let defect = entry["defect"]
                    .as_str()
                    .and_then(|s| s.parse::<f64>().ok())
                    .unwrap_or(f64::INFINITY);
                if defect >= worst {
                    worst = defect;
                    worst_entry = entry;
                }
            }
            let payload = json!({
                "window": w.half_width(),
                "subsets_checked": count,
                "worst_defect": sig17(worst),
                "worst_case": worst_entry,
            });
            Ok((payload, passed, None))
        }
    }
}

pub fn arc(
    weights: &str,
    window: Option<usize>,
    from: f64,
    to: f64,
    config: &RunConfig,
) -> Outcome {
    let w = io::parse_weights(weights, window)?;
    let arc = CircleArc::new(from, to).map_err(|e| InputError(e.to_string()))?;
    let form = shifts::arc_form(&w, arc);
    let rep = forms::is_positive(&form, config.tol_psd);
    let contractive = shifts::classify(&w, 1e-12) != ShiftClass::NotPositive;
    // Positivity of every arc form is the verifiable consequence of
    // contractivity; non-contractions carry no such promise.
    let passed = !contractive || rep.positive;
    let payload = json!({
        "window": w.half_width(),
        "arc": { "from": arc.t0, "to": arc.t1 },
        "entries": matrix_json(form.matrix()),
        "positivity": {
            "positive": rep.positive,
            "lambda_min": sig17(rep.lambda_min),
            "hermitian_defect": sig17(rep.hermitian_defect),
        },
        "contractive_weights": contractive,
    });
    Ok((payload, passed, None))
}

pub fn shift_eigen(lambda: &str, window: usize, _config: &RunConfig) -> Outcome {
    let lam = io::parse_complex(lambda)?;
    if window == 0 {
        return Err(InputError("window must be at least 1".into()));
    }
    match eigen::shift_eigensolve(lam, window) {
        None => {
            let payload = json!({
                "lambda": complex_pair(lam),
                "window": window,
                "solution": Value::Null,
                "note": "only the zero sequence solves the eigenvector equation at λ = 0",
            });
            Ok((payload, true, None))
        }
        Some(d) => {
            let s = eigen::OperatorMatrix::simple_shift(window);
            let out = eigen::tilde_apply(&s, &d).map_err(|e| InputError(e.to_string()))?;
            let scale = linalg::max_abs_vec(&d);
            let mut residual = 0.0f64;
            for row in 0..2 * window {
                residual = residual.max((out[row] - lam * d[row]).norm());
            }
            residual /= scale;

            let adj = s.adjoint();
            let adj_out = eigen::tilde_apply(&adj, &d).map_err(|e| InputError(e.to_string()))?;
            let mut adjoint_residual = 0.0f64;
            for row in 1..=2 * window {
                adjoint_residual = adjoint_residual.max((adj_out[row] - lam.conj() * d[row]).norm());
            }
            adjoint_residual /= scale;
            let unimodular = (lam.norm() - 1.0).abs() <= 1e-12;

            let values: Vec<Value> = d.iter().map(|&z| complex_pair(z)).collect();
            let payload = json!({
                "lambda": complex_pair(lam),
                "window": window,
                "solution": values,
                "interior_residual": sig17(residual),
                "adjoint_residual": sig17(adjoint_residual),
                "simultaneous_adjoint_eigenvector": adjoint_residual <= 1e-12,
                "unimodular": unimodular,
            });
            let passed = residual <= 1e-12 && (adjoint_residual <= 1e-12) == unimodular;
            Ok((payload, passed, None))
        }
    }
}

pub fn haar(window: usize, grid: usize, arcs: Option<&str>, config: &RunConfig) -> Outcome {
    let arc_list = match arcs {
        Some(text) => io::parse_grid_arcs(text)?,
        None => vec![(0, grid), (0, grid / 2), (grid / 4, 3 * grid / 4)],
    };
    let report =
        eigen::haar_recovery(window, grid, &arc_list).map_err(|e| InputError(e.to_string()))?;
    let arcs_json: Vec<Value> = report
        .arcs
        .iter()
        .map(|a| {
            json!({
                "from": a.t0,
                "to": a.t1,
                "max_error": sig17(a.max_error),
                "bound": sig17(a.bound),
                "within_bound": a.max_error <= a.bound + 1e-12,
            })
        })
        .collect();
    let passed = report.orthogonality_defect <= config.tol_verify
        && report.full_circle_defect <= config.tol_verify
        && report
            .arcs
            .iter()
            .all(|a| a.max_error <= a.bound + 1e-12);
    let payload = json!({
        "window": report.half_width,
        "grid": report.grid,
        "orthogonality_defect": sig17(report.orthogonality_defect),
        "full_circle_defect": sig17(report.full_circle_defect),
        "arcs": arcs_json,
    });
    Ok((payload, passed, None))
}
