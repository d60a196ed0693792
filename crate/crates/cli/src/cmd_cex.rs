//! Counterexample subcommands: build, spectrum, eigencheck.

use serde_json::{json, Value};

use psfm_core::counterexample::{self, CounterexampleMatrix};

use crate::cmd_measure::Outcome;
use crate::config::RunConfig;
use crate::io::{self, InputError};
use crate::report::sig17;

fn build_matrix(spec_text: &str, size: usize) -> Result<CounterexampleMatrix, InputError> {
    let spec = io::parse_growth(spec_text)?;
    counterexample::build(spec, size).map_err(|e| InputError(e.to_string()))
}

pub fn build(spec_text: &str, size: usize, emit_entries: bool, _config: &RunConfig) -> Outcome {
    let m = build_matrix(spec_text, size)?;
    let props = counterexample::verify_properties(&m);
    let mut payload = json!({
        "size": m.size,
        "complete_rows": m.complete_rows,
        "dyadic": m.growth.is_dyadic(),
        "square_sum_bound": sig17(props.square_sum_bound),
        "bound_below_one": props.bound_below_one,
        "partial_square_sum": sig17(props.partial_square_sum),
        "checks": {
            "symmetry": props.symmetry.passed,
            "support": props.support.passed,
            "row_sums": props.row_sums.passed,
            "row_sums_exact": props.row_sums_exact,
            "row_sum_max_defect": sig17(props.row_sums.max_defect),
            "square_sum": props.square_sum.passed,
        },
    });
    if emit_entries {
        let triplets: Vec<Value> = m
            .rows()
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter()
                    .map(move |&(j, v)| json!([i, j, v]))
            })
            .collect();
        payload["entries"] = Value::Array(triplets);
    }
    Ok((payload, props.passed, None))
}

pub fn spectrum(spec_text: &str, sizes_text: &str, dense: bool, _config: &RunConfig) -> Outcome {
    let sizes = io::parse_sizes(sizes_text)?;
    if sizes.is_empty() {
        return Err(InputError("need at least one section size".into()));
    }
    let max_size = *sizes.iter().max().unwrap();
    let m = build_matrix(spec_text, max_size)?;
    let mut passed = true;
    let mut per_size = Vec::new();
    for &k in &sizes {
        let est =
            counterexample::max_abs_eigenvalue(&m, k).map_err(|e| InputError(e.to_string()))?;
        let frobenius = m.partial_square_sum(k).sqrt();
        let within = est.max_abs <= frobenius + 1e-10;
        passed &= within;
        let mut entry = json!({
            "size": k,
            "max_abs_eig": sig17(est.max_abs),
            "lambda_min": sig17(est.lambda_min),
            "lambda_max": sig17(est.lambda_max),
            "frobenius": sig17(frobenius),
            "max_abs_within_frobenius": within,
            "lanczos_residual": sig17(est.residual),
            "lanczos_iterations": est.iterations,
        });
        if dense {
            let spectrum =
                counterexample::truncated_spectrum(&m, k).map_err(|e| InputError(e.to_string()))?;
            let dense_max = spectrum.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            passed &= (dense_max - est.max_abs).abs() <= 1e-8;
            entry["dense_max_abs_eig"] = json!(sig17(dense_max));
            entry["dense_matches_lanczos"] = json!((dense_max - est.max_abs).abs() <= 1e-8);
        }
        per_size.push(entry);
    }
    let payload = json!({
        "square_sum_bound": sig17(m.growth.square_sum_bound()),
        "sections": per_size,
    });
    Ok((payload, passed, None))
}

pub fn eigencheck(spec_text: &str, size: usize, _config: &RunConfig) -> Outcome {
    let m = build_matrix(spec_text, size)?;
    let report = counterexample::eigencheck_e(&m, size);
    let payload = json!({
        "size": size,
        "complete_rows_checked": report.complete_rows,
        "incomplete_rows": report.incomplete_rows,
        "coordinates_exact": report.exact,
        "max_deviation": sig17(report.max_deviation),
    });
    Ok((payload, report.exact, None))
}
