//! Input parsing: matrix files (JSON or interleaved-CSV), measure files,
//! weight lists, growth specs, and grid arcs.

use std::path::Path;

use num_complex::Complex64;

use psfm_core::counterexample::GrowthSpec;
use psfm_core::forms::Form;
use psfm_core::psfm::PsfmFile;
use psfm_core::shifts::ShiftWeights;
use psfm_core::CMatrix;

/// Input-layer failure: message plus position info when available. Always
/// maps to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))
}

/// Loads a complex matrix: Matrix JSON by default, interleaved re,im CSV
/// when the extension is `.csv` (each row holds 2N reals).
pub fn load_form(path: &Path) -> Result<Form, InputError> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        parse_interleaved_csv(&text)
    } else {
        serde_json::from_str(&text)
            .map_err(|e| InputError(format!("{}: {e}", path.display())))
    }
}

fn parse_interleaved_csv(text: &str) -> Result<Form, InputError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| InputError(format!("line {}: bad number {t:?}: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>, InputError>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(InputError("CSV matrix is empty".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != 2 * n {
            return Err(InputError(format!(
                "line {}: expected {} interleaved re,im values for a {n}x{n} matrix, got {}",
                i + 1,
                2 * n,
                row.len()
            )));
        }
    }
    let matrix = CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][2 * j], rows[i][2 * j + 1]));
    Form::new(matrix).map_err(|e| InputError(e.to_string()))
}

/// Loads a PSFM JSON file (measure plus optional weight override).
pub fn load_psfm(path: &Path) -> Result<PsfmFile, InputError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

/// Parses `--weights "0.9,0.9,1.0"` onto a window: values are mapped left
/// to right and cycled to fill the 2L slots. Without an explicit window,
/// `L = ceil(len/2)`.
pub fn parse_weights(text: &str, window: Option<usize>) -> Result<ShiftWeights, InputError> {
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| InputError(format!("bad weight {t:?}: {e}")))
        })
        .collect::<Result<Vec<f64>, InputError>>()?;
    if values.is_empty() {
        return Err(InputError("weight list is empty".into()));
    }
    let half_width = match window {
        Some(0) | None if values.len() == 1 => 1,
        Some(0) => return Err(InputError("window must be at least 1".into())),
        Some(l) => l,
        None => values.len().div_ceil(2),
    };
    let c = (0..2 * half_width)
        .map(|i| Complex64::new(values[i % values.len()], 0.0))
        .collect();
    ShiftWeights::new(half_width, c).map_err(|e| InputError(e.to_string()))
}

/// Parses `--a "geom:8,2"` or an explicit list `--a "4,8,12"`.
pub fn parse_growth(text: &str) -> Result<GrowthSpec, InputError> {
    let trimmed = text.trim();
    if let Some(rest) = trimmed.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(InputError(format!(
                "geometric growth spec must be geom:BASE,RATIO, got {trimmed:?}"
            )));
        }
        let base = parts[0]
            .trim()
            .parse::<u64>()
            .map_err(|e| InputError(format!("bad base {:?}: {e}", parts[0])))?;
        let ratio = parts[1]
            .trim()
            .parse::<u64>()
            .map_err(|e| InputError(format!("bad ratio {:?}: {e}", parts[1])))?;
        if base == 0 || ratio < 2 {
            return Err(InputError("geometric growth needs base ≥ 1, ratio ≥ 2".into()));
        }
        return Ok(GrowthSpec::Geometric { base, ratio });
    }
    let list = trimmed
        .strip_prefix("list:")
        .unwrap_or(trimmed)
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| InputError(format!("bad growth term {t:?}: {e}")))
        })
        .collect::<Result<Vec<u64>, InputError>>()?;
    Ok(GrowthSpec::Explicit(list))
}

/// Parses a comma list of positive integers, e.g. `--sizes 64,256,1024`.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>, InputError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| InputError(format!("bad size {t:?}: {e}")))
        })
        .collect()
}

/// Parses grid arcs `"0:32,16:48"` into index pairs.
pub fn parse_grid_arcs(text: &str) -> Result<Vec<(usize, usize)>, InputError> {
    text.split(',')
        .map(|part| {
            let (a, b) = part
                .split_once(':')
                .ok_or_else(|| InputError(format!("arc {part:?} must be FROM:TO")))?;
            let a = a
                .trim()
                .parse::<usize>()
                .map_err(|e| InputError(format!("bad arc index {a:?}: {e}")))?;
            let b = b
                .trim()
                .parse::<usize>()
                .map_err(|e| InputError(format!("bad arc index {b:?}: {e}")))?;
            Ok((a, b))
        })
        .collect()
}

/// Parses a complex scalar `"re"` or `"re,im"`.
pub fn parse_complex(text: &str) -> Result<Complex64, InputError> {
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(Complex64::new(
            re.trim()
                .parse::<f64>()
                .map_err(|e| InputError(format!("bad real part {re:?}: {e}")))?,
            0.0,
        )),
        [re, im] => Ok(Complex64::new(
            re.trim()
                .parse::<f64>()
                .map_err(|e| InputError(format!("bad real part {re:?}: {e}")))?,
            im.trim()
                .parse::<f64>()
                .map_err(|e| InputError(format!("bad imaginary part {im:?}: {e}")))?,
        )),
        _ => Err(InputError(format!("lambda must be RE or RE,IM, got {text:?}"))),
    }
}

/// Parses comma-separated window indices for principal minors.
pub fn parse_indices(text: &str) -> Result<Vec<i64>, InputError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| InputError(format!("bad index {t:?}: {e}")))
        })
        .collect()
}
