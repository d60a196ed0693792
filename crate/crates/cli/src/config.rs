//! Run configuration: tolerances, weight-sequence selection, output target,
//! and the echoed seed.

use serde::Serialize;

use psfm_core::psfm::WeightSequence;

/// Weight-sequence selection: the dyadic default or an explicit list.
#[derive(Debug, Clone)]
pub enum AlphaSpec {
    Dyadic,
    Explicit(Vec<f64>),
}

impl AlphaSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let trimmed = text.trim();
        if trimmed.eq_ignore_ascii_case("dyadic") {
            return Ok(AlphaSpec::Dyadic);
        }
        let values = trimmed
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad alpha {t:?}: {e}")))
            .collect::<Result<Vec<f64>, String>>()?;
        if values.iter().any(|&v| !(v > 0.0)) {
            return Err("alpha entries must be positive".into());
        }
        Ok(AlphaSpec::Explicit(values))
    }

    /// Resolve to a concrete sequence of length `dim`.
    pub fn resolve(&self, dim: usize) -> Result<WeightSequence, String> {
        match self {
            AlphaSpec::Dyadic => Ok(WeightSequence::dyadic(dim)),
            AlphaSpec::Explicit(values) => {
                if values.len() != dim {
                    return Err(format!(
                        "alpha list has {} entries but the test space has dimension {dim}",
                        values.len()
                    ));
                }
                WeightSequence::new(values.clone()).map_err(|e| e.to_string())
            }
        }
    }
}

/// Resolved run configuration, echoed into every report.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tol_rank: f64,
    pub tol_psd: f64,
    pub tol_verify: f64,
    pub alpha: AlphaSpec,
    pub seed: u64,
    pub validate: bool,
}

impl RunConfig {
    /// Defaults, flag overrides, then the PSFM_TOL environment override for
    /// the verification tolerance.
    pub fn resolve(
        tol_rank: Option<f64>,
        tol_psd: Option<f64>,
        tol_verify: Option<f64>,
        alphas: Option<&str>,
        seed: Option<u64>,
        no_validate: bool,
    ) -> Result<Self, String> {
        let env_tol = match std::env::var("PSFM_TOL") {
            Ok(text) => Some(
                text.parse::<f64>()
                    .map_err(|e| format!("PSFM_TOL {text:?}: {e}"))?,
            ),
            Err(_) => None,
        };
        let config = Self {
            tol_rank: tol_rank.unwrap_or(1e-10),
            tol_psd: tol_psd.unwrap_or(1e-10),
            tol_verify: env_tol.or(tol_verify).unwrap_or(1e-10),
            alpha: match alphas {
                Some(text) => AlphaSpec::parse(text)?,
                None => AlphaSpec::Dyadic,
            },
            seed: seed.unwrap_or(0),
            validate: !no_validate,
        };
        if !(config.tol_rank > 0.0 && config.tol_psd > 0.0 && config.tol_verify > 0.0) {
            return Err("tolerances must be positive".into());
        }
        Ok(config)
    }

    /// Echo of the configuration embedded in reports.
    pub fn echo(&self, resolved_alphas: Option<&WeightSequence>) -> ConfigEcho {
        ConfigEcho {
            tol_rank: self.tol_rank,
            tol_psd: self.tol_psd,
            tol_verify: self.tol_verify,
            alphas: match (&self.alpha, resolved_alphas) {
                (_, Some(w)) => AlphaEcho::Values(w.alphas().to_vec()),
                (AlphaSpec::Dyadic, None) => AlphaEcho::Named("dyadic".into()),
                (AlphaSpec::Explicit(v), None) => AlphaEcho::Values(v.clone()),
            },
            seed: self.seed,
            validate: self.validate,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum AlphaEcho {
    Named(String),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub tol_rank: f64,
    pub tol_psd: f64,
    pub tol_verify: f64,
    pub alphas: AlphaEcho,
    pub seed: u64,
    pub validate: bool,
}
