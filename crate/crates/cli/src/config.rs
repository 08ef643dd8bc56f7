//! Run configuration, read from TOML.
//!
//! ```toml
//! seed = 42
//! samples = 20000
//! normalization = "stddev"      # raw | proportional | stddev
//! out = "out/case1"
//!
//! [model]
//! kind = "beam"                 # identity | benchmark | beam
//! case = "case1"                # beam only: case1 | case2
//!
//! [pairing]
//! pairs = "E.mean:E.stddev, rho.mean:rho.stddev, L.mean:t.mean, L.stddev:t.stddev, w.mean:w.stddev"
//!
//! [estimator]
//! bandwidth = "silverman"       # or { fixed = [0.1, 0.1] }
//! execution = "parallel"        # parallel | sequential
//! ```
//!
//! Inputs are given as `[[inputs]]` tables (`name`, `mean`, `std_dev`).
//! The benchmark model defaults to 15 standard normals and a beam case
//! supplies its own; identity models and custom beams must list them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use symfisher::models::beam::BEAM_INPUTS;
use symfisher::models::{BeamCase, BeamModel};
use symfisher::{Bandwidth, Execution, InputModel, InputVariable, Normalization};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<InputVariable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<PairingConfig>,
    #[serde(default)]
    pub estimator: EstimatorSection,
}

fn default_normalization() -> Normalization {
    Normalization::StdDev
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Identity,
    Benchmark {
        /// Coefficient file; the shipped synthetic set when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coefficients: Option<PathBuf>,
    },
    Beam {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        case: Option<BeamCase>,
        /// Structural settings; the nominal aluminium beam when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        settings: Option<BeamModel>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairingConfig {
    /// `"a:b, c:d, ..."` with indices or `variable.kind` labels.
    pub pairs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    #[serde(default)]
    pub bandwidth: Bandwidth,
    #[serde(default)]
    pub execution: Execution,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.samples < 2 {
            return Err(CliError::Config("samples must be at least 2".into()));
        }
        if let Bandwidth::Fixed(h) = &self.estimator.bandwidth {
            if h.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(CliError::Config("fixed bandwidths must be positive".into()));
            }
        }
        self.input_model().map(|_| ())
    }

    /// The input distributions implied by the model section and `[[inputs]]`.
    pub fn input_model(&self) -> Result<InputModel, CliError> {
        let listed = || {
            InputModel::new(self.inputs.clone()).map_err(|e| CliError::Config(e.to_string()))
        };
        let model = match &self.model {
            ModelConfig::Identity => {
                if self.inputs.is_empty() {
                    return Err(CliError::Config("identity model needs [[inputs]]".into()));
                }
                listed()?
            }
            ModelConfig::Benchmark { .. } => {
                if self.inputs.is_empty() {
                    InputModel::standard_normals(symfisher::models::benchmark::BENCHMARK_DIM)
                        .expect("valid")
                } else {
                    listed()?
                }
            }
            ModelConfig::Beam { case: Some(case), .. } => {
                if !self.inputs.is_empty() {
                    return Err(CliError::Config(
                        "beam case supplies its own inputs; drop [[inputs]] or the case".into(),
                    ));
                }
                case.input_model()
            }
            ModelConfig::Beam { case: None, .. } => {
                if self.inputs.is_empty() {
                    return Err(CliError::Config(
                        "custom beam needs a case or [[inputs]] for E, rho, L, w, t".into(),
                    ));
                }
                listed()?
            }
        };
        let expected = match &self.model {
            ModelConfig::Identity => None,
            ModelConfig::Benchmark { .. } => Some(symfisher::models::benchmark::BENCHMARK_DIM),
            ModelConfig::Beam { .. } => Some(BEAM_INPUTS.len()),
        };
        if let Some(n) = expected {
            if model.len() != n {
                return Err(CliError::Config(format!(
                    "model expects {n} inputs, config lists {}",
                    model.len()
                )));
            }
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE1: &str = r#"
seed = 42
samples = 20000
out = "out/case1"

[model]
kind = "beam"
case = "case1"
"#;

    #[test]
    fn parses_beam_case() {
        let cfg = RunConfig::from_toml(CASE1).unwrap();
        assert_eq!(cfg.normalization, Normalization::StdDev);
        let m = cfg.input_model().unwrap();
        let cov: Vec<f64> = m.variables().iter().map(|v| v.std_dev / v.mean).collect();
        let expected = [1.0 / 200.0, 1.0 / 80.0, 1.0 / 100.0, 1.0 / 60.0, 1.0 / 80.0];
        for (a, b) in cov.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::from_toml(CASE1).unwrap();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);

        let custom = r#"
seed = 1
samples = 100
normalization = "raw"

[model]
kind = "identity"

[[inputs]]
name = "a"
mean = 1.5
std_dev = 0.25

[[inputs]]
name = "b"
mean = -2.0
std_dev = 3.0

[pairing]
pairs = "a.mean:b.mean, a.stddev:b.stddev"

[estimator]
bandwidth = { fixed = [0.2] }
execution = "sequential"
"#;
        let cfg = RunConfig::from_toml(custom).unwrap();
        assert_eq!(cfg.estimator.bandwidth, Bandwidth::Fixed(vec![0.2]));
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let bad = [
            "seed = 1\nsamples = 10\n[model]\nkind = \"identity\"\n",
            "seed = 1\nsamples = 1\n[model]\nkind = \"benchmark\"\n",
            "seed = 1\nsamples = 10\nbogus = 3\n[model]\nkind = \"benchmark\"\n",
            "seed = 1\nsamples = 10\n[model]\nkind = \"beam\"\n",
            "seed = 1\nsamples = 10\n[model]\nkind = \"benchmark\"\n[[inputs]]\nname = \"x\"\nmean = 0.0\nstd_dev = 1.0\n",
        ];
        for text in bad {
            assert!(matches!(RunConfig::from_toml(text), Err(CliError::Config(_))), "{text}");
        }
    }
}
