//! estimate -> normalize -> pair -> decompose -> contributions.

use serde::Serialize;
use symfisher::entropy::{parameter_contributions, symplectic_contributions};
use symfisher::estimator::estimate_fim;
use symfisher::models::{BeamMap, BenchmarkFunction, BenchmarkMap, Identity};
use symfisher::{
    ContributionReport, EigenSpectrum, EstimatorConfig, FisherMatrix, InputModel, OutputMap,
    PairingSpec, SymplecticSpectrum,
};

use crate::config::{ModelConfig, RunConfig};
use crate::error::{CliError, Stage};

/// Contribution indices, full and truncated to the leading term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contributions {
    /// `sum_j lambda_j q_kj^2` over the whole spectrum (equals `diag F`).
    pub standard: ContributionReport,
    /// Leading eigenvector only.
    pub first_eigenvector: ContributionReport,
    /// Leading symplectic pair only.
    pub first_symplectic_pair: ContributionReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionNumbers {
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone)]
pub struct SensitivityReport {
    pub config: RunConfig,
    pub raw: FisherMatrix,
    /// Normalized, interleaved parameter order.
    pub normalized: FisherMatrix,
    /// Normalized and permuted into split-half layout; `eig` and `sym`
    /// refer to this matrix.
    pub paired: FisherMatrix,
    pub eig: EigenSpectrum,
    pub sym: SymplecticSpectrum,
    pub condition_numbers: ConditionNumbers,
    pub contributions: Contributions,
    pub started: String,
    pub finished: String,
}

/// One symplectic spectrum per pairing, all from the same estimate.
#[derive(Debug, Clone)]
pub struct PairingComparison {
    pub normalized: FisherMatrix,
    /// Standard eigenvalues; identical for every pairing.
    pub eigenvalues: Vec<f64>,
    pub spectra: Vec<(PairingSpec, SymplecticSpectrum)>,
}

fn output_map(model: &ModelConfig, inputs: &InputModel) -> Result<Box<dyn OutputMap>, CliError> {
    Ok(match model {
        ModelConfig::Identity => Box::new(Identity(inputs.len())),
        ModelConfig::Benchmark { coefficients } => {
            let f = match coefficients {
                Some(path) => BenchmarkFunction::load(path).map_err(|e| match e {
                    symfisher::Error::Io(source) => CliError::io(path, source),
                    other => CliError::Config(format!("{}: {other}", path.display())),
                })?,
                None => BenchmarkFunction::shipped(),
            };
            Box::new(BenchmarkMap::new(f).map_err(|e| CliError::Config(e.to_string()))?)
        }
        ModelConfig::Beam { settings, .. } => {
            let settings = settings.clone().unwrap_or_default();
            Box::new(BeamMap::new(settings).map_err(|e| CliError::Config(e.to_string()))?)
        }
    })
}

/// Raw FIM for the configured model: analytic for the identity map,
/// Monte Carlo otherwise.
pub fn raw_fim(config: &RunConfig) -> Result<FisherMatrix, CliError> {
    config.validate()?;
    let inputs = config.input_model()?;
    if let ModelConfig::Identity = config.model {
        return Ok(inputs.analytic_fim());
    }
    let map = output_map(&config.model, &inputs)?;
    let cfg = EstimatorConfig::new(config.samples, config.seed)
        .with_bandwidth(config.estimator.bandwidth.clone())
        .with_execution(config.estimator.execution);
    estimate_fim(&inputs, map.as_ref(), &cfg).map_err(CliError::at(Stage::Estimate))
}

/// Raw and normalized FIMs. The identity model normalizes in closed form,
/// which keeps e.g. `diag(1, 2, 1, 2)` exact.
pub fn fims(config: &RunConfig) -> Result<(FisherMatrix, FisherMatrix), CliError> {
    let raw = raw_fim(config)?;
    let normalized = match config.model {
        ModelConfig::Identity => config.input_model()?.analytic_fim_normalized(config.normalization),
        _ => raw.normalize(config.normalization),
    }
    .map_err(CliError::at(Stage::Normalize))?;
    Ok((raw, normalized))
}

fn pairing_for(config: &RunConfig, f: &FisherMatrix) -> Result<PairingSpec, CliError> {
    match &config.pairing {
        Some(p) => PairingSpec::parse(&p.pairs, f.labels()).map_err(CliError::at(Stage::Pairing)),
        None => Ok(PairingSpec::natural(f.dim() / 2)),
    }
}

pub fn run(config: &RunConfig) -> Result<SensitivityReport, CliError> {
    let started = timestamp();
    let (raw, normalized) = fims(config)?;
    let pairing = pairing_for(config, &normalized)?;
    let paired = normalized
        .apply_pairing(&pairing)
        .map_err(CliError::at(Stage::Pairing))?;
    let eig = paired.sym_eig();
    let sym = paired.williamson().map_err(CliError::at(Stage::Decompose))?;

    // Variables sit at (k, n + k) once paired.
    let split = PairingSpec::new((0..sym.n).map(|k| (k, sym.n + k)).collect())
        .map_err(CliError::at(Stage::Contributions))?;
    let contributions = Contributions {
        standard: parameter_contributions(&paired, &eig, &split, None)
            .map_err(CliError::at(Stage::Contributions))?,
        first_eigenvector: parameter_contributions(&paired, &eig, &split, Some(1))
            .map_err(CliError::at(Stage::Contributions))?,
        first_symplectic_pair: symplectic_contributions(&sym, Some(1)),
    };

    Ok(SensitivityReport {
        condition_numbers: ConditionNumbers {
            raw: raw.condition_number(),
            normalized: normalized.condition_number(),
        },
        config: config.clone(),
        raw,
        normalized,
        paired,
        eig,
        sym,
        contributions,
        started,
        finished: timestamp(),
    })
}

pub fn compare_pairings(
    config: &RunConfig,
    pairings: &[String],
) -> Result<PairingComparison, CliError> {
    if pairings.is_empty() {
        return Err(CliError::Config("at least one pairing is required".into()));
    }
    let (_, normalized) = fims(config)?;
    let eigenvalues = normalized.sym_eig().eigenvalues;
    let spectra = pairings
        .iter()
        .map(|text| {
            let spec = PairingSpec::parse(text, normalized.labels())
                .map_err(CliError::at(Stage::Pairing))?;
            let sym = normalized
                .apply_pairing(&spec)
                .map_err(CliError::at(Stage::Pairing))?
                .williamson()
                .map_err(CliError::at(Stage::Decompose))?;
            Ok((spec, sym))
        })
        .collect::<Result<_, CliError>>()?;
    Ok(PairingComparison {
        normalized,
        eigenvalues,
        spectra,
    })
}

/// Standard and symplectic spectra of an imported matrix.
pub fn decompose(
    f: &FisherMatrix,
    pairs: Option<&str>,
) -> Result<(FisherMatrix, EigenSpectrum, SymplecticSpectrum), CliError> {
    let spec = match pairs {
        Some(text) => PairingSpec::parse(text, f.labels()).map_err(CliError::at(Stage::Pairing))?,
        None => {
            if !f.dim().is_multiple_of(2) {
                return Err(CliError::at(Stage::Pairing)(symfisher::Error::DimensionOdd(
                    f.dim(),
                )));
            }
            PairingSpec::natural(f.dim() / 2)
        }
    };
    let paired = f.apply_pairing(&spec).map_err(CliError::at(Stage::Pairing))?;
    let eig = paired.sym_eig();
    let sym = paired.williamson().map_err(CliError::at(Stage::Decompose))?;
    Ok((paired, eig, sym))
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

