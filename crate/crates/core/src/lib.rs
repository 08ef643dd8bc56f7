//! Fisher-information sensitivity spectra.
//!
//! The crate estimates the Fisher information matrix (FIM) of a model
//! output with respect to the distribution parameters of its inputs and
//! decomposes it two ways: the ordinary symmetric eigendecomposition and
//! the symplectic (Williamson) decomposition over user-chosen parameter
//! pairs. Around that sit normalization, pairing permutations, relative
//! entropy perturbation analysis and a few built-in output models.
//!
//! Parameter vectors are interleaved per variable, `(mu_1, sigma_1, mu_2,
//! sigma_2, ...)`. Symplectic work happens in the split-half layout
//! `(first members of each pair | second members)` produced by
//! [`fim::FisherMatrix::apply_pairing`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod entropy;
pub mod error;
pub mod estimator;
pub mod fim;
pub mod linalg;
pub mod models;
pub mod par;

pub use distributions::{Family, InputModel, InputVariable, ScoreVector};
pub use entropy::{ContributionReport, PerturbationResult};
pub use error::{Error, Result};
pub use estimator::{Bandwidth, EstimatorConfig, OutputSamples};
pub use fim::{FisherMatrix, Normalization, PairingSpec, ParamKind, ParamLabel};
pub use linalg::{EigenSpectrum, SymMatrix, SymplecticForm, SymplecticSpectrum};
pub use models::OutputMap;
pub use par::Execution;
