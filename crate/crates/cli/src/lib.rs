//! Library half of the `symfisher` command: configuration, the
//! estimate→normalize→pair→decompose pipeline and report emission.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

pub use config::{ModelConfig, RunConfig};
pub use error::{CliError, Stage};
pub use pipeline::{compare_pairings, decompose, run, PairingComparison, SensitivityReport};
pub use report::{determinant_audit, emit_comparison, emit_report};
