//! Parametric input distributions: sampling and analytic scores.
//!
//! Each variable contributes two parameters, interleaved as
//! `(mu_1, sigma_1, mu_2, sigma_2, ...)`.

use std::collections::HashSet;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fim::{FisherMatrix, Normalization, ParamLabel};
use crate::linalg::SymMatrix;
use crate::par::{self, Execution};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[default]
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputVariable {
    pub name: String,
    #[serde(default)]
    pub family: Family,
    pub mean: f64,
    pub std_dev: f64,
}

impl InputVariable {
    pub fn normal(name: impl Into<String>, mean: f64, std_dev: f64) -> Self {
        Self {
            name: name.into(),
            family: Family::Normal,
            mean,
            std_dev,
        }
    }

    /// `(d ln p / d mu, d ln p / d sigma)` at `x`.
    pub fn score(&self, x: f64) -> (f64, f64) {
        match self.family {
            Family::Normal => {
                let s = self.std_dev;
                let z = x - self.mean;
                (z / (s * s), (z * z - s * s) / (s * s * s))
            }
        }
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        match self.family {
            Family::Normal => normal_log_pdf(x, self.mean, self.std_dev),
        }
    }
}

pub fn normal_log_pdf(x: f64, mean: f64, std_dev: f64) -> f64 {
    let z = (x - mean) / std_dev;
    -0.5 * z * z - std_dev.ln() - LN_SQRT_2PI
}

/// Independent parametric inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<InputVariable>", into = "Vec<InputVariable>")]
pub struct InputModel {
    variables: Vec<InputVariable>,
}

impl TryFrom<Vec<InputVariable>> for InputModel {
    type Error = Error;
    fn try_from(v: Vec<InputVariable>) -> Result<Self> {
        InputModel::new(v)
    }
}

impl From<InputModel> for Vec<InputVariable> {
    fn from(m: InputModel) -> Self {
        m.variables
    }
}

/// Interleaved score vector `(d ln p/d mu_1, d ln p/d sigma_1, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector(pub Vec<f64>);

impl InputModel {
    pub fn new(variables: Vec<InputVariable>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidModel("no input variables".into()));
        }
        let mut names = HashSet::new();
        for v in &variables {
            if v.name.trim().is_empty() {
                return Err(Error::InvalidModel("empty variable name".into()));
            }
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate variable '{}'", v.name)));
            }
            if !v.mean.is_finite() {
                return Err(Error::InvalidModel(format!("mean of '{}' is not finite", v.name)));
            }
            if !(v.std_dev > 0.0 && v.std_dev.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "std_dev of '{}' must be positive, got {}",
                    v.name, v.std_dev
                )));
            }
        }
        Ok(Self { variables })
    }

    /// `n` independent standard normals named `x1..xn`.
    pub fn standard_normals(n: usize) -> Result<Self> {
        Self::new(
            (1..=n)
                .map(|i| InputVariable::normal(format!("x{i}"), 0.0, 1.0))
                .collect(),
        )
    }

    pub fn variables(&self) -> &[InputVariable] {
        &self.variables
    }

    /// Number of variables.
    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// Number of distribution parameters (`2n`).
    pub fn n_params(&self) -> usize {
        2 * self.variables.len()
    }

    pub fn labels(&self) -> Vec<ParamLabel> {
        self.variables
            .iter()
            .flat_map(|v| {
                [
                    ParamLabel::mean(v.name.clone(), v.mean),
                    ParamLabel::std_dev(v.name.clone(), v.std_dev),
                ]
            })
            .collect::<Result<_>>()
            .expect("validated on construction")
    }

    /// Draws row `index` of the sample matrix. Each row uses its own
    /// ChaCha stream, so rows do not depend on batching or scheduling.
    pub fn sample_row(&self, seed: u64, index: u64, out: &mut [f64]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        for (slot, v) in out.iter_mut().zip(&self.variables) {
            let z: f64 = rng.sample(StandardNormal);
            *slot = match v.family {
                Family::Normal => v.mean + v.std_dev * z,
            };
        }
    }

    /// `count x n` i.i.d. draws, bitwise reproducible for a fixed seed on
    /// any backend.
    pub fn sample(&self, count: usize, seed: u64, exec: Execution) -> DMatrix<f64> {
        let n = self.len();
        let mut rows = vec![0.0; count * n];
        par::fill_rows(exec, &mut rows, n, |i, row| {
            self.sample_row(seed, i as u64, row)
        });
        DMatrix::from_row_slice(count, n, &rows)
    }

    pub fn score(&self, x: &[f64]) -> Result<ScoreVector> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch {
                context: "score input",
                expected: self.len(),
                found: x.len(),
            });
        }
        let mut out = vec![0.0; self.n_params()];
        self.score_into(x, &mut out);
        Ok(ScoreVector(out))
    }

    pub(crate) fn score_into(&self, x: &[f64], out: &mut [f64]) {
        for (k, (v, &xi)) in self.variables.iter().zip(x).enumerate() {
            let (dm, ds) = v.score(xi);
            out[2 * k] = dm;
            out[2 * k + 1] = ds;
        }
    }

    /// Joint log density of independent inputs.
    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, &xi)| v.log_pdf(xi)).sum()
    }

    /// Closed-form FIM of the inputs themselves:
    /// `diag(1/sigma_1^2, 2/sigma_1^2, ...)`.
    pub fn analytic_fim(&self) -> FisherMatrix {
        let diag: Vec<f64> = self
            .variables
            .iter()
            .flat_map(|v| {
                let p = 1.0 / (v.std_dev * v.std_dev);
                [p, 2.0 * p]
            })
            .collect();
        FisherMatrix::new(SymMatrix::from_diagonal(&diag), self.labels(), Normalization::Raw)
            .expect("diagonal with positive entries")
    }

    /// [`InputModel::analytic_fim`] followed by `normalize(mode)`, evaluated
    /// in closed form: entry `c / sigma^2 * s^2` is computed as
    /// `c * (s / sigma)^2`, so stddev normalization gives exactly
    /// `diag(1, 2, ...)` instead of a rounded round trip through `1/sigma^2`.
    pub fn analytic_fim_normalized(&self, mode: Normalization) -> Result<FisherMatrix> {
        let raw = self.analytic_fim();
        let scales = raw.normalization_scales(mode)?;
        let diag: Vec<f64> = self
            .variables
            .iter()
            .flat_map(|v| [(1.0, v), (2.0, v)])
            .zip(&scales)
            .map(|((c, v), s)| {
                let r = s / v.std_dev;
                c * r * r
            })
            .collect();
        FisherMatrix::new(SymMatrix::from_diagonal(&diag), raw.labels().to_vec(), mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn closed_form_normalization_is_exact() {
        let m = InputModel::new(vec![
            InputVariable::normal("E", 69e9, 11.5e9),
            InputVariable::normal("t", 0.3, 0.045),
        ])
        .unwrap();
        let f = m.analytic_fim_normalized(Normalization::StdDev).unwrap();
        assert_eq!(f.matrix().diagonal(), vec![1.0, 2.0, 1.0, 2.0]);
        let via = m.analytic_fim().normalize(Normalization::StdDev).unwrap();
        for k in 0..4 {
            assert_relative_eq!(via.get(k, k), f.get(k, k), max_relative = 1e-14);
        }
        let p = m.analytic_fim_normalized(Normalization::Proportional).unwrap();
        let expected = (0.3f64 / 0.045).powi(2);
        assert_relative_eq!(p.get(2, 2), expected, max_relative = 1e-14);
        assert_relative_eq!(p.get(3, 3), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_nonpositive_sigma_and_duplicates() {
        assert!(InputModel::new(vec![InputVariable::normal("a", 5.0, 0.0)]).is_err());
        assert!(InputModel::new(vec![InputVariable::normal("a", 5.0, -1.0)]).is_err());
        assert!(InputModel::new(vec![
            InputVariable::normal("a", 0.0, 1.0),
            InputVariable::normal("a", 0.0, 1.0)
        ])
        .is_err());
        assert!(InputModel::new(vec![]).is_err());
    }

    #[test]
    fn score_closed_forms() {
        let m = InputModel::new(vec![InputVariable::normal("a", 3.0, 2.0)]).unwrap();
        assert_eq!(m.score(&[3.0]).unwrap().0, vec![0.0, -0.5]);
        let s = m.score(&[5.0]).unwrap().0;
        assert_relative_eq!(s[0], 0.5);
        assert_relative_eq!(s[1], 0.0);

        let unit = InputModel::standard_normals(1).unwrap();
        assert_eq!(unit.score(&[2.0]).unwrap().0, vec![2.0, 3.0]);
        assert!(unit.score(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn analytic_fim_examples() {
        let f = InputModel::standard_normals(2).unwrap().analytic_fim();
        assert_eq!(f.matrix().diagonal(), vec![1.0, 2.0, 1.0, 2.0]);

        let m = InputModel::new(vec![InputVariable::normal("a", 1.0, 2.0)]).unwrap();
        assert_eq!(m.analytic_fim().matrix().diagonal(), vec![0.25, 0.5]);
        assert_eq!(m.analytic_fim().labels()[1].nominal, 2.0);
    }

    #[test]
    fn sample_mean_within_clt_bound() {
        let m = InputModel::standard_normals(1).unwrap();
        let n = 100_000;
        let x = m.sample(n, 7, Execution::default());
        let mean = x.column(0).sum() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn sample_is_backend_independent() {
        let m = InputModel::standard_normals(3).unwrap();
        let a = m.sample(2000, 11, Execution::Sequential);
        let b = m.sample(2000, 11, Execution::Parallel);
        assert_eq!(a, b);
        let head = m.sample(10, 11, Execution::Sequential);
        assert_eq!(head, a.rows(0, 10).into_owned());
        assert_ne!(a, m.sample(2000, 12, Execution::Sequential));
    }

    #[test]
    fn score_has_zero_mean() {
        let m = InputModel::new(vec![
            InputVariable::normal("a", 1.0, 0.5),
            InputVariable::normal("b", -2.0, 3.0),
        ])
        .unwrap();
        let n = 100_000;
        let x = m.sample(n, 3, Execution::default());
        let mut sum = [0.0; 4];
        let mut sq = [0.0; 4];
        for i in 0..n {
            let row: Vec<f64> = x.row(i).iter().copied().collect();
            for (k, s) in m.score(&row).unwrap().0.into_iter().enumerate() {
                sum[k] += s;
                sq[k] += s * s;
            }
        }
        for k in 0..4 {
            let mean = sum[k] / n as f64;
            let sd = (sq[k] / n as f64 - mean * mean).sqrt() / (n as f64).sqrt();
            assert!(mean.abs() < 5.0 * sd, "component {k}: {mean} vs {sd}");
        }
    }

    proptest! {
        #[test]
        fn score_matches_central_differences(
            x in -10.0f64..10.0,
            mu in -5.0f64..5.0,
            sigma in 0.2f64..5.0,
        ) {
            let v = InputVariable::normal("a", mu, sigma);
            let (dm, ds) = v.score(x);
            let h = 1e-6;
            let fd_m = (normal_log_pdf(x, mu + h, sigma) - normal_log_pdf(x, mu - h, sigma)) / (2.0 * h);
            let fd_s = (normal_log_pdf(x, mu, sigma + h) - normal_log_pdf(x, mu, sigma - h)) / (2.0 * h);
            // Absolute floor covers scores that vanish at the evaluation point.
            prop_assert!((dm - fd_m).abs() <= 1e-6 * dm.abs().max(1.0));
            prop_assert!((ds - fd_s).abs() <= 1e-6 * ds.abs().max(1.0));
        }
    }
}
