//! Monte Carlo FIM estimation by the score (likelihood-ratio) route.
//!
//! For `y = h(x)`, the output score with respect to an input distribution
//! parameter is the conditional expectation of the input score given `y`:
//! `d ln p(y|b)/db_j = E[d ln p(x|b)/db_j | y]`. We draw `x`, push it
//! through `h`, estimate that conditional expectation at every sample by
//! Nadaraya-Watson regression with a product Gaussian kernel, and average
//! outer products of the regressed scores.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::distributions::InputModel;
use crate::error::{Error, Result};
use crate::fim::{FisherMatrix, Normalization};
use crate::linalg::SymMatrix;
use crate::models::OutputMap;
use crate::par::{self, Execution};

/// Highest output dimension handled by kernel regression.
pub const MAX_REGRESSION_DIM: usize = 3;

/// Kernel support in bandwidths. Weights beyond it are below
/// `exp(-CUTOFF^2 / 2) ~ 2e-11` of the peak and are skipped.
pub const KERNEL_CUTOFF: f64 = 7.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// `h_d = 1.06 * sd_d * N^(-1/(q+4))` per output dimension.
    #[default]
    Silverman,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub bandwidth: Bandwidth,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub execution: Execution,
}

impl EstimatorConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            bandwidth: Bandwidth::Silverman,
            samples,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn with_bandwidth(mut self, bandwidth: Bandwidth) -> Self {
        self.bandwidth = bandwidth;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// Outputs and input scores for the same `N` draws.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSamples {
    /// `N x q`.
    pub y: DMatrix<f64>,
    /// `N x 2n`, interleaved input scores.
    pub scores: DMatrix<f64>,
    /// The outputs determine the inputs exactly (identity map), so the
    /// input scores already are the output scores.
    pub exact: bool,
}

impl OutputSamples {
    pub fn new(y: DMatrix<f64>, scores: DMatrix<f64>, exact: bool) -> Result<Self> {
        if y.nrows() != scores.nrows() {
            return Err(Error::DimensionMismatch {
                context: "output/score sample counts",
                expected: y.nrows(),
                found: scores.nrows(),
            });
        }
        if y.nrows() < 2 {
            return Err(Error::InvalidConfig("at least 2 samples are required".into()));
        }
        if y.iter().chain(scores.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("output samples"));
        }
        Ok(Self { y, scores, exact })
    }

    /// Draws inputs, evaluates the map and the input scores.
    pub fn generate(model: &InputModel, map: &dyn OutputMap, cfg: &EstimatorConfig) -> Result<Self> {
        if map.input_dim() != model.len() {
            return Err(Error::DimensionMismatch {
                context: "output map inputs",
                expected: model.len(),
                found: map.input_dim(),
            });
        }
        let n_samples = cfg.samples;
        let (q, p) = (map.output_dim(), model.n_params());
        let x = model.sample(n_samples, cfg.seed, cfg.execution);
        let x_rows = x.transpose(); // column i is sample i, contiguous

        let mut y = vec![0.0; n_samples * q];
        par::fill_rows(cfg.execution, &mut y, q, |i, row| {
            map.eval(x_rows.column(i).as_slice(), row)
        });
        let mut s = vec![0.0; n_samples * p];
        par::fill_rows(cfg.execution, &mut s, p, |i, row| {
            model.score_into(x_rows.column(i).as_slice(), row)
        });

        let mut y = DMatrix::from_row_slice(n_samples, q, &y);
        if map.normalize_ensemble() {
            for mut col in y.column_iter_mut() {
                let peak = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if peak > 0.0 && peak.is_finite() {
                    col /= peak;
                }
            }
        }
        Self::new(y, DMatrix::from_row_slice(n_samples, p, &s), map.is_identity())
    }

    pub fn len(&self) -> usize {
        self.y.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.y.nrows() == 0
    }
}

/// Per-dimension bandwidths for `y` (`N x q`).
pub fn bandwidths(y: &DMatrix<f64>, rule: &Bandwidth) -> Result<Vec<f64>> {
    let (n, q) = y.shape();
    match rule {
        Bandwidth::Fixed(h) => {
            if h.len() != q {
                return Err(Error::DimensionMismatch {
                    context: "fixed bandwidths",
                    expected: q,
                    found: h.len(),
                });
            }
            if h.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidConfig("bandwidths must be positive".into()));
            }
            Ok(h.clone())
        }
        Bandwidth::Silverman => {
            let factor = 1.06 * (n as f64).powf(-1.0 / (q as f64 + 4.0));
            Ok(y
                .column_iter()
                .map(|c| {
                    let mean = c.sum() / n as f64;
                    let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
                    // A constant output carries no information; any width
                    // gives equal weights.
                    if var > 0.0 {
                        factor * var.sqrt()
                    } else {
                        1.0
                    }
                })
                .collect())
        }
    }
}

/// Nadaraya-Watson regressor over fixed training points.
///
/// Points are kept in bandwidth-scaled coordinates, sorted by the first
/// coordinate so each query only visits samples within
/// [`KERNEL_CUTOFF`] bandwidths along it.
pub struct KernelRegression {
    q: usize,
    width: usize,
    /// Scaled coordinates, row-major, in sorted order.
    z: Vec<f64>,
    /// Regressed values, row-major, in sorted order.
    values: Vec<f64>,
    h: Vec<f64>,
}

impl KernelRegression {
    pub fn new(y: &DMatrix<f64>, values: &DMatrix<f64>, h: Vec<f64>) -> Result<Self> {
        let (n, q) = y.shape();
        if values.nrows() != n {
            return Err(Error::DimensionMismatch {
                context: "regression values",
                expected: n,
                found: values.nrows(),
            });
        }
        if h.len() != q {
            return Err(Error::DimensionMismatch {
                context: "bandwidths",
                expected: q,
                found: h.len(),
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| (y[(a, 0)] / h[0]).total_cmp(&(y[(b, 0)] / h[0])).then(a.cmp(&b)));
        let width = values.ncols();
        let mut z = Vec::with_capacity(n * q);
        let mut vals = Vec::with_capacity(n * width);
        for &i in &order {
            for d in 0..q {
                z.push(y[(i, d)] / h[d]);
            }
            for c in 0..width {
                vals.push(values[(i, c)]);
            }
        }
        Ok(Self {
            q,
            width,
            z,
            values: vals,
            h,
        })
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.h
    }

    fn len(&self) -> usize {
        self.z.len() / self.q
    }

    /// Kernel-weighted mean of the values at `query` (unscaled), written to
    /// `out`. Returns `false` if no training point lies within the kernel
    /// support.
    pub fn predict_into(&self, query: &[f64], out: &mut [f64]) -> bool {
        let q = self.q;
        let zq: Vec<f64> = query.iter().zip(&self.h).map(|(v, h)| v / h).collect();
        let n = self.len();
        let lo = partition(n, |i| self.z[i * q] < zq[0] - KERNEL_CUTOFF);
        let hi = partition(n, |i| self.z[i * q] <= zq[0] + KERNEL_CUTOFF);
        let limit = -0.5 * KERNEL_CUTOFF * KERNEL_CUTOFF;

        // Log-space weights, shifted by the window maximum.
        let log_w = |i: usize| -> f64 {
            let mut e = 0.0;
            for d in 0..q {
                let t = self.z[i * q + d] - zq[d];
                e -= 0.5 * t * t;
            }
            e
        };
        let mut peak = f64::NEG_INFINITY;
        for i in lo..hi {
            let e = log_w(i);
            if e >= limit && e > peak {
                peak = e;
            }
        }
        if !peak.is_finite() {
            return false;
        }

        out.fill(0.0);
        let mut total = 0.0;
        for i in lo..hi {
            let e = log_w(i);
            if e < limit {
                continue;
            }
            let w = (e - peak).exp();
            total += w;
            let row = &self.values[i * self.width..(i + 1) * self.width];
            for (o, v) in out.iter_mut().zip(row) {
                *o += w * v;
            }
        }
        if !(total > 0.0 && total.is_finite()) {
            return false;
        }
        for o in out.iter_mut() {
            *o /= total;
        }
        true
    }
}

/// First index in `0..n` where `pred` turns false (pred must be monotone).
fn partition(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Estimated output scores at every sample, `N x 2n`.
pub fn output_scores(samples: &OutputSamples, cfg: &EstimatorConfig) -> Result<DMatrix<f64>> {
    if samples.exact {
        return Ok(samples.scores.clone());
    }
    let q = samples.y.ncols();
    if q > MAX_REGRESSION_DIM {
        return Err(Error::OutputDimTooHigh(q));
    }
    if q == 0 {
        return Err(Error::InvalidConfig("output map has no outputs".into()));
    }
    let h = bandwidths(&samples.y, &cfg.bandwidth)?;
    let reg = KernelRegression::new(&samples.y, &samples.scores, h)?;
    let (n, p) = samples.scores.shape();
    let y_rows = samples.y.transpose();

    let rows = par::map_indices(cfg.execution, n, |i| {
        let mut out = vec![0.0; p];
        reg.predict_into(y_rows.column(i).as_slice(), &mut out)
            .then_some(out)
            .ok_or(Error::DegenerateKernel { query: i })
    });
    let mut data = Vec::with_capacity(n * p);
    for r in rows {
        data.extend(r?);
    }
    Ok(DMatrix::from_row_slice(n, p, &data))
}

/// `(1/N) sum_m s_m s_m^T` with a fixed chunked reduction order.
pub fn second_moment(scores: &DMatrix<f64>, exec: Execution) -> SymMatrix {
    let (n, p) = scores.shape();
    let rows = scores.transpose();
    let sum = par::chunked_sum(exec, n, p * p, |range| {
        let mut acc = vec![0.0; p * p];
        for m in range {
            let s = rows.column(m);
            for j in 0..p {
                let sj = s[j];
                for k in j..p {
                    acc[j * p + k] += sj * s[k];
                }
            }
        }
        acc
    });
    let inv = 1.0 / n as f64;
    let m = DMatrix::from_fn(p, p, |j, k| {
        let (a, b) = if j <= k { (j, k) } else { (k, j) };
        sum[a * p + b] * inv
    });
    SymMatrix::symmetrized(m)
}

/// Monte Carlo FIM of `h(x)` with respect to the input distribution
/// parameters, raw normalization, labels from `model`.
pub fn estimate_fim(
    model: &InputModel,
    map: &dyn OutputMap,
    cfg: &EstimatorConfig,
) -> Result<FisherMatrix> {
    if cfg.samples < 2 {
        return Err(Error::InvalidConfig("at least 2 samples are required".into()));
    }
    let samples = OutputSamples::generate(model, map, cfg)?;
    let scores = output_scores(&samples, cfg)?;
    let f = second_moment(&scores, cfg.execution);
    FisherMatrix::new(f, model.labels(), Normalization::Raw)
}
