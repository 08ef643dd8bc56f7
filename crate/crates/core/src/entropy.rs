//! Relative-entropy perturbation analysis.
//!
//! For a small parameter change `db` the KL divergence between the baseline
//! and perturbed output densities is `dH ~ db' F db / 2`. Writing `F` in
//! its eigenbasis gives `2 dH = sum_j lambda_j xi_j^2` with `xi = Q' db`;
//! writing it in the Williamson basis gives
//! `2 dH = sum_j d_j (alpha_j^2 + beta_j^2)` with `(alpha, beta) = S^{-1} db`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fim::{FisherMatrix, PairingSpec};
use crate::linalg::{EigenSpectrum, SymplecticSpectrum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationResult {
    /// `db' F db / 2`, nats.
    pub delta_h: f64,
    /// Orthogonal coordinates `Q' db`.
    pub xi: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl PerturbationResult {
    /// `sum lambda_j xi_j^2`.
    pub fn orthogonal_sum(&self, eig: &EigenSpectrum) -> f64 {
        eig.eigenvalues
            .iter()
            .zip(&self.xi)
            .map(|(l, x)| l * x * x)
            .sum()
    }

    /// `sum d_j (alpha_j^2 + beta_j^2)`.
    pub fn symplectic_sum(&self, sym: &SymplecticSpectrum) -> f64 {
        sym.d
            .iter()
            .zip(self.alpha.iter().zip(&self.beta))
            .map(|(d, (a, b))| d * (a * a + b * b))
            .sum()
    }
}

/// Per-parameter entropy sensitivities and their per-variable sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionReport {
    /// `sum_j lambda_j q_kj^2` over the retained eigenpairs.
    pub per_parameter: Vec<f64>,
    /// Sum of each pair's two members, in pairing order.
    pub per_variable: Vec<f64>,
    /// Number of leading eigenpairs (or symplectic pairs) retained.
    pub order: usize,
}

fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// `db' F db / 2`.
pub fn kl_quadratic(f: &FisherMatrix, db: &[f64]) -> Result<f64> {
    check_dim("perturbation", f.dim(), db.len())?;
    let v = DVector::from_column_slice(db);
    Ok(0.5 * v.dot(&(f.matrix().matrix() * &v)))
}

/// Coordinates of `db` in both bases. `f`, `eig` and `sym` must describe the
/// same matrix in split-half layout.
pub fn decompose_perturbation(
    f: &FisherMatrix,
    db: &[f64],
    eig: &EigenSpectrum,
    sym: &SymplecticSpectrum,
) -> Result<PerturbationResult> {
    check_dim("perturbation", f.dim(), db.len())?;
    check_dim("eigen spectrum", f.dim(), eig.dim())?;
    check_dim("symplectic spectrum", f.dim(), 2 * sym.n)?;
    let v = DVector::from_column_slice(db);
    let xi = eig.eigenvectors.transpose() * &v;
    let ab = sym.s_inverse() * &v;
    let n = sym.n;
    Ok(PerturbationResult {
        delta_h: kl_quadratic(f, db)?,
        xi: xi.iter().copied().collect(),
        alpha: ab.rows(0, n).iter().copied().collect(),
        beta: ab.rows(n, n).iter().copied().collect(),
    })
}

/// `1/sqrt(v)` elementwise; every value must be positive.
pub fn ellipsoid_radii(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 0.0 {
                Ok(1.0 / value.sqrt())
            } else {
                Err(Error::NonPositiveEigenvalue { index, value })
            }
        })
        .collect()
}

fn aggregate(per_parameter: &[f64], pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(a, b)| per_parameter[a] + per_parameter[b])
        .collect()
}

/// Entropy sensitivity of each parameter perturbed alone:
/// `[sum_{j < order} lambda_j q_kj^2]`. With the full spectrum this is
/// exactly `F_kk`. `order = None` keeps every eigenpair.
pub fn parameter_contributions(
    f: &FisherMatrix,
    eig: &EigenSpectrum,
    aggregation: &PairingSpec,
    order: Option<usize>,
) -> Result<ContributionReport> {
    let dim = f.dim();
    check_dim("eigen spectrum", dim, eig.dim())?;
    check_dim("aggregation pairs", dim, 2 * aggregation.n())?;
    let order = order.unwrap_or(dim).min(dim);
    let per_parameter: Vec<f64> = (0..dim)
        .map(|k| {
            (0..order)
                .map(|j| eig.eigenvalues[j] * eig.eigenvectors[(k, j)].powi(2))
                .sum()
        })
        .collect();
    Ok(ContributionReport {
        per_variable: aggregate(&per_parameter, aggregation.pairs()),
        per_parameter,
        order,
    })
}

/// Symplectic counterpart: perturbing `b_k` alone gives
/// `2 dH = [sum_j d_j ((S^-1)_{jk}^2 + (S^-1)_{n+j,k}^2)] db_k^2`.
/// Indices refer to the split-half layout of `sym`; per-variable sums use
/// the layout's own pairs `(k, n + k)`.
pub fn symplectic_contributions(
    sym: &SymplecticSpectrum,
    order: Option<usize>,
) -> ContributionReport {
    let n = sym.n;
    let order = order.unwrap_or(n).min(n);
    let inv = sym.s_inverse();
    let per_parameter: Vec<f64> = (0..2 * n)
        .map(|k| {
            (0..order)
                .map(|j| sym.d[j] * (inv[(j, k)].powi(2) + inv[(n + j, k)].powi(2)))
                .sum()
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..n).map(|k| (k, n + k)).collect();
    ContributionReport {
        per_variable: aggregate(&per_parameter, &pairs),
        per_parameter,
        order,
    }
}

/// Exact `KL(N(mu, sigma) || N(mu + dmu, sigma + dsigma))`.
pub fn gaussian_kl(sigma: f64, dmu: f64, dsigma: f64) -> f64 {
    let s2 = sigma + dsigma;
    (s2 / sigma).ln() + (sigma * sigma + dmu * dmu) / (2.0 * s2 * s2) - 0.5
}
