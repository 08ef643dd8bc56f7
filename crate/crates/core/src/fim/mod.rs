//! The Fisher information matrix container and its transforms.
//!
//! Every transform returns a new [`FisherMatrix`] and carries the parameter
//! labels along, so downstream reports can name rows without positional
//! bookkeeping.

mod io;
mod pairing;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, williamson, EigenSpectrum, SymMatrix, SymplecticSpectrum};

pub use io::{read_matrix_file, write_matrix_file};
pub use pairing::PairingSpec;

/// Minimum eigenvalue accepted by [`FisherMatrix::new`], relative to the
/// spectral norm.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Mean,
    StdDev,
    Other(String),
}

impl ParamKind {
    pub fn parse(s: &str) -> Self {
        match s.trim() {
            "mean" => ParamKind::Mean,
            "stddev" => ParamKind::StdDev,
            other => ParamKind::Other(other.to_string()),
        }
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamKind::Mean => f.write_str("mean"),
            ParamKind::StdDev => f.write_str("stddev"),
            ParamKind::Other(s) => f.write_str(s),
        }
    }
}

/// Names one distribution parameter: which variable, which parameter of it,
/// and the nominal value used for normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamLabel {
    pub variable: String,
    pub kind: ParamKind,
    pub nominal: f64,
}

impl ParamLabel {
    pub fn new(variable: impl Into<String>, kind: ParamKind, nominal: f64) -> Result<Self> {
        let variable = variable.into();
        if variable.trim().is_empty() {
            return Err(Error::InvalidModel("empty variable name in label".into()));
        }
        if !nominal.is_finite() {
            return Err(Error::NonFinite("label nominal value"));
        }
        Ok(Self {
            variable,
            kind,
            nominal,
        })
    }

    pub fn mean(variable: impl Into<String>, nominal: f64) -> Result<Self> {
        Self::new(variable, ParamKind::Mean, nominal)
    }

    pub fn std_dev(variable: impl Into<String>, nominal: f64) -> Result<Self> {
        Self::new(variable, ParamKind::StdDev, nominal)
    }
}

impl fmt::Display for ParamLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.variable, self.kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    Raw,
    Proportional,
    #[serde(rename = "stddev")]
    StdDev,
}

impl Normalization {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "raw" => Some(Normalization::Raw),
            "proportional" => Some(Normalization::Proportional),
            "stddev" => Some(Normalization::StdDev),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::Proportional => "proportional",
            Normalization::StdDev => "stddev",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    matrix: SymMatrix,
    labels: Vec<ParamLabel>,
    normalization: Normalization,
    /// Set once [`FisherMatrix::apply_pairing`] has moved the matrix into
    /// split-half layout; indices refer to the pre-pairing order.
    pairing: Option<PairingSpec>,
}

impl FisherMatrix {
    /// Rejects label/dimension mismatches and matrices whose smallest
    /// eigenvalue falls below `-PSD_TOL * ||F||`. Small negative eigenvalues
    /// inside that band are kept as-is; see [`FisherMatrix::regularize`].
    pub fn new(
        matrix: SymMatrix,
        labels: Vec<ParamLabel>,
        normalization: Normalization,
    ) -> Result<Self> {
        if labels.len() != matrix.dim() {
            return Err(Error::DimensionMismatch {
                context: "FIM labels",
                expected: matrix.dim(),
                found: labels.len(),
            });
        }
        if matrix.dim() > 0 {
            let eig = sym_eig(&matrix);
            let norm = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let min = *eig.eigenvalues.last().unwrap();
            if min < -PSD_TOL * norm {
                return Err(Error::NotPositiveDefinite {
                    min_eigenvalue: min,
                    floor: -PSD_TOL * norm,
                });
            }
        }
        Ok(Self {
            matrix,
            labels,
            normalization,
            pairing: None,
        })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> &[ParamLabel] {
        &self.labels
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn pairing(&self) -> Option<&PairingSpec> {
        self.pairing.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    /// `J^T F J` for a caller-supplied Jacobian `d(old)/d(new)` of shape
    /// `s x t`, `t <= s`, with labels for the `t` new parameters.
    pub fn reparameterize(&self, jac: &DMatrix<f64>, labels: Vec<ParamLabel>) -> Result<Self> {
        let s = self.dim();
        if jac.nrows() != s {
            return Err(Error::DimensionMismatch {
                context: "Jacobian rows",
                expected: s,
                found: jac.nrows(),
            });
        }
        if jac.ncols() > s {
            return Err(Error::DimensionMismatch {
                context: "Jacobian columns (at most FIM dimension)",
                expected: s,
                found: jac.ncols(),
            });
        }
        if labels.len() != jac.ncols() {
            return Err(Error::DimensionMismatch {
                context: "reparameterized labels",
                expected: jac.ncols(),
                found: labels.len(),
            });
        }
        let m = jac.transpose() * self.matrix.matrix() * jac;
        Ok(Self {
            matrix: SymMatrix::symmetrized(m),
            labels,
            normalization: Normalization::Raw,
            pairing: None,
        })
    }

    /// Scale factors each parameter is multiplied by under `mode`.
    pub fn normalization_scales(&self, mode: Normalization) -> Result<Vec<f64>> {
        match mode {
            Normalization::Raw => Ok(vec![1.0; self.dim()]),
            Normalization::Proportional => self
                .labels
                .iter()
                .map(|l| {
                    if l.nominal == 0.0 {
                        Err(Error::ZeroNominal(l.to_string()))
                    } else {
                        Ok(l.nominal)
                    }
                })
                .collect(),
            Normalization::StdDev => self
                .labels
                .iter()
                .map(|l| {
                    let sd = self
                        .labels
                        .iter()
                        .find(|o| o.variable == l.variable && o.kind == ParamKind::StdDev)
                        .ok_or_else(|| Error::MissingNominal(l.variable.clone()))?;
                    if sd.nominal == 0.0 {
                        Err(Error::ZeroNominal(sd.to_string()))
                    } else {
                        Ok(sd.nominal)
                    }
                })
                .collect(),
        }
    }

    /// Diagonal re-parameterization `b_j = scale_j * theta_j`: entry
    /// `(j, k)` is multiplied by `scale_j * scale_k`.
    ///
    /// `StdDev` scales every parameter of a variable by that variable's
    /// standard deviation (so both `mu_m` and `sigma_m` rows get `sigma_m`);
    /// `Proportional` scales each parameter by its own nominal value.
    pub fn normalize(&self, mode: Normalization) -> Result<Self> {
        let scales = self.normalization_scales(mode)?;
        let jac = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(scales));
        let mut out = self.reparameterize(&jac, self.labels.clone())?;
        out.normalization = mode;
        out.pairing = self.pairing.clone();
        Ok(out)
    }

    /// Reorders rows and columns into split-half layout: pair `k`'s first
    /// member goes to position `k`, its second member to `n + k`.
    pub fn apply_pairing(&self, pairing: &PairingSpec) -> Result<Self> {
        if self.pairing.is_some() {
            return Err(Error::InvalidPairing(
                "matrix is already in paired layout".into(),
            ));
        }
        let perm = pairing.permutation(self.dim())?;
        Ok(Self {
            matrix: self.matrix.permuted(&perm),
            labels: perm.iter().map(|&i| self.labels[i].clone()).collect(),
            normalization: self.normalization,
            pairing: Some(pairing.clone()),
        })
    }

    pub fn sym_eig(&self) -> EigenSpectrum {
        sym_eig(&self.matrix)
    }

    /// Williamson decomposition of the matrix as laid out now (callers
    /// normally pair first).
    pub fn williamson(&self) -> Result<SymplecticSpectrum> {
        williamson(&self.matrix)
    }

    /// `lambda_max / lambda_min`, accurate for strongly graded matrices;
    /// infinite if the matrix is singular or indefinite. See
    /// [`crate::linalg::condition_number`].
    pub fn condition_number(&self) -> f64 {
        crate::linalg::condition_number(&self.matrix)
    }

    /// `F + eps * I`; the only PSD repair offered.
    pub fn regularize(&self, eps: f64) -> Self {
        Self {
            matrix: self.matrix.regularize(eps),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eq3(s1: f64, s2: f64) -> FisherMatrix {
        let f = SymMatrix::from_diagonal(&[
            1.0 / (s1 * s1),
            2.0 / (s1 * s1),
            1.0 / (s2 * s2),
            2.0 / (s2 * s2),
        ]);
        let labels = vec![
            ParamLabel::mean("E", 69e9).unwrap(),
            ParamLabel::std_dev("E", s1).unwrap(),
            ParamLabel::mean("L", 0.45).unwrap(),
            ParamLabel::std_dev("L", s2).unwrap(),
        ];
        FisherMatrix::new(f, labels, Normalization::Raw).unwrap()
    }

    fn other_labels(n: usize) -> Vec<ParamLabel> {
        (0..n)
            .map(|i| ParamLabel::new(format!("p{i}"), ParamKind::Other("x".into()), 1.0).unwrap())
            .collect()
    }

    fn diag_fim(d: &[f64]) -> FisherMatrix {
        FisherMatrix::new(
            SymMatrix::from_diagonal(d),
            other_labels(d.len()),
            Normalization::Raw,
        )
        .unwrap()
    }

    #[test]
    fn reparameterize_eq3_by_sigmas() {
        let (s1, s2) = (11.5e9, 0.045);
        let f = eq3(s1, s2);
        let jac = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![s1, s1, s2, s2]));
        let g = f.reparameterize(&jac, f.labels().to_vec()).unwrap();
        let expected = [1.0, 2.0, 1.0, 2.0];
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { expected[i] } else { 0.0 };
                assert_relative_eq!(g.get(i, j), e, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn reparameterize_identity_and_collapse() {
        let f = diag_fim(&[1.0, 2.0]);
        let same = f
            .reparameterize(&DMatrix::identity(2, 2), f.labels().to_vec())
            .unwrap();
        assert_eq!(same.matrix(), f.matrix());

        let col = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let g = f.reparameterize(&col, other_labels(1)).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.get(0, 0), 3.0);

        let bad = DMatrix::identity(3, 3);
        assert!(matches!(
            f.reparameterize(&bad, other_labels(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn stddev_normalization_of_eq3() {
        let f = eq3(11.5e9, 0.045).normalize(Normalization::StdDev).unwrap();
        assert_eq!(f.normalization(), Normalization::StdDev);
        for (k, e) in [1.0, 2.0, 1.0, 2.0].iter().enumerate() {
            assert_relative_eq!(f.get(k, k), *e, epsilon = 1e-12);
        }
        assert!(f.condition_number() <= 2.0 + 1e-12);
    }

    #[test]
    fn proportional_normalization() {
        let labels = vec![
            ParamLabel::mean("a", 1e-9).unwrap(),
            ParamLabel::mean("b", 1e2).unwrap(),
        ];
        let f = FisherMatrix::new(
            SymMatrix::from_diagonal(&[1e18, 1e-4]),
            labels,
            Normalization::Raw,
        )
        .unwrap();
        let g = f.normalize(Normalization::Proportional).unwrap();
        assert_relative_eq!(g.get(0, 0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(g.get(1, 1), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn normalization_errors() {
        let f = FisherMatrix::new(
            SymMatrix::from_diagonal(&[1.0, 1.0]),
            vec![
                ParamLabel::mean("a", 0.0).unwrap(),
                ParamLabel::mean("b", 1.0).unwrap(),
            ],
            Normalization::Raw,
        )
        .unwrap();
        assert!(matches!(
            f.normalize(Normalization::StdDev),
            Err(Error::MissingNominal(v)) if v == "a"
        ));
        assert!(matches!(
            f.normalize(Normalization::Proportional),
            Err(Error::ZeroNominal(_))
        ));
    }

    #[test]
    fn normalize_with_unit_nominals_is_identity() {
        let f = diag_fim(&[3.0, 5.0]);
        let g = f.normalize(Normalization::Proportional).unwrap();
        assert_eq!(g.matrix(), f.matrix());
    }

    #[test]
    fn pairing_examples() {
        let f = diag_fim(&[1.0, 2.0, 1.0, 2.0]);
        let p = f.apply_pairing(&PairingSpec::natural(2)).unwrap();
        assert_eq!(p.matrix().diagonal(), vec![1.0, 1.0, 2.0, 2.0]);
        assert_eq!(p.labels()[1].variable, "p2");

        let f = diag_fim(&[10.0, 20.0, 30.0, 40.0]);
        let pairing = PairingSpec::new(vec![(1, 3), (0, 2)]).unwrap();
        let p = f.apply_pairing(&pairing).unwrap();
        assert_eq!(p.matrix().diagonal(), vec![20.0, 10.0, 40.0, 30.0]);

        let ident = PairingSpec::new(vec![(0, 2), (1, 3)]).unwrap();
        assert_eq!(f.apply_pairing(&ident).unwrap().matrix(), f.matrix());

        assert!(matches!(
            p.apply_pairing(&ident),
            Err(Error::InvalidPairing(_))
        ));
    }

    #[test]
    fn condition_numbers() {
        assert_eq!(diag_fim(&[1.0, 2.0, 1.0, 2.0]).condition_number(), 2.0);
        assert_eq!(diag_fim(&[1.0; 3]).condition_number(), 1.0);
        // 2 (sigma_1 / sigma_2)^2
        let c = eq3(11.5e9, 0.045).condition_number();
        let expected = 2.0 * (11.5e9f64 / 0.045).powi(2);
        assert!((c / expected - 1.0).abs() < 1e-12, "{c:e}");
        assert!(c > 1e22 && c < 1e24);
        assert_eq!(diag_fim(&[1.0, 0.0]).condition_number(), f64::INFINITY);
    }

    #[test]
    fn rejects_indefinite_and_mismatched_labels() {
        let m = SymMatrix::from_diagonal(&[1.0, -0.1]);
        assert!(FisherMatrix::new(m, other_labels(2), Normalization::Raw).is_err());
        let m = SymMatrix::from_diagonal(&[1.0, -1e-12]);
        assert!(FisherMatrix::new(m, other_labels(2), Normalization::Raw).is_ok());
        let m = SymMatrix::from_diagonal(&[1.0, 1.0]);
        assert!(matches!(
            FisherMatrix::new(m, other_labels(3), Normalization::Raw),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
