//! Dense kernels: symmetric eigendecomposition, SPD square root, the real
//! Schur form of skew-symmetric matrices and the Williamson decomposition.
//!
//! All routines are pure and deterministic for a fixed input.

mod skew;
mod williamson;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use skew::{skew_schur, SkewSchur};
pub use williamson::{williamson, SymplecticSpectrum};

/// Relative asymmetry accepted (and removed) by [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative positive-definiteness floor: the smallest eigenvalue must exceed
/// `PD_FLOOR * ||F||_2`.
pub const PD_FLOOR: f64 = 1e-12;

/// A real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Wraps a square matrix, averaging it with its transpose. Fails if the
    /// asymmetry exceeds [`SYMMETRY_TOL`] relative to the largest entry.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("symmetric matrix"));
        }
        let scale = max_abs(&m);
        let violation = max_abs(&(&m - m.transpose()));
        if violation > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric { violation });
        }
        Ok(Self::symmetrized(m))
    }

    /// `(m + m^T) / 2` without any tolerance check.
    pub fn symmetrized(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        SymMatrix((m + t) * 0.5)
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }

    /// Spectral norm (largest |eigenvalue|).
    pub fn norm2(&self) -> f64 {
        sym_eig(self)
            .eigenvalues
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `F + eps * I`, the explicit repair for semidefinite FIMs.
    pub fn regularize(&self, eps: f64) -> SymMatrix {
        let n = self.dim();
        SymMatrix(&self.0 + DMatrix::identity(n, n) * eps)
    }

    /// `P^T F P` for the permutation taking new position `k` to old index
    /// `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        let n = self.dim();
        SymMatrix(DMatrix::from_fn(n, n, |i, j| self.0[(perm[i], perm[j])]))
    }
}

/// The canonical symplectic form `J = [[0, I], [-I, 0]]` of size `2n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    pub n: usize,
}

impl SymplecticForm {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// Builds the form for a `dim x dim` matrix; `dim` must be even.
    pub fn for_dim(dim: usize) -> Result<Self> {
        if !dim.is_multiple_of(2) || dim == 0 {
            return Err(Error::DimensionOdd(dim));
        }
        Ok(Self { n: dim / 2 })
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            j[(k, n + k)] = 1.0;
            j[(n + k, k)] = -1.0;
        }
        j
    }

    /// `J x` without forming `J`: `[a; b] -> [b; -a]`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(2 * n, |i, _| if i < n { x[n + i] } else { -x[i - n] })
    }

    /// `J A` for a matrix with `2n` rows.
    pub fn apply_left(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
            if i < n {
                a[(n + i, j)]
            } else {
                -a[(i - n, j)]
            }
        })
    }
}

/// Standard eigenpairs of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl EigenSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }

    /// `lambda_max / lambda_min`, infinite when the smallest eigenvalue is
    /// not positive.
    pub fn condition_number(&self) -> f64 {
        let max = self.eigenvalues.first().copied().unwrap_or(0.0);
        let min = self.eigenvalues.last().copied().unwrap_or(0.0);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Principal radii `1/sqrt(lambda_j)` of the relative-entropy ellipsoid.
    pub fn ellipsoid_radii(&self) -> Result<Vec<f64>> {
        crate::entropy::ellipsoid_radii(&self.eigenvalues)
    }
}

/// `lambda_max / lambda_min` computed through the diagonal equilibration
/// `F = D N D`, `D = diag(sqrt(F_ii))`.
///
/// FIMs of physical parameters are strongly graded (entries spanning 25+
/// orders of magnitude), and a direct eigensolve only resolves eigenvalues
/// down to about `eps * lambda_max`. Here `lambda_min = 1 / lambda_max(F^-1)`
/// with `F^-1 = D^-1 N^-1 D^-1` built from the well-scaled `N`, so both
/// extremes are dominant eigenvalues and keep full relative accuracy.
/// Infinite when `F` is singular to working precision.
pub fn condition_number(f: &SymMatrix) -> f64 {
    let n = f.dim();
    if n == 0 {
        return f64::INFINITY;
    }
    let diag = f.diagonal();
    if diag.iter().any(|d| !(*d > 0.0)) {
        return f64::INFINITY;
    }
    let scale: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let m = f.matrix();
    let unit = SymMatrix::symmetrized(DMatrix::from_fn(n, n, |i, j| {
        m[(i, j)] / (scale[i] * scale[j])
    }));
    let eig_unit = sym_eig(&unit);
    let min_unit = eig_unit.eigenvalues[n - 1];
    if min_unit <= PD_FLOOR * eig_unit.eigenvalues[0] {
        return f64::INFINITY;
    }
    let q = &eig_unit.eigenvectors;
    let recip = DVector::from_iterator(n, eig_unit.eigenvalues.iter().map(|l| 1.0 / l));
    let inv_unit = q * DMatrix::from_diagonal(&recip) * q.transpose();
    let inv = SymMatrix::symmetrized(DMatrix::from_fn(n, n, |i, j| {
        inv_unit[(i, j)] / (scale[i] * scale[j])
    }));
    sym_eig(f).eigenvalues[0] * sym_eig(&inv).eigenvalues[0]
}

/// Symmetric eigendecomposition with eigenvalues descending and each
/// eigenvector's largest-magnitude component made positive.
pub fn sym_eig(f: &SymMatrix) -> EigenSpectrum {
    let n = f.dim();
    let eig = SymmetricEigen::new(f.0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the solver's order among exact ties.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).into_owned();
        if col[argmax_abs(col.as_slice())] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(k, &col);
    }
    EigenSpectrum {
        eigenvalues: values,
        eigenvectors: vectors,
    }
}

/// Symmetric positive definite square root `R` with `R R = F`.
pub fn spd_sqrt(f: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eig(f);
    let (root, _) = sqrt_and_inverse(&eig)?;
    Ok(root)
}

/// Returns `(F^{1/2}, F^{-1/2})` from a precomputed eigendecomposition.
pub(crate) fn sqrt_and_inverse(eig: &EigenSpectrum) -> Result<(SymMatrix, SymMatrix)> {
    let norm = eig
        .eigenvalues
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = PD_FLOOR * norm;
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if !(min > floor) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
            floor,
        });
    }
    let q = &eig.eigenvectors;
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|v| v.sqrt()).collect();
    let scaled = |w: &dyn Fn(f64) -> f64| {
        let mut qs = q.clone();
        for (k, mut col) in qs.column_iter_mut().enumerate() {
            col *= w(roots[k]);
        }
        SymMatrix::symmetrized(&qs * q.transpose())
    };
    Ok((scaled(&|r| r), scaled(&|r| 1.0 / r)))
}

/// `max |S^T J S - J|` over all entries; zero exactly when `S` is symplectic.
pub fn symplectic_check(s: &DMatrix<f64>) -> Result<f64> {
    if !s.is_square() {
        return Err(Error::NotSquare {
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    let form = SymplecticForm::for_dim(s.nrows())?;
    let sjs = s.transpose() * form.apply_left(s);
    Ok(max_abs(&(sjs - form.matrix())))
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Index of the first entry with the largest magnitude.
pub(crate) fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn condition_number_of_graded_matrices() {
        assert_relative_eq!(
            condition_number(&SymMatrix::from_diagonal(&[1.0, 2.0, 1.0, 2.0])),
            2.0,
            max_relative = 1e-14
        );
        let two = SymMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert_relative_eq!(condition_number(&two), 3.0, max_relative = 1e-14);

        // D [[2, 1], [1, 2]] D with D = diag(1e-9, 1e6): det = 3 (d1 d2)^2, trace ~ 2e12.
        let d = [1e-9, 1e6];
        let graded = SymMatrix::new(DMatrix::from_fn(2, 2, |i, j| two.get(i, j) * d[i] * d[j]))
            .unwrap();
        let (l_max, l_min) = (2e12, 3e-6 / 2e12);
        assert_relative_eq!(condition_number(&graded), l_max / l_min, max_relative = 1e-9);

        assert!(condition_number(&SymMatrix::from_diagonal(&[1.0, 0.0])).is_infinite());
        let singular = SymMatrix::new(DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert!(condition_number(&singular).is_infinite());
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let r = spd_sqrt(&SymMatrix::identity(4)).unwrap();
        assert!(max_abs(&(r.matrix() - DMatrix::identity(4, 4))) < 1e-15);

        let r = spd_sqrt(&SymMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert_relative_eq!(r.get(0, 0), 2.0, epsilon = 1e-14);
        assert_relative_eq!(r.get(1, 1), 3.0, epsilon = 1e-14);
        assert_relative_eq!(r.get(0, 1), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_rejects_semidefinite_until_regularized() {
        let f = SymMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            spd_sqrt(&f),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let r = spd_sqrt(&f.regularize(1e-6)).unwrap();
        assert_relative_eq!(r.get(1, 1), 1e-3, max_relative = 1e-12);
    }

    #[test]
    fn sym_eig_examples() {
        let e = sym_eig(&SymMatrix::from_diagonal(&[1.0, 2.0, 1.0, 2.0]));
        assert_eq!(e.eigenvalues, vec![2.0, 2.0, 1.0, 1.0]);

        let e = sym_eig(&SymMatrix::identity(4));
        assert_eq!(e.eigenvalues, vec![1.0; 4]);

        let f = SymMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let e = sym_eig(&f);
        assert_relative_eq!(e.eigenvalues[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(e.eigenvectors[(0, 0)], h, epsilon = 1e-14);
        assert_relative_eq!(e.eigenvectors[(1, 0)], h, epsilon = 1e-14);
    }

    #[test]
    fn symplectic_check_examples() {
        assert_eq!(symplectic_check(&DMatrix::identity(4, 4)).unwrap(), 0.0);
        let j = SymplecticForm::new(2).matrix();
        assert_eq!(symplectic_check(&j).unwrap(), 0.0);
        let two = DMatrix::identity(4, 4) * 2.0;
        assert_eq!(symplectic_check(&two).unwrap(), 3.0);
        assert!(matches!(
            symplectic_check(&DMatrix::identity(3, 3)),
            Err(Error::DimensionOdd(3))
        ));
    }

    #[test]
    fn form_identities() {
        let j = SymplecticForm::new(3).matrix();
        let i6 = DMatrix::<f64>::identity(6, 6);
        assert_eq!(&j * &j, -&i6);
        assert_eq!(j.transpose(), -&j);
        let x = DVector::from_fn(6, |i, _| i as f64 + 1.0);
        assert_eq!(SymplecticForm::new(3).apply(&x), &j * &x);
    }

    #[test]
    fn new_rejects_asymmetric_and_symmetrizes_noise() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(
            SymMatrix::new(m),
            Err(Error::NotSymmetric { .. })
        ));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5 + 1e-14, 1.0]);
        let s = SymMatrix::new(m).unwrap();
        assert_eq!(s.get(0, 1), s.get(1, 0));
    }
}
