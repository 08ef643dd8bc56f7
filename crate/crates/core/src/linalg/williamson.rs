use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{argmax_abs, skew_schur, sqrt_and_inverse, sym_eig, SymMatrix, SymplecticForm};
use crate::error::Result;

/// Relative gap below which two symplectic eigenvalues count as tied.
pub const TIE_TOL: f64 = 1e-10;

/// Williamson normal form `S^T F S = diag(D, D)` with `S = [U | V]`
/// symplectic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymplecticSpectrum {
    pub n: usize,
    /// Symplectic eigenvalues, descending.
    pub d: Vec<f64>,
    /// `2n x n`, column `j` is `u_j`.
    pub u: DMatrix<f64>,
    /// `2n x n`, column `j` is `v_j`.
    pub v: DMatrix<f64>,
}

impl SymplecticSpectrum {
    /// The symplectic eigenvector matrix `S = [u_1..u_n | v_1..v_n]`.
    pub fn s(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        s.columns_mut(0, n).copy_from(&self.u);
        s.columns_mut(n, n).copy_from(&self.v);
        s
    }

    /// `S^{-1} = J^{-1} S^T J`, exact for symplectic `S`.
    pub fn s_inverse(&self) -> DMatrix<f64> {
        let form = SymplecticForm::new(self.n);
        let st_j = form.apply_left(&self.s()).transpose() * -1.0; // S^T J = -(J S)^T
        -form.apply_left(&st_j)
    }

    /// `diag(D, D)`.
    pub fn diag_dd(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if i == j {
                self.d[i % n]
            } else {
                0.0
            }
        })
    }

    pub fn u_vec(&self, j: usize) -> DVector<f64> {
        self.u.column(j).into_owned()
    }

    pub fn v_vec(&self, j: usize) -> DVector<f64> {
        self.v.column(j).into_owned()
    }

    /// Radii `1/sqrt(d_j)` of the circles traced by each `(alpha_j, beta_j)`.
    pub fn ellipsoid_radii(&self) -> Result<Vec<f64>> {
        crate::entropy::ellipsoid_radii(&self.d)
    }
}

/// Williamson decomposition of a `2n x 2n` symmetric positive definite
/// matrix in split-half layout.
///
/// `R = F^{1/2}`, `M = R J R` is skew-symmetric and its Schur form
/// `Q^T M Q = [[0, D], [-D, 0]]` (after arranging the plane vectors as
/// `[x_1..x_n | y_1..y_n]`) gives `S = R^{-1} Q diag(D, D)^{1/2}`.
///
/// Within each pair, `(u_j, v_j)` is rotated so `u_j` leans on the first
/// members of the pairs. Eigenvalues come out descending; ties are ordered
/// by the index of the largest-magnitude component of `u_j`, and that
/// component is made positive (flipping `v_j` with it).
pub fn williamson(f: &SymMatrix) -> Result<SymplecticSpectrum> {
    let form = SymplecticForm::for_dim(f.dim())?;
    let n = form.n;
    let eig = sym_eig(f);
    let (root, inv_root) = sqrt_and_inverse(&eig)?;
    let r = root.matrix();
    let m = r * form.apply_left(r);
    let schur = skew_schur(&m)?;

    struct Pair {
        d: f64,
        lead: usize,
        u: DVector<f64>,
        v: DVector<f64>,
    }
    let mut pairs: Vec<Pair> = (0..n)
        .map(|j| {
            let d = schur.blocks[j];
            let scale = d.sqrt();
            let u = inv_root.matrix() * schur.q.column(2 * j) * scale;
            let v = inv_root.matrix() * schur.q.column(2 * j + 1) * scale;
            let (mut u, mut v) = align_pair(n, u, v);
            let lead = argmax_abs(u.as_slice());
            if u[lead] < 0.0 {
                u.neg_mut();
                v.neg_mut();
            }
            Pair { d, lead, u, v }
        })
        .collect();

    pairs.sort_by(|a, b| b.d.total_cmp(&a.d));
    let top = pairs.first().map_or(0.0, |p| p.d);
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[start].d - pairs[end].d <= TIE_TOL * top {
            end += 1;
        }
        pairs[start..end].sort_by_key(|p| p.lead);
        start = end;
    }

    let mut u = DMatrix::zeros(2 * n, n);
    let mut v = DMatrix::zeros(2 * n, n);
    let mut d = Vec::with_capacity(n);
    for (j, p) in pairs.into_iter().enumerate() {
        u.set_column(j, &p.u);
        v.set_column(j, &p.v);
        d.push(p.d);
    }
    Ok(SymplecticSpectrum { n, d, u, v })
}

/// Rotates `(u, v) -> (cos t u + sin t v, -sin t u + cos t v)`, which keeps
/// every Williamson invariant, choosing `t` so that `u` has the largest
/// possible weight on the first members of the pairs (indices `0..n`).
fn align_pair(n: usize, u: DVector<f64>, v: DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let (a, b) = (u.rows(0, n), v.rows(0, n));
    let (aa, bb, ab) = (a.dot(&a), b.dot(&b), a.dot(&b));
    let t = 0.5 * (2.0 * ab).atan2(aa - bb);
    let (s, c) = t.sin_cos();
    (&u * c + &v * s, &v * c - &u * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::linalg::{max_abs, symplectic_check};
    use approx::assert_relative_eq;

    #[test]
    fn identity_is_already_normal() {
        let s = williamson(&SymMatrix::identity(4)).unwrap();
        for d in &s.d {
            assert_relative_eq!(*d, 1.0, epsilon = 1e-13);
        }
        assert!(symplectic_check(&s.s()).unwrap() < 1e-13);
    }

    #[test]
    fn diag_one_two() {
        let s = williamson(&SymMatrix::from_diagonal(&[1.0, 2.0])).unwrap();
        assert_relative_eq!(s.d[0], 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn split_half_pairs() {
        let s = williamson(&SymMatrix::from_diagonal(&[1.0, 1.0, 2.0, 2.0])).unwrap();
        assert_relative_eq!(s.d[0], 2f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(s.d[1], 2f64.sqrt(), max_relative = 1e-13);
        // Ties resolved by leading component: u_1 lives on index 0, u_2 on 1.
        assert_eq!(argmax_abs(s.u_vec(0).as_slice()), 0);
        assert_eq!(argmax_abs(s.u_vec(1).as_slice()), 1);
        assert!(s.u[(0, 0)] > 0.0 && s.u[(1, 1)] > 0.0);
    }

    #[test]
    fn inverse_via_form_is_exact() {
        let f = SymMatrix::new(DMatrix::from_row_slice(
            4,
            4,
            &[
                4.0, 1.0, 0.5, 0.2, //
                1.0, 3.0, 0.1, 0.4, //
                0.5, 0.1, 2.0, 0.3, //
                0.2, 0.4, 0.3, 1.5,
            ],
        ))
        .unwrap();
        let s = williamson(&f).unwrap();
        let prod = s.s() * s.s_inverse();
        assert!(max_abs(&(prod - DMatrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            williamson(&SymMatrix::identity(3)),
            Err(Error::DimensionOdd(3))
        ));
        assert!(matches!(
            williamson(&SymMatrix::from_diagonal(&[1.0, 0.0])),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
