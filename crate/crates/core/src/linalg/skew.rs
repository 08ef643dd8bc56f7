//! Real Schur form of a skew-symmetric matrix.
//!
//! `M` is first reduced to skew-symmetric tridiagonal form `T = Q0^T M Q0`
//! by Householder reflections. Reordering the rows and columns of `T` as
//! (even indices | odd indices) gives `[[0, B], [-B^T, 0]]` with `B`
//! bidiagonal, and an SVD `B = U Sigma V^T` supplies the invariant planes:
//! with `x_j = [u_j; 0]` and `y_j = [0; v_j]` (mapped back through the
//! even/odd interleave and `Q0`), `T y_j = sigma_j x_j` and
//! `T x_j = -sigma_j y_j`.

use nalgebra::{DMatrix, DVector};

use super::max_abs;
use crate::error::{Error, Result};

/// Relative skew-symmetry tolerance on input.
pub const SKEW_TOL: f64 = 1e-10;

/// `Q^T M Q = blockdiag([[0, d_1], [-d_1, 0]], ..., [[0, d_n], [-d_n, 0]])`.
#[derive(Debug, Clone)]
pub struct SkewSchur {
    /// Orthogonal; columns `2j, 2j+1` span the plane of block `j`.
    pub q: DMatrix<f64>,
    /// Block magnitudes, descending, nonnegative.
    pub blocks: Vec<f64>,
}

pub fn skew_schur(m: &DMatrix<f64>) -> Result<SkewSchur> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let dim = m.nrows();
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::DimensionOdd(dim));
    }
    let violation = max_abs(&(m + m.transpose()));
    if violation > SKEW_TOL * max_abs(m) {
        return Err(Error::NotSkewSymmetric { violation });
    }
    let n = dim / 2;

    let (q0, sub) = tridiagonalize(m);

    // B[k, l] = T[2k, 2l+1]; only the diagonal and first subdiagonal survive.
    let mut b = DMatrix::zeros(n, n);
    for k in 0..n {
        b[(k, k)] = -sub[2 * k];
        if k > 0 {
            b[(k, k - 1)] = sub[2 * k - 1];
        }
    }
    let svd = b.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| svd.singular_values[c].total_cmp(&svd.singular_values[a]));

    let mut q = DMatrix::zeros(dim, dim);
    let mut blocks = Vec::with_capacity(n);
    for (slot, &j) in order.iter().enumerate() {
        let mut x = DVector::zeros(dim);
        let mut y = DVector::zeros(dim);
        for k in 0..n {
            x[2 * k] = u[(k, j)];
            y[2 * k + 1] = vt[(j, k)];
        }
        q.set_column(2 * slot, &(&q0 * x));
        q.set_column(2 * slot + 1, &(&q0 * y));
        blocks.push(svd.singular_values[j]);
    }
    Ok(SkewSchur { q, blocks })
}

/// Householder reduction of a skew-symmetric matrix. Returns the
/// accumulated orthogonal factor and the subdiagonal `e` with
/// `T[i+1, i] = e[i]`, `T[i, i+1] = -e[i]`.
fn tridiagonalize(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let dim = m.nrows();
    // Exact skew part; the tolerance check already passed.
    let mut a = (m - m.transpose()) * 0.5;
    let mut q = DMatrix::<f64>::identity(dim, dim);

    for k in 0..dim.saturating_sub(2) {
        let len = dim - k - 1;
        let x = a.column(k).rows(k + 1, len).into_owned();
        let norm = x.norm();
        if norm == 0.0 {
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.norm();
        if vnorm == 0.0 {
            continue;
        }
        v /= vnorm;

        // Rows k+1.. : A <- H A
        {
            let mut rows = a.rows_mut(k + 1, len);
            let w = rows.tr_mul(&v); // dim x 1 = A_rows^T v
            rows.ger(-2.0, &v, &w, 1.0);
        }
        // Columns k+1.. : A <- A H
        {
            let mut cols = a.columns_mut(k + 1, len);
            let w = &cols * &v;
            cols.ger(-2.0, &w, &v, 1.0);
        }
        {
            let mut cols = q.columns_mut(k + 1, len);
            let w = &cols * &v;
            cols.ger(-2.0, &w, &v, 1.0);
        }
    }

    let sub = (0..dim - 1).map(|i| a[(i + 1, i)]).collect();
    (q, sub)
}
