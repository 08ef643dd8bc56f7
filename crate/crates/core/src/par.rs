//! Execution backends for the data-parallel loops.
//!
//! With the `parallel` feature the loops run on rayon's pool; without it
//! (or with [`Execution::Sequential`]) they run on the calling thread.
//! Both paths visit work items in the same logical order and reduce
//! partial results in a fixed chunk order, so results are bitwise
//! identical across backends and thread counts.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fixed chunk length for order-stable reductions.
pub const REDUCE_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this backend will actually fan out over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `0..len`, collecting in index order.
pub fn map_indices<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Fills `out` in fixed-width rows: row `i` is `out[i*width..(i+1)*width]`.
pub fn fill_rows<F>(exec: Execution, out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if width == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        out.par_chunks_mut(width)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
        return;
    }
    let _ = exec;
    for (i, row) in out.chunks_mut(width).enumerate() {
        f(i, row);
    }
}

/// Sums per-chunk partial vectors of length `width` over `0..len`.
///
/// `partial(range)` computes the contribution of one chunk; chunk
/// boundaries are multiples of [`REDUCE_CHUNK`] regardless of backend and
/// the partials are added left to right.
pub fn chunked_sum<F>(exec: Execution, len: usize, width: usize, partial: F) -> Vec<f64>
where
    F: Fn(std::ops::Range<usize>) -> Vec<f64> + Sync + Send,
{
    let chunks = len.div_ceil(REDUCE_CHUNK);
    let parts = map_indices(exec, chunks, |c| {
        let start = c * REDUCE_CHUNK;
        partial(start..(start + REDUCE_CHUNK).min(len))
    });
    let mut total = vec![0.0; width];
    for p in parts {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}
