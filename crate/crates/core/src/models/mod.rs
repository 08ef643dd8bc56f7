//! Output maps `y = h(x)` used by the estimator.

pub mod beam;
pub mod benchmark;

pub use beam::{BeamCase, BeamMap, BeamModel, BeamResponse};
pub use benchmark::{BenchmarkFunction, BenchmarkMap};

/// A deterministic map from `input_dim` inputs to `output_dim` outputs.
pub trait OutputMap: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn eval(&self, x: &[f64], y: &mut [f64]);

    /// `y = x` exactly. The estimator then uses the input scores directly,
    /// since the conditional expectation given `y` is exact.
    fn is_identity(&self) -> bool {
        false
    }

    /// Whether each output column should be divided by its ensemble
    /// maximum magnitude before estimation.
    fn normalize_ensemble(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl OutputMap for Identity {
    fn input_dim(&self) -> usize {
        self.0
    }
    fn output_dim(&self) -> usize {
        self.0
    }
    fn eval(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
    fn is_identity(&self) -> bool {
        true
    }
}

/// Selects a subset of the inputs, e.g. `y = x_1`.
#[derive(Debug, Clone)]
pub struct Projection {
    pub input_dim: usize,
    pub indices: Vec<usize>,
}

impl OutputMap for Projection {
    fn input_dim(&self) -> usize {
        self.input_dim
    }
    fn output_dim(&self) -> usize {
        self.indices.len()
    }
    fn eval(&self, x: &[f64], y: &mut [f64]) {
        for (out, &i) in y.iter_mut().zip(&self.indices) {
            *out = x[i];
        }
    }
}

/// Ignores its inputs.
#[derive(Debug, Clone)]
pub struct Constant {
    pub input_dim: usize,
    pub value: Vec<f64>,
}

impl OutputMap for Constant {
    fn input_dim(&self) -> usize {
        self.input_dim
    }
    fn output_dim(&self) -> usize {
        self.value.len()
    }
    fn eval(&self, _x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.value);
    }
}

/// Wraps a closure as an output map.
pub struct FnMap<F> {
    pub input_dim: usize,
    pub output_dim: usize,
    pub f: F,
}

impl<F> OutputMap for FnMap<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn input_dim(&self) -> usize {
        self.input_dim
    }
    fn output_dim(&self) -> usize {
        self.output_dim
    }
    fn eval(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}
