//! Euler-Bernoulli cantilever under band-limited white-noise point force.
//!
//! Mode shapes are the analytic clamped-free ones, mass normalized. The
//! displacement FRF between stations `a` and `b` is the modal sum
//! `sum_r psi_r(a) psi_r(b) / (w_r^2 - w^2 + 2i zeta w_r w)`; acceleration
//! multiplies it by `-w^2` and outer-fibre bending strain replaces
//! `psi_r(a)` by `(t/2) psi_r''(a)`. Mean-square responses integrate
//! `|FRF|^2` times the force spectrum over a log-spaced band with the
//! trapezoidal rule.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::OutputMap;
use crate::distributions::{InputModel, InputVariable};
use crate::error::{Error, Result};

/// Frequency samples across the excitation band.
pub const FREQ_POINTS: usize = 512;
/// Band is `[BAND_LOW * w_1, BAND_HIGH * w_n]` for `n` excited modes.
pub const BAND_LOW: f64 = 0.1;
pub const BAND_HIGH: f64 = 1.2;

/// Input variable names in evaluation order.
pub const BEAM_INPUTS: [&str; 5] = ["E", "rho", "L", "w", "t"];
/// Mean inputs `(E [Pa], rho [kg/m^3], L [m], w [m], t [m])`.
pub const BEAM_MEANS: [f64; 5] = [69e9, 2700.0, 0.45, 2e-2, 2e-3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamCase {
    Case1,
    Case2,
}

impl BeamCase {
    /// Coefficients of variation `sigma / mu` per input.
    pub fn cov(self) -> [f64; 5] {
        match self {
            BeamCase::Case1 => [1.0 / 200.0, 1.0 / 80.0, 1.0 / 100.0, 1.0 / 60.0, 1.0 / 80.0],
            BeamCase::Case2 => [1.0 / 5.0, 1.0 / 5.0, 1.0 / 30.0, 1.0 / 6.0, 1.0 / 8.0],
        }
    }

    pub fn input_model(self) -> InputModel {
        let cov = self.cov();
        InputModel::new(
            BEAM_INPUTS
                .iter()
                .zip(BEAM_MEANS)
                .zip(cov)
                .map(|((name, mu), c)| InputVariable::normal(*name, mu, mu * c))
                .collect(),
        )
        .expect("beam input values are valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamModel {
    pub youngs_modulus: f64,
    pub density: f64,
    pub length: f64,
    pub width: f64,
    pub thickness: f64,
    pub n_modes: usize,
    pub damping: f64,
    /// Force location as a fraction of the length.
    pub excitation_position: f64,
    /// Stations at `s * L / grid`, `s = 0..grid` (root included, tip not).
    pub response_grid: usize,
    /// Square root of the (flat) force spectral density.
    pub force_amplitude: f64,
}

impl Default for BeamModel {
    fn default() -> Self {
        let [e, rho, l, w, t] = BEAM_MEANS;
        Self {
            youngs_modulus: e,
            density: rho,
            length: l,
            width: w,
            thickness: t,
            n_modes: 3,
            damping: 0.1,
            excitation_position: 0.5,
            response_grid: 21,
            force_amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamResponse {
    pub peak_rms_acceleration: f64,
    pub peak_rms_strain: f64,
}

impl BeamModel {
    pub fn validate(&self) -> Result<()> {
        let physical = [
            ("youngs_modulus", self.youngs_modulus),
            ("density", self.density),
            ("length", self.length),
            ("width", self.width),
            ("thickness", self.thickness),
            ("force_amplitude", self.force_amplitude),
        ];
        for (name, v) in physical {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidModel(format!("beam {name} must be positive, got {v}")));
            }
        }
        if self.n_modes == 0 {
            return Err(Error::InvalidModel("beam needs at least one mode".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidModel(format!(
                "modal damping must be in (0, 1), got {}",
                self.damping
            )));
        }
        if !(self.excitation_position > 0.0 && self.excitation_position <= 1.0) {
            return Err(Error::InvalidModel(format!(
                "excitation position must be in (0, 1], got {}",
                self.excitation_position
            )));
        }
        if self.response_grid == 0 {
            return Err(Error::InvalidModel("response grid must be positive".into()));
        }
        Ok(())
    }

    /// Copy with the five physical inputs replaced, in [`BEAM_INPUTS`] order.
    pub fn with_inputs(&self, x: &[f64]) -> Self {
        Self {
            youngs_modulus: x[0],
            density: x[1],
            length: x[2],
            width: x[3],
            thickness: x[4],
            ..self.clone()
        }
    }

    fn area(&self) -> f64 {
        self.width * self.thickness
    }

    fn second_moment(&self) -> f64 {
        self.width * self.thickness.powi(3) / 12.0
    }

    /// Natural circular frequencies `w_r = (beta_r L)^2 sqrt(EI / (rho A L^4))`.
    pub fn natural_frequencies(&self) -> Vec<f64> {
        let base = (self.youngs_modulus * self.second_moment()
            / (self.density * self.area() * self.length.powi(4)))
        .sqrt();
        (1..=self.n_modes)
            .map(|r| {
                let k = cantilever_root(r);
                k * k * base
            })
            .collect()
    }

    fn modal_scale(&self) -> f64 {
        1.0 / (self.density * self.area() * self.length).sqrt()
    }

    /// Mass-normalized mode shape `psi_r(x)` (`r` from 1).
    pub fn mode_shape(&self, r: usize, x: f64) -> f64 {
        let (phi, _) = clamped_free_shape(cantilever_root(r), x / self.length);
        phi * self.modal_scale()
    }

    /// Mass-normalized curvature `psi_r''(x)`.
    pub fn mode_curvature(&self, r: usize, x: f64) -> f64 {
        let k = cantilever_root(r);
        let (_, curv) = clamped_free_shape(k, x / self.length);
        curv * self.modal_scale() / (self.length * self.length)
    }

    fn modal_denominator(&self, wr: f64, w: f64) -> Complex<f64> {
        Complex::new(wr * wr - w * w, 2.0 * self.damping * wr * w)
    }

    /// Displacement at `x_response` per unit force at `x_force`.
    pub fn frf_displacement(&self, x_response: f64, x_force: f64, w: f64) -> Complex<f64> {
        self.natural_frequencies()
            .iter()
            .enumerate()
            .map(|(i, &wr)| {
                let r = i + 1;
                self.mode_shape(r, x_response) * self.mode_shape(r, x_force)
                    / self.modal_denominator(wr, w)
            })
            .sum()
    }

    /// Log-spaced band `[BAND_LOW * w_1, BAND_HIGH * w_n]`.
    pub fn frequency_grid(&self) -> Vec<f64> {
        let wn = self.natural_frequencies();
        let lo = (BAND_LOW * wn[0]).ln();
        let hi = (BAND_HIGH * wn[wn.len() - 1]).ln();
        (0..FREQ_POINTS)
            .map(|i| (lo + (hi - lo) * i as f64 / (FREQ_POINTS - 1) as f64).exp())
            .collect()
    }

    pub fn stations(&self) -> Vec<f64> {
        (0..self.response_grid)
            .map(|s| self.length * s as f64 / self.response_grid as f64)
            .collect()
    }

    /// Peak (over stations) r.m.s. acceleration and strain.
    pub fn response(&self) -> Result<BeamResponse> {
        self.validate()?;
        Ok(self.response_unchecked())
    }

    fn response_unchecked(&self) -> BeamResponse {
        let wn = self.natural_frequencies();
        let xf = self.excitation_position * self.length;
        let stations = self.stations();
        let half_t = 0.5 * self.thickness;

        let force_modal: Vec<f64> = (1..=self.n_modes).map(|r| self.mode_shape(r, xf)).collect();
        let shape: Vec<Vec<f64>> = stations
            .iter()
            .map(|&x| (1..=self.n_modes).map(|r| self.mode_shape(r, x)).collect())
            .collect();
        let strain: Vec<Vec<f64>> = stations
            .iter()
            .map(|&x| {
                (1..=self.n_modes)
                    .map(|r| half_t * self.mode_curvature(r, x))
                    .collect()
            })
            .collect();

        let grid = self.frequency_grid();
        let psd = self.force_amplitude * self.force_amplitude;
        let ns = stations.len();
        let mut acc_ms = vec![0.0; ns];
        let mut strain_ms = vec![0.0; ns];
        let mut prev: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        let mut modal = vec![Complex::new(0.0, 0.0); self.n_modes];

        for &w in &grid {
            for (r, m) in modal.iter_mut().enumerate() {
                *m = force_modal[r] / self.modal_denominator(wn[r], w);
            }
            let mut acc_now = vec![0.0; ns];
            let mut strain_now = vec![0.0; ns];
            for s in 0..ns {
                let mut h_disp = Complex::new(0.0, 0.0);
                let mut h_strain = Complex::new(0.0, 0.0);
                for r in 0..self.n_modes {
                    h_disp += modal[r] * shape[s][r];
                    h_strain += modal[r] * strain[s][r];
                }
                acc_now[s] = psd * (w * w * w * w) * h_disp.norm_sqr();
                strain_now[s] = psd * h_strain.norm_sqr();
            }
            if let Some((w0, acc_prev, strain_prev)) = &prev {
                let dw = 0.5 * (w - w0);
                for s in 0..ns {
                    acc_ms[s] += dw * (acc_prev[s] + acc_now[s]);
                    strain_ms[s] += dw * (strain_prev[s] + strain_now[s]);
                }
            }
            prev = Some((w, acc_now, strain_now));
        }

        let peak = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(*x)).sqrt();
        BeamResponse {
            peak_rms_acceleration: peak(&acc_ms),
            peak_rms_strain: peak(&strain_ms),
        }
    }
}

/// `beta_r L` for the clamped-free beam: roots of `1 + cos k cosh k = 0`.
pub fn cantilever_root(r: usize) -> f64 {
    assert!(r >= 1, "mode numbers start at 1");
    // g(k) = cos k + sech k has the same roots and stays bounded.
    let mut k = match r {
        1 => 1.875,
        2 => 4.694,
        _ => (2.0 * r as f64 - 1.0) * std::f64::consts::FRAC_PI_2,
    };
    for _ in 0..50 {
        let g = k.cos() + 1.0 / k.cosh();
        let dg = -k.sin() - k.tanh() / k.cosh();
        let step = g / dg;
        k -= step;
        if step.abs() < 1e-15 * k {
            break;
        }
    }
    k
}

/// Unit clamped-free shape and its second derivative (w.r.t. `xi`) at
/// `xi = x / L`, normalized so that `int_0^1 phi^2 = 1`.
///
/// Uses `cosh(k xi) - s sinh(k xi) = ((1-s) e^{k xi} + (1+s) e^{-k xi}) / 2`
/// with `1 - s` formed without cancellation.
fn clamped_free_shape(k: f64, xi: f64) -> (f64, f64) {
    let denom = k.cosh() + k.cos();
    let s = (k.sinh() - k.sin()) / denom;
    let one_minus_s = ((-k).exp() + k.cos() + k.sin()) / denom;
    let kx = k * xi;
    let hyper = 0.5 * (one_minus_s * kx.exp() + (1.0 + s) * (-kx).exp());
    let trig = kx.cos() - s * kx.sin();
    (hyper - trig, k * k * (hyper + trig))
}

/// Beam evaluated on `(E, rho, L, w, t)`, returning
/// `(peak r.m.s. acceleration, peak r.m.s. strain)`.
#[derive(Debug, Clone)]
pub struct BeamMap {
    pub settings: BeamModel,
}

impl BeamMap {
    pub fn new(settings: BeamModel) -> Result<Self> {
        settings.validate()?;
        Ok(Self { settings })
    }
}

impl OutputMap for BeamMap {
    fn input_dim(&self) -> usize {
        5
    }
    fn output_dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &[f64], y: &mut [f64]) {
        let beam = self.settings.with_inputs(x);
        if beam.validate().is_err() {
            y.fill(f64::NAN);
            return;
        }
        let r = beam.response_unchecked();
        y[0] = r.peak_rms_acceleration;
        y[1] = r.peak_rms_strain;
    }
    fn normalize_ensemble(&self) -> bool {
        true
    }
}
