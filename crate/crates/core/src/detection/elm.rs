//! Extreme learning machine regressor for one-step-ahead series prediction.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Windows of `lag` consecutive values and the value `step_forward` after
/// each window's end.
pub fn sliding_window(series: &[f64], lag: usize, step_forward: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if lag == 0 || step_forward == 0 {
        return Err(Error::Contract("lag and step_forward must be at least 1".into()));
    }
    if series.len() < lag + step_forward {
        return Err(Error::Contract(format!(
            "series of length {} is too short for lag {lag} and step_forward {step_forward}",
            series.len()
        )));
    }
    let count = series.len() - lag - step_forward + 1;
    let inputs = (0..count).map(|i| series[i..i + lag].to_vec()).collect();
    let targets = (0..count).map(|i| series[i + lag + step_forward - 1]).collect();
    Ok((inputs, targets))
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Single-hidden-layer network with random fixed input weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmModel {
    /// `hidden × lag`.
    pub input_weights: DMatrix<f64>,
    pub hidden_biases: DVector<f64>,
    pub output_weights: DVector<f64>,
    pub lag: usize,
    pub step_forward: usize,
    pub ridge: f64,
    pub frozen: bool,
}

impl ElmModel {
    /// Input weights and biases uniform in `[-1, 1]` drawn from `rng`; output
    /// weights start at zero.
    pub fn new(hidden: usize, lag: usize, step_forward: usize, ridge: f64, rng: &mut ChaCha8Rng) -> Result<Self> {
        if hidden == 0 || lag == 0 || step_forward == 0 {
            return Err(Error::Parameter("hidden, lag and step_forward must be at least 1".into()));
        }
        if !(ridge >= 0.0) || !ridge.is_finite() {
            return Err(Error::Parameter(format!("ridge must be finite and non-negative, got {ridge}")));
        }
        let input_weights = DMatrix::from_fn(hidden, lag, |_, _| rng.gen_range(-1.0..=1.0));
        let hidden_biases = DVector::from_fn(hidden, |_, _| rng.gen_range(-1.0..=1.0));
        Ok(Self {
            input_weights,
            hidden_biases,
            output_weights: DVector::zeros(hidden),
            lag,
            step_forward,
            ridge,
            frozen: false,
        })
    }

    pub fn from_seed(hidden: usize, lag: usize, step_forward: usize, ridge: f64, seed: u64) -> Result<Self> {
        Self::new(hidden, lag, step_forward, ridge, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden_biases.len()
    }

    fn activations(&self, window: &[f64]) -> DVector<f64> {
        let x = DVector::from_column_slice(window);
        (&self.input_weights * x + &self.hidden_biases).map(sigmoid)
    }

    /// Ridge least squares for the output weights. A frozen model is a
    /// contract violation.
    pub fn fit(&mut self, inputs: &[Vec<f64>], targets: &[f64]) -> Result<()> {
        if self.frozen {
            return Err(Error::Contract("cannot fit a frozen model".into()));
        }
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::Contract(format!(
                "fit needs matching non-empty inputs and targets, got {} and {}",
                inputs.len(),
                targets.len()
            )));
        }
        if let Some(bad) = inputs.iter().find(|w| w.len() != self.lag) {
            return Err(Error::Contract(format!("window of length {} for lag {}", bad.len(), self.lag)));
        }
        let l = self.hidden_count();
        let mut h = DMatrix::zeros(inputs.len(), l);
        for (r, w) in inputs.iter().enumerate() {
            h.set_row(r, &self.activations(w).transpose());
        }
        let y = DVector::from_column_slice(targets);
        let mut gram = h.transpose() * &h;
        for d in 0..l {
            gram[(d, d)] += self.ridge;
        }
        let rhs = h.transpose() * &y;
        let solution = match gram.clone().cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => gram
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .map_err(|e| Error::numerical(format!("ELM output weights: {e}")))?,
        };
        if solution.iter().any(|w| !w.is_finite()) {
            return Err(Error::numerical("ELM output weights are not finite"));
        }
        self.output_weights = solution;
        Ok(())
    }

    /// Prediction for one normalized window of length `lag`.
    pub fn predict(&self, window: &[f64]) -> Result<f64> {
        if window.len() != self.lag {
            return Err(Error::Contract(format!("window of length {} for lag {}", window.len(), self.lag)));
        }
        Ok(self.activations(window).dot(&self.output_weights))
    }
}
