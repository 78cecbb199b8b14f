use serde::{Deserialize, Serialize};

use super::{Parameterized, Scalar};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub config: AdamConfig,
    first_moment: Vec<T>,
    second_moment: Vec<T>,
    step_count: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(param_count: usize, config: AdamConfig) -> Self {
        Adam {
            config,
            first_moment: vec![T::zero(); param_count],
            second_moment: vec![T::zero(); param_count],
            step_count: 0,
        }
    }

    pub fn for_params<P: Parameterized<T>>(params: &P, config: AdamConfig) -> Self {
        Self::new(params.param_count(), config)
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &[T] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[T] {
        &self.second_moment
    }

    /// Applies one update of `params` against `grads` (same parameter layout).
    pub fn update<P: Parameterized<T>>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        let n = grads.param_count();
        if n != self.first_moment.len() {
            return Err(Error::shape("Adam state", self.first_moment.len(), n));
        }
        self.step_count += 1;
        let c = &self.config;
        let t = self.step_count as i32;
        let b1 = T::from_f64(c.beta1);
        let b2 = T::from_f64(c.beta2);
        let one = T::one();
        // Bias corrections folded into the step size and epsilon.
        let corr1 = 1.0 - c.beta1.powi(t);
        let corr2 = 1.0 - c.beta2.powi(t);
        let step = T::from_f64(c.learning_rate / corr1);
        let inv_sqrt_corr2 = T::from_f64(1.0 / corr2.sqrt());
        let eps = T::from_f64(c.epsilon);

        let mut offset = 0;
        for (p, g) in params.param_slices_mut().into_iter().zip(grads.param_slices()) {
            if p.len() != g.len() {
                return Err(Error::shape("parameter block", p.len(), g.len()));
            }
            let m = &mut self.first_moment[offset..offset + p.len()];
            let v = &mut self.second_moment[offset..offset + p.len()];
            for k in 0..p.len() {
                let gk = g[k];
                m[k] = b1 * m[k] + (one - b1) * gk;
                v[k] = b2 * v[k] + (one - b2) * gk * gk;
                p[k] -= step * m[k] / (v[k].sqrt() * inv_sqrt_corr2 + eps);
            }
            offset += p.len();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::LstmModel;

    fn model() -> LstmModel<f64> {
        let mut m = LstmModel::zeros(2, 1);
        for (k, v) in m.lstm.input_weights.iter_mut().enumerate() {
            *v = k as f64 * 0.1 - 0.3;
        }
        m
    }

    #[test]
    fn zero_gradient_leaves_params_and_counts_step() {
        let mut m = model();
        let before = m.clone();
        let g = LstmModel::zeros(2, 1);
        let mut adam = Adam::for_params(&m, AdamConfig::default());
        adam.update(&mut m, &g).unwrap();
        assert_eq!(m, before);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate_against_sign() {
        let mut m = model();
        let before = m.flatten();
        let mut g = LstmModel::zeros(2, 1);
        for (k, v) in g.lstm.input_weights.iter_mut().enumerate() {
            *v = if k % 2 == 0 { 3.0 } else { -0.02 };
        }
        let cfg = AdamConfig::default();
        let mut adam = Adam::for_params(&m, cfg);
        adam.update(&mut m, &g).unwrap();
        for ((a, b), gk) in m.flatten().iter().zip(&before).zip(g.flatten()) {
            // At t = 1 the corrected moments are g and g^2, so the step is
            // lr * g / (|g| + eps).
            let expected = -cfg.learning_rate * gk / (gk.abs() + cfg.epsilon);
            assert!((a - b - expected).abs() < 1e-15);
            if gk != 0.0 {
                assert!(((a - b) + cfg.learning_rate * gk.signum()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_gradient_drives_parameter_monotonically() {
        let mut m = LstmModel::<f64>::zeros(1, 1);
        let mut g = LstmModel::zeros(1, 1);
        g.head.bias = 0.5;
        let mut adam = Adam::for_params(&m, AdamConfig::default());
        let mut last = m.head.bias;
        for _ in 0..200 {
            adam.update(&mut m, &g).unwrap();
            assert!(m.head.bias < last);
            last = m.head.bias;
        }
        assert!(adam.second_moment().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let mut m = LstmModel::<f32>::zeros(2, 1);
        let g = LstmModel::zeros(3, 1);
        let mut adam = Adam::for_params(&m, AdamConfig::default());
        assert!(adam.update(&mut m, &g).is_err());
    }
}
