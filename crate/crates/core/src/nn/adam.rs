//! Adam optimizer with bias correction.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use alloc::vec::Vec;

use super::tensor::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second-moment accumulators, one pair per parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamState {
    config: AdamConfig,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
    step: u64,
}

impl AdamState {
    /// Zero-initialized state for parameters with the given shapes.
    pub fn new(config: AdamConfig, shapes: &[(usize, usize)]) -> Self {
        Self {
            config,
            first: shapes.iter().map(|&(r, c)| Tensor::zeros(r, c)).collect(),
            second: shapes.iter().map(|&(r, c)| Tensor::zeros(r, c)).collect(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected update over all parameter tensors. `params` and
    /// `grads` must be in the same order as the shapes at construction.
    /// Non-finite gradients abort with a diagnostic instead of corrupting
    /// the parameters.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[&Tensor]) -> Result<()> {
        debug_assert_eq!(params.len(), self.first.len());
        debug_assert_eq!(grads.len(), self.first.len());
        for g in grads {
            if !g.is_finite() {
                return Err(Error::NonFiniteGradient {
                    step: self.step + 1,
                });
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let c = self.config;
        let bias1 = 1.0 - c.beta1.powi(t);
        let bias2 = 1.0 - c.beta2.powi(t);
        for ((param, grad), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut().zip(&mut self.second))
        {
            for (((p, &g), m), v) in param
                .data_mut()
                .iter_mut()
                .zip(grad.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *m = c.beta1 * *m + (1.0 - c.beta1) * g;
                *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *p -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut p = Tensor::from_fn(2, 2, |r, c| (r + c) as f64);
        let before = p.clone();
        let g = Tensor::zeros(2, 2);
        let mut adam = AdamState::new(AdamConfig::default(), &[(2, 2)]);
        adam.step(&mut [&mut p], &[&g]).unwrap();
        assert_eq!(p, before);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn constant_gradient_update_approaches_signed_learning_rate() {
        let cfg = AdamConfig::default();
        let mut p = Tensor::zeros(1, 2);
        let g = Tensor::from_vec(1, 2, alloc::vec![0.37, -2.4]).unwrap();
        let mut adam = AdamState::new(cfg, &[(1, 2)]);
        let mut prev = p.clone();
        let mut last_steps = [0.0f64; 2];
        for _ in 0..2000 {
            adam.step(&mut [&mut p], &[&g]).unwrap();
            for i in 0..2 {
                last_steps[i] = p.data()[i] - prev.data()[i];
            }
            prev = p.clone();
        }
        // With a constant gradient, m̂ → g and v̂ → g², so each step tends
        // to −α·sign(g).
        assert!((last_steps[0] + cfg.learning_rate).abs() < 1e-6);
        assert!((last_steps[1] - cfg.learning_rate).abs() < 1e-6);
    }

    #[test]
    fn update_is_deterministic() {
        let run = || {
            let mut p = Tensor::from_fn(3, 3, |r, c| (r as f64 - c as f64) * 0.1);
            let g = Tensor::from_fn(3, 3, |r, c| ((r * 3 + c) as f64).sin());
            let mut adam = AdamState::new(AdamConfig::default(), &[(3, 3)]);
            for _ in 0..10 {
                adam.step(&mut [&mut p], &[&g]).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn non_finite_gradient_aborts() {
        let mut p = Tensor::zeros(1, 1);
        let g = Tensor::from_vec(1, 1, alloc::vec![f64::NAN]).unwrap();
        let mut adam = AdamState::new(AdamConfig::default(), &[(1, 1)]);
        assert!(matches!(
            adam.step(&mut [&mut p], &[&g]),
            Err(Error::NonFiniteGradient { step: 1 })
        ));
    }
}
