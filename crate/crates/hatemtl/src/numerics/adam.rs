//! Bias-corrected Adam over a list of [`ParamTensor`]s.

use serde::{Deserialize, Serialize};

use super::tape::ParamTensor;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
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

/// Per-parameter first and second moments plus the shared step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(config: AdamConfig, params: &[&ParamTensor]) -> Self {
        AdamState {
            config,
            step: 0,
            m: params.iter().map(|p| vec![0.0; p.data.len()]).collect(),
            v: params.iter().map(|p| vec![0.0; p.data.len()]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Apply one update from the accumulated gradients, then zero them.
    /// The parameter slice must match the one used at construction, in the
    /// same order.
    pub fn step(&mut self, params: &mut [&mut ParamTensor]) {
        assert_eq!(params.len(), self.m.len(), "adam: parameter list changed");
        self.step += 1;
        let t = self.step as i32;
        let c = self.config;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        for (k, p) in params.iter_mut().enumerate() {
            assert_eq!(p.data.len(), self.m[k].len(), "adam: parameter shape changed");
            let m = &mut self.m[k];
            let v = &mut self.v[k];
            for i in 0..p.data.len() {
                let g = p.grad[i];
                m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
                v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p.data[i] -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
            }
            p.zero_grad();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut p = ParamTensor::new(1, 2, vec![0.5, -0.5]);
        let mut state = AdamState::new(AdamConfig::default(), &[&p]);
        state.step(&mut [&mut p]);
        assert_eq!(p.data, vec![0.5, -0.5]);
    }

    #[test]
    fn first_step_matches_hand_evaluation() {
        let mut p = ParamTensor::new(1, 1, vec![0.0]);
        p.grad[0] = 1.0;
        let mut state = AdamState::new(AdamConfig::default(), &[&p]);
        state.step(&mut [&mut p]);
        // m_hat = 1, v_hat = 1 -> delta = -lr / (1 + eps)
        let expected = -1e-3 / (1.0 + 1e-8);
        assert!((p.data[0] - expected).abs() < 1e-15);
        assert_eq!(p.grad[0], 0.0, "gradients zeroed after the step");
    }

    #[test]
    fn zero_learning_rate_is_a_parameter_noop() {
        let cfg = AdamConfig {
            learning_rate: 0.0,
            ..AdamConfig::default()
        };
        let mut p = ParamTensor::new(1, 2, vec![1.0, 2.0]);
        p.grad = vec![3.0, -4.0];
        let mut state = AdamState::new(cfg, &[&p]);
        state.step(&mut [&mut p]);
        assert_eq!(p.data, vec![1.0, 2.0]);
        // moments still advanced
        assert!(state.m[0][0] != 0.0);
        assert!(state.v[0][1] != 0.0);
    }
}
