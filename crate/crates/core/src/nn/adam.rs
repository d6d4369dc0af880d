//! Adam optimizer with bias correction and κ-projection after each step.

use serde::{Deserialize, Serialize};

use super::{GradientBundle, MlpNetwork, NnError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    bias_first: Vec<Vec<f64>>,
    bias_second: Vec<Vec<f64>>,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(net: &MlpNetwork, learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zeros_w: Vec<Vec<f64>> = net.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let zeros_b: Vec<Vec<f64>> = net.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        Self {
            first_moment: zeros_w.clone(),
            second_moment: zeros_w,
            bias_first: zeros_b.clone(),
            bias_second: zeros_b,
            step_count: 0,
            learning_rate,
            beta1,
            beta2,
            epsilon,
        }
    }

    fn shape_matches(&self, net: &MlpNetwork) -> bool {
        self.first_moment.len() == net.weights.len()
            && self
                .first_moment
                .iter()
                .zip(&net.weights)
                .all(|(m, w)| m.len() == w.len())
            && self
                .bias_first
                .iter()
                .zip(&net.biases)
                .all(|(m, b)| m.len() == b.len())
    }
}

/// One Adam update with bias correction, followed by projection of every
/// parameter into `[−κ, κ]` when the spec carries a weight bound.
pub fn adam_step(
    net: &mut MlpNetwork,
    grads: &GradientBundle,
    state: &mut AdamState,
) -> Result<(), NnError> {
    if !grads.shape_matches(net) || !state.shape_matches(net) {
        return Err(NnError::ShapeMismatch {
            what: "adam state/gradient",
            expected: net.spec.parameter_count(),
            got: 0,
        });
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let corr1 = 1.0 - state.beta1.powi(t);
    let corr2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, lr, eps) = (state.beta1, state.beta2, state.learning_rate, state.epsilon);

    let update = |params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            let m_hat = m[i] / corr1;
            let v_hat = v[i] / corr2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    };

    for l in 0..net.weights.len() {
        update(
            &mut net.weights[l],
            &grads.d_weights[l],
            &mut state.first_moment[l],
            &mut state.second_moment[l],
        );
        update(
            &mut net.biases[l],
            &grads.d_biases[l],
            &mut state.bias_first[l],
            &mut state.bias_second[l],
        );
    }
    net.project_weights();
    Ok(())
}
