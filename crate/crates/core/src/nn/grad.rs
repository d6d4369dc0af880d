//! Loss evaluation with exact analytic gradients.
//!
//! Two losses are supported: weighted squared error for scalar reward
//! regression, and the multinomial logistic loss for propensity
//! estimation. The logistic parameterization follows the augmented-logit
//! convention: a network with `|A| − 1` outputs supplies the free logits
//! and the last class's logit is fixed at 0.

use serde::{Deserialize, Serialize};

use super::{MlpNetwork, NnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    /// Weighted mean of `(f(x) − y)²`; requires `output_dim = 1`.
    Squared,
    /// Weighted mean of `−z_a + log Σ_j exp(z_j)` over augmented logits
    /// `z = [f(x)ᵀ, 0]`; requires `output_dim = |A| − 1`.
    MultinomialLogistic,
}

/// Regression target or class label for one batch item.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Value(f64),
    Class(usize),
}

/// One weighted training example.
#[derive(Debug, Clone, Copy)]
pub struct BatchItem<'a> {
    pub input: &'a [f64],
    pub target: Target,
    pub weight: f64,
}

/// Per-parameter partials of a scalar loss, shapes mirroring a network.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<Vec<f64>>,
}

impl GradientBundle {
    pub fn zeros_like(net: &MlpNetwork) -> Self {
        Self {
            d_weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            d_biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn shape_matches(&self, net: &MlpNetwork) -> bool {
        self.d_weights.len() == net.weights.len()
            && self.d_biases.len() == net.biases.len()
            && self
                .d_weights
                .iter()
                .zip(&net.weights)
                .all(|(g, w)| g.len() == w.len())
            && self
                .d_biases
                .iter()
                .zip(&net.biases)
                .all(|(g, b)| g.len() == b.len())
    }

    pub fn scale(&mut self, c: f64) {
        for layer in self.d_weights.iter_mut().chain(self.d_biases.iter_mut()) {
            for g in layer.iter_mut() {
                *g *= c;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d_weights
            .iter()
            .chain(self.d_biases.iter())
            .flatten()
            .all(|g| g.is_finite())
    }
}

/// Weighted mean loss over the batch and its exact gradient.
///
/// The scalar is `Σᵢ wᵢ ℓᵢ / Σᵢ wᵢ` and the gradient differentiates that
/// exact expression, so uniform weights reduce to the plain batch mean.
pub fn loss_and_grad(
    net: &MlpNetwork,
    batch: &[BatchItem<'_>],
    kind: LossKind,
) -> Result<(f64, GradientBundle), NnError> {
    if batch.is_empty() {
        return Err(NnError::EmptyBatch);
    }
    let weight_sum: f64 = batch.iter().map(|b| b.weight).sum();
    if !(weight_sum > 0.0) {
        return Err(NnError::NonFinite {
            what: "batch weight sum",
            value: weight_sum,
        });
    }

    let mut grads = GradientBundle::zeros_like(net);
    let mut loss = 0.0;
    let mut d_out = vec![0.0; net.spec.output_dim];

    for item in batch {
        if item.input.len() != net.spec.input_dim {
            return Err(NnError::ShapeMismatch {
                what: "batch input",
                expected: net.spec.input_dim,
                got: item.input.len(),
            });
        }
        let scale = item.weight / weight_sum;
        let trace = net.forward_trace(item.input);
        let output = trace.post.last().expect("network has at least one layer");

        match (kind, item.target) {
            (LossKind::Squared, Target::Value(y)) => {
                if net.spec.output_dim != 1 {
                    return Err(NnError::ShapeMismatch {
                        what: "squared-loss output",
                        expected: 1,
                        got: net.spec.output_dim,
                    });
                }
                let r = output[0] - y;
                loss += scale * r * r;
                d_out[0] = scale * 2.0 * r;
            }
            (LossKind::MultinomialLogistic, Target::Class(a)) => {
                let num_actions = net.spec.output_dim + 1;
                if a >= num_actions {
                    return Err(NnError::ShapeMismatch {
                        what: "class label",
                        expected: num_actions,
                        got: a,
                    });
                }
                // Stable log-sum-exp over [z₁..z_{|A|−1}, 0].
                let m = output.iter().cloned().fold(0.0f64, f64::max);
                let mut exp_sum = (-m).exp();
                for &z in output {
                    exp_sum += (z - m).exp();
                }
                let lse = m + exp_sum.ln();
                let picked = if a < net.spec.output_dim {
                    output[a]
                } else {
                    0.0
                };
                loss += scale * (lse - picked);
                for (j, d) in d_out.iter_mut().enumerate() {
                    let p_j = (output[j] - m).exp() / exp_sum;
                    let indicator = if j == a { 1.0 } else { 0.0 };
                    *d = scale * (p_j - indicator);
                }
            }
            (LossKind::Squared, Target::Class(_)) => {
                return Err(NnError::InvalidSpec(
                    "squared loss requires value targets".into(),
                ));
            }
            (LossKind::MultinomialLogistic, Target::Value(_)) => {
                return Err(NnError::InvalidSpec(
                    "multinomial-logistic loss requires class targets".into(),
                ));
            }
        }

        net.backward_accumulate(item.input, &trace, &d_out, &mut grads);
    }

    if !loss.is_finite() {
        return Err(NnError::NonFinite {
            what: "loss",
            value: loss,
        });
    }
    if !grads.is_finite() {
        return Err(NnError::NonFinite {
            what: "gradient",
            value: f64::NAN,
        });
    }
    Ok((loss, grads))
}
