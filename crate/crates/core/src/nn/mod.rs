//! Dense ReLU feedforward networks with manual backpropagation.
//!
//! Networks compute `W_L·ReLU(…ReLU(W₁x + b₁)…) + b_L`, optionally
//! clamped entrywise to `[−R, R]`. The class is further constrained by a
//! max-abs weight bound `κ` (enforced by projection after every optimizer
//! step) and carries an advisory nonzero-parameter budget `K` that is
//! recorded but not enforced during training.
//!
//! All arithmetic is `f64`. Shapes are validated at the public API
//! boundary and errors are returned as [`NnError`] values.

mod adam;
mod arch;
mod grad;
mod train;

pub use adam::{adam_step, AdamState};
pub use arch::{architecture_for_role, NetworkRole, ScalingConstants};
pub use grad::{loss_and_grad, BatchItem, GradientBundle, LossKind, Target};
pub use train::{train_supervised, FitDiagnostics, Targets, TrainOptions};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("batch must be nonempty")]
    EmptyBatch,
    #[error("non-finite {what} encountered (value {value})")]
    NonFinite { what: &'static str, value: f64 },
    #[error("softmax temperature must be positive, got {0}")]
    InvalidTemperature(f64),
    #[error("invalid architecture rule input: {0}")]
    InvalidArchitecture(String),
}

/// The ReLU activation. Exposed so its positive homogeneity can be
/// asserted directly in property tests.
#[inline]
pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Architecture and class constraints for an MLP.
///
/// `depth` counts affine layers (`depth = 1` is a single affine map with
/// no hidden ReLU); all hidden layers have width `width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub depth: usize,
    pub width: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    /// Max-abs bound `κ` on every weight and bias entry, enforced by
    /// projection after each optimizer step.
    pub weight_bound: Option<f64>,
    /// Sup-norm clamp `R` applied entrywise to the forward output.
    pub output_bound: Option<f64>,
    /// Advisory nonzero-parameter budget `K`; recorded, never enforced.
    pub sparsity_budget: Option<usize>,
}

impl MlpSpec {
    pub fn new(depth: usize, width: usize, input_dim: usize, output_dim: usize) -> Self {
        Self {
            depth,
            width,
            input_dim,
            output_dim,
            weight_bound: None,
            output_bound: None,
            sparsity_budget: None,
        }
    }

    pub fn with_weight_bound(mut self, kappa: f64) -> Self {
        self.weight_bound = Some(kappa);
        self
    }

    pub fn with_output_bound(mut self, r: f64) -> Self {
        self.output_bound = Some(r);
        self
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.depth < 1 {
            return Err(NnError::InvalidSpec("depth must be ≥ 1".into()));
        }
        if self.width < 1 {
            return Err(NnError::InvalidSpec("width must be ≥ 1".into()));
        }
        if self.input_dim < 1 || self.output_dim < 1 {
            return Err(NnError::InvalidSpec("dimensions must be ≥ 1".into()));
        }
        if let Some(k) = self.weight_bound {
            if !(k > 0.0) {
                return Err(NnError::InvalidSpec(format!(
                    "weight bound must be positive, got {k}"
                )));
            }
        }
        if let Some(r) = self.output_bound {
            if !(r > 0.0) {
                return Err(NnError::InvalidSpec(format!(
                    "output bound must be positive, got {r}"
                )));
            }
        }
        Ok(())
    }

    /// `(in, out)` dimensions of each affine layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        if self.depth == 1 {
            return vec![(self.input_dim, self.output_dim)];
        }
        let mut dims = Vec::with_capacity(self.depth);
        dims.push((self.input_dim, self.width));
        for _ in 0..self.depth - 2 {
            dims.push((self.width, self.width));
        }
        dims.push((self.width, self.output_dim));
        dims
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .map(|(i, o)| i * o + o)
            .sum()
    }
}

/// A ReLU MLP: spec plus row-major weight matrices and bias vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpNetwork {
    pub spec: MlpSpec,
    /// `weights[l]` is row-major with shape `(out_l, in_l)`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpNetwork {
    /// All-zero network (outputs zero everywhere).
    pub fn zeros(spec: MlpSpec) -> Result<Self, NnError> {
        spec.validate()?;
        let weights = spec
            .layer_dims()
            .iter()
            .map(|(i, o)| vec![0.0; i * o])
            .collect();
        let biases = spec.layer_dims().iter().map(|(_, o)| vec![0.0; o]).collect();
        Ok(Self {
            spec,
            weights,
            biases,
        })
    }

    /// He-style scaled uniform initialization: `U(−√(6/fan_in), √(6/fan_in))`
    /// weights, zero biases, projected into `[−κ, κ]` when a weight bound
    /// is present.
    pub fn init_he(spec: MlpSpec, rng: &mut ChaCha8Rng) -> Result<Self, NnError> {
        let mut net = Self::zeros(spec)?;
        for (l, (fan_in, _)) in net.spec.layer_dims().iter().enumerate() {
            let limit = (6.0 / *fan_in as f64).sqrt();
            for w in net.weights[l].iter_mut() {
                *w = rng.random_range(-limit..limit);
            }
        }
        net.project_weights();
        Ok(net)
    }

    /// He init for hidden layers with the final affine layer left at zero,
    /// so the initial output is identically zero (uniform policy warm
    /// start for softmax heads).
    pub fn init_he_zero_last(spec: MlpSpec, rng: &mut ChaCha8Rng) -> Result<Self, NnError> {
        let mut net = Self::init_he(spec, rng)?;
        let last = net.weights.len() - 1;
        net.weights[last].iter_mut().for_each(|w| *w = 0.0);
        net.biases[last].iter_mut().for_each(|b| *b = 0.0);
        Ok(net)
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    /// Clamp every parameter into `[−κ, κ]`. Idempotent; a no-op when the
    /// spec carries no weight bound.
    pub fn project_weights(&mut self) {
        let Some(kappa) = self.spec.weight_bound else {
            return;
        };
        for layer in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            for p in layer.iter_mut() {
                *p = p.clamp(-kappa, kappa);
            }
        }
    }

    /// Forward pass; output clamped entrywise to `[−R, R]` when the spec
    /// carries an output bound.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        if x.len() != self.spec.input_dim {
            return Err(NnError::ShapeMismatch {
                what: "forward input",
                expected: self.spec.input_dim,
                got: x.len(),
            });
        }
        let mut h: Vec<f64> = x.to_vec();
        let last = self.num_layers() - 1;
        for l in 0..=last {
            let mut z = self.affine(l, &h);
            if l < last {
                for v in z.iter_mut() {
                    *v = relu(*v);
                }
            }
            h = z;
        }
        if let Some(r) = self.spec.output_bound {
            for v in h.iter_mut() {
                *v = v.clamp(-r, r);
            }
        }
        Ok(h)
    }

    fn affine(&self, layer: usize, input: &[f64]) -> Vec<f64> {
        let (in_dim, out_dim) = self.layer_shape(layer);
        debug_assert_eq!(input.len(), in_dim);
        let w = &self.weights[layer];
        let b = &self.biases[layer];
        let mut out = Vec::with_capacity(out_dim);
        for o in 0..out_dim {
            let row = &w[o * in_dim..(o + 1) * in_dim];
            out.push(b[o] + crate::linalg::dot(row, input));
        }
        out
    }

    fn layer_shape(&self, layer: usize) -> (usize, usize) {
        self.spec.layer_dims()[layer]
    }

    /// Forward pass retaining per-layer pre-activations, for backprop.
    /// `pre[l]` is the affine output of layer `l`; `post[l]` its ReLU (or,
    /// for the last layer, the clamped output).
    pub(crate) fn forward_trace(&self, x: &[f64]) -> ForwardTrace {
        debug_assert_eq!(x.len(), self.spec.input_dim);
        let last = self.num_layers() - 1;
        let mut pre = Vec::with_capacity(self.num_layers());
        let mut post = Vec::with_capacity(self.num_layers());
        let mut h: Vec<f64> = x.to_vec();
        for l in 0..=last {
            let z = self.affine(l, &h);
            pre.push(z.clone());
            let mut a = z;
            if l < last {
                for v in a.iter_mut() {
                    *v = relu(*v);
                }
            } else if let Some(r) = self.spec.output_bound {
                for v in a.iter_mut() {
                    *v = v.clamp(-r, r);
                }
            }
            post.push(a.clone());
            h = a;
        }
        ForwardTrace { pre, post }
    }

    /// Backpropagate `d_output = ∂loss/∂(clamped output)` for one sample,
    /// accumulating parameter gradients into `grads`.
    ///
    /// The output clamp passes gradient only where it was inactive
    /// (`|z| ≤ R`); ReLU uses the `z > 0` subgradient convention.
    pub(crate) fn backward_accumulate(
        &self,
        x: &[f64],
        trace: &ForwardTrace,
        d_output: &[f64],
        grads: &mut GradientBundle,
    ) {
        let last = self.num_layers() - 1;
        let mut d_z: Vec<f64> = d_output.to_vec();
        if let Some(r) = self.spec.output_bound {
            for (d, &z) in d_z.iter_mut().zip(&trace.pre[last]) {
                if z.abs() > r {
                    *d = 0.0;
                }
            }
        }
        for l in (0..=last).rev() {
            let (in_dim, out_dim) = self.layer_shape(l);
            let input: &[f64] = if l == 0 { x } else { &trace.post[l - 1] };
            debug_assert_eq!(input.len(), in_dim);
            let dw = &mut grads.d_weights[l];
            for o in 0..out_dim {
                let g = d_z[o];
                if g != 0.0 {
                    let row = &mut dw[o * in_dim..(o + 1) * in_dim];
                    for (r, &xi) in row.iter_mut().zip(input) {
                        *r += g * xi;
                    }
                }
                grads.d_biases[l][o] += g;
            }
            if l > 0 {
                let w = &self.weights[l];
                let mut d_prev = vec![0.0; in_dim];
                for o in 0..out_dim {
                    let g = d_z[o];
                    if g != 0.0 {
                        let row = &w[o * in_dim..(o + 1) * in_dim];
                        for (dp, &wj) in d_prev.iter_mut().zip(row) {
                            *dp += g * wj;
                        }
                    }
                }
                // Through the previous layer's ReLU.
                for (dp, &z) in d_prev.iter_mut().zip(&trace.pre[l - 1]) {
                    if z <= 0.0 {
                        *dp = 0.0;
                    }
                }
                d_z = d_prev;
            }
        }
    }

    /// Serialize to the checkpoint JSON document (spec fields plus
    /// row-major weight and bias arrays).
    pub fn to_checkpoint_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serialization cannot fail")
    }

    /// Parse and shape-validate a checkpoint produced by
    /// [`MlpNetwork::to_checkpoint_json`].
    pub fn from_checkpoint_json(json: &str) -> Result<Self, NnError> {
        let net: MlpNetwork = serde_json::from_str(json)
            .map_err(|e| NnError::InvalidSpec(format!("checkpoint parse error: {e}")))?;
        net.spec.validate()?;
        let dims = net.spec.layer_dims();
        if net.weights.len() != dims.len() || net.biases.len() != dims.len() {
            return Err(NnError::InvalidSpec("layer count mismatch".into()));
        }
        for (l, (i, o)) in dims.iter().enumerate() {
            if net.weights[l].len() != i * o {
                return Err(NnError::ShapeMismatch {
                    what: "checkpoint weights",
                    expected: i * o,
                    got: net.weights[l].len(),
                });
            }
            if net.biases[l].len() != *o {
                return Err(NnError::ShapeMismatch {
                    what: "checkpoint biases",
                    expected: *o,
                    got: net.biases[l].len(),
                });
            }
        }
        Ok(net)
    }
}

pub(crate) struct ForwardTrace {
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

/// Temperature softmax: `exp(z_i/H) / Σ_j exp(z_j/H)`, computed with
/// max-subtraction. Invariant to adding a constant to all logits; small
/// `H` pushes the output toward a one-hot vector.
pub fn softmax_temp(logits: &[f64], temperature: f64) -> Result<Vec<f64>, NnError> {
    if !(temperature > 0.0) {
        return Err(NnError::InvalidTemperature(temperature));
    }
    for &z in logits {
        if !z.is_finite() {
            return Err(NnError::NonFinite {
                what: "softmax logit",
                value: z,
            });
        }
    }
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits
        .iter()
        .map(|&z| ((z - m) / temperature).exp())
        .collect();
    let sum: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= sum;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;

    fn spec_2layer() -> MlpSpec {
        MlpSpec::new(2, 2, 1, 1)
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = MlpNetwork::zeros(MlpSpec::new(3, 4, 2, 3)).unwrap();
        assert_eq!(net.forward(&[0.7, -1.3]).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_affine_layer() {
        // W₁ = [[2]], b₁ = [−1], x = [3] → [5]; depth 1 has no ReLU.
        let mut net = MlpNetwork::zeros(MlpSpec::new(1, 1, 1, 1)).unwrap();
        net.weights[0][0] = 2.0;
        net.biases[0][0] = -1.0;
        assert_eq!(net.forward(&[3.0]).unwrap(), vec![5.0]);
    }

    #[test]
    fn two_layer_hand_evaluation() {
        // W₁ = [[1],[−1]], b₁ = 0, W₂ = [[1,1]], b₂ = 0:
        // x = −2 → ReLU(−2) + ReLU(2) = 2.
        let mut net = MlpNetwork::zeros(spec_2layer()).unwrap();
        net.weights[0] = vec![1.0, -1.0];
        net.weights[1] = vec![1.0, 1.0];
        assert_eq!(net.forward(&[-2.0]).unwrap(), vec![2.0]);
        assert_eq!(net.forward(&[3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn forward_rejects_wrong_input_dim() {
        let net = MlpNetwork::zeros(MlpSpec::new(2, 4, 3, 1)).unwrap();
        assert!(matches!(
            net.forward(&[1.0, 2.0]),
            Err(NnError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn output_clamp_is_exact() {
        let mut net = MlpNetwork::zeros(MlpSpec::new(1, 1, 1, 1).with_output_bound(1.5)).unwrap();
        net.weights[0][0] = 10.0;
        assert_eq!(net.forward(&[3.0]).unwrap(), vec![1.5]);
        assert_eq!(net.forward(&[-3.0]).unwrap(), vec![-1.5]);
        assert_eq!(net.forward(&[0.1]).unwrap(), vec![1.0]);
    }

    #[test]
    fn projection_is_idempotent_and_respects_kappa() {
        let spec = MlpSpec::new(2, 3, 2, 2).with_weight_bound(0.25);
        let mut net = MlpNetwork::init_he(spec, &mut seeds::rng(3, &[seeds::TAG_INIT])).unwrap();
        net.weights[0][0] = 9.0;
        net.project_weights();
        let once = net.clone();
        net.project_weights();
        assert_eq!(net, once);
        let max = net
            .weights
            .iter()
            .flatten()
            .chain(net.biases.iter().flatten())
            .fold(0.0f64, |m, &w| m.max(w.abs()));
        assert!(max <= 0.25);
    }

    #[test]
    fn softmax_equal_logits_is_uniform() {
        for h in [0.01, 1.0, 1e6] {
            let p = softmax_temp(&[2.0, 2.0, 2.0, 2.0], h).unwrap();
            for &v in &p {
                assert!((v - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn softmax_matches_direct_formula() {
        let p = softmax_temp(&[1.0, 0.0], 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!((p[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((p[1] - 1.0 / (e + 1.0)).abs() < 1e-15);
        assert!((p[0] - 0.731_058_578_630_004_9).abs() < 1e-15);
    }

    #[test]
    fn softmax_small_temperature_approaches_one_hot() {
        let p = softmax_temp(&[1.0, 0.0], 0.01).unwrap();
        // exp(−100) ≈ 3.7e−44 leaves the top entry within 1e−10 of 1.
        assert!(p[0] >= 1.0 - 1e-10);
    }

    #[test]
    fn softmax_rejects_nonpositive_temperature() {
        assert!(matches!(
            softmax_temp(&[0.0, 1.0], 0.0),
            Err(NnError::InvalidTemperature(_))
        ));
        assert!(matches!(
            softmax_temp(&[0.0, 1.0], -1.0),
            Err(NnError::InvalidTemperature(_))
        ));
    }

    #[test]
    fn checkpoint_roundtrip() {
        let spec = MlpSpec::new(3, 5, 4, 2)
            .with_weight_bound(2.0)
            .with_output_bound(1.0);
        let net = MlpNetwork::init_he(spec, &mut seeds::rng(9, &[seeds::TAG_INIT])).unwrap();
        let json = net.to_checkpoint_json();
        let back = MlpNetwork::from_checkpoint_json(&json).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn checkpoint_rejects_bad_shapes() {
        let net = MlpNetwork::zeros(MlpSpec::new(2, 3, 2, 1)).unwrap();
        let mut doc: serde_json::Value = serde_json::from_str(&net.to_checkpoint_json()).unwrap();
        doc["weights"][0] = serde_json::json!([1.0, 2.0]);
        assert!(MlpNetwork::from_checkpoint_json(&doc.to_string()).is_err());
    }
}
