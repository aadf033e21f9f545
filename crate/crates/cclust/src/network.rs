//! The cluster-assignment network: a feedforward net whose softmax output
//! row is one sample's distribution over clusters.
//!
//! Forward, backward, and the dense in-batch pair enumeration are all here;
//! gradients are hand-derived (no autodiff) and verified against central
//! finite differences in the tests. The output width is the maximum number
//! of clusters the net can use, not necessarily the true class count.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loss::{softmax_row, PairLossGrad, ProbVector};
use crate::matrix::Matrix;
use crate::rng::seeded_rng;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("invalid layer spec: {0}")]
    InvalidSpec(String),

    #[error("batch has {got} columns, network expects {expected}")]
    InputDimMismatch { expected: usize, got: usize },

    #[error("pair enumeration needs a batch of at least 2, got {0}")]
    BatchTooSmall(usize),

    #[error("{0}")]
    MisalignedGradients(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

/// Architecture of the assignment network. `output_dim` is the maximum
/// number of clusters (k); every hidden layer is followed by `activation`,
/// the output layer by softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(
        input_dim: usize,
        hidden_dims: Vec<usize>,
        output_dim: usize,
        activation: Activation,
    ) -> Result<Self, NetworkError> {
        if input_dim < 1 {
            return Err(NetworkError::InvalidSpec("input_dim must be >= 1".into()));
        }
        if output_dim < 2 {
            return Err(NetworkError::InvalidSpec(format!(
                "output_dim must be >= 2 (a 1-cluster net cannot cluster), got {output_dim}"
            )));
        }
        if hidden_dims.iter().any(|&d| d < 1) {
            return Err(NetworkError::InvalidSpec("hidden dims must be >= 1".into()));
        }
        Ok(LayerSpec { input_dim, hidden_dims, output_dim, activation })
    }

    /// (fan_in, fan_out) per dense layer, input to output.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden_dims);
        dims.push(self.output_dim);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn depth(&self) -> usize {
        self.hidden_dims.len()
    }
}

/// One dense layer's parameters (or, shape-for-shape, its gradients).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// fan_in × fan_out.
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// All trainable parameters. The same container carries gradients, so the
/// optimizer can walk parameters and gradients in lockstep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MLPParams {
    pub layers: Vec<DenseLayer>,
}

impl MLPParams {
    pub fn zeros_like(&self) -> MLPParams {
        MLPParams {
            layers: self
                .layers
                .iter()
                .map(|l| DenseLayer {
                    weights: Matrix::zeros(l.weights.rows(), l.weights.cols()),
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().weights.cols()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.data().len() + l.bias.len())
            .sum()
    }

    /// Visit every scalar parameter in a stable order (used by the
    /// finite-difference tests).
    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for layer in &mut self.layers {
            for w in layer.weights.data_mut() {
                f(w);
            }
            for b in &mut layer.bias {
                f(b);
            }
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(layer.weights.data());
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    /// Euclidean norm over all entries.
    pub fn l2_norm(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| {
                l.weights.data().iter().map(|w| w * w).sum::<f64>()
                    + l.bias.iter().map(|b| b * b).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `self += alpha * other`, entrywise.
    pub fn axpy(&mut self, alpha: f64, other: &MLPParams) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.data_mut().iter_mut().zip(b.weights.data()) {
                *x += alpha * y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += alpha * y;
            }
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for layer in &mut self.layers {
            for w in layer.weights.data_mut() {
                *w *= alpha;
            }
            for b in &mut layer.bias {
                *b *= alpha;
            }
        }
    }
}

/// He-style fan-in scaled uniform init (±sqrt(6/fan_in)), zero biases.
/// Bitwise deterministic for a given (spec, seed).
pub fn init_params(spec: &LayerSpec, seed: u64) -> MLPParams {
    let mut rng = seeded_rng(seed);
    let layers = spec
        .layer_shapes()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let bound = (6.0 / fan_in as f64).sqrt();
            let data: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            DenseLayer {
                weights: Matrix::from_vec(fan_in, fan_out, data),
                bias: vec![0.0; fan_out],
            }
        })
        .collect();
    MLPParams { layers }
}

/// Cached intermediates from one forward pass, enough to backpropagate.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Input to each dense layer: `activations[0]` is the batch itself,
    /// `activations[l]` the post-activation output of layer `l-1`.
    pub activations: Vec<Matrix>,
    /// Pre-activation of each layer; the last entry is the logits.
    pub pre_activations: Vec<Matrix>,
    /// Row-wise softmax of the logits.
    pub probs: Matrix,
}

impl ForwardTrace {
    pub fn batch_size(&self) -> usize {
        self.probs.rows()
    }

    pub fn logits(&self) -> &Matrix {
        self.pre_activations.last().unwrap()
    }

    pub fn prob_row(&self, i: usize) -> &[f64] {
        self.probs.row(i)
    }

    /// Row `i` as a validated distribution.
    pub fn prob_vector(&self, i: usize) -> ProbVector {
        ProbVector::new(self.probs.row(i).to_vec()).expect("softmax rows are valid distributions")
    }
}

/// The assignment network: architecture plus current parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub spec: LayerSpec,
    pub params: MLPParams,
}

impl Network {
    /// Fresh network with seeded He-uniform weights.
    pub fn init(spec: LayerSpec, seed: u64) -> Network {
        let params = init_params(&spec, seed);
        Network { spec, params }
    }

    pub fn from_parts(spec: LayerSpec, params: MLPParams) -> Result<Network, NetworkError> {
        let shapes = spec.layer_shapes();
        if shapes.len() != params.layers.len()
            || shapes.iter().zip(&params.layers).any(|(&(fi, fo), l)| {
                l.weights.rows() != fi || l.weights.cols() != fo || l.bias.len() != fo
            })
        {
            return Err(NetworkError::InvalidSpec(
                "parameter shapes do not match the layer spec".into(),
            ));
        }
        Ok(Network { spec, params })
    }

    /// Run the batch through the network, keeping what backprop needs.
    pub fn forward(&self, batch: &Matrix) -> Result<ForwardTrace, NetworkError> {
        if batch.cols() != self.spec.input_dim {
            return Err(NetworkError::InputDimMismatch {
                expected: self.spec.input_dim,
                got: batch.cols(),
            });
        }
        let n_layers = self.params.layers.len();
        let mut activations = Vec::with_capacity(n_layers);
        let mut pre_activations = Vec::with_capacity(n_layers);
        let mut current = batch.clone();
        for (l, layer) in self.params.layers.iter().enumerate() {
            let mut z = current.matmul(&layer.weights);
            z.add_row_vector(&layer.bias);
            activations.push(current);
            if l + 1 < n_layers {
                let mut a = z.clone();
                apply_activation(self.spec.activation, &mut a);
                pre_activations.push(z);
                current = a;
            } else {
                current = z.clone();
                pre_activations.push(z);
            }
        }
        let mut probs = current;
        for i in 0..probs.rows() {
            softmax_row(probs.row_mut(i));
        }
        Ok(ForwardTrace { activations, pre_activations, probs })
    }

    /// Backpropagate per-pair gradients into a full parameter gradient.
    ///
    /// Each pair's `grad_p` lands in probability-gradient row `i` and
    /// `grad_q` in row `j`; the softmax Jacobian and the dense layers then
    /// carry the signal back to every weight and bias.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        pair_grads: &[PairLossGrad],
        pairs: &[(usize, usize)],
    ) -> Result<MLPParams, NetworkError> {
        if pair_grads.len() != pairs.len() {
            return Err(NetworkError::MisalignedGradients(format!(
                "{} gradients for {} pairs",
                pair_grads.len(),
                pairs.len()
            )));
        }
        let n = trace.batch_size();
        let k = self.spec.output_dim;
        let mut dprobs = Matrix::zeros(n, k);
        for (g, &(i, j)) in pair_grads.iter().zip(pairs) {
            if g.grad_p.len() != k || g.grad_q.len() != k {
                return Err(NetworkError::MisalignedGradients(format!(
                    "pair gradient has length {}, output dim is {k}",
                    g.grad_p.len()
                )));
            }
            if i >= n || j >= n {
                return Err(NetworkError::MisalignedGradients(format!(
                    "pair ({i}, {j}) out of range for batch of {n}"
                )));
            }
            for (d, &v) in dprobs.row_mut(i).iter_mut().zip(&g.grad_p) {
                *d += v;
            }
            for (d, &v) in dprobs.row_mut(j).iter_mut().zip(&g.grad_q) {
                *d += v;
            }
        }
        self.backward_from_prob_grad(trace, &dprobs)
    }

    /// Backward pass starting from an already-accumulated `n×k` gradient
    /// with respect to the softmax probabilities (the fused training path).
    pub fn backward_from_prob_grad(
        &self,
        trace: &ForwardTrace,
        dprobs: &Matrix,
    ) -> Result<MLPParams, NetworkError> {
        let n = trace.batch_size();
        let k = self.spec.output_dim;
        if dprobs.rows() != n || dprobs.cols() != k {
            return Err(NetworkError::MisalignedGradients(format!(
                "probability gradient is {}x{}, expected {n}x{k}",
                dprobs.rows(),
                dprobs.cols()
            )));
        }

        // softmax Jacobian: dL/dz_c = p_c * (g_c - sum_c' p_c' g_c')
        let mut dz = Matrix::zeros(n, k);
        for i in 0..n {
            let p = trace.probs.row(i);
            let g = dprobs.row(i);
            let inner: f64 = p.iter().zip(g).map(|(a, b)| a * b).sum();
            for (out, (&pc, &gc)) in dz.row_mut(i).iter_mut().zip(p.iter().zip(g)) {
                *out = pc * (gc - inner);
            }
        }

        let mut grads = self.params.zeros_like();
        for l in (0..self.params.layers.len()).rev() {
            let a_prev = &trace.activations[l];
            grads.layers[l].weights = a_prev.matmul_at_b(&dz);
            grads.layers[l].bias = dz.column_sums();
            if l > 0 {
                let mut da = dz.matmul_a_bt(&self.params.layers[l].weights);
                // through the activation of layer l-1
                match self.spec.activation {
                    Activation::Relu => {
                        let z_prev = &trace.pre_activations[l - 1];
                        for (d, &z) in da.data_mut().iter_mut().zip(z_prev.data()) {
                            if z <= 0.0 {
                                *d = 0.0;
                            }
                        }
                    }
                    Activation::Tanh => {
                        // activations[l] holds tanh(z_{l-1})
                        let a = &trace.activations[l];
                        for (d, &t) in da.data_mut().iter_mut().zip(a.data()) {
                            *d *= 1.0 - t * t;
                        }
                    }
                }
                dz = da;
            }
        }
        Ok(grads)
    }

    /// Hard cluster assignment: row-wise argmax, ties to the lowest index.
    pub fn predict_clusters(&self, data: &Matrix) -> Result<Vec<usize>, NetworkError> {
        let trace = self.forward(data)?;
        Ok(trace
            .probs
            .iter_rows()
            .map(|row| {
                let mut best = 0;
                let mut best_v = row[0];
                for (c, &v) in row.iter().enumerate().skip(1) {
                    if v > best_v {
                        best = c;
                        best_v = v;
                    }
                }
                best
            })
            .collect())
    }
}

fn apply_activation(act: Activation, m: &mut Matrix) {
    match act {
        Activation::Relu => m.map_inplace(|v| if v > 0.0 { v } else { 0.0 }),
        Activation::Tanh => m.map_inplace(f64::tanh),
    }
}

/// All unordered in-batch index pairs (i < j); depends only on the batch
/// size, never on data content.
pub fn enumerate_pairs(batch_size: usize) -> Result<Vec<(usize, usize)>, NetworkError> {
    if batch_size < 2 {
        return Err(NetworkError::BatchTooSmall(batch_size));
    }
    let mut pairs = Vec::with_capacity(batch_size * (batch_size - 1) / 2);
    for i in 0..batch_size {
        for j in (i + 1)..batch_size {
            pairs.push((i, j));
        }
    }
    Ok(pairs)
}
