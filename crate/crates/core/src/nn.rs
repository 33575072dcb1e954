//! Dense MLP with manual forward/backward where the weights are an explicit
//! argument rather than owned state. This lets a hypernetwork generate the
//! weights while the same kernels serve the directly trained baselines.
//!
//! Also houses the losses, the Adam optimizer and early stopping.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Activation applied after every hidden layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HiddenActivation {
    Relu,
}

/// Activation applied after the final affine layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputActivation {
    Identity,
    Sigmoid,
}

/// Dropout behaviour selector for a forward pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Architecture description: layer sizes from input to output, activations,
/// and the dropout rate applied to hidden activations in train mode.
#[derive(Clone, Debug)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
    pub dropout_rate: f64,
}

impl MlpSpec {
    pub fn new(
        layer_sizes: Vec<usize>,
        output_activation: OutputActivation,
        dropout_rate: f64,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::shape("MlpSpec needs at least input and output sizes"));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::shape("MlpSpec layer sizes must be positive"));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::shape("dropout_rate must lie in [0, 1)"));
        }
        Ok(MlpSpec {
            layer_sizes,
            hidden_activation: HiddenActivation::Relu,
            output_activation,
            dropout_rate,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }
}

/// Location of one layer's weight matrix and bias inside the flat vector.
/// The matrix is stored row-major with `rows` = fan-in and `cols` = fan-out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSlice {
    pub w_offset: usize,
    pub rows: usize,
    pub cols: usize,
    pub b_offset: usize,
}

impl LayerSlice {
    pub fn w_range(&self) -> std::ops::Range<usize> {
        self.w_offset..self.w_offset + self.rows * self.cols
    }

    pub fn b_range(&self) -> std::ops::Range<usize> {
        self.b_offset..self.b_offset + self.cols
    }
}

/// Map from flat parameter storage to per-layer matrices and biases.
/// Layers tile the vector in order: W1, b1, W2, b2, ...
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightLayout {
    pub layers: Vec<LayerSlice>,
    pub total_size: usize,
}

impl WeightLayout {
    /// Layout for an arbitrary stack of affine layers given (fan_in, fan_out).
    pub fn from_dims(dims: &[(usize, usize)]) -> Self {
        let mut layers = Vec::with_capacity(dims.len());
        let mut offset = 0;
        for &(rows, cols) in dims {
            let w_offset = offset;
            offset += rows * cols;
            let b_offset = offset;
            offset += cols;
            layers.push(LayerSlice { w_offset, rows, cols, b_offset });
        }
        WeightLayout { layers, total_size: offset }
    }

    pub fn for_spec(spec: &MlpSpec) -> Self {
        let dims: Vec<(usize, usize)> = spec
            .layer_sizes
            .windows(2)
            .map(|w| (w[0], w[1]))
            .collect();
        Self::from_dims(&dims)
    }
}

/// Flat parameter storage conforming to some WeightLayout.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    pub values: Vec<f64>,
}

impl WeightVector {
    pub fn zeros(len: usize) -> Self {
        WeightVector { values: vec![0.0; len] }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        WeightVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn conforms(&self, layout: &WeightLayout) -> Result<()> {
        if self.values.len() != layout.total_size {
            return Err(Error::shape(format!(
                "weight vector length {} does not match layout size {}",
                self.values.len(),
                layout.total_size
            )));
        }
        if !self.values.iter().all(|v| v.is_finite()) {
            return Err(Error::shape("weight vector contains non-finite entries"));
        }
        Ok(())
    }
}

/// Fan-in-scaled uniform initialization for ReLU stacks: matrix entries drawn
/// from U(-b, b) with b = sqrt(6 / fan_in), biases exactly zero.
pub fn init_weights(spec: &MlpSpec, seed: u64) -> WeightVector {
    let layout = WeightLayout::for_spec(spec);
    init_weights_for_layout(&layout, seed)
}

/// Same scheme for a bare layout (used for hypernet trunks whose head stack
/// is not expressible as a plain MlpSpec).
pub fn init_weights_for_layout(layout: &WeightLayout, seed: u64) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; layout.total_size];
    for layer in &layout.layers {
        let limit = (6.0 / layer.rows as f64).sqrt();
        for v in &mut values[layer.w_range()] {
            *v = rng.gen_range(-limit..limit);
        }
        // biases stay zero
    }
    WeightVector { values }
}

/// View one layer's matrix out of the flat storage.
fn layer_matrix(values: &[f64], slice: &LayerSlice) -> Array2<f64> {
    Array2::from_shape_vec(
        (slice.rows, slice.cols),
        values[slice.w_range()].to_vec(),
    )
    .expect("layout slice shape is consistent by construction")
}

fn layer_bias(values: &[f64], slice: &LayerSlice) -> Array1<f64> {
    Array1::from_vec(values[slice.b_range()].to_vec())
}

/// Everything backward needs: the input batch, per-layer pre-activations,
/// post-activations (the last one is the network output) and the dropout
/// masks actually applied (train mode only).
#[derive(Clone, Debug)]
pub struct ForwardCache {
    pub input: Array2<f64>,
    pub pre: Vec<Array2<f64>>,
    pub post: Vec<Array2<f64>>,
    pub masks: Vec<Option<Array2<f64>>>,
}

/// Run the MLP on a batch (rows = units). In train mode, hidden activations
/// are dropped out at `spec.dropout_rate` using masks derived from `seed`; in
/// eval mode dropout is the identity and the seed is ignored.
pub fn forward(
    spec: &MlpSpec,
    w: &WeightVector,
    x: &Array2<f64>,
    mode: Mode,
    seed: u64,
) -> Result<(Array2<f64>, ForwardCache)> {
    let layout = WeightLayout::for_spec(spec);
    w.conforms(&layout)?;
    if x.ncols() != spec.input_dim() {
        return Err(Error::shape(format!(
            "input has {} columns, spec expects {}",
            x.ncols(),
            spec.input_dim()
        )));
    }

    let n_layers = spec.num_layers();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pre = Vec::with_capacity(n_layers);
    let mut post = Vec::with_capacity(n_layers);
    let mut masks: Vec<Option<Array2<f64>>> = Vec::with_capacity(n_layers);

    let mut a = x.clone();
    for (l, slice) in layout.layers.iter().enumerate() {
        let wmat = layer_matrix(&w.values, slice);
        let bias = layer_bias(&w.values, slice);
        let z = a.dot(&wmat) + &bias;
        let last = l == n_layers - 1;
        let mut act = if last {
            match spec.output_activation {
                OutputActivation::Identity => z.clone(),
                OutputActivation::Sigmoid => z.mapv(|v| 1.0 / (1.0 + (-v).exp())),
            }
        } else {
            z.mapv(|v| v.max(0.0))
        };
        let mask = if !last && mode == Mode::Train && spec.dropout_rate > 0.0 {
            let keep = 1.0 - spec.dropout_rate;
            let m = Array2::from_shape_fn(act.raw_dim(), |_| {
                if rng.gen::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            });
            act = act * &m;
            Some(m)
        } else {
            None
        };
        pre.push(z);
        post.push(act.clone());
        masks.push(mask);
        a = act;
    }

    let cache = ForwardCache { input: x.clone(), pre, post, masks };
    Ok((a, cache))
}

/// Reverse-mode pass. `grad_output` is dL/d(output). Returns the gradient
/// with respect to every weight (flat, layout order) and to the input batch.
pub fn backward(
    spec: &MlpSpec,
    w: &WeightVector,
    cache: &ForwardCache,
    grad_output: &Array2<f64>,
) -> Result<(WeightVector, Array2<f64>)> {
    let layout = WeightLayout::for_spec(spec);
    w.conforms(&layout)?;
    let n_layers = spec.num_layers();
    if cache.pre.len() != n_layers || cache.post.len() != n_layers {
        return Err(Error::shape("forward cache does not match spec"));
    }
    let out = &cache.post[n_layers - 1];
    if grad_output.raw_dim() != out.raw_dim() {
        return Err(Error::shape("grad_output shape does not match cached output"));
    }

    let mut grad_w = vec![0.0; layout.total_size];

    // delta = dL/d(pre-activation of current layer)
    let mut delta = match spec.output_activation {
        OutputActivation::Identity => grad_output.clone(),
        OutputActivation::Sigmoid => grad_output * &out.mapv(|s| s * (1.0 - s)),
    };

    for l in (0..n_layers).rev() {
        let slice = &layout.layers[l];
        let a_prev = if l == 0 { &cache.input } else { &cache.post[l - 1] };
        let gw = a_prev.t().dot(&delta);
        let gb = delta.sum_axis(ndarray::Axis(0));
        grad_w[slice.w_range()].copy_from_slice(gw.as_standard_layout().as_slice().unwrap());
        grad_w[slice.b_range()].copy_from_slice(gb.as_slice().unwrap());

        let wmat = layer_matrix(&w.values, slice);
        let mut grad_a_prev = delta.dot(&wmat.t());
        if l == 0 {
            return Ok((WeightVector { values: grad_w }, grad_a_prev));
        }
        // chain through the previous hidden layer's dropout and ReLU
        if let Some(mask) = &cache.masks[l - 1] {
            grad_a_prev = grad_a_prev * mask;
        }
        let relu_gate = cache.pre[l - 1].mapv(|z| if z > 0.0 { 1.0 } else { 0.0 });
        delta = grad_a_prev * &relu_gate;
    }
    unreachable!("loop returns at l == 0");
}

/// Mean squared error over all entries; gradient wrt predictions.
pub fn mse_loss(pred: &Array2<f64>, target: &Array2<f64>) -> Result<(f64, Array2<f64>)> {
    if pred.raw_dim() != target.raw_dim() {
        return Err(Error::shape("mse_loss shape mismatch"));
    }
    let count = pred.len();
    if count == 0 {
        return Err(Error::shape("mse_loss on empty batch"));
    }
    let diff = pred - target;
    let loss = diff.mapv(|d| d * d).sum() / count as f64;
    let grad = diff.mapv(|d| 2.0 * d / count as f64);
    Ok((loss, grad))
}

const BCE_CLAMP: f64 = 1e-7;

/// Mean negative log-likelihood for probabilities against {0,1} targets.
/// Probabilities are clamped to [1e-7, 1 - 1e-7]; the gradient is taken at
/// the clamped value.
pub fn bce_loss(prob: &Array2<f64>, target: &Array2<f64>) -> Result<(f64, Array2<f64>)> {
    if prob.raw_dim() != target.raw_dim() {
        return Err(Error::shape("bce_loss shape mismatch"));
    }
    let count = prob.len();
    if count == 0 {
        return Err(Error::shape("bce_loss on empty batch"));
    }
    let mut loss = 0.0;
    let mut grad = Array2::zeros(prob.raw_dim());
    for ((g, &p_raw), &y) in grad.iter_mut().zip(prob.iter()).zip(target.iter()) {
        let p = p_raw.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
        loss -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
        *g = (-y / p + (1.0 - y) / (1.0 - p)) / count as f64;
    }
    Ok((loss / count as f64, grad))
}

/// Adam with decoupled weight decay (decay applied before the adaptive step).
#[derive(Clone, Debug)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl AdamState {
    pub fn new(n_params: usize, learning_rate: f64, weight_decay: f64) -> Self {
        AdamState {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay,
        }
    }
}

/// One optimizer step, in place on `params`.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64]) -> Result<()> {
    if params.len() != state.m.len() || grads.len() != state.m.len() {
        return Err(Error::shape("adam_step length mismatch"));
    }
    if !grads.iter().all(|g| g.is_finite()) {
        return Err(Error::shape("non-finite gradient entries in adam_step"));
    }
    state.t += 1;
    let lr = state.learning_rate;
    let (b1, b2) = (state.beta1, state.beta2);
    let bc1 = 1.0 - b1.powi(state.t as i32);
    let bc2 = 1.0 - b2.powi(state.t as i32);
    let decay = 1.0 - lr * state.weight_decay;
    for i in 0..params.len() {
        params[i] *= decay;
        let g = grads[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}

/// Whether training should go on after an early-stopping update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop,
}

/// Patience-based early stopping on validation loss. A strict improvement
/// resets the counter and snapshots the weights; training stops once the
/// counter exceeds the patience.
#[derive(Clone, Debug)]
pub struct EarlyStopController {
    pub patience: usize,
    pub best_val_loss: f64,
    pub steps_since_improvement: usize,
    pub best_weights_snapshot: Option<Vec<f64>>,
}

impl EarlyStopController {
    pub fn new(patience: usize) -> Self {
        EarlyStopController {
            patience,
            best_val_loss: f64::INFINITY,
            steps_since_improvement: 0,
            best_weights_snapshot: None,
        }
    }

    pub fn update(&mut self, val_loss: f64, current_weights: &[f64]) -> StopDecision {
        if val_loss < self.best_val_loss {
            self.best_val_loss = val_loss;
            self.steps_since_improvement = 0;
            self.best_weights_snapshot = Some(current_weights.to_vec());
            StopDecision::Continue
        } else {
            self.steps_since_improvement += 1;
            if self.steps_since_improvement > self.patience {
                StopDecision::Stop
            } else {
                StopDecision::Continue
            }
        }
    }

    /// Best weights seen so far (the exposed model after a stop).
    pub fn best_weights(&self) -> Option<&[f64]> {
        self.best_weights_snapshot.as_deref()
    }
}
