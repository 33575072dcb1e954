//! Hypernetwork: maps a learnable per-target embedding through a trunk MLP
//! to the flat weight vector of a target network. Several targets share one
//! trunk, so every gradient step taken for any target reshapes the weights
//! generated for all of them (soft weight sharing).
//!
//! Weights can be emitted in one shot, in fixed-size chunks, per target
//! layer, or through parallel output heads. Trunk matrices can be rescaled
//! by their leading singular value (spectral normalization) for stability.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::nn::{init_weights_for_layout, MlpSpec, Mode, WeightLayout, WeightVector};
use crate::seeds;
use crate::{Error, Result};

/// Index into the hypernet's embedding table (one entry per generated
/// target network, e.g. mu0 -> 0, mu1 -> 1, pi -> 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TargetId(pub usize);

/// How the trunk emits the flat target weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenerationStrategy {
    /// One trunk pass; the output head spans the whole weight vector.
    GenerateOnce,
    /// `n_chunks` passes, each conditioned on (e_t, chunk embedding), all
    /// emitting a fixed chunk of ceil(total/n) weights; the concatenation is
    /// truncated to the target size, so trailing outputs go unused.
    ChunkWise { n_chunks: usize },
    /// One pass per target layer conditioned on (e_t, layer embedding); the
    /// head is sized for the largest layer block and truncated per layer.
    LayerWise,
    /// One trunk pass feeding `n_heads` parallel affine heads whose
    /// concatenated outputs form the weight vector.
    SplitHead { n_heads: usize },
}

impl GenerationStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            GenerationStrategy::GenerateOnce => "generate_once",
            GenerationStrategy::ChunkWise { .. } => "chunk_wise",
            GenerationStrategy::LayerWise => "layer_wise",
            GenerationStrategy::SplitHead { .. } => "split_head",
        }
    }
}

/// Deterministic flat layout for a target architecture.
pub fn build_layout(target_spec: &MlpSpec) -> WeightLayout {
    WeightLayout::for_spec(target_spec)
}

/// Spectral-norm state for one trunk matrix: the leading left (`v`, fan-in
/// side) and right (`u`, fan-out side) singular-vector estimates.
#[derive(Clone, Debug)]
struct SnState {
    v: Array1<f64>,
    u: Array1<f64>,
}

/// Embedding table plus trunk network with weights psi. `generate` turns an
/// embedding into target-network weights; `backprop_generated` routes a
/// gradient over those weights back onto psi and the embeddings.
#[derive(Clone, Debug)]
pub struct Hypernet {
    pub embeddings: Vec<Vec<f64>>,
    /// Chunk or layer embeddings (same dimension as e_t), empty otherwise.
    pub aux_embeddings: Vec<Vec<f64>>,
    pub embedding_size: usize,
    pub strategy: GenerationStrategy,
    pub dropout_rate: f64,
    pub spectral_norm_enabled: bool,
    pub target_spec: MlpSpec,
    pub target_layout: WeightLayout,
    pub trunk_layout: WeightLayout,
    pub trunk_weights: WeightVector,
    n_body_layers: usize,
    sn_states: Vec<SnState>,
}

/// Per-pass trunk activations recorded during generate.
#[derive(Clone, Debug)]
struct PassCache {
    input: Array1<f64>,
    pre: Vec<Array1<f64>>,
    post: Vec<Array1<f64>>,
    masks: Vec<Option<Array1<f64>>>,
}

/// Everything backprop_generated needs from the matching generate call.
/// Valid only while the hypernet's parameters are unchanged.
#[derive(Clone, Debug)]
pub struct GenCache {
    pub target: TargetId,
    sigmas: Vec<f64>,
    passes: Vec<PassCache>,
}

impl GenCache {
    /// ReLU gate pattern of every trunk pass; finite-difference probes use
    /// this to detect kink crossings.
    pub fn gate_signature(&self) -> Vec<bool> {
        self.passes
            .iter()
            .flat_map(|p| p.pre.iter().flat_map(|z| z.iter().map(|&v| v > 0.0)))
            .collect()
    }
}

/// Gradients of a scalar loss with respect to the hypernet's trainable
/// state, mirroring the [trunk | embeddings | aux] flat order.
#[derive(Clone, Debug)]
pub struct HypernetGrads {
    pub trunk: Vec<f64>,
    pub embeddings: Vec<Vec<f64>>,
    pub aux: Vec<Vec<f64>>,
}

impl HypernetGrads {
    pub fn add(&mut self, other: &HypernetGrads) {
        for (a, b) in self.trunk.iter_mut().zip(&other.trunk) {
            *a += b;
        }
        for (row_a, row_b) in self.embeddings.iter_mut().zip(&other.embeddings) {
            for (a, b) in row_a.iter_mut().zip(row_b) {
                *a += b;
            }
        }
        for (row_a, row_b) in self.aux.iter_mut().zip(&other.aux) {
            for (a, b) in row_a.iter_mut().zip(row_b) {
                *a += b;
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        for g in self.trunk.iter_mut() {
            *g *= c;
        }
        for row in self.embeddings.iter_mut().chain(self.aux.iter_mut()) {
            for g in row.iter_mut() {
                *g *= c;
            }
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = self.trunk.clone();
        for row in self.embeddings.iter().chain(self.aux.iter()) {
            out.extend_from_slice(row);
        }
        out
    }
}

impl Hypernet {
    pub fn new(
        target_spec: MlpSpec,
        n_targets: usize,
        embedding_size: usize,
        strategy: GenerationStrategy,
        dropout_rate: f64,
        spectral_norm_enabled: bool,
        trunk_hidden: &[usize],
        seed: u64,
    ) -> Result<Self> {
        if n_targets == 0 {
            return Err(Error::shape("hypernet needs at least one target"));
        }
        if embedding_size == 0 {
            return Err(Error::shape("embedding_size must be positive"));
        }
        if trunk_hidden.is_empty() {
            return Err(Error::shape("trunk needs at least one hidden layer"));
        }
        let target_layout = build_layout(&target_spec);
        let total = target_layout.total_size;

        let (trunk_input_dim, head_dims, n_aux) = match strategy {
            GenerationStrategy::GenerateOnce => (embedding_size, vec![total], 0),
            GenerationStrategy::ChunkWise { n_chunks } => {
                if n_chunks < 2 {
                    return Err(Error::shape("chunk_wise needs n_chunks >= 2"));
                }
                let chunk = total.div_ceil(n_chunks);
                if chunk == 0 {
                    return Err(Error::shape("chunk size is zero"));
                }
                (2 * embedding_size, vec![chunk], n_chunks)
            }
            GenerationStrategy::LayerWise => {
                let largest = target_layout
                    .layers
                    .iter()
                    .map(|l| l.rows * l.cols + l.cols)
                    .max()
                    .unwrap();
                (2 * embedding_size, vec![largest], target_layout.layers.len())
            }
            GenerationStrategy::SplitHead { n_heads } => {
                if n_heads < 2 {
                    return Err(Error::shape("split_head needs n_heads >= 2"));
                }
                if n_heads > total {
                    return Err(Error::shape("split_head has more heads than weights"));
                }
                let nominal = total.div_ceil(n_heads);
                let mut dims = vec![nominal; n_heads - 1];
                // the pad implied by the even split is truncated off the last head
                dims.push(total - nominal * (n_heads - 1));
                (embedding_size, dims, 0)
            }
        };

        let mut trunk_dims: Vec<(usize, usize)> = Vec::new();
        let mut prev = trunk_input_dim;
        for &h in trunk_hidden {
            trunk_dims.push((prev, h));
            prev = h;
        }
        for &hd in &head_dims {
            trunk_dims.push((prev, hd));
        }
        let trunk_layout = WeightLayout::from_dims(&trunk_dims);
        let trunk_weights = init_weights_for_layout(&trunk_layout, seeds::mix(seed, 1));

        let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, 2));
        let mut draw_table = |n: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| (0..embedding_size).map(|_| rng.sample(StandardNormal)).collect())
                .collect()
        };
        let embeddings = draw_table(n_targets);
        let aux_embeddings = draw_table(n_aux);

        let mut sn_rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, 3));
        let sn_states = trunk_layout
            .layers
            .iter()
            .map(|l| {
                let mut u = Array1::from_shape_fn(l.cols, |_| sn_rng.sample::<f64, _>(StandardNormal));
                let norm = u.dot(&u).sqrt();
                if norm > 0.0 {
                    u /= norm;
                }
                SnState { v: Array1::zeros(l.rows), u }
            })
            .collect();

        let mut h = Hypernet {
            embeddings,
            aux_embeddings,
            embedding_size,
            strategy,
            dropout_rate,
            spectral_norm_enabled,
            target_spec,
            target_layout,
            trunk_layout,
            trunk_weights,
            n_body_layers: trunk_hidden.len(),
            sn_states,
        };
        // settle u, v so the very first sigma estimate is positive
        h.refresh_spectral_state();
        Ok(h)
    }

    pub fn n_targets(&self) -> usize {
        self.embeddings.len()
    }

    fn n_heads(&self) -> usize {
        self.trunk_layout.layers.len() - self.n_body_layers
    }

    /// One power-iteration step per trunk matrix, updating the persisted
    /// u, v estimates in place. Called once per training step.
    pub fn refresh_spectral_state(&mut self) {
        for (slice, state) in self.trunk_layout.layers.iter().zip(self.sn_states.iter_mut()) {
            let w = mat_view(&self.trunk_weights.values, slice);
            power_iteration_step(&w, &mut state.v, &mut state.u);
        }
    }

    /// Leading-singular-value estimates from the frozen u, v state; 1.0 when
    /// normalization is disabled or the estimate degenerates.
    fn current_sigmas(&self) -> Vec<f64> {
        self.trunk_layout
            .layers
            .iter()
            .zip(self.sn_states.iter())
            .map(|(slice, state)| {
                if !self.spectral_norm_enabled {
                    return 1.0;
                }
                let w = mat_view(&self.trunk_weights.values, slice);
                let sigma = state.v.dot(&w.dot(&state.u));
                if sigma.abs() < 1e-12 {
                    1.0
                } else {
                    sigma
                }
            })
            .collect()
    }

    /// Trunk inputs per pass: the target embedding alone, or concatenated
    /// with the pass's chunk/layer embedding.
    fn pass_inputs(&self, t: TargetId) -> Vec<Array1<f64>> {
        let e = &self.embeddings[t.0];
        match self.strategy {
            GenerationStrategy::GenerateOnce | GenerationStrategy::SplitHead { .. } => {
                vec![Array1::from_vec(e.clone())]
            }
            GenerationStrategy::ChunkWise { .. } | GenerationStrategy::LayerWise => self
                .aux_embeddings
                .iter()
                .map(|aux| {
                    let mut v = Vec::with_capacity(2 * self.embedding_size);
                    v.extend_from_slice(e);
                    v.extend_from_slice(aux);
                    Array1::from_vec(v)
                })
                .collect(),
        }
    }

    /// Flat destination range of pass `p`'s used outputs.
    fn pass_dest(&self, p: usize) -> std::ops::Range<usize> {
        let total = self.target_layout.total_size;
        match self.strategy {
            GenerationStrategy::GenerateOnce | GenerationStrategy::SplitHead { .. } => 0..total,
            GenerationStrategy::ChunkWise { n_chunks } => {
                let chunk = total.div_ceil(n_chunks);
                let start = p * chunk;
                start..((start + chunk).min(total))
            }
            GenerationStrategy::LayerWise => {
                let l = &self.target_layout.layers[p];
                l.w_offset..l.b_offset + l.cols
            }
        }
    }

    /// Generate the target's weights. Train mode applies dropout inside the
    /// trunk using masks derived from `seed`; eval mode is deterministic.
    /// Pure: the persisted spectral state is read but never updated here.
    pub fn generate(&self, t: TargetId, mode: Mode, seed: u64) -> Result<(WeightVector, GenCache)> {
        if t.0 >= self.n_targets() {
            return Err(Error::shape(format!("target id {} out of range", t.0)));
        }
        let sigmas = self.current_sigmas();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = self.target_layout.total_size;
        let mut w = vec![0.0; total];
        let mut passes = Vec::new();

        for (p, input) in self.pass_inputs(t).into_iter().enumerate() {
            let pass = self.body_forward(input, &sigmas, mode, &mut rng);
            let a_last = pass.post.last().unwrap_or(&pass.input);
            match self.strategy {
                GenerationStrategy::SplitHead { .. } => {
                    let mut off = 0;
                    for hd in 0..self.n_heads() {
                        let mi = self.n_body_layers + hd;
                        let out = self.head_forward(a_last, mi, sigmas[mi]);
                        w[off..off + out.len()].copy_from_slice(out.as_slice().unwrap());
                        off += out.len();
                    }
                }
                _ => {
                    let mi = self.n_body_layers;
                    let out = self.head_forward(a_last, mi, sigmas[mi]);
                    let dest = self.pass_dest(p);
                    let used = dest.len();
                    w[dest].copy_from_slice(&out.as_slice().unwrap()[..used]);
                }
            }
            passes.push(pass);
        }

        let cache = GenCache { target: t, sigmas, passes };
        Ok((WeightVector::from_values(w), cache))
    }

    /// Weights for prediction-time use.
    pub fn generate_eval(&self, t: TargetId) -> Result<WeightVector> {
        Ok(self.generate(t, Mode::Eval, 0)?.0)
    }

    fn body_forward(
        &self,
        input: Array1<f64>,
        sigmas: &[f64],
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> PassCache {
        let nb = self.n_body_layers;
        let mut pre = Vec::with_capacity(nb);
        let mut post = Vec::with_capacity(nb);
        let mut masks: Vec<Option<Array1<f64>>> = Vec::with_capacity(nb);
        let mut a = input.clone();
        for l in 0..nb {
            let slice = &self.trunk_layout.layers[l];
            let wmat = mat_view(&self.trunk_weights.values, slice);
            let bias = &self.trunk_weights.values[slice.b_range()];
            let mut z = a.dot(&wmat);
            z.mapv_inplace(|v| v / sigmas[l]);
            for (zi, &b) in z.iter_mut().zip(bias) {
                *zi += b;
            }
            let mut act = z.mapv(|v| v.max(0.0));
            let mask = if mode == Mode::Train && self.dropout_rate > 0.0 {
                let keep = 1.0 - self.dropout_rate;
                let m = Array1::from_shape_fn(act.len(), |_| {
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
        PassCache { input, pre, post, masks }
    }

    fn head_forward(&self, a: &Array1<f64>, mi: usize, sigma: f64) -> Array1<f64> {
        let slice = &self.trunk_layout.layers[mi];
        let wmat = mat_view(&self.trunk_weights.values, slice);
        let bias = &self.trunk_weights.values[slice.b_range()];
        let mut out = a.dot(&wmat);
        out.mapv_inplace(|v| v / sigma);
        for (oi, &b) in out.iter_mut().zip(bias) {
            *oi += b;
        }
        out
    }

    /// Route dL/d(generated weights) back to the trunk weights and the
    /// embeddings involved in the generate call that produced `cache`.
    pub fn backprop_generated(&self, cache: &GenCache, grad_w: &[f64]) -> Result<HypernetGrads> {
        let total = self.target_layout.total_size;
        if grad_w.len() != total {
            return Err(Error::shape(format!(
                "grad_w length {} does not match target size {}",
                grad_w.len(),
                total
            )));
        }
        let expected_passes = match self.strategy {
            GenerationStrategy::GenerateOnce | GenerationStrategy::SplitHead { .. } => 1,
            GenerationStrategy::ChunkWise { n_chunks } => n_chunks,
            GenerationStrategy::LayerWise => self.target_layout.layers.len(),
        };
        if cache.passes.len() != expected_passes {
            return Err(Error::shape("gen cache does not match strategy"));
        }

        // accumulated in normalized coordinates; the spectral-norm chain is
        // applied per matrix once at the end
        let mut g_trunk = vec![0.0; self.trunk_layout.total_size];
        let mut g_emb = vec![0.0; self.embedding_size];
        let mut g_aux: Vec<Vec<f64>> = self
            .aux_embeddings
            .iter()
            .map(|_| vec![0.0; self.embedding_size])
            .collect();

        for (p, pass) in cache.passes.iter().enumerate() {
            let a_last = pass.post.last().unwrap_or(&pass.input);
            // head deltas for this pass
            let mut grad_a = Array1::<f64>::zeros(a_last.len());
            match self.strategy {
                GenerationStrategy::SplitHead { .. } => {
                    let mut off = 0;
                    for hd in 0..self.n_heads() {
                        let mi = self.n_body_layers + hd;
                        let slice = &self.trunk_layout.layers[mi];
                        let delta = Array1::from_vec(grad_w[off..off + slice.cols].to_vec());
                        off += slice.cols;
                        accumulate_affine(
                            &mut g_trunk,
                            slice,
                            a_last,
                            &delta,
                            &mat_view(&self.trunk_weights.values, slice),
                            cache.sigmas[mi],
                            &mut grad_a,
                        );
                    }
                }
                _ => {
                    let mi = self.n_body_layers;
                    let slice = &self.trunk_layout.layers[mi];
                    let dest = self.pass_dest(p);
                    let mut delta = Array1::<f64>::zeros(slice.cols);
                    // outputs past the destination were truncated away and
                    // contribute nothing
                    for (d, g) in delta.iter_mut().zip(grad_w[dest].iter()) {
                        *d = *g;
                    }
                    accumulate_affine(
                        &mut g_trunk,
                        slice,
                        a_last,
                        &delta,
                        &mat_view(&self.trunk_weights.values, slice),
                        cache.sigmas[mi],
                        &mut grad_a,
                    );
                }
            }

            // back through the trunk body
            let mut grad_act = grad_a;
            for l in (0..self.n_body_layers).rev() {
                if let Some(mask) = &pass.masks[l] {
                    grad_act = grad_act * mask;
                }
                let gate = pass.pre[l].mapv(|z| if z > 0.0 { 1.0 } else { 0.0 });
                let delta = grad_act * &gate;
                let slice = &self.trunk_layout.layers[l];
                let a_prev = if l == 0 { &pass.input } else { &pass.post[l - 1] };
                let mut grad_prev = Array1::<f64>::zeros(a_prev.len());
                accumulate_affine(
                    &mut g_trunk,
                    slice,
                    a_prev,
                    &delta,
                    &mat_view(&self.trunk_weights.values, slice),
                    cache.sigmas[l],
                    &mut grad_prev,
                );
                grad_act = grad_prev;
            }

            // split the trunk-input gradient into e_t and aux parts
            for (g, gi) in g_emb.iter_mut().zip(grad_act.iter()) {
                *g += gi;
            }
            if grad_act.len() > self.embedding_size {
                for (g, gi) in g_aux[p]
                    .iter_mut()
                    .zip(grad_act.iter().skip(self.embedding_size))
                {
                    *g += gi;
                }
            }
        }

        // spectral-norm chain: with u, v frozen, W' = W / sigma(W) and
        // sigma = v^T W u, so dL/dW = G/sigma - (<G, W>/sigma^2) v u^T
        if self.spectral_norm_enabled {
            for (mi, slice) in self.trunk_layout.layers.iter().enumerate() {
                let sigma = cache.sigmas[mi];
                let state = &self.sn_states[mi];
                let w = &self.trunk_weights.values[slice.w_range()];
                let g = &mut g_trunk[slice.w_range()];
                let inner: f64 = g.iter().zip(w).map(|(gi, wi)| gi * wi).sum();
                let coef = inner / (sigma * sigma);
                for r in 0..slice.rows {
                    for c in 0..slice.cols {
                        let i = r * slice.cols + c;
                        g[i] = g[i] / sigma - coef * state.v[r] * state.u[c];
                    }
                }
            }
        }

        let mut embeddings: Vec<Vec<f64>> = self
            .embeddings
            .iter()
            .map(|_| vec![0.0; self.embedding_size])
            .collect();
        embeddings[cache.target.0] = g_emb;
        Ok(HypernetGrads { trunk: g_trunk, embeddings, aux: g_aux })
    }

    /// Number of trainable scalars: trunk weights plus every embedding.
    pub fn n_params(&self) -> usize {
        self.trunk_layout.total_size
            + (self.embeddings.len() + self.aux_embeddings.len()) * self.embedding_size
    }

    /// Flat view [trunk | embeddings | aux] used by the optimizer.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut p = self.trunk_weights.values.clone();
        for row in self.embeddings.iter().chain(self.aux_embeddings.iter()) {
            p.extend_from_slice(row);
        }
        p
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::shape("flat parameter length mismatch"));
        }
        let nt = self.trunk_layout.total_size;
        self.trunk_weights.values.copy_from_slice(&params[..nt]);
        let mut off = nt;
        for row in self.embeddings.iter_mut().chain(self.aux_embeddings.iter_mut()) {
            row.copy_from_slice(&params[off..off + self.embedding_size]);
            off += self.embedding_size;
        }
        Ok(())
    }

    pub fn zero_grads(&self) -> HypernetGrads {
        HypernetGrads {
            trunk: vec![0.0; self.trunk_layout.total_size],
            embeddings: self.embeddings.iter().map(|_| vec![0.0; self.embedding_size]).collect(),
            aux: self.aux_embeddings.iter().map(|_| vec![0.0; self.embedding_size]).collect(),
        }
    }
}

/// Gradient of one affine layer in normalized coordinates:
/// accumulates the outer product a_prev x delta and the bias delta into the
/// flat trunk gradient, and adds W' delta into `grad_prev`.
fn accumulate_affine(
    g_trunk: &mut [f64],
    slice: &crate::nn::LayerSlice,
    a_prev: &Array1<f64>,
    delta: &Array1<f64>,
    w_raw: &ndarray::ArrayView2<f64>,
    sigma: f64,
    grad_prev: &mut Array1<f64>,
) {
    let cols = slice.cols;
    let gw = &mut g_trunk[slice.w_range()];
    for (r, &av) in a_prev.iter().enumerate() {
        if av == 0.0 {
            continue;
        }
        let row = &mut gw[r * cols..(r + 1) * cols];
        for (gi, &dv) in row.iter_mut().zip(delta.iter()) {
            *gi += av * dv;
        }
    }
    for (gb, &dv) in g_trunk[slice.b_range()].iter_mut().zip(delta.iter()) {
        *gb += dv;
    }
    let back = w_raw.dot(delta);
    for (gp, bv) in grad_prev.iter_mut().zip(back.iter()) {
        *gp += bv / sigma;
    }
}

fn mat_view<'a>(values: &'a [f64], slice: &crate::nn::LayerSlice) -> ndarray::ArrayView2<'a, f64> {
    ndarray::ArrayView2::from_shape((slice.rows, slice.cols), &values[slice.w_range()])
        .expect("layout slice shape is consistent by construction")
}

/// One power-iteration update: v <- normalize(W u), u <- normalize(W^T v).
/// Returns the refreshed estimate sigma = v^T W u (0 for a zero matrix).
fn power_iteration_step(w: &ndarray::ArrayView2<f64>, v: &mut Array1<f64>, u: &mut Array1<f64>) -> f64 {
    let wu = w.dot(u);
    let n = wu.dot(&wu).sqrt();
    if n > 0.0 {
        *v = wu / n;
    }
    let wtv = w.t().dot(v);
    let n = wtv.dot(&wtv).sqrt();
    if n > 0.0 {
        *u = wtv / n;
    }
    v.dot(&w.dot(u))
}

/// Divide a matrix by the power-iteration estimate of its leading singular
/// value. `u` (fan-out side) and `v` (fan-in side) persist across calls so
/// repeated use warm-starts. A zero matrix is returned unchanged with sigma
/// treated as 1.
pub fn spectral_normalize(
    matrix: &Array2<f64>,
    n_power_iterations: usize,
    u: &mut Array1<f64>,
    v: &mut Array1<f64>,
) -> (Array2<f64>, f64) {
    assert!(n_power_iterations >= 1, "need at least one power iteration");
    let mut sigma = 0.0;
    for _ in 0..n_power_iterations {
        sigma = power_iteration_step(&matrix.view(), v, u);
    }
    if sigma.abs() < 1e-12 {
        (matrix.clone(), 1.0)
    } else {
        (matrix / sigma, sigma)
    }
}
