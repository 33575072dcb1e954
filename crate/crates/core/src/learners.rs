//! ITE learners: S, T, DR, RA and TARNet, each trainable the classic way
//! (baseline) or with a hypernetwork generating the component networks'
//! weights from shared trunk weights (hyper). Architectures, batch schedule
//! and optimizer constants are identical across the two modes.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{self, CausalDataset, OutcomeType};
use crate::hypernet::{GenerationStrategy, Hypernet, HypernetGrads, TargetId};
use crate::nn::{
    self, adam_step, AdamState, EarlyStopController, MlpSpec, Mode, OutputActivation,
    StopDecision, WeightLayout, WeightVector,
};
use crate::seeds;
use crate::{Error, Result};

pub const DEFAULT_CLIP_EPS: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    SLearner,
    TLearner,
    DrLearner,
    RaLearner,
    Tarnet,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::SLearner => "s_learner",
            Kind::TLearner => "t_learner",
            Kind::DrLearner => "dr_learner",
            Kind::RaLearner => "ra_learner",
            Kind::Tarnet => "tarnet",
        }
    }

    /// Two-step learners regress a pseudo-outcome in a second stage.
    pub fn is_direct(&self) -> bool {
        matches!(self, Kind::DrLearner | Kind::RaLearner)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Baseline,
    Hyper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LearnerKind {
    pub kind: Kind,
    pub mode: ModeKind,
}

impl LearnerKind {
    pub fn new(kind: Kind, mode: ModeKind) -> Self {
        LearnerKind { kind, mode }
    }

    pub fn label(&self) -> String {
        match self.mode {
            ModeKind::Baseline => self.kind.name().to_string(),
            ModeKind::Hyper => format!("hyper_{}", self.kind.name()),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (mode, rest) = match s.strip_prefix("hyper_") {
            Some(rest) => (ModeKind::Hyper, rest),
            None => (ModeKind::Baseline, s),
        };
        let kind = match rest {
            "s_learner" => Kind::SLearner,
            "t_learner" => Kind::TLearner,
            "dr_learner" => Kind::DrLearner,
            "ra_learner" => Kind::RaLearner,
            "tarnet" => Kind::Tarnet,
            _ => return Err(Error::config(format!("unknown learner '{s}'"))),
        };
        Ok(LearnerKind { kind, mode })
    }
}

/// Default embedding dimension per learner family.
pub fn default_embedding_size(kind: Kind) -> usize {
    match kind {
        Kind::SLearner => 1,
        Kind::TLearner => 8,
        Kind::Tarnet => 8,
        Kind::RaLearner => 8,
        Kind::DrLearner => 16,
    }
}

/// Loss applied to a component network's output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    Mse,
    Bce,
}

fn apply_loss(kind: LossKind, pred: &Array2<f64>, target: &Array2<f64>) -> Result<(f64, Array2<f64>)> {
    match kind {
        LossKind::Mse => nn::mse_loss(pred, target),
        LossKind::Bce => nn::bce_loss(pred, target),
    }
}

/// Everything a training run needs beyond the data. Defaults follow the
/// reference protocol; `max_steps` is a safety cap on weight updates.
#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub val_frac: f64,
    pub max_steps: usize,
    pub hidden: Vec<usize>,
    pub trunk_hidden: Vec<usize>,
    pub strategy: GenerationStrategy,
    pub embedding_size: Option<usize>,
    pub hypernet_dropout: f64,
    pub spectral_norm: bool,
    pub folds: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            weight_decay: 1e-4,
            batch_size: 1024,
            patience: 50,
            val_frac: 0.30,
            max_steps: 10_000,
            hidden: vec![100, 100],
            trunk_hidden: vec![100, 100],
            strategy: GenerationStrategy::GenerateOnce,
            embedding_size: None,
            hypernet_dropout: 0.05,
            spectral_norm: true,
            folds: 5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::config("learning_rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be positive"));
        }
        if !(0.0..1.0).contains(&self.val_frac) || self.val_frac == 0.0 {
            return Err(Error::config("val_frac must lie in (0, 1)"));
        }
        if self.hidden.is_empty() || self.trunk_hidden.is_empty() {
            return Err(Error::config("hidden layer lists must be nonempty"));
        }
        if self.max_steps == 0 {
            return Err(Error::config("max_steps must be positive"));
        }
        if self.folds < 2 {
            return Err(Error::config("folds must be at least 2"));
        }
        Ok(())
    }

    pub fn embedding_for(&self, kind: Kind) -> usize {
        self.embedding_size.unwrap_or_else(|| default_embedding_size(kind))
    }
}

/// Validation loss after every weight update, and how the run ended.
#[derive(Clone, Debug)]
pub struct TrainTrace {
    pub val_losses: Vec<f64>,
    pub stopped_early: bool,
}

#[derive(Clone, Debug)]
pub struct NamedTrace {
    pub name: String,
    pub val_losses: Vec<f64>,
}

/// Anything the generic training loop can optimize: exposes flat parameters,
/// a minibatch loss gradient and a validation loss.
pub trait TrainableModel {
    fn n_params(&self) -> usize;
    fn params(&self) -> Vec<f64>;
    fn set_params(&mut self, p: &[f64]) -> Result<()>;
    fn train_len(&self) -> usize;
    /// Hook invoked once before each gradient computation (spectral-norm
    /// state refresh for hypernet-backed models).
    fn prepare_step(&mut self) {}
    /// Loss and gradient on the given local training rows.
    fn batch_grad(&mut self, rows: &[usize], seed: u64) -> Result<(f64, Vec<f64>)>;
    fn val_loss(&self) -> Result<f64>;
}

/// Minibatch Adam with per-step validation, early stopping and best-weight
/// restoration. The same loop trains every learner in both modes.
pub fn run_training<M: TrainableModel>(
    model: &mut M,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainTrace> {
    let n = model.train_len();
    if n == 0 {
        return Err(Error::data("empty training set"));
    }
    let mut adam = AdamState::new(model.n_params(), cfg.learning_rate, cfg.weight_decay);
    let mut controller = EarlyStopController::new(cfg.patience);
    let mut params = model.params();
    let mut order: Vec<usize> = (0..n).collect();
    let mut order_rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, 90));
    let mut val_losses = Vec::new();
    let mut stopped_early = false;
    let mut step = 0usize;

    'training: loop {
        data::shuffle(&mut order, &mut order_rng);
        for batch in order.chunks(cfg.batch_size) {
            step += 1;
            model.prepare_step();
            let (loss, grads) = model.batch_grad(batch, seeds::mix(seed, 1_000_000 + step as u64))?;
            if !loss.is_finite() {
                return Err(Error::data(format!("non-finite training loss at step {step}")));
            }
            adam_step(&mut adam, &mut params, &grads)?;
            model.set_params(&params)?;
            let vl = model.val_loss()?;
            if !vl.is_finite() {
                return Err(Error::data(format!("non-finite validation loss at step {step}")));
            }
            val_losses.push(vl);
            if controller.update(vl, &params) == StopDecision::Stop {
                stopped_early = true;
                break 'training;
            }
            if step >= cfg.max_steps {
                break 'training;
            }
        }
    }

    if let Some(best) = controller.best_weights() {
        let best = best.to_vec();
        model.set_params(&best)?;
    }
    Ok(TrainTrace { val_losses, stopped_early })
}

fn gather(x: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), x.ncols()), |(r, c)| x[[rows[r], c]])
}

fn col(vals: &[f64], rows: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), 1), |(r, _)| vals[rows[r]])
}

fn full_col(vals: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((vals.len(), 1), vals.to_vec()).unwrap()
}

/// A single directly trained MLP regressor/classifier.
pub struct RegressorModel {
    pub spec: MlpSpec,
    pub weights: WeightVector,
    loss: LossKind,
    x_train: Array2<f64>,
    y_train: Vec<f64>,
    x_val: Array2<f64>,
    y_val: Array2<f64>,
}

impl RegressorModel {
    pub fn new(
        spec: MlpSpec,
        loss: LossKind,
        x_train: Array2<f64>,
        y_train: Vec<f64>,
        x_val: Array2<f64>,
        y_val: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if x_train.nrows() != y_train.len() || x_val.nrows() != y_val.len() {
            return Err(Error::shape("regressor rows and labels disagree"));
        }
        if x_val.nrows() == 0 {
            return Err(Error::data("regressor needs a nonempty validation set"));
        }
        let weights = nn::init_weights(&spec, seeds::mix(seed, 7));
        Ok(RegressorModel {
            spec,
            weights,
            loss,
            x_train,
            y_train,
            x_val,
            y_val: full_col(&y_val),
        })
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        let (out, _) = nn::forward(&self.spec, &self.weights, x, Mode::Eval, 0)?;
        Ok(out.column(0).to_vec())
    }
}

impl TrainableModel for RegressorModel {
    fn n_params(&self) -> usize {
        self.weights.len()
    }

    fn params(&self) -> Vec<f64> {
        self.weights.values.clone()
    }

    fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.weights.len() {
            return Err(Error::shape("parameter length mismatch"));
        }
        self.weights.values.copy_from_slice(p);
        Ok(())
    }

    fn train_len(&self) -> usize {
        self.y_train.len()
    }

    fn batch_grad(&mut self, rows: &[usize], seed: u64) -> Result<(f64, Vec<f64>)> {
        let x = gather(&self.x_train, rows);
        let y = col(&self.y_train, rows);
        let (out, cache) = nn::forward(&self.spec, &self.weights, &x, Mode::Train, seed)?;
        let (loss, grad_out) = apply_loss(self.loss, &out, &y)?;
        let (grad_w, _) = nn::backward(&self.spec, &self.weights, &cache, &grad_out)?;
        Ok((loss, grad_w.values))
    }

    fn val_loss(&self) -> Result<f64> {
        let (out, _) = nn::forward(&self.spec, &self.weights, &self.x_val, Mode::Eval, 0)?;
        Ok(apply_loss(self.loss, &out, &self.y_val)?.0)
    }
}

/// One generated component in a multi-task hypernet run: which embedding it
/// uses, which rows belong to it, and how its output is scored.
pub struct TaskDef {
    pub name: &'static str,
    pub target: TargetId,
    pub output: OutputActivation,
    pub loss: LossKind,
    /// Local training-row indices this component trains on.
    pub train_rows: Vec<usize>,
    /// Local validation-row indices it is scored on.
    pub val_rows: Vec<usize>,
    /// Labels aligned with the full training/validation matrices.
    pub labels_train: Vec<f64>,
    pub labels_val: Vec<f64>,
}

struct Task {
    spec: MlpSpec,
    target: TargetId,
    loss: LossKind,
    member: Vec<bool>,
    val_rows: Vec<usize>,
    labels_train: Vec<f64>,
    labels_val: Vec<f64>,
}

/// Hypernet plus the tasks it generates weights for. Each minibatch is
/// routed per-row to its component; the component losses are summed and one
/// optimizer step updates trunk weights and embeddings together.
pub struct MultiTaskModel {
    hypernet: Hypernet,
    tasks: Vec<Task>,
    x_train: Array2<f64>,
    x_val: Array2<f64>,
}

impl MultiTaskModel {
    pub fn new(
        target_sizes: Vec<usize>,
        x_train: Array2<f64>,
        x_val: Array2<f64>,
        defs: Vec<TaskDef>,
        embedding_size: usize,
        cfg: &TrainConfig,
        seed: u64,
    ) -> Result<Self> {
        if defs.is_empty() {
            return Err(Error::shape("multi-task model needs at least one task"));
        }
        let n_targets = defs.iter().map(|d| d.target.0).max().unwrap() + 1;
        let layout_spec = MlpSpec::new(target_sizes.clone(), OutputActivation::Identity, 0.0)?;
        let hypernet = Hypernet::new(
            layout_spec,
            n_targets,
            embedding_size,
            cfg.strategy,
            cfg.hypernet_dropout,
            cfg.spectral_norm,
            &cfg.trunk_hidden,
            seeds::mix(seed, 8),
        )?;
        let n_train = x_train.nrows();
        let tasks = defs
            .into_iter()
            .map(|d| {
                if d.labels_train.len() != n_train || d.labels_val.len() != x_val.nrows() {
                    return Err(Error::shape("task labels must align with the data matrices"));
                }
                if d.val_rows.is_empty() {
                    return Err(Error::data(format!("task {} has no validation rows", d.name)));
                }
                let mut member = vec![false; n_train];
                for &r in &d.train_rows {
                    member[r] = true;
                }
                Ok(Task {
                    spec: MlpSpec::new(target_sizes.clone(), d.output, 0.0)?,
                    target: d.target,
                    loss: d.loss,
                    member,
                    val_rows: d.val_rows,
                    labels_train: d.labels_train,
                    labels_val: d.labels_val,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiTaskModel { hypernet, tasks, x_train, x_val })
    }

    pub fn hypernet(&self) -> &Hypernet {
        &self.hypernet
    }

    pub fn into_hypernet(self) -> Hypernet {
        self.hypernet
    }

    /// Generated-weight prediction for one task on new inputs.
    pub fn predict_task(&self, task_idx: usize, x: &Array2<f64>) -> Result<Vec<f64>> {
        let task = &self.tasks[task_idx];
        let w = self.hypernet.generate_eval(task.target)?;
        let (out, _) = nn::forward(&task.spec, &w, x, Mode::Eval, 0)?;
        Ok(out.column(0).to_vec())
    }
}

impl TrainableModel for MultiTaskModel {
    fn n_params(&self) -> usize {
        self.hypernet.n_params()
    }

    fn params(&self) -> Vec<f64> {
        self.hypernet.flat_params()
    }

    fn set_params(&mut self, p: &[f64]) -> Result<()> {
        self.hypernet.set_flat_params(p)
    }

    fn train_len(&self) -> usize {
        self.x_train.nrows()
    }

    fn prepare_step(&mut self) {
        if self.hypernet.spectral_norm_enabled {
            self.hypernet.refresh_spectral_state();
        }
    }

    fn batch_grad(&mut self, rows: &[usize], seed: u64) -> Result<(f64, Vec<f64>)> {
        let mut total = 0.0;
        let mut grads: Option<HypernetGrads> = None;
        for (ti, task) in self.tasks.iter().enumerate() {
            let task_rows: Vec<usize> = rows.iter().copied().filter(|&r| task.member[r]).collect();
            if task_rows.is_empty() {
                continue;
            }
            let (w, gen_cache) =
                self.hypernet
                    .generate(task.target, Mode::Train, seeds::mix(seed, 100 + ti as u64))?;
            let x = gather(&self.x_train, &task_rows);
            let y = col(&task.labels_train, &task_rows);
            let (out, cache) = nn::forward(&task.spec, &w, &x, Mode::Eval, 0)?;
            let (loss, grad_out) = apply_loss(task.loss, &out, &y)?;
            let (grad_w, _) = nn::backward(&task.spec, &w, &cache, &grad_out)?;
            let task_grads = self.hypernet.backprop_generated(&gen_cache, &grad_w.values)?;
            total += loss;
            match &mut grads {
                Some(g) => g.add(&task_grads),
                None => grads = Some(task_grads),
            }
        }
        let grads = grads.ok_or_else(|| Error::data("batch contained no rows for any task"))?;
        Ok((total, grads.to_flat()))
    }

    fn val_loss(&self) -> Result<f64> {
        let mut total = 0.0;
        for task in &self.tasks {
            let w = self.hypernet.generate_eval(task.target)?;
            let x = gather(&self.x_val, &task.val_rows);
            let y = col(&task.labels_val, &task.val_rows);
            let (out, _) = nn::forward(&task.spec, &w, &x, Mode::Eval, 0)?;
            total += apply_loss(task.loss, &out, &y)?.0;
        }
        Ok(total)
    }
}

/// Weight storage for TARNet's two outcome heads.
enum TarnetHeads {
    /// Private per-head weights, trained directly.
    Owned { h0: WeightVector, h1: WeightVector },
    /// Head weights generated from a two-embedding hypernet.
    Generated(Hypernet),
}

/// Shared representation phi(x) (always trained directly) with one outcome
/// head per treatment arm. Rows route to the head matching their T.
pub struct TarnetModel {
    phi_spec: MlpSpec,
    head_spec: MlpSpec,
    phi_weights: WeightVector,
    heads: TarnetHeads,
    loss: LossKind,
    x_train: Array2<f64>,
    y_train: Vec<f64>,
    t_train: Vec<u8>,
    x_val: Array2<f64>,
    y_val: Vec<f64>,
    t_val: Vec<u8>,
}

impl TarnetModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        hyper: bool,
        outcome: OutputActivation,
        loss: LossKind,
        x_train: Array2<f64>,
        y_train: Vec<f64>,
        t_train: Vec<u8>,
        x_val: Array2<f64>,
        y_val: Vec<f64>,
        t_val: Vec<u8>,
        cfg: &TrainConfig,
        seed: u64,
    ) -> Result<Self> {
        // first hidden layer is the shared representation; the remaining
        // hidden layers plus the output form each head
        let rep = cfg.hidden[0];
        let mut head_sizes = vec![rep];
        head_sizes.extend_from_slice(&cfg.hidden[1..]);
        head_sizes.push(1);
        let phi_spec = MlpSpec::new(vec![d, rep], OutputActivation::Identity, 0.0)?;
        let head_spec = MlpSpec::new(head_sizes.clone(), outcome, 0.0)?;
        let phi_weights = nn::init_weights(&phi_spec, seeds::mix(seed, 20));
        let heads = if hyper {
            let layout_spec = MlpSpec::new(head_sizes, OutputActivation::Identity, 0.0)?;
            TarnetHeads::Generated(Hypernet::new(
                layout_spec,
                2,
                cfg.embedding_for(Kind::Tarnet),
                cfg.strategy,
                cfg.hypernet_dropout,
                cfg.spectral_norm,
                &cfg.trunk_hidden,
                seeds::mix(seed, 21),
            )?)
        } else {
            TarnetHeads::Owned {
                h0: nn::init_weights(&head_spec, seeds::mix(seed, 22)),
                h1: nn::init_weights(&head_spec, seeds::mix(seed, 23)),
            }
        };
        Ok(TarnetModel {
            phi_spec,
            head_spec,
            phi_weights,
            heads,
            loss,
            x_train,
            y_train,
            t_train,
            x_val,
            y_val,
            t_val,
        })
    }

    fn head_weights(&self, group: u8) -> Result<WeightVector> {
        match &self.heads {
            TarnetHeads::Owned { h0, h1 } => Ok(if group == 1 { h1.clone() } else { h0.clone() }),
            TarnetHeads::Generated(h) => h.generate_eval(TargetId(group as usize)),
        }
    }

    /// Representation after the shared layer's ReLU.
    fn represent(&self, x: &Array2<f64>) -> Result<(Array2<f64>, nn::ForwardCache)> {
        let (z, cache) = nn::forward(&self.phi_spec, &self.phi_weights, x, Mode::Eval, 0)?;
        Ok((z.mapv(|v| v.max(0.0)), cache))
    }

    /// Routed loss on (x, y, t): each group's mean loss under its own head,
    /// summed over the two heads.
    fn routed_loss(&self, x: &Array2<f64>, y: &[f64], t: &[u8]) -> Result<f64> {
        let (rep, _) = self.represent(x)?;
        let mut total = 0.0;
        for group in [0u8, 1u8] {
            let rows: Vec<usize> = (0..t.len()).filter(|&i| t[i] == group).collect();
            if rows.is_empty() {
                continue;
            }
            let w = self.head_weights(group)?;
            let (out, _) = nn::forward(&self.head_spec, &w, &gather(&rep, &rows), Mode::Eval, 0)?;
            total += apply_loss(self.loss, &out, &col(y, &rows))?.0;
        }
        Ok(total)
    }

    pub fn predict_cate(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        let (rep, _) = self.represent(x)?;
        let w0 = self.head_weights(0)?;
        let w1 = self.head_weights(1)?;
        let (m0, _) = nn::forward(&self.head_spec, &w0, &rep, Mode::Eval, 0)?;
        let (m1, _) = nn::forward(&self.head_spec, &w1, &rep, Mode::Eval, 0)?;
        Ok((0..x.nrows()).map(|i| m1[[i, 0]] - m0[[i, 0]]).collect())
    }

    fn phi_len(&self) -> usize {
        self.phi_weights.len()
    }
}

impl TrainableModel for TarnetModel {
    fn n_params(&self) -> usize {
        self.phi_len()
            + match &self.heads {
                TarnetHeads::Owned { h0, h1 } => h0.len() + h1.len(),
                TarnetHeads::Generated(h) => h.n_params(),
            }
    }

    fn params(&self) -> Vec<f64> {
        let mut p = self.phi_weights.values.clone();
        match &self.heads {
            TarnetHeads::Owned { h0, h1 } => {
                p.extend_from_slice(&h0.values);
                p.extend_from_slice(&h1.values);
            }
            TarnetHeads::Generated(h) => p.extend(h.flat_params()),
        }
        p
    }

    fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(Error::shape("parameter length mismatch"));
        }
        let np = self.phi_len();
        self.phi_weights.values.copy_from_slice(&p[..np]);
        match &mut self.heads {
            TarnetHeads::Owned { h0, h1 } => {
                let nh = h0.len();
                h0.values.copy_from_slice(&p[np..np + nh]);
                h1.values.copy_from_slice(&p[np + nh..]);
            }
            TarnetHeads::Generated(h) => h.set_flat_params(&p[np..])?,
        }
        Ok(())
    }

    fn train_len(&self) -> usize {
        self.y_train.len()
    }

    fn prepare_step(&mut self) {
        if let TarnetHeads::Generated(h) = &mut self.heads {
            if h.spectral_norm_enabled {
                h.refresh_spectral_state();
            }
        }
    }

    fn batch_grad(&mut self, rows: &[usize], seed: u64) -> Result<(f64, Vec<f64>)> {
        let x = gather(&self.x_train, rows);
        let (z, phi_cache) = nn::forward(&self.phi_spec, &self.phi_weights, &x, Mode::Eval, 0)?;
        let rep = z.mapv(|v| v.max(0.0));

        let mut total = 0.0;
        let mut grad_rep = Array2::<f64>::zeros(rep.raw_dim());
        let mut head_grads: Vec<(u8, WeightVector, Option<crate::hypernet::GenCache>)> = Vec::new();

        for group in [0u8, 1u8] {
            let local: Vec<usize> =
                (0..rows.len()).filter(|&i| self.t_train[rows[i]] == group).collect();
            if local.is_empty() {
                continue;
            }
            let (w, gen_cache) = match &self.heads {
                TarnetHeads::Owned { h0, h1 } => {
                    (if group == 1 { h1.clone() } else { h0.clone() }, None)
                }
                TarnetHeads::Generated(h) => {
                    let (w, c) =
                        h.generate(TargetId(group as usize), Mode::Train, seeds::mix(seed, group as u64))?;
                    (w, Some(c))
                }
            };
            let x_g = gather(&rep, &local);
            let y_g = Array2::from_shape_fn((local.len(), 1), |(r, _)| {
                self.y_train[rows[local[r]]]
            });
            let (out, cache) = nn::forward(&self.head_spec, &w, &x_g, Mode::Eval, 0)?;
            let (loss, grad_out) = apply_loss(self.loss, &out, &y_g)?;
            let (grad_w, grad_in) = nn::backward(&self.head_spec, &w, &cache, &grad_out)?;
            for (bi, &r) in local.iter().enumerate() {
                for c in 0..grad_rep.ncols() {
                    grad_rep[[r, c]] += grad_in[[bi, c]];
                }
            }
            total += loss;
            head_grads.push((group, grad_w, gen_cache));
        }

        // chain through the representation's ReLU, then the shared layer
        let gate = z.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
        let grad_z = grad_rep * &gate;
        let (grad_phi, _) = nn::backward(&self.phi_spec, &self.phi_weights, &phi_cache, &grad_z)?;

        let mut grads = grad_phi.values;
        match &self.heads {
            TarnetHeads::Owned { h0, .. } => {
                let nh = h0.len();
                let mut g0 = vec![0.0; nh];
                let mut g1 = vec![0.0; nh];
                for (group, gw, _) in head_grads {
                    if group == 1 {
                        g1 = gw.values;
                    } else {
                        g0 = gw.values;
                    }
                }
                grads.extend(g0);
                grads.extend(g1);
            }
            TarnetHeads::Generated(h) => {
                let mut acc = h.zero_grads();
                for (_, gw, cache) in head_grads {
                    let cache = cache.expect("generated heads cache their passes");
                    acc.add(&h.backprop_generated(&cache, &gw.values)?);
                }
                grads.extend(acc.to_flat());
            }
        }
        Ok((total, grads))
    }

    fn val_loss(&self) -> Result<f64> {
        self.routed_loss(&self.x_val, &self.y_val, &self.t_val)
    }
}

/// min(max(p, eps), 1 - eps).
pub fn clip_propensity(p: f64, eps: f64) -> f64 {
    p.clamp(eps, 1.0 - eps)
}

/// Doubly robust pseudo-outcome; `pi` must already be clipped.
pub fn pseudo_outcome_dr(y: f64, t: u8, mu0: f64, mu1: f64, pi: f64) -> f64 {
    let tf = f64::from(t);
    let mu_t = if t == 1 { mu1 } else { mu0 };
    (tf - pi) / (pi * (1.0 - pi)) * (y - mu_t) + mu1 - mu0
}

/// Regression-adjustment pseudo-outcome.
pub fn pseudo_outcome_ra(y: f64, t: u8, mu0: f64, mu1: f64) -> f64 {
    let tf = f64::from(t);
    tf * (y - mu0) + (1.0 - tf) * (mu1 - y)
}

/// Out-of-fold nuisance predictions for every training unit. The propensity
/// is stored already clipped.
#[derive(Clone, Debug)]
pub struct NuisanceEstimates {
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
    pub pi: Vec<f64>,
}

/// Fold id per unit, dealt round-robin within each treatment group so every
/// fold sees both groups whenever group sizes allow it.
fn stratified_folds(t: &[u8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let mut assignment = vec![0usize; t.len()];
    for group in [0u8, 1u8] {
        let mut idx: Vec<usize> = (0..t.len()).filter(|&i| t[i] == group).collect();
        if idx.len() < folds {
            return Err(Error::data(format!(
                "treatment group {group} has {} units, fewer than {folds} folds",
                idx.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, 300 + group as u64));
        data::shuffle(&mut idx, &mut rng);
        for (k, &i) in idx.iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    Ok(assignment)
}

/// Train/validation index partition of `n` local rows, stratified by the
/// given labels when provided.
fn val_partition(
    n: usize,
    labels: Option<&[u8]>,
    val_frac: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let groups: Vec<Vec<usize>> = match labels {
        Some(t) => {
            let g1: Vec<usize> = (0..n).filter(|&i| t[i] == 1).collect();
            let g0: Vec<usize> = (0..n).filter(|&i| t[i] == 0).collect();
            vec![g0, g1].into_iter().filter(|g| !g.is_empty()).collect()
        }
        None => vec![(0..n).collect()],
    };
    let mut train = Vec::new();
    let mut val = Vec::new();
    for (gi, mut idx) in groups.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, 400 + gi as u64));
        data::shuffle(&mut idx, &mut rng);
        let n_val = ((idx.len() as f64) * val_frac).round() as usize;
        let n_val = n_val.max(1).min(idx.len().saturating_sub(1)).max(1);
        val.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

fn outcome_output(data: &CausalDataset) -> (OutputActivation, LossKind) {
    match data.outcome_type {
        OutcomeType::Continuous => (OutputActivation::Identity, LossKind::Mse),
        OutcomeType::Binary => (OutputActivation::Sigmoid, LossKind::Bce),
    }
}

fn mu_sizes(d: usize, cfg: &TrainConfig) -> Vec<usize> {
    let mut sizes = vec![d];
    sizes.extend_from_slice(&cfg.hidden);
    sizes.push(1);
    sizes
}

/// Fit a fresh regressor on (x, y) with an internal validation split.
fn fit_regressor(
    x: &Array2<f64>,
    y: &[f64],
    strat: Option<&[u8]>,
    output: OutputActivation,
    loss: LossKind,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(RegressorModel, TrainTrace)> {
    let (tr, va) = val_partition(x.nrows(), strat, cfg.val_frac, seeds::mix(seed, 1));
    let spec = MlpSpec::new(mu_sizes(x.ncols(), cfg), output, 0.0)?;
    let mut model = RegressorModel::new(
        spec,
        loss,
        gather(x, &tr),
        tr.iter().map(|&i| y[i]).collect(),
        gather(x, &va),
        va.iter().map(|&i| y[i]).collect(),
        seeds::mix(seed, 2),
    )?;
    let trace = run_training(&mut model, cfg, seeds::mix(seed, 3))?;
    Ok((model, trace))
}

/// Cross-fitted nuisance estimation: for each fold, models trained on the
/// complement predict that fold. Baseline mode fits group-specific
/// regressions plus (optionally) a propensity classifier; hyper mode fits
/// one hypernet whose targets are the nuisance functions.
pub fn fit_nuisance(
    data: &CausalDataset,
    cfg: &TrainConfig,
    mode: ModeKind,
    with_propensity: bool,
    embedding_size: usize,
    seed: u64,
) -> Result<NuisanceEstimates> {
    cfg.validate()?;
    data.validate()?;
    let n = data.n();
    let assignment = stratified_folds(&data.t, cfg.folds, seeds::mix(seed, 30))?;
    let (out_act, loss) = outcome_output(data);

    let mut mu0 = vec![0.0; n];
    let mut mu1 = vec![0.0; n];
    let mut pi = vec![0.5; n];

    for fold in 0..cfg.folds {
        let holdout: Vec<usize> = (0..n).filter(|&i| assignment[i] == fold).collect();
        let rest: Vec<usize> = (0..n).filter(|&i| assignment[i] != fold).collect();
        let fold_data = data.select(&rest);
        let x_hold = gather(&data.x, &holdout);
        let fold_seed = seeds::mix(seed, 500 + fold as u64);

        match mode {
            ModeKind::Baseline => {
                let (g0, g1) = fold_data.group_indices();
                let fit_group = |rows: &[usize], salt: u64| -> Result<RegressorModel> {
                    let x = gather(&fold_data.x, rows);
                    let y: Vec<f64> = rows.iter().map(|&i| fold_data.y[i]).collect();
                    Ok(fit_regressor(&x, &y, None, out_act, loss, cfg, seeds::mix(fold_seed, salt))?.0)
                };
                let m0 = fit_group(&g0, 1)?;
                let m1 = fit_group(&g1, 2)?;
                for (k, &i) in holdout.iter().enumerate() {
                    let row = gather(&x_hold, &[k]);
                    mu0[i] = m0.predict(&row)?[0];
                    mu1[i] = m1.predict(&row)?[0];
                }
                if with_propensity {
                    let t_labels: Vec<f64> = fold_data.t.iter().map(|&t| f64::from(t)).collect();
                    let (mp, _) = fit_regressor(
                        &fold_data.x,
                        &t_labels,
                        Some(&fold_data.t),
                        OutputActivation::Sigmoid,
                        LossKind::Bce,
                        cfg,
                        seeds::mix(fold_seed, 3),
                    )?;
                    for (k, &i) in holdout.iter().enumerate() {
                        let row = gather(&x_hold, &[k]);
                        pi[i] = clip_propensity(mp.predict(&row)?[0], DEFAULT_CLIP_EPS);
                    }
                }
            }
            ModeKind::Hyper => {
                let (tr, va) = val_partition(
                    fold_data.n(),
                    Some(&fold_data.t),
                    cfg.val_frac,
                    seeds::mix(fold_seed, 4),
                );
                let x_train = gather(&fold_data.x, &tr);
                let x_val = gather(&fold_data.x, &va);
                let y_train: Vec<f64> = tr.iter().map(|&i| fold_data.y[i]).collect();
                let y_val: Vec<f64> = va.iter().map(|&i| fold_data.y[i]).collect();
                let t_train: Vec<u8> = tr.iter().map(|&i| fold_data.t[i]).collect();
                let t_val: Vec<u8> = va.iter().map(|&i| fold_data.t[i]).collect();

                let group_rows = |t: &[u8], g: u8| -> Vec<usize> {
                    (0..t.len()).filter(|&i| t[i] == g).collect()
                };
                let mut defs = vec![
                    TaskDef {
                        name: "mu0",
                        target: TargetId(0),
                        output: out_act,
                        loss,
                        train_rows: group_rows(&t_train, 0),
                        val_rows: group_rows(&t_val, 0),
                        labels_train: y_train.clone(),
                        labels_val: y_val.clone(),
                    },
                    TaskDef {
                        name: "mu1",
                        target: TargetId(1),
                        output: out_act,
                        loss,
                        train_rows: group_rows(&t_train, 1),
                        val_rows: group_rows(&t_val, 1),
                        labels_train: y_train.clone(),
                        labels_val: y_val.clone(),
                    },
                ];
                if with_propensity {
                    defs.push(TaskDef {
                        name: "pi",
                        target: TargetId(2),
                        output: OutputActivation::Sigmoid,
                        loss: LossKind::Bce,
                        train_rows: (0..tr.len()).collect(),
                        val_rows: (0..va.len()).collect(),
                        labels_train: t_train.iter().map(|&t| f64::from(t)).collect(),
                        labels_val: t_val.iter().map(|&t| f64::from(t)).collect(),
                    });
                }
                let mut model = MultiTaskModel::new(
                    mu_sizes(data.d(), cfg),
                    x_train,
                    x_val,
                    defs,
                    embedding_size,
                    cfg,
                    seeds::mix(fold_seed, 5),
                )?;
                run_training(&mut model, cfg, seeds::mix(fold_seed, 6))?;
                let p0 = model.predict_task(0, &x_hold)?;
                let p1 = model.predict_task(1, &x_hold)?;
                let pp = if with_propensity { Some(model.predict_task(2, &x_hold)?) } else { None };
                for (k, &i) in holdout.iter().enumerate() {
                    mu0[i] = p0[k];
                    mu1[i] = p1[k];
                    if let Some(pp) = &pp {
                        pi[i] = clip_propensity(pp[k], DEFAULT_CLIP_EPS);
                    }
                }
            }
        }
    }

    Ok(NuisanceEstimates { mu0, mu1, pi })
}

/// Prediction-time state of a fitted learner.
enum Predictor {
    /// Single net over (x, t); effect is f(x,1) - f(x,0).
    SingleAugmented { spec: MlpSpec, weights: WeightVector },
    SingleAugmentedHyper { spec: MlpSpec, hypernet: Hypernet },
    /// Two group nets; effect is mu1(x) - mu0(x).
    TwoHeads { spec: MlpSpec, w0: WeightVector, w1: WeightVector },
    TwoHeadsHyper { spec: MlpSpec, hypernet: Hypernet },
    Tarnet(TarnetModel),
    /// Stage-2 regression emitting the effect directly.
    Direct { spec: MlpSpec, weights: WeightVector },
}

/// A trained learner: its kind, recorded traces and prediction state.
pub struct FittedLearner {
    pub kind: LearnerKind,
    pub traces: Vec<NamedTrace>,
    predictor: Predictor,
}

impl FittedLearner {
    /// Per-row effect estimates tau-hat(x).
    pub fn predict_cate(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        match &self.predictor {
            Predictor::SingleAugmented { spec, weights } => {
                predict_augmented_diff(spec, weights, x)
            }
            Predictor::SingleAugmentedHyper { spec, hypernet } => {
                let w = hypernet.generate_eval(TargetId(0))?;
                predict_augmented_diff(spec, &w, x)
            }
            Predictor::TwoHeads { spec, w0, w1 } => predict_two_heads(spec, w0, w1, x),
            Predictor::TwoHeadsHyper { spec, hypernet } => {
                let w0 = hypernet.generate_eval(TargetId(0))?;
                let w1 = hypernet.generate_eval(TargetId(1))?;
                predict_two_heads(spec, &w0, &w1, x)
            }
            Predictor::Tarnet(model) => model.predict_cate(x),
            Predictor::Direct { spec, weights } => {
                let (out, _) = nn::forward(spec, weights, x, Mode::Eval, 0)?;
                Ok(out.column(0).to_vec())
            }
        }
    }

    /// The trace of the learner's single main training loop, when it has one.
    pub fn main_trace(&self) -> Option<&NamedTrace> {
        self.traces.iter().find(|t| t.name == "main" || t.name == "stage2")
    }

    /// Total parameter count of the target (component) architectures; equal
    /// across baseline and hyper modes by construction.
    pub fn target_param_count(&self) -> usize {
        match &self.predictor {
            Predictor::SingleAugmented { spec, .. }
            | Predictor::SingleAugmentedHyper { spec, .. }
            | Predictor::Direct { spec, .. } => WeightLayout::for_spec(spec).total_size,
            Predictor::TwoHeads { spec, .. } | Predictor::TwoHeadsHyper { spec, .. } => {
                2 * WeightLayout::for_spec(spec).total_size
            }
            Predictor::Tarnet(m) => {
                WeightLayout::for_spec(&m.phi_spec).total_size
                    + 2 * WeightLayout::for_spec(&m.head_spec).total_size
            }
        }
    }
}

fn augment_with_t(x: &Array2<f64>, t_value: f64) -> Array2<f64> {
    let (n, d) = (x.nrows(), x.ncols());
    Array2::from_shape_fn((n, d + 1), |(r, c)| if c < d { x[[r, c]] } else { t_value })
}

fn predict_augmented_diff(spec: &MlpSpec, w: &WeightVector, x: &Array2<f64>) -> Result<Vec<f64>> {
    let (y1, _) = nn::forward(spec, w, &augment_with_t(x, 1.0), Mode::Eval, 0)?;
    let (y0, _) = nn::forward(spec, w, &augment_with_t(x, 0.0), Mode::Eval, 0)?;
    Ok((0..x.nrows()).map(|i| y1[[i, 0]] - y0[[i, 0]]).collect())
}

fn predict_two_heads(
    spec: &MlpSpec,
    w0: &WeightVector,
    w1: &WeightVector,
    x: &Array2<f64>,
) -> Result<Vec<f64>> {
    let (m0, _) = nn::forward(spec, w0, x, Mode::Eval, 0)?;
    let (m1, _) = nn::forward(spec, w1, x, Mode::Eval, 0)?;
    Ok((0..x.nrows()).map(|i| m1[[i, 0]] - m0[[i, 0]]).collect())
}

/// Train one learner on the given data (the validation portion is split off
/// internally, stratified by treatment).
pub fn train(
    kind: LearnerKind,
    data: &CausalDataset,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<FittedLearner> {
    cfg.validate()?;
    data.validate()?;
    let (out_act, loss) = outcome_output(data);
    let emb = cfg.embedding_for(kind.kind);

    match (kind.kind, kind.mode) {
        (Kind::SLearner, ModeKind::Baseline) => {
            let x_aug = augment_rows(data);
            let (model, trace) =
                fit_regressor(&x_aug, &data.y, Some(&data.t), out_act, loss, cfg, seeds::mix(seed, 40))?;
            Ok(FittedLearner {
                kind,
                traces: vec![NamedTrace { name: "main".into(), val_losses: trace.val_losses }],
                predictor: Predictor::SingleAugmented { spec: model.spec, weights: model.weights },
            })
        }
        (Kind::SLearner, ModeKind::Hyper) => {
            let x_aug = augment_rows(data);
            let (tr, va) = val_partition(data.n(), Some(&data.t), cfg.val_frac, seeds::mix(seed, 41));
            let defs = vec![TaskDef {
                name: "f",
                target: TargetId(0),
                output: out_act,
                loss,
                train_rows: (0..tr.len()).collect(),
                val_rows: (0..va.len()).collect(),
                labels_train: tr.iter().map(|&i| data.y[i]).collect(),
                labels_val: va.iter().map(|&i| data.y[i]).collect(),
            }];
            let mut model = MultiTaskModel::new(
                mu_sizes(data.d() + 1, cfg),
                gather(&x_aug, &tr),
                gather(&x_aug, &va),
                defs,
                emb,
                cfg,
                seeds::mix(seed, 42),
            )?;
            let trace = run_training(&mut model, cfg, seeds::mix(seed, 43))?;
            let spec = MlpSpec::new(mu_sizes(data.d() + 1, cfg), out_act, 0.0)?;
            Ok(FittedLearner {
                kind,
                traces: vec![NamedTrace { name: "main".into(), val_losses: trace.val_losses }],
                predictor: Predictor::SingleAugmentedHyper { spec, hypernet: model.into_hypernet() },
            })
        }
        (Kind::TLearner, ModeKind::Baseline) => {
            let (g0, g1) = data.group_indices();
            let fit = |rows: &[usize], salt: u64| -> Result<(RegressorModel, TrainTrace)> {
                let x = gather(&data.x, rows);
                let y: Vec<f64> = rows.iter().map(|&i| data.y[i]).collect();
                fit_regressor(&x, &y, None, out_act, loss, cfg, seeds::mix(seed, salt))
            };
            let (m0, tr0) = fit(&g0, 44)?;
            let (m1, tr1) = fit(&g1, 45)?;
            Ok(FittedLearner {
                kind,
                traces: vec![
                    NamedTrace { name: "mu0".into(), val_losses: tr0.val_losses },
                    NamedTrace { name: "mu1".into(), val_losses: tr1.val_losses },
                ],
                predictor: Predictor::TwoHeads { spec: m0.spec, w0: m0.weights, w1: m1.weights },
            })
        }
        (Kind::TLearner, ModeKind::Hyper) => {
            let (mut model, _, _) = t_learner_multitask(data, cfg, emb, seed)?;
            let trace = run_training(&mut model, cfg, seeds::mix(seed, 47))?;
            let spec = MlpSpec::new(mu_sizes(data.d(), cfg), out_act, 0.0)?;
            Ok(FittedLearner {
                kind,
                traces: vec![NamedTrace { name: "main".into(), val_losses: trace.val_losses }],
                predictor: Predictor::TwoHeadsHyper { spec, hypernet: model.into_hypernet() },
            })
        }
        (Kind::Tarnet, mode) => {
            let (tr, va) = val_partition(data.n(), Some(&data.t), cfg.val_frac, seeds::mix(seed, 48));
            let mut model = TarnetModel::new(
                data.d(),
                mode == ModeKind::Hyper,
                out_act,
                loss,
                gather(&data.x, &tr),
                tr.iter().map(|&i| data.y[i]).collect(),
                tr.iter().map(|&i| data.t[i]).collect(),
                gather(&data.x, &va),
                va.iter().map(|&i| data.y[i]).collect(),
                va.iter().map(|&i| data.t[i]).collect(),
                cfg,
                seeds::mix(seed, 49),
            )?;
            let trace = run_training(&mut model, cfg, seeds::mix(seed, 50))?;
            Ok(FittedLearner {
                kind,
                traces: vec![NamedTrace { name: "main".into(), val_losses: trace.val_losses }],
                predictor: Predictor::Tarnet(model),
            })
        }
        (Kind::DrLearner, mode) => {
            let nuis = fit_nuisance(data, cfg, mode, true, emb, seeds::mix(seed, 51))?;
            let pseudo: Vec<f64> = (0..data.n())
                .map(|i| pseudo_outcome_dr(data.y[i], data.t[i], nuis.mu0[i], nuis.mu1[i], nuis.pi[i]))
                .collect();
            stage_two(kind, data, &pseudo, cfg, seeds::mix(seed, 52))
        }
        (Kind::RaLearner, mode) => {
            let nuis = fit_nuisance(data, cfg, mode, false, emb, seeds::mix(seed, 53))?;
            let pseudo: Vec<f64> = (0..data.n())
                .map(|i| pseudo_outcome_ra(data.y[i], data.t[i], nuis.mu0[i], nuis.mu1[i]))
                .collect();
            stage_two(kind, data, &pseudo, cfg, seeds::mix(seed, 54))
        }
    }
}

fn augment_rows(data: &CausalDataset) -> Array2<f64> {
    let (n, d) = (data.n(), data.d());
    Array2::from_shape_fn((n, d + 1), |(r, c)| {
        if c < d {
            data.x[[r, c]]
        } else {
            f64::from(data.t[r])
        }
    })
}

/// Hyper T-learner model: one hypernet, two targets, rows routed by T.
/// Exposed so gradient-routing checks can drive single steps directly.
pub fn t_learner_multitask(
    data: &CausalDataset,
    cfg: &TrainConfig,
    embedding_size: usize,
    seed: u64,
) -> Result<(MultiTaskModel, Vec<usize>, Vec<usize>)> {
    let (out_act, loss) = outcome_output(data);
    let (tr, va) = val_partition(data.n(), Some(&data.t), cfg.val_frac, seeds::mix(seed, 46));
    let t_train: Vec<u8> = tr.iter().map(|&i| data.t[i]).collect();
    let t_val: Vec<u8> = va.iter().map(|&i| data.t[i]).collect();
    let group_rows =
        |t: &[u8], g: u8| -> Vec<usize> { (0..t.len()).filter(|&i| t[i] == g).collect() };
    let defs = vec![
        TaskDef {
            name: "mu0",
            target: TargetId(0),
            output: out_act,
            loss,
            train_rows: group_rows(&t_train, 0),
            val_rows: group_rows(&t_val, 0),
            labels_train: tr.iter().map(|&i| data.y[i]).collect(),
            labels_val: va.iter().map(|&i| data.y[i]).collect(),
        },
        TaskDef {
            name: "mu1",
            target: TargetId(1),
            output: out_act,
            loss,
            train_rows: group_rows(&t_train, 1),
            val_rows: group_rows(&t_val, 1),
            labels_train: tr.iter().map(|&i| data.y[i]).collect(),
            labels_val: va.iter().map(|&i| data.y[i]).collect(),
        },
    ];
    let model = MultiTaskModel::new(
        mu_sizes(data.d(), cfg),
        gather(&data.x, &tr),
        gather(&data.x, &va),
        defs,
        embedding_size,
        cfg,
        seeds::mix(seed, 42),
    )?;
    Ok((model, tr, va))
}

/// Stage 2 of the direct learners: regress the pseudo-outcome on x with a
/// fresh, directly trained network. Raw Y is never passed in.
fn stage_two(
    kind: LearnerKind,
    data: &CausalDataset,
    pseudo: &[f64],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<FittedLearner> {
    let (model, trace) = fit_regressor(
        &data.x,
        pseudo,
        Some(&data.t),
        OutputActivation::Identity,
        LossKind::Mse,
        cfg,
        seed,
    )?;
    Ok(FittedLearner {
        kind,
        traces: vec![NamedTrace { name: "stage2".into(), val_losses: trace.val_losses }],
        predictor: Predictor::Direct { spec: model.spec, weights: model.weights },
    })
}
