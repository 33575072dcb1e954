//! Finite-difference verification of the hand-written backward passes, for
//! the plain MLP stack and for the full hypernet-to-target pipeline across
//! every generation strategy and spectral-norm setting.
//!
//! Probes where a ReLU gate flips between the +eps and -eps evaluations are
//! skipped: central differences are invalid across an activation kink.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hypernet::{GenerationStrategy, Hypernet, TargetId};
use crate::nn::{self, MlpSpec, Mode, OutputActivation, WeightVector};
use crate::seeds;
use crate::{Error, Result};

pub const NN_TOLERANCE: f64 = 1e-5;
pub const HYPERNET_TOLERANCE: f64 = 1e-4;

/// Negative-control hook: `ScaledAdjoint` multiplies every analytic gradient
/// by 1.02 before comparison, which any sound check must flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corruption {
    None,
    ScaledAdjoint,
}

impl Corruption {
    fn apply(&self, grads: &mut [f64]) {
        if *self == Corruption::ScaledAdjoint {
            for g in grads {
                *g *= 1.02;
            }
        }
    }
}

/// One suite row: the worst relative error across its probes.
#[derive(Clone, Debug)]
pub struct SuiteRow {
    pub name: String,
    pub worst_rel_err: f64,
    pub checked: usize,
    pub tolerance: f64,
}

impl SuiteRow {
    pub fn passed(&self) -> bool {
        self.worst_rel_err <= self.tolerance
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub rows: Vec<SuiteRow>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(SuiteRow::passed)
    }

    pub fn worst(&self) -> f64 {
        self.rows.iter().map(|r| r.worst_rel_err).fold(0.0, f64::max)
    }
}

fn rel_err(num: f64, ana: f64) -> f64 {
    (num - ana).abs() / (num.abs() + ana.abs()).max(1e-8)
}

/// Central differences against analytic gradients over a strided probe set.
/// `eval` returns the loss and the ReLU gate signature at the probe point.
fn central_difference_worst(
    base: &[f64],
    analytic: &[f64],
    stride: usize,
    eps: f64,
    mut eval: impl FnMut(&[f64]) -> Result<(f64, Vec<bool>)>,
) -> Result<(f64, usize)> {
    let mut params = base.to_vec();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    let mut probes = 0usize;
    for i in (0..base.len()).step_by(stride) {
        probes += 1;
        params[i] = base[i] + eps;
        let (lp, gates_p) = eval(&params)?;
        params[i] = base[i] - eps;
        let (lm, gates_m) = eval(&params)?;
        params[i] = base[i];
        if gates_p != gates_m {
            continue;
        }
        let numeric = (lp - lm) / (2.0 * eps);
        worst = worst.max(rel_err(numeric, analytic[i]));
        checked += 1;
    }
    if checked < probes / 6 + 1 {
        return Err(Error::data("gradient check skipped nearly all probes on gate flips"));
    }
    Ok((worst, checked))
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
}

fn hidden_gates(spec: &MlpSpec, cache: &nn::ForwardCache) -> Vec<bool> {
    let hidden_layers = spec.num_layers() - 1;
    cache.pre[..hidden_layers]
        .iter()
        .flat_map(|z| z.iter().map(|&v| v > 0.0))
        .collect()
}

/// Finite-difference suite for the plain MLP: several random architectures
/// covering dropout, both output activations and both losses.
pub fn nn_suite(seed: u64, corruption: Corruption) -> Result<SuiteRow> {
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for k in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, 10 + k));
        let d = rng.gen_range(2..=4);
        let depth = rng.gen_range(1..=2);
        let mut sizes = vec![d];
        for _ in 0..depth {
            sizes.push(rng.gen_range(2..=5));
        }
        let out_dim = rng.gen_range(1..=2);
        sizes.push(out_dim);
        let bce = k % 2 == 1;
        let output = if bce { OutputActivation::Sigmoid } else { OutputActivation::Identity };
        let dropout = if k % 3 == 0 { 0.25 } else { 0.0 };
        let spec = MlpSpec::new(sizes, output, dropout)?;
        let w = nn::init_weights(&spec, seeds::mix(seed, 20 + k));
        let batch = rng.gen_range(3..=5);
        let x = random_matrix(&mut rng, batch, d);
        let y = if bce {
            Array2::from_shape_fn((batch, out_dim), |_| f64::from(rng.gen::<bool>()))
        } else {
            random_matrix(&mut rng, batch, out_dim)
        };
        let mask_seed = seeds::mix(seed, 30 + k);

        let loss_at = |values: &[f64]| -> Result<(f64, Vec<bool>)> {
            let wp = WeightVector { values: values.to_vec() };
            let (out, cache) = nn::forward(&spec, &wp, &x, Mode::Train, mask_seed)?;
            let loss = if bce { nn::bce_loss(&out, &y)?.0 } else { nn::mse_loss(&out, &y)?.0 };
            Ok((loss, hidden_gates(&spec, &cache)))
        };

        let (out, cache) = nn::forward(&spec, &w, &x, Mode::Train, mask_seed)?;
        let grad_out = if bce { nn::bce_loss(&out, &y)?.1 } else { nn::mse_loss(&out, &y)?.1 };
        let (grad_w, _) = nn::backward(&spec, &w, &cache, &grad_out)?;
        let mut analytic = grad_w.values;
        corruption.apply(&mut analytic);

        let (w_err, n) = central_difference_worst(&w.values, &analytic, 1, 1e-5, loss_at)?;
        worst = worst.max(w_err);
        checked += n;
    }
    Ok(SuiteRow { name: "nn_core".into(), worst_rel_err: worst, checked, tolerance: NN_TOLERANCE })
}

/// End-to-end finite differences for one hypernet configuration: loss of the
/// generated target network, differentiated back to trunk weights and
/// embeddings.
fn hypernet_config_check(
    target_sizes: Vec<usize>,
    n_targets: usize,
    embedding_size: usize,
    trunk_hidden: &[usize],
    strategy: GenerationStrategy,
    dropout: f64,
    spectral_norm: bool,
    stride: usize,
    seed: u64,
    corruption: Corruption,
) -> Result<(f64, usize)> {
    let spec = MlpSpec::new(target_sizes, OutputActivation::Identity, 0.0)?;
    let hypernet = Hypernet::new(
        spec.clone(),
        n_targets,
        embedding_size,
        strategy,
        dropout,
        spectral_norm,
        trunk_hidden,
        seeds::mix(seed, 1),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, 2));
    let batch = rng.gen_range(3..=5);
    let x = random_matrix(&mut rng, batch, spec.input_dim());
    let y = random_matrix(&mut rng, batch, spec.output_dim());
    let target = TargetId(n_targets - 1);
    let gen_seed = seeds::mix(seed, 3);

    let pipeline = |h: &Hypernet| -> Result<(f64, Vec<bool>, Option<Vec<f64>>)> {
        let (w, gen_cache) = h.generate(target, Mode::Train, gen_seed)?;
        let (out, cache) = nn::forward(&spec, &w, &x, Mode::Eval, 0)?;
        let (loss, grad_out) = nn::mse_loss(&out, &y)?;
        let mut gates = gen_cache.gate_signature();
        gates.extend(hidden_gates(&spec, &cache));
        let (grad_w, _) = nn::backward(&spec, &w, &cache, &grad_out)?;
        let grads = h.backprop_generated(&gen_cache, &grad_w.values)?;
        Ok((loss, gates, Some(grads.to_flat())))
    };

    let base = hypernet.flat_params();
    let (_, _, grads) = pipeline(&hypernet)?;
    let mut analytic = grads.unwrap();
    corruption.apply(&mut analytic);

    let mut probe = hypernet;
    // step 1e-4: pipeline gradients reach ~1e-8, where a smaller step's
    // floating-point cancellation would swamp the comparison
    central_difference_worst(&base, &analytic, stride, 1e-4, move |p| {
        probe.set_flat_params(p)?;
        let (loss, gates, _) = pipeline(&probe)?;
        Ok((loss, gates))
    })
}

fn strategy_label(strategy: GenerationStrategy, spectral_norm: bool) -> String {
    format!("{}/{}", strategy.name(), if spectral_norm { "sn_on" } else { "sn_off" })
}

/// One row per (strategy, spectral-norm flag): 8 rows on a fixed small
/// architecture.
pub fn hypernet_suite(seed: u64, corruption: Corruption) -> Result<Vec<SuiteRow>> {
    let strategies = [
        GenerationStrategy::GenerateOnce,
        GenerationStrategy::ChunkWise { n_chunks: 3 },
        GenerationStrategy::LayerWise,
        GenerationStrategy::SplitHead { n_heads: 2 },
    ];
    let mut rows = Vec::new();
    for (si, &strategy) in strategies.iter().enumerate() {
        for sn in [true, false] {
            let (worst, checked) = hypernet_config_check(
                vec![3, 4, 2],
                2,
                3,
                &[6, 5],
                strategy,
                0.05,
                sn,
                3,
                seeds::mix(seed, 40 + 2 * si as u64 + u64::from(sn)),
                corruption,
            )?;
            rows.push(SuiteRow {
                name: strategy_label(strategy, sn),
                worst_rel_err: worst,
                checked,
                tolerance: HYPERNET_TOLERANCE,
            });
        }
    }
    Ok(rows)
}

/// Random (trunk, target, strategy, spectral-norm) configurations checked
/// end to end; the worst relative error over all of them is reported.
pub fn random_end_to_end(n_configs: usize, seed: u64, corruption: Corruption) -> Result<SuiteRow> {
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for k in 0..n_configs as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, 70 + k));
        let d_in = rng.gen_range(2..=4);
        let depth = rng.gen_range(1..=2);
        let mut sizes = vec![d_in];
        for _ in 0..depth {
            sizes.push(rng.gen_range(2..=5));
        }
        sizes.push(rng.gen_range(1..=2));
        let trunk: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(4..=8)).collect();
        let strategy = match k % 4 {
            0 => GenerationStrategy::GenerateOnce,
            1 => GenerationStrategy::ChunkWise { n_chunks: rng.gen_range(2..=3) },
            2 => GenerationStrategy::LayerWise,
            _ => GenerationStrategy::SplitHead { n_heads: rng.gen_range(2..=3) },
        };
        let (err, n) = hypernet_config_check(
            sizes,
            2,
            rng.gen_range(2..=4),
            &trunk,
            strategy,
            if k % 3 == 0 { 0.05 } else { 0.0 },
            k % 2 == 0,
            3,
            seeds::mix(seed, 90 + k),
            corruption,
        )?;
        worst = worst.max(err);
        checked += n;
    }
    Ok(SuiteRow {
        name: "random_end_to_end".into(),
        worst_rel_err: worst,
        checked,
        tolerance: HYPERNET_TOLERANCE,
    })
}

/// The full report: the MLP suite plus all eight strategy/spectral-norm
/// combinations.
pub fn run_report(seed: u64, corruption: Corruption) -> Result<Report> {
    let mut rows = vec![nn_suite(seed, corruption)?];
    rows.extend(hypernet_suite(seed, corruption)?);
    Ok(Report { rows })
}
