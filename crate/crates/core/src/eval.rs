//! Effect-estimation metrics and the experiment harness: seed-averaged
//! runs, sweeps over dataset size / embedding size / generation strategy,
//! and convergence-trace summaries.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{self, CausalDataset, DgpConfig};
use crate::hypernet::GenerationStrategy;
use crate::learners::{self, LearnerKind, TrainConfig};
use crate::seeds;
use crate::{Error, Result};

/// Root mean squared error of per-row effect estimates against the true
/// effect mu1 - mu0.
pub fn pehe(tau_hat: &[f64], mu1_true: &[f64], mu0_true: &[f64]) -> Result<f64> {
    if tau_hat.len() != mu1_true.len() || tau_hat.len() != mu0_true.len() {
        return Err(Error::shape("pehe inputs must have equal lengths"));
    }
    if tau_hat.is_empty() {
        return Err(Error::data("pehe needs at least one row"));
    }
    let sum: f64 = tau_hat
        .iter()
        .zip(mu1_true.iter().zip(mu0_true))
        .map(|(&th, (&m1, &m0))| {
            let d = th - (m1 - m0);
            d * d
        })
        .sum();
    Ok((sum / tau_hat.len() as f64).sqrt())
}

/// Where the experiment's data comes from.
#[derive(Clone, Debug)]
pub enum DataSource {
    Synthetic(DgpConfig),
    Csv(PathBuf),
}

/// One sweep study, or a plain multi-seed run.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepAxis {
    None,
    DatasetSize(Vec<usize>),
    EmbeddingSize(Vec<usize>),
    Strategy(Vec<GenerationStrategy>),
}

/// One learner entry: its kind plus optional per-learner overrides of the
/// generation strategy and embedding size.
#[derive(Clone, Copy, Debug)]
pub struct LearnerSetup {
    pub kind: LearnerKind,
    pub strategy: Option<GenerationStrategy>,
    pub embedding_size: Option<usize>,
}

impl LearnerSetup {
    pub fn new(kind: LearnerKind) -> Self {
        LearnerSetup { kind, strategy: None, embedding_size: None }
    }
}

impl From<LearnerKind> for LearnerSetup {
    fn from(kind: LearnerKind) -> Self {
        LearnerSetup::new(kind)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub learners: Vec<LearnerSetup>,
    pub source: DataSource,
    pub seeds: Vec<u64>,
    pub test_frac: f64,
    pub sweep: SweepAxis,
    pub train: TrainConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learners.is_empty() {
            return Err(Error::config("experiment needs at least one learner"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("experiment needs at least one seed"));
        }
        if !(0.0..1.0).contains(&self.test_frac) || self.test_frac == 0.0 {
            return Err(Error::config("test_frac must lie in (0, 1)"));
        }
        match &self.sweep {
            SweepAxis::None => {}
            SweepAxis::DatasetSize(sizes) => {
                if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
                    return Err(Error::config("dataset sizes must be positive"));
                }
            }
            SweepAxis::EmbeddingSize(sizes) => {
                if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
                    return Err(Error::config("embedding sizes must be positive"));
                }
            }
            SweepAxis::Strategy(list) => {
                if list.is_empty() {
                    return Err(Error::config("strategy sweep needs at least one strategy"));
                }
            }
        }
        self.train.validate()?;
        if let DataSource::Synthetic(dgp) = &self.source {
            dgp.validate()?;
        }
        Ok(())
    }
}

/// One learner fit on one seed (and sweep cell, when sweeping).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunRecord {
    pub learner: String,
    pub sweep_value: Option<String>,
    pub seed: u64,
    pub pehe_in: f64,
    pub pehe_out: f64,
}

/// Validation loss after every weight update of one training loop.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TraceRecord {
    pub learner: String,
    pub sweep_value: Option<String>,
    pub seed: u64,
    pub component: String,
    pub val_losses: Vec<f64>,
}

/// Aggregate over the seeds of one (learner, sweep value) cell.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TableRow {
    pub learner: String,
    pub sweep_value: Option<String>,
    pub runs: usize,
    pub pehe_in_mean: f64,
    pub pehe_in_se: f64,
    pub pehe_out_mean: f64,
    pub pehe_out_se: f64,
    /// True when a single run makes the standard error degenerate.
    pub low_sample: bool,
}

#[derive(Clone, Debug)]
pub struct ResultsTable {
    pub rows: Vec<TableRow>,
    pub raw: Vec<RunRecord>,
    pub traces: Vec<TraceRecord>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard error: sample standard deviation (n-1 denominator) over sqrt(n);
/// zero for a single value.
fn standard_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Group raw records into table rows, preserving first-appearance order of
/// (learner, sweep value) cells.
pub fn aggregate(raw: &[RunRecord]) -> Vec<TableRow> {
    let mut order: Vec<(String, Option<String>)> = Vec::new();
    for r in raw {
        let key = (r.learner.clone(), r.sweep_value.clone());
        if !order.contains(&key) {
            order.push(key);
        }
    }
    order
        .into_iter()
        .map(|(learner, sweep_value)| {
            let ins: Vec<f64> = raw
                .iter()
                .filter(|r| r.learner == learner && r.sweep_value == sweep_value)
                .map(|r| r.pehe_in)
                .collect();
            let outs: Vec<f64> = raw
                .iter()
                .filter(|r| r.learner == learner && r.sweep_value == sweep_value)
                .map(|r| r.pehe_out)
                .collect();
            TableRow {
                learner,
                sweep_value,
                runs: ins.len(),
                pehe_in_mean: mean(&ins),
                pehe_in_se: standard_error(&ins),
                pehe_out_mean: mean(&outs),
                pehe_out_se: standard_error(&outs),
                low_sample: ins.len() < 2,
            }
        })
        .collect()
}

/// Per-cell override the sweep axis applies on top of learner-level
/// settings.
#[derive(Clone, Copy, Debug, Default)]
struct CellPatch {
    embedding_size: Option<usize>,
    strategy: Option<GenerationStrategy>,
}

/// One unit of work: a sweep cell and a seed.
struct Job {
    cell_key: Option<String>,
    dataset_size: Option<usize>,
    patch: CellPatch,
    seed: u64,
}

fn build_cells(cfg: &ExperimentConfig) -> Vec<(Option<String>, Option<usize>, CellPatch)> {
    match &cfg.sweep {
        SweepAxis::None => vec![(None, None, CellPatch::default())],
        SweepAxis::DatasetSize(sizes) => sizes
            .iter()
            .map(|&s| (Some(s.to_string()), Some(s), CellPatch::default()))
            .collect(),
        SweepAxis::EmbeddingSize(sizes) => sizes
            .iter()
            .map(|&s| {
                (
                    Some(s.to_string()),
                    None,
                    CellPatch { embedding_size: Some(s), strategy: None },
                )
            })
            .collect(),
        SweepAxis::Strategy(list) => list
            .iter()
            .map(|&s| {
                (
                    Some(s.name().to_string()),
                    None,
                    CellPatch { embedding_size: None, strategy: Some(s) },
                )
            })
            .collect(),
    }
}

fn source_data(cfg: &ExperimentConfig, seed: u64) -> Result<CausalDataset> {
    match &cfg.source {
        DataSource::Synthetic(dgp) => data::generate_synthetic(dgp, seed),
        DataSource::Csv(path) => data::load_csv(path, &data::CsvSchema::default()),
    }
}

fn run_job(cfg: &ExperimentConfig, job: &Job) -> Result<(Vec<RunRecord>, Vec<TraceRecord>)> {
    let full = source_data(cfg, job.seed)?;
    let (pool, test) = data::train_test_split(&full, cfg.test_frac, seeds::mix(job.seed, 7), true)?;
    let train_pool = match job.dataset_size {
        Some(size) => {
            if size > pool.n() {
                return Err(Error::config(format!(
                    "sweep size {size} exceeds the {} available training rows",
                    pool.n()
                )));
            }
            data::stratified_subsample(&pool, size, seeds::mix(job.seed, 8))?
        }
        None => pool,
    };

    // surfaces must be known for PEHE; true_effects() checks availability
    train_pool.true_effects()?;
    test.true_effects()?;
    let (mu1_in, mu0_in) =
        (train_pool.mu1_true.clone().unwrap(), train_pool.mu0_true.clone().unwrap());
    let (mu1_out, mu0_out) = (test.mu1_true.clone().unwrap(), test.mu0_true.clone().unwrap());

    let mut raw = Vec::new();
    let mut traces = Vec::new();
    for (li, setup) in cfg.learners.iter().enumerate() {
        let kind = setup.kind;
        let annotate = |e: Error| {
            Error::data(format!("learner {}, seed {}: {e}", kind.label(), job.seed))
        };
        // learner-level settings first, then the sweep cell's override
        let mut train_cfg = cfg.train.clone();
        if let Some(s) = setup.strategy {
            train_cfg.strategy = s;
        }
        if let Some(e) = setup.embedding_size {
            train_cfg.embedding_size = Some(e);
        }
        if let Some(s) = job.patch.strategy {
            train_cfg.strategy = s;
        }
        if let Some(e) = job.patch.embedding_size {
            train_cfg.embedding_size = Some(e);
        }
        let fitted =
            learners::train(kind, &train_pool, &train_cfg, seeds::mix(job.seed, 9000 + li as u64))
                .map_err(annotate)?;
        let tau_in = fitted.predict_cate(&train_pool.x).map_err(annotate)?;
        let tau_out = fitted.predict_cate(&test.x).map_err(annotate)?;
        raw.push(RunRecord {
            learner: kind.label(),
            sweep_value: job.cell_key.clone(),
            seed: job.seed,
            pehe_in: pehe(&tau_in, &mu1_in, &mu0_in)?,
            pehe_out: pehe(&tau_out, &mu1_out, &mu0_out)?,
        });
        for t in &fitted.traces {
            traces.push(TraceRecord {
                learner: kind.label(),
                sweep_value: job.cell_key.clone(),
                seed: job.seed,
                component: t.name.clone(),
                val_losses: t.val_losses.clone(),
            });
        }
    }
    Ok((raw, traces))
}

/// Run every (sweep cell, seed, learner) combination and aggregate. Jobs are
/// independent; they may run on a rayon pool, and the merge order is fixed
/// regardless of thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultsTable> {
    cfg.validate()?;
    let cells = build_cells(cfg);
    let jobs: Vec<Job> = cells
        .iter()
        .flat_map(|(key, size, patch)| {
            cfg.seeds.iter().map(move |&seed| Job {
                cell_key: key.clone(),
                dataset_size: *size,
                patch: *patch,
                seed,
            })
        })
        .collect();

    let mut results: Vec<(usize, Result<(Vec<RunRecord>, Vec<TraceRecord>)>)> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, job)| (i, run_job(cfg, job)))
        .collect();
    results.sort_by_key(|(i, _)| *i);

    let mut raw = Vec::new();
    let mut traces = Vec::new();
    for (_, r) in results {
        let (mut rr, mut tt) = r?;
        raw.append(&mut rr);
        traces.append(&mut tt);
    }
    Ok(ResultsTable { rows: aggregate(&raw), raw, traces })
}

/// Dataset-size study: per seed the test split is fixed and the training
/// pool is subsampled to each size.
pub fn dataset_size_sweep(cfg: &ExperimentConfig, sizes: &[usize]) -> Result<ResultsTable> {
    let cfg = ExperimentConfig { sweep: SweepAxis::DatasetSize(sizes.to_vec()), ..cfg.clone() };
    run_experiment(&cfg)
}

/// Embedding-size study over hyper learners.
pub fn embedding_size_sweep(cfg: &ExperimentConfig, sizes: &[usize]) -> Result<ResultsTable> {
    let cfg = ExperimentConfig { sweep: SweepAxis::EmbeddingSize(sizes.to_vec()), ..cfg.clone() };
    run_experiment(&cfg)
}

/// Generation-strategy study over hyper learners.
pub fn strategy_sweep(
    cfg: &ExperimentConfig,
    strategies: &[GenerationStrategy],
) -> Result<ResultsTable> {
    let cfg = ExperimentConfig { sweep: SweepAxis::Strategy(strategies.to_vec()), ..cfg.clone() };
    run_experiment(&cfg)
}

/// 1-based index of the first minimum of a validation-loss trace.
pub fn steps_to_best(val_losses: &[f64]) -> usize {
    let mut best = f64::INFINITY;
    let mut at = 0;
    for (i, &v) in val_losses.iter().enumerate() {
        if v < best {
            best = v;
            at = i;
        }
    }
    at + 1
}

/// Mean steps-to-best per learner, plus hyper/baseline ratios for learner
/// kinds present in both modes. Only single-loop components are compared.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceSummary {
    pub mean_steps: Vec<(String, f64)>,
    pub ratios: Vec<(String, f64)>,
}

pub fn convergence_trace_compare(traces: &[TraceRecord]) -> ConvergenceSummary {
    let mut order: Vec<String> = Vec::new();
    for t in traces {
        if t.component == "main" && !order.contains(&t.learner) {
            order.push(t.learner.clone());
        }
    }
    let mean_steps: Vec<(String, f64)> = order
        .iter()
        .map(|learner| {
            let steps: Vec<f64> = traces
                .iter()
                .filter(|t| &t.learner == learner && t.component == "main")
                .map(|t| steps_to_best(&t.val_losses) as f64)
                .collect();
            (learner.clone(), mean(&steps))
        })
        .collect();
    let mut ratios = Vec::new();
    for (learner, base_steps) in &mean_steps {
        if learner.starts_with("hyper_") {
            continue;
        }
        let hyper_label = format!("hyper_{learner}");
        if let Some((_, hyper_steps)) = mean_steps.iter().find(|(l, _)| l == &hyper_label) {
            ratios.push((learner.clone(), hyper_steps / base_steps));
        }
    }
    ConvergenceSummary { mean_steps, ratios }
}

/// Aggregate table as CSV (one row per learner and sweep value).
pub fn write_results_csv(table: &ResultsTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "learner",
        "sweep_value",
        "runs",
        "pehe_in_mean",
        "pehe_in_se",
        "pehe_out_mean",
        "pehe_out_se",
        "low_sample",
    ])?;
    for r in &table.rows {
        w.write_record([
            r.learner.clone(),
            r.sweep_value.clone().unwrap_or_default(),
            r.runs.to_string(),
            r.pehe_in_mean.to_string(),
            r.pehe_in_se.to_string(),
            r.pehe_out_mean.to_string(),
            r.pehe_out_se.to_string(),
            r.low_sample.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plot-ready sweep summary: x (sweep value), one row per learner and value,
/// y = mean PEHE-out, err = its standard error. Numeric sweep values are
/// ordered ascending.
pub fn write_sweep_csv(table: &ResultsTable, path: &Path) -> Result<()> {
    let mut rows = table.rows.clone();
    rows.sort_by(|a, b| {
        let key = |r: &TableRow| {
            let v = r.sweep_value.clone().unwrap_or_default();
            match v.parse::<f64>() {
                Ok(x) => (0u8, x, v, r.learner.clone()),
                Err(_) => (1u8, 0.0, v, r.learner.clone()),
            }
        };
        key(a).partial_cmp(&key(b)).unwrap()
    });
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "learner", "y", "err"])?;
    for r in &rows {
        w.write_record([
            r.sweep_value.clone().unwrap_or_default(),
            r.learner.clone(),
            r.pehe_out_mean.to_string(),
            r.pehe_out_se.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Raw per-run records, one JSON object per line.
pub fn write_raw_jsonl(table: &ResultsTable, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    for r in &table.raw {
        serde_json::to_writer(&mut f, r)?;
        writeln!(f)?;
    }
    Ok(())
}

/// Convergence traces, one JSON object per line.
pub fn write_traces_jsonl(table: &ResultsTable, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    for t in &table.traces {
        serde_json::to_writer(&mut f, t)?;
        writeln!(f)?;
    }
    Ok(())
}

pub fn read_raw_jsonl(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines().map(|l| Ok(serde_json::from_str(l)?)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{Kind, ModeKind};

    #[test]
    fn pehe_matches_hand_computed_values() {
        // perfect estimate
        let tau = vec![1.0, 2.0, -0.5];
        let mu1 = vec![2.0, 3.0, 0.0];
        let mu0 = vec![1.0, 1.0, 0.5];
        assert_eq!(pehe(&tau, &mu1, &mu0).unwrap(), 0.0);
        // two rows, one unit error
        let v = pehe(&[2.0, 2.0], &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert!((v - (0.5f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pehe_constant_bias_returns_the_bias() {
        let mu1 = vec![0.3, 1.2, -0.7, 2.0];
        let mu0 = vec![0.1, 0.3, -1.0, 1.5];
        let tau: Vec<f64> = mu1.iter().zip(&mu0).map(|(a, b)| a - b + 0.25).collect();
        let v = pehe(&tau, &mu1, &mu0).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn pehe_is_permutation_invariant_and_shift_consistent() {
        let tau = vec![0.4, -0.2, 1.1, 0.0];
        let mu1 = vec![1.0, 0.0, 2.0, 0.3];
        let mu0 = vec![0.5, 0.1, 1.0, 0.4];
        let a = pehe(&tau, &mu1, &mu0).unwrap();
        let perm = [2usize, 0, 3, 1];
        let p = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let b = pehe(&p(&tau), &p(&mu1), &p(&mu0)).unwrap();
        assert_eq!(a, b);
        // shifting tau-hat and mu1 by the same constant leaves pehe unchanged
        let c = 3.7;
        let tau_c: Vec<f64> = tau.iter().map(|v| v + c).collect();
        let mu1_c: Vec<f64> = mu1.iter().map(|v| v + c).collect();
        let d = pehe(&tau_c, &mu1_c, &mu0).unwrap();
        assert!((a - d).abs() < 1e-12);
    }

    #[test]
    fn pehe_rejects_length_mismatch() {
        assert!(pehe(&[1.0], &[1.0, 2.0], &[0.0, 0.0]).is_err());
    }

    fn record(learner: &str, seed: u64, pin: f64, pout: f64) -> RunRecord {
        RunRecord {
            learner: learner.into(),
            sweep_value: None,
            seed,
            pehe_in: pin,
            pehe_out: pout,
        }
    }

    #[test]
    fn two_run_standard_error_is_half_the_gap() {
        let raw = vec![record("t_learner", 0, 1.0, 2.0), record("t_learner", 1, 1.5, 3.0)];
        let rows = aggregate(&raw);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].pehe_in_se - 0.25).abs() < 1e-15);
        assert!((rows[0].pehe_out_se - 0.5).abs() < 1e-15);
        assert!(!rows[0].low_sample);
    }

    #[test]
    fn single_run_reports_zero_se_and_low_sample_flag() {
        let rows = aggregate(&[record("s_learner", 3, 0.9, 1.1)]);
        assert_eq!(rows[0].pehe_in_se, 0.0);
        assert!(rows[0].low_sample);
        assert_eq!(rows[0].runs, 1);
    }

    #[test]
    fn steps_to_best_examples() {
        assert_eq!(steps_to_best(&[1.0, 0.5, 0.5]), 2);
        assert_eq!(steps_to_best(&[3.0]), 1);
        assert_eq!(steps_to_best(&[2.0, 1.9, 2.5, 1.8, 1.8]), 4);
    }

    fn trace(learner: &str, seed: u64, vals: &[f64]) -> TraceRecord {
        TraceRecord {
            learner: learner.into(),
            sweep_value: None,
            seed,
            component: "main".into(),
            val_losses: vals.to_vec(),
        }
    }

    #[test]
    fn convergence_ratio_examples() {
        // baseline reaches its best at step 400, hyper at step 300
        let mut base = vec![1.0; 400];
        base[399] = 0.1;
        let mut hyper = vec![1.0; 300];
        hyper[299] = 0.1;
        let traces = vec![trace("tarnet", 0, &base), trace("hyper_tarnet", 0, &hyper)];
        let summary = convergence_trace_compare(&traces);
        assert_eq!(summary.ratios.len(), 1);
        assert_eq!(summary.ratios[0].0, "tarnet");
        assert!((summary.ratios[0].1 - 0.75).abs() < 1e-12);

        // identical traces give ratio exactly 1
        let same = vec![trace("tarnet", 0, &base), trace("hyper_tarnet", 0, &base)];
        assert_eq!(convergence_trace_compare(&same).ratios[0].1, 1.0);
    }

    fn small_experiment(seeds: Vec<u64>) -> ExperimentConfig {
        ExperimentConfig {
            learners: vec![
                LearnerKind::new(Kind::SLearner, ModeKind::Baseline).into(),
                LearnerKind::new(Kind::TLearner, ModeKind::Baseline).into(),
            ],
            source: DataSource::Synthetic(DgpConfig {
                n: 120,
                d: 3,
                noise_sd: 0.3,
                ..DgpConfig::default()
            }),
            seeds,
            test_frac: 0.25,
            sweep: SweepAxis::None,
            train: TrainConfig {
                learning_rate: 1e-2,
                batch_size: 64,
                patience: 10,
                max_steps: 40,
                hidden: vec![8],
                trunk_hidden: vec![8],
                ..TrainConfig::default()
            },
        }
    }

    #[test]
    fn experiment_produces_one_raw_record_per_learner_and_seed() {
        let cfg = small_experiment(vec![1, 2, 3]);
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.raw.len(), 6);
        assert_eq!(table.rows.len(), 2);
        for row in &table.rows {
            assert_eq!(row.runs, 3);
            assert!(row.pehe_out_mean.is_finite());
        }
        // traces recorded for every run component
        assert!(table.traces.iter().any(|t| t.learner == "s_learner"));
        assert!(table.traces.iter().any(|t| t.component == "mu1"));
    }

    #[test]
    fn experiment_is_bitwise_reproducible() {
        let cfg = small_experiment(vec![5, 6]);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.raw, b.raw);
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.traces, b.traces);
    }

    #[test]
    fn reaggregating_persisted_raw_records_matches_the_table() {
        let cfg = small_experiment(vec![8, 9]);
        let table = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("raw.jsonl");
        write_raw_jsonl(&table, &path).unwrap();
        let raw = read_raw_jsonl(&path).unwrap();
        assert_eq!(raw, table.raw);
        assert_eq!(aggregate(&raw), table.rows);
    }

    #[test]
    fn full_size_sweep_cell_matches_the_plain_experiment() {
        let mut cfg = small_experiment(vec![4]);
        cfg.learners.truncate(1);
        let plain = run_experiment(&cfg).unwrap();
        // 120 rows at test_frac 0.25 leave 90 in the training pool
        let sweep = dataset_size_sweep(&cfg, &[90]).unwrap();
        assert_eq!(sweep.raw.len(), 1);
        assert_eq!(sweep.raw[0].pehe_out, plain.raw[0].pehe_out);
        assert_eq!(sweep.raw[0].pehe_in, plain.raw[0].pehe_in);
    }

    #[test]
    fn oversized_sweep_cell_is_rejected() {
        let cfg = small_experiment(vec![4]);
        let err = dataset_size_sweep(&cfg, &[1000]).unwrap_err();
        assert!(err.to_string().contains("exceeds"));
    }

    #[test]
    fn csv_and_jsonl_outputs_round_trip() {
        let cfg = small_experiment(vec![10, 11]);
        let table = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let results = dir.path().join("results.csv");
        let traces = dir.path().join("traces.jsonl");
        write_results_csv(&table, &results).unwrap();
        write_traces_jsonl(&table, &traces).unwrap();
        let text = std::fs::read_to_string(&results).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("learner,"));
        assert_eq!(lines.count(), table.rows.len());
        let tr = std::fs::read_to_string(&traces).unwrap();
        assert_eq!(tr.lines().count(), table.traces.len());
    }

    #[test]
    fn sweep_csv_orders_numeric_values_ascending() {
        let raw = vec![
            RunRecord {
                learner: "t_learner".into(),
                sweep_value: Some("1000".into()),
                seed: 0,
                pehe_in: 1.0,
                pehe_out: 1.0,
            },
            RunRecord {
                learner: "t_learner".into(),
                sweep_value: Some("250".into()),
                seed: 0,
                pehe_in: 2.0,
                pehe_out: 2.0,
            },
        ];
        let table = ResultsTable { rows: aggregate(&raw), raw, traces: vec![] };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_sweep_csv(&table, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with("250,"));
        assert!(lines[2].starts_with("1000,"));
    }

    #[test]
    fn training_failures_carry_learner_and_seed_context() {
        let mut cfg = small_experiment(vec![12]);
        cfg.train.max_steps = 5;
        // force a shape failure via a hidden size of zero
        cfg.train.hidden = vec![0];
        let err = run_experiment(&cfg).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("s_learner") && msg.contains("seed 12"), "got: {msg}");
    }
}
