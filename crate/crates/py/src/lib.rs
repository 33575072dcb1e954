//! Python bindings: dataset generation and I/O, learner training, effect
//! prediction, PEHE scoring, experiment tables and the gradient checker.
//!
//! Matrices cross the boundary as plain nested lists so the module works
//! without any Python-side dependencies.

use hyperite::config::parse_strategy;
use hyperite::data::{self, CausalDataset, CsvSchema, DgpConfig};
use hyperite::eval::{self, DataSource, ExperimentConfig, LearnerSetup, SweepAxis};
use hyperite::gradcheck::{self, Corruption};
use hyperite::learners::{self, LearnerKind, TrainConfig};
use ndarray::Array2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::path::PathBuf;

fn err(e: hyperite::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    if rows.is_empty() {
        return Err(PyValueError::new_err("matrix needs at least one row"));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("matrix rows must all have the same length"));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((flat.len() / d.max(1), d), flat)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn from_matrix(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Observational dataset: covariates, binary treatment, outcome, and (when
/// known) the true outcome surfaces and propensities.
#[pyclass(name = "Dataset")]
#[derive(Clone)]
struct PyDataset {
    inner: CausalDataset,
}

#[pymethods]
impl PyDataset {
    /// Draw a synthetic dataset with known counterfactual surfaces.
    #[staticmethod]
    #[pyo3(signature = (n=1000, d=10, confounding_strength=1.0, shared_structure=0.9,
                        noise_sd=0.5, binary_outcome=false, seed=0))]
    fn synthetic(
        n: usize,
        d: usize,
        confounding_strength: f64,
        shared_structure: f64,
        noise_sd: f64,
        binary_outcome: bool,
        seed: u64,
    ) -> PyResult<Self> {
        let cfg = DgpConfig { n, d, confounding_strength, shared_structure, noise_sd, binary_outcome };
        Ok(PyDataset { inner: data::generate_synthetic(&cfg, seed).map_err(err)? })
    }

    /// Load a CSV with columns x0..x{d-1}, t, y and optional mu0, mu1, pi.
    #[staticmethod]
    fn from_csv(path: PathBuf) -> PyResult<Self> {
        Ok(PyDataset { inner: data::load_csv(&path, &CsvSchema::default()).map_err(err)? })
    }

    #[pyo3(signature = (path, with_mu=true))]
    fn to_csv(&self, path: PathBuf, with_mu: bool) -> PyResult<()> {
        data::write_csv(&self.inner, &path, with_mu).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn n_treated(&self) -> usize {
        self.inner.n_treated()
    }

    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        from_matrix(&self.inner.x)
    }

    #[getter]
    fn t(&self) -> Vec<u8> {
        self.inner.t.clone()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.inner.y.clone()
    }

    #[getter]
    fn mu0(&self) -> Option<Vec<f64>> {
        self.inner.mu0_true.clone()
    }

    #[getter]
    fn mu1(&self) -> Option<Vec<f64>> {
        self.inner.mu1_true.clone()
    }

    #[getter]
    fn pi(&self) -> Option<Vec<f64>> {
        self.inner.pi_true.clone()
    }

    /// True per-row effects mu1 - mu0; raises when surfaces are unknown.
    fn true_effects(&self) -> PyResult<Vec<f64>> {
        self.inner.true_effects().map_err(err)
    }

    /// Seeded (train, test) split, stratified by treatment group.
    #[pyo3(signature = (test_frac, seed=0, stratify=true))]
    fn train_test_split(&self, test_frac: f64, seed: u64, stratify: bool) -> PyResult<(Self, Self)> {
        let (train, test) =
            data::train_test_split(&self.inner, test_frac, seed, stratify).map_err(err)?;
        Ok((PyDataset { inner: train }, PyDataset { inner: test }))
    }

    /// Seeded subsample of exactly `size` rows preserving the treated share.
    #[pyo3(signature = (size, seed=0))]
    fn subsample(&self, size: usize, seed: u64) -> PyResult<Self> {
        Ok(PyDataset { inner: data::stratified_subsample(&self.inner, size, seed).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n={}, d={}, treated={}, counterfactuals={})",
            self.inner.n(),
            self.inner.d(),
            self.inner.n_treated(),
            self.inner.has_counterfactuals()
        )
    }
}

/// Training protocol; defaults follow the reference configuration.
#[pyclass(name = "TrainConfig")]
#[derive(Clone)]
struct PyTrainConfig {
    inner: TrainConfig,
}

#[pymethods]
impl PyTrainConfig {
    #[new]
    #[pyo3(signature = (learning_rate=None, weight_decay=None, batch_size=None, patience=None,
                        val_frac=None, max_steps=None, hidden=None, trunk_hidden=None,
                        strategy=None, n_chunks=None, n_heads=None, embedding_size=None,
                        hypernet_dropout=None, spectral_norm=None, folds=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        learning_rate: Option<f64>,
        weight_decay: Option<f64>,
        batch_size: Option<usize>,
        patience: Option<usize>,
        val_frac: Option<f64>,
        max_steps: Option<usize>,
        hidden: Option<Vec<usize>>,
        trunk_hidden: Option<Vec<usize>>,
        strategy: Option<String>,
        n_chunks: Option<usize>,
        n_heads: Option<usize>,
        embedding_size: Option<usize>,
        hypernet_dropout: Option<f64>,
        spectral_norm: Option<bool>,
        folds: Option<usize>,
    ) -> PyResult<Self> {
        let mut cfg = TrainConfig::default();
        if let Some(v) = learning_rate {
            cfg.learning_rate = v;
        }
        if let Some(v) = weight_decay {
            cfg.weight_decay = v;
        }
        if let Some(v) = batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = patience {
            cfg.patience = v;
        }
        if let Some(v) = val_frac {
            cfg.val_frac = v;
        }
        if let Some(v) = max_steps {
            cfg.max_steps = v;
        }
        if let Some(v) = hidden {
            cfg.hidden = v;
        }
        if let Some(v) = trunk_hidden {
            cfg.trunk_hidden = v;
        }
        if let Some(name) = strategy {
            cfg.strategy = parse_strategy(&name, n_chunks, n_heads).map_err(err)?;
        }
        if embedding_size.is_some() {
            cfg.embedding_size = embedding_size;
        }
        if let Some(v) = hypernet_dropout {
            cfg.hypernet_dropout = v;
        }
        if let Some(v) = spectral_norm {
            cfg.spectral_norm = v;
        }
        if let Some(v) = folds {
            cfg.folds = v;
        }
        cfg.validate().map_err(err)?;
        Ok(PyTrainConfig { inner: cfg })
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "TrainConfig(learning_rate={}, weight_decay={}, batch_size={}, patience={}, \
             max_steps={}, hidden={:?}, trunk_hidden={:?}, strategy={}, spectral_norm={})",
            c.learning_rate,
            c.weight_decay,
            c.batch_size,
            c.patience,
            c.max_steps,
            c.hidden,
            c.trunk_hidden,
            c.strategy.name(),
            c.spectral_norm
        )
    }
}

/// A trained effect estimator.
#[pyclass(name = "FittedLearner")]
struct PyFittedLearner {
    inner: learners::FittedLearner,
}

#[pymethods]
impl PyFittedLearner {
    /// Per-row effect estimates tau-hat(x).
    fn predict_cate(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        self.inner.predict_cate(&to_matrix(x)?).map_err(err)
    }

    /// Learner label, e.g. "hyper_t_learner".
    #[getter]
    fn label(&self) -> String {
        self.inner.kind.label()
    }

    /// (component name, per-step validation losses) for every trained part.
    #[getter]
    fn traces(&self) -> Vec<(String, Vec<f64>)> {
        self.inner.traces.iter().map(|t| (t.name.clone(), t.val_losses.clone())).collect()
    }

    /// Number of weights in one generated / directly trained target network.
    #[getter]
    fn target_param_count(&self) -> usize {
        self.inner.target_param_count()
    }

    fn __repr__(&self) -> String {
        format!("FittedLearner(label={})", self.inner.kind.label())
    }
}

/// Train one learner. `kind` is a label like "s_learner", "t_learner",
/// "dr_learner", "ra_learner", "tarnet", optionally prefixed with "hyper_".
#[pyfunction]
#[pyo3(signature = (kind, dataset, config=None, seed=0))]
fn train(
    kind: &str,
    dataset: &PyDataset,
    config: Option<PyTrainConfig>,
    seed: u64,
) -> PyResult<PyFittedLearner> {
    let learner = LearnerKind::parse(kind).map_err(err)?;
    let cfg = config.map(|c| c.inner).unwrap_or_default();
    let fitted = learners::train(learner, &dataset.inner, &cfg, seed).map_err(err)?;
    Ok(PyFittedLearner { inner: fitted })
}

/// Root-mean-squared error between estimated and true effects.
#[pyfunction]
fn pehe(tau_hat: Vec<f64>, mu1_true: Vec<f64>, mu0_true: Vec<f64>) -> PyResult<f64> {
    eval::pehe(&tau_hat, &mu1_true, &mu0_true).map_err(err)
}

/// Run several learners over seeds on a synthetic source and aggregate.
/// Returns one dict per (learner, seed) pair plus a per-learner summary.
#[pyfunction]
#[pyo3(signature = (learners, seeds, n=1000, d=10, test_frac=0.3, config=None))]
fn experiment(
    py: Python<'_>,
    learners: Vec<String>,
    seeds: Vec<u64>,
    n: usize,
    d: usize,
    test_frac: f64,
    config: Option<PyTrainConfig>,
) -> PyResult<PyObject> {
    let setups: Vec<LearnerSetup> = learners
        .iter()
        .map(|l| LearnerKind::parse(l).map(LearnerSetup::new))
        .collect::<hyperite::Result<_>>()
        .map_err(err)?;
    let cfg = ExperimentConfig {
        learners: setups,
        source: DataSource::Synthetic(DgpConfig { n, d, ..DgpConfig::default() }),
        seeds,
        test_frac,
        sweep: SweepAxis::None,
        train: config.map(|c| c.inner).unwrap_or_default(),
    };
    let table = eval::run_experiment(&cfg).map_err(err)?;
    let rows = pyo3::types::PyList::empty_bound(py);
    for r in &table.rows {
        let d = pyo3::types::PyDict::new_bound(py);
        d.set_item("learner", &r.learner)?;
        d.set_item("runs", r.runs)?;
        d.set_item("pehe_in_mean", r.pehe_in_mean)?;
        d.set_item("pehe_in_se", r.pehe_in_se)?;
        d.set_item("pehe_out_mean", r.pehe_out_mean)?;
        d.set_item("pehe_out_se", r.pehe_out_se)?;
        rows.append(d)?;
    }
    Ok(rows.into())
}

/// Finite-difference gradient audit. Returns (suite, worst_rel_err,
/// checked, tolerance, passed) per suite row.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn gradient_report(seed: u64) -> PyResult<Vec<(String, f64, usize, f64, bool)>> {
    let report = gradcheck::run_report(seed, Corruption::None).map_err(err)?;
    Ok(report
        .rows
        .iter()
        .map(|r| (r.name.clone(), r.worst_rel_err, r.checked, r.tolerance, r.passed()))
        .collect())
}

#[pymodule]
fn hyperite_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyTrainConfig>()?;
    m.add_class::<PyFittedLearner>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(pehe, m)?)?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_report, m)?)?;
    m.add(
        "LEARNER_LABELS",
        vec![
            "s_learner",
            "t_learner",
            "dr_learner",
            "ra_learner",
            "tarnet",
            "hyper_s_learner",
            "hyper_t_learner",
            "hyper_dr_learner",
            "hyper_ra_learner",
            "hyper_tarnet",
        ],
    )?;
    m.add("STRATEGY_NAMES", hyperite::config::ALL_STRATEGY_NAMES.to_vec())?;
    Ok(())
}
