//! Declarative run configuration: a single TOML file with sections for the
//! data source, learner list, optimizer constants, experiment protocol and
//! output location. Unknown keys are rejected, and everything is validated
//! before any work starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::DgpConfig;
use crate::eval::{DataSource, ExperimentConfig, LearnerSetup, SweepAxis};
use crate::hypernet::GenerationStrategy;
use crate::learners::{LearnerKind, TrainConfig};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub data: DataSection,
    pub learners: Vec<LearnerSection>,
    pub training: TrainingSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: DataSection::default(),
            learners: vec![
                LearnerSection { kind: "t_learner".into(), ..LearnerSection::default() },
                LearnerSection {
                    kind: "t_learner".into(),
                    mode: "hyper".into(),
                    ..LearnerSection::default()
                },
            ],
            training: TrainingSection::default(),
            experiment: ExperimentSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    /// "synthetic" or "csv".
    pub source: String,
    pub n: usize,
    pub d: usize,
    pub confounding_strength: f64,
    pub shared_structure: f64,
    pub noise_sd: f64,
    pub binary_outcome: bool,
    /// Required when source = "csv".
    pub csv_path: Option<PathBuf>,
    /// Fraction held out as the test set by the experiment harness.
    pub test_frac: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        let dgp = DgpConfig::default();
        DataSection {
            source: "synthetic".into(),
            n: dgp.n,
            d: dgp.d,
            confounding_strength: dgp.confounding_strength,
            shared_structure: dgp.shared_structure,
            noise_sd: dgp.noise_sd,
            binary_outcome: dgp.binary_outcome,
            csv_path: None,
            test_frac: 0.3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnerSection {
    /// s_learner | t_learner | dr_learner | ra_learner | tarnet.
    pub kind: String,
    /// baseline | hyper.
    pub mode: String,
    /// generate_once | chunk_wise | layer_wise | split_head (hyper mode).
    pub strategy: Option<String>,
    pub n_chunks: Option<usize>,
    pub n_heads: Option<usize>,
    pub embedding_size: Option<usize>,
}

impl Default for LearnerSection {
    fn default() -> Self {
        LearnerSection {
            kind: "t_learner".into(),
            mode: "baseline".into(),
            strategy: None,
            n_chunks: None,
            n_heads: None,
            embedding_size: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub val_frac: f64,
    pub max_steps: usize,
    pub hidden: Vec<usize>,
    pub trunk_hidden: Vec<usize>,
    pub hypernet_dropout: f64,
    pub spectral_norm: bool,
    pub folds: usize,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainingSection {
            learning_rate: t.learning_rate,
            weight_decay: t.weight_decay,
            batch_size: t.batch_size,
            patience: t.patience,
            val_frac: t.val_frac,
            max_steps: t.max_steps,
            hidden: t.hidden,
            trunk_hidden: t.trunk_hidden,
            hypernet_dropout: t.hypernet_dropout,
            spectral_norm: t.spectral_norm,
            folds: t.folds,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub seeds: Vec<u64>,
    /// none | dataset_size | embedding_size | strategy.
    pub sweep: String,
    /// Values for the dataset_size / embedding_size axes.
    pub sweep_sizes: Vec<usize>,
    /// Strategy names for the strategy axis; empty means all four.
    pub sweep_strategies: Vec<String>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            seeds: (0..10).collect(),
            sweep: "none".into(),
            sweep_sizes: Vec::new(),
            sweep_strategies: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: PathBuf::from("out") }
    }
}

/// Resolve a strategy name ("generate_once", "chunk_wise", "layer_wise",
/// "split_head") with optional chunk/head counts (defaults 3 and 2).
pub fn parse_strategy(
    name: &str,
    n_chunks: Option<usize>,
    n_heads: Option<usize>,
) -> Result<GenerationStrategy> {
    match name {
        "generate_once" => Ok(GenerationStrategy::GenerateOnce),
        "chunk_wise" => Ok(GenerationStrategy::ChunkWise { n_chunks: n_chunks.unwrap_or(3) }),
        "layer_wise" => Ok(GenerationStrategy::LayerWise),
        "split_head" => Ok(GenerationStrategy::SplitHead { n_heads: n_heads.unwrap_or(2) }),
        _ => Err(Error::config(format!("unknown generation strategy '{name}'"))),
    }
}

pub const ALL_STRATEGY_NAMES: [&str; 4] =
    ["generate_once", "chunk_wise", "layer_wise", "split_head"];

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.data.source.as_str() {
            "synthetic" => self.dgp()?.validate()?,
            "csv" => {
                if self.data.csv_path.is_none() {
                    return Err(Error::config("data.source = \"csv\" requires data.csv_path"));
                }
            }
            other => {
                return Err(Error::config(format!(
                    "data.source must be \"synthetic\" or \"csv\", got '{other}'"
                )))
            }
        }
        if !(0.0..1.0).contains(&self.data.test_frac) || self.data.test_frac == 0.0 {
            return Err(Error::config("data.test_frac must lie in (0, 1)"));
        }
        if self.learners.is_empty() {
            return Err(Error::config("at least one [[learners]] entry is required"));
        }
        for l in &self.learners {
            l.resolve()?;
        }
        self.train_config()?.validate()?;
        if self.experiment.seeds.is_empty() {
            return Err(Error::config("experiment.seeds must be nonempty"));
        }
        self.sweep_axis()?;
        Ok(())
    }

    pub fn dgp(&self) -> Result<DgpConfig> {
        let dgp = DgpConfig {
            n: self.data.n,
            d: self.data.d,
            confounding_strength: self.data.confounding_strength,
            shared_structure: self.data.shared_structure,
            noise_sd: self.data.noise_sd,
            binary_outcome: self.data.binary_outcome,
        };
        dgp.validate()?;
        Ok(dgp)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let t = &self.training;
        let cfg = TrainConfig {
            learning_rate: t.learning_rate,
            weight_decay: t.weight_decay,
            batch_size: t.batch_size,
            patience: t.patience,
            val_frac: t.val_frac,
            max_steps: t.max_steps,
            hidden: t.hidden.clone(),
            trunk_hidden: t.trunk_hidden.clone(),
            strategy: GenerationStrategy::GenerateOnce,
            embedding_size: None,
            hypernet_dropout: t.hypernet_dropout,
            spectral_norm: t.spectral_norm,
            folds: t.folds,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sweep_axis(&self) -> Result<SweepAxis> {
        match self.experiment.sweep.as_str() {
            "none" => Ok(SweepAxis::None),
            "dataset_size" => {
                if self.experiment.sweep_sizes.is_empty() {
                    return Err(Error::config("dataset_size sweep needs experiment.sweep_sizes"));
                }
                Ok(SweepAxis::DatasetSize(self.experiment.sweep_sizes.clone()))
            }
            "embedding_size" => {
                if self.experiment.sweep_sizes.is_empty() {
                    return Err(Error::config("embedding_size sweep needs experiment.sweep_sizes"));
                }
                Ok(SweepAxis::EmbeddingSize(self.experiment.sweep_sizes.clone()))
            }
            "strategy" => {
                let names: Vec<String> = if self.experiment.sweep_strategies.is_empty() {
                    ALL_STRATEGY_NAMES.iter().map(|s| s.to_string()).collect()
                } else {
                    self.experiment.sweep_strategies.clone()
                };
                let list = names
                    .iter()
                    .map(|n| parse_strategy(n, None, None))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SweepAxis::Strategy(list))
            }
            other => Err(Error::config(format!("unknown sweep axis '{other}'"))),
        }
    }

    pub fn data_source(&self) -> Result<DataSource> {
        match self.data.source.as_str() {
            "synthetic" => Ok(DataSource::Synthetic(self.dgp()?)),
            "csv" => Ok(DataSource::Csv(
                self.data
                    .csv_path
                    .clone()
                    .ok_or_else(|| Error::config("data.csv_path missing"))?,
            )),
            other => Err(Error::config(format!("unknown data source '{other}'"))),
        }
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let learners = self
            .learners
            .iter()
            .map(LearnerSection::resolve)
            .collect::<Result<Vec<_>>>()?;
        let cfg = ExperimentConfig {
            learners,
            source: self.data_source()?,
            seeds: self.experiment.seeds.clone(),
            test_frac: self.data.test_frac,
            sweep: self.sweep_axis()?,
            train: self.train_config()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl LearnerSection {
    pub fn resolve(&self) -> Result<LearnerSetup> {
        let label = match self.mode.as_str() {
            "baseline" => self.kind.clone(),
            "hyper" => format!("hyper_{}", self.kind),
            other => {
                return Err(Error::config(format!(
                    "learner mode must be \"baseline\" or \"hyper\", got '{other}'"
                )))
            }
        };
        let kind = LearnerKind::parse(&label)?;
        let strategy = match &self.strategy {
            Some(name) => Some(parse_strategy(name, self.n_chunks, self.n_heads)?),
            None => None,
        };
        Ok(LearnerSetup { kind, strategy, embedding_size: self.embedding_size })
    }
}
