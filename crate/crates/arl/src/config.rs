//! Experiment configuration: one TOML file describing dataset, models, game
//! hyperparameters, post-hoc adversary, evaluation and outputs. The format
//! is documented in the README and frozen by the checked-in `configs/`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{LabeledDataset, MixtureConfig, Schema, UnknownCategory};
use crate::dynamics::{Frozen, GameForm, Variant};
use crate::error::{Error, Result};
use crate::eval::ObjectivePair;
use crate::nn::{Activation, OptKind};
use crate::training::{AdversaryConfig, ArlConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub dataset: Option<DatasetConfig>,
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default)]
    pub arl: ArlBlock,
    #[serde(default)]
    pub adversary: AdversaryBlock,
    #[serde(default)]
    pub eval: EvalBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub dynamics: Option<DynamicsBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetConfig {
    Mixture {
        #[serde(default = "default_samples_per_component")]
        samples_per_component: usize,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_means")]
        means: Vec<(f64, f64)>,
        #[serde(default = "default_assignment")]
        assignment: Vec<(usize, usize)>,
        #[serde(default = "default_split_fraction")]
        split_fraction: f64,
    },
    Csv {
        train_csv: PathBuf,
        #[serde(default)]
        test_csv: Option<PathBuf>,
        schema: PathBuf,
        #[serde(default = "default_split_fraction")]
        split_fraction: f64,
        #[serde(default)]
        split_seed: u64,
        /// "error" (default) or "zeros".
        #[serde(default = "default_unknown_category")]
        unknown_category: String,
    },
}

fn default_samples_per_component() -> usize {
    1000
}
fn default_sigma() -> f64 {
    0.3
}
fn default_means() -> Vec<(f64, f64)> {
    MixtureConfig::default().means
}
fn default_assignment() -> Vec<(usize, usize)> {
    MixtureConfig::default().assignment
}
fn default_split_fraction() -> f64 {
    0.8
}
fn default_unknown_category() -> String {
    "error".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelBlock {
    pub embedding_dim: usize,
    pub encoder_hidden: Vec<usize>,
    pub predictor_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub activation: Activation,
}

impl Default for ModelBlock {
    fn default() -> Self {
        ModelBlock {
            embedding_dim: 2,
            encoder_hidden: vec![8],
            predictor_hidden: vec![8],
            discriminator_hidden: vec![8],
            activation: Activation::Relu,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArlBlock {
    pub variant: Variant,
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// "adam" or "sgd".
    pub optimizer: String,
    pub momentum: f64,
    pub seed: u64,
    pub alternating: bool,
}

impl Default for ArlBlock {
    fn default() -> Self {
        ArlBlock {
            variant: Variant::Maxent,
            alpha: 0.1,
            epochs: 50,
            batch_size: 64,
            learning_rate: 1e-4,
            weight_decay: 0.0,
            optimizer: "adam".into(),
            momentum: 0.9,
            seed: 0,
            alternating: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdversaryBlock {
    pub hidden_dims: Vec<usize>,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for AdversaryBlock {
    fn default() -> Self {
        let d = AdversaryConfig::default();
        AdversaryBlock {
            hidden_dims: d.hidden_dims,
            max_epochs: d.max_epochs,
            patience: d.patience,
            batch_size: d.batch_size,
            learning_rate: d.learning_rate,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalBlock {
    /// "accuracy_accuracy" or "accuracy_entropy".
    pub objectives: String,
}

impl Default for EvalBlock {
    fn default() -> Self {
        EvalBlock {
            objectives: "accuracy_accuracy".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsBlock {
    pub variant: Variant,
    pub alpha: f64,
    /// "bilinear" or "quadratic".
    pub game_form: String,
    pub start: [f64; 3],
    /// Comma-separated subset of {w1,w2,w3}; "none" freezes nothing.
    pub frozen: String,
    pub dt: f64,
    pub steps: usize,
    pub grid_n: usize,
    pub grid_range: f64,
    pub record_stride: usize,
}

impl Default for DynamicsBlock {
    fn default() -> Self {
        DynamicsBlock {
            variant: Variant::Maxent,
            alpha: 1.0,
            game_form: "bilinear".into(),
            start: [0.008, 0.006, 0.004],
            frozen: "none".into(),
            dt: 0.1,
            steps: 100_000,
            grid_n: 30,
            grid_range: 0.01,
            record_stride: 100,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: ExperimentConfig = toml::from_str(&text).map_err(|e| {
            Error::Config(format!("{}: {}", path.display(), e.message()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.arl.alpha >= 0.0) {
            return Err(Error::Config(format!(
                "arl.alpha must be >= 0, got {}",
                self.arl.alpha
            )));
        }
        match self.arl.optimizer.as_str() {
            "adam" | "sgd" => {}
            other => {
                return Err(Error::Config(format!(
                    "arl.optimizer must be 'adam' or 'sgd', got '{other}'"
                )))
            }
        }
        self.objective_pair()?;
        if let Some(DatasetConfig::Csv {
            train_csv,
            test_csv,
            schema,
            split_fraction,
            unknown_category,
            ..
        }) = &self.dataset
        {
            for path in [Some(train_csv), test_csv.as_ref(), Some(schema)].into_iter().flatten() {
                if !path.exists() {
                    return Err(Error::Config(format!(
                        "dataset file not found: {}",
                        path.display()
                    )));
                }
            }
            if !(*split_fraction > 0.0 && *split_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "dataset.split_fraction must be in (0,1), got {split_fraction}"
                )));
            }
            match unknown_category.as_str() {
                "error" | "zeros" => {}
                other => {
                    return Err(Error::Config(format!(
                        "dataset.unknown_category must be 'error' or 'zeros', got '{other}'"
                    )))
                }
            }
        }
        if let Some(DatasetConfig::Mixture { split_fraction, .. }) = &self.dataset {
            if !(*split_fraction > 0.0 && *split_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "dataset.split_fraction must be in (0,1), got {split_fraction}"
                )));
            }
        }
        if let Some(d) = &self.dynamics {
            d.game_form.parse::<GameForm>()?;
            d.frozen.parse::<Frozen>()?;
            if !(d.dt > 0.0) {
                return Err(Error::Config(format!("dynamics.dt must be > 0, got {}", d.dt)));
            }
            if d.grid_n < 2 {
                return Err(Error::Config(format!(
                    "dynamics.grid_n must be >= 2, got {}",
                    d.grid_n
                )));
            }
        }
        Ok(())
    }

    pub fn optimizer_kind(&self) -> OptKind {
        match self.arl.optimizer.as_str() {
            "sgd" => OptKind::SgdMomentum {
                momentum: self.arl.momentum,
            },
            _ => OptKind::adam_default(),
        }
    }

    pub fn objective_pair(&self) -> Result<ObjectivePair> {
        match self.eval.objectives.as_str() {
            "accuracy_accuracy" => Ok(ObjectivePair::AccuracyAccuracy),
            "accuracy_entropy" => Ok(ObjectivePair::AccuracyEntropy),
            other => Err(Error::Config(format!(
                "eval.objectives must be 'accuracy_accuracy' or 'accuracy_entropy', got '{other}'"
            ))),
        }
    }

    /// Resolved training hyperparameters for module `training`.
    pub fn arl_config(&self) -> ArlConfig {
        ArlConfig {
            variant: self.arl.variant,
            alpha: self.arl.alpha,
            embedding_dim: self.model.embedding_dim,
            encoder_hidden: self.model.encoder_hidden.clone(),
            predictor_hidden: self.model.predictor_hidden.clone(),
            discriminator_hidden: self.model.discriminator_hidden.clone(),
            activation: self.model.activation,
            epochs: self.arl.epochs,
            batch_size: self.arl.batch_size,
            learning_rate: self.arl.learning_rate,
            weight_decay: self.arl.weight_decay,
            optimizer: self.optimizer_kind(),
            seed: self.arl.seed,
            alternating: self.arl.alternating,
        }
    }

    pub fn adversary_config(&self) -> AdversaryConfig {
        AdversaryConfig {
            hidden_dims: self.adversary.hidden_dims.clone(),
            max_epochs: self.adversary.max_epochs,
            patience: self.adversary.patience,
            batch_size: self.adversary.batch_size,
            learning_rate: self.adversary.learning_rate,
            seed: self.arl.seed,
        }
    }

    /// Loads/generates the dataset and produces standardized train/test
    /// splits (standardization fit on train only; CSV paths already
    /// validated).
    pub fn load_splits(&self) -> Result<(LabeledDataset, LabeledDataset)> {
        let dataset = self.dataset.as_ref().ok_or_else(|| {
            Error::Config("this command requires a [dataset] block".into())
        })?;
        match dataset {
            DatasetConfig::Mixture {
                samples_per_component,
                sigma,
                seed,
                means,
                assignment,
                split_fraction,
            } => {
                let full = crate::data::gen_mixture(&MixtureConfig {
                    means: means.clone(),
                    sigma: *sigma,
                    samples_per_component: *samples_per_component,
                    seed: *seed,
                    assignment: assignment.clone(),
                })?;
                crate::data::split(&full, *split_fraction, *seed)
            }
            DatasetConfig::Csv {
                train_csv,
                test_csv,
                schema,
                split_fraction,
                split_seed,
                unknown_category,
            } => {
                let schema = Schema::load(schema)?;
                let unknown = match unknown_category.as_str() {
                    "zeros" => UnknownCategory::Zeros,
                    _ => UnknownCategory::Error,
                };
                let (mut train, mut test) = match test_csv {
                    Some(test_csv) => (
                        crate::data::load_csv(train_csv, &schema, unknown)?,
                        crate::data::load_csv(test_csv, &schema, unknown)?,
                    ),
                    None => {
                        let full = crate::data::load_csv(train_csv, &schema, unknown)?;
                        crate::data::split(&full, *split_fraction, *split_seed)?
                    }
                };
                let standardizer = crate::data::Standardizer::fit(&train);
                standardizer.apply(&mut train);
                standardizer.apply(&mut test);
                Ok((train, test))
            }
        }
    }
}
