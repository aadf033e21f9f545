//! Run configuration: everything needed to reproduce an experiment from a
//! seed, serialized as a single JSON document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::ConstraintError;
use crate::data::{ColumnRef, DataError};
use crate::loss::{LossError, LossKind, PairWeighting, DEFAULT_KCL_MARGIN};
use crate::metrics::MetricsError;
use crate::network::{Activation, NetworkError};
use crate::optim::{OptimError, OptimizerKind};

/// Process exit codes used by the CLI.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure at epoch {epoch}, batch {batch}: {message}")]
    Numerical { epoch: usize, batch: usize, message: String },

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => EXIT_CONFIG,
            HarnessError::Numerical { .. } => EXIT_NUMERICAL,
            HarnessError::Io { .. } => EXIT_IO,
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        HarnessError::Io { path: path.display().to_string(), message: err.to_string() }
    }
}

impl From<NetworkError> for HarnessError {
    fn from(e: NetworkError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<LossError> for HarnessError {
    fn from(e: LossError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<OptimError> for HarnessError {
    fn from(e: OptimError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<ConstraintError> for HarnessError {
    fn from(e: ConstraintError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<MetricsError> for HarnessError {
    fn from(e: MetricsError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<DataError> for HarnessError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Io { path, message } => HarnessError::Io { path, message },
            other => HarnessError::Config(other.to_string()),
        }
    }
}

/// Where the data comes from: a generator (fully described by parameters)
/// or files on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    Blobs { k: usize, per_cluster: usize, d: usize, separation: f64, seed: u64 },
    TwoMoons { n: usize, noise_sigma: f64, seed: u64 },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_images: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test_labels: Option<PathBuf>,
    },
    Csv {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label_column: Option<ColumnRef>,
    },
}

/// Which data the final metrics are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSplit {
    /// A held-out test set: the `test_*` files for IDX data, an
    /// independently regenerated sample for generators.
    TestSplit,
    /// The training data itself (the unsupervised-clustering convention).
    TargetSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub kind: LossKind,
    /// Hinge margin; only meaningful for the KL baseline.
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub weighting: PairWeighting,
}

fn default_margin() -> f64 {
    DEFAULT_KCL_MARGIN
}

impl LossConfig {
    pub fn ccl() -> Self {
        LossConfig { kind: LossKind::Ccl, margin: DEFAULT_KCL_MARGIN, weighting: PairWeighting::Mean }
    }

    pub fn kcl(margin: f64) -> Self {
        LossConfig { kind: LossKind::Kcl, margin, weighting: PairWeighting::Mean }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    #[serde(default)]
    pub momentum: f64,
    /// Epochs at which the learning rate is multiplied by 0.1.
    #[serde(default)]
    pub milestones: Vec<usize>,
    /// Optional max-norm gradient clip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_clip: Option<f64>,
}

impl OptimizerConfig {
    pub fn sgd(learning_rate: f64, milestones: Vec<usize>) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Sgd,
            learning_rate,
            momentum: 0.0,
            milestones,
            grad_clip: None,
        }
    }

    pub fn adam(learning_rate: f64, milestones: Vec<usize>) -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adam,
            learning_rate,
            momentum: 0.0,
            milestones,
            grad_clip: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
    /// Oracle corruption stream; derived from the run seed when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A complete experiment description. Serializable, round-trippable, and
/// hashed into the run fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub hidden_dims: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    /// Output width of the network: the maximum number of clusters.
    pub k_out: usize,
    pub loss: LossConfig,
    /// When omitted, the recipe default applies: SGD lr 0.1 below 50
    /// outputs, Adam lr 0.001 at 50 or more.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerConfig>,
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub stratified: bool,
    #[serde(default)]
    pub standardize: bool,
    /// Constraint corruption; omit for clean ground-truth constraints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_split: Option<EvalSplit>,
}

fn default_activation() -> Activation {
    Activation::Relu
}

fn default_batch_size() -> usize {
    100
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, HarnessError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.k_out < 2 {
            return Err(HarnessError::Config(format!("k_out must be >= 2, got {}", self.k_out)));
        }
        if self.batch_size < 2 {
            return Err(HarnessError::Config(format!(
                "batch_size must be >= 2 for pair enumeration, got {}",
                self.batch_size
            )));
        }
        if self.loss.kind == LossKind::Kcl && self.loss.margin <= 0.0 {
            return Err(HarnessError::Config(format!(
                "kcl margin must be positive, got {}",
                self.loss.margin
            )));
        }
        if let Some(opt) = &self.optimizer {
            if opt.learning_rate <= 0.0 || !opt.learning_rate.is_finite() {
                return Err(HarnessError::Config(format!(
                    "learning_rate must be positive, got {}",
                    opt.learning_rate
                )));
            }
            if let Some(clip) = opt.grad_clip {
                if clip <= 0.0 {
                    return Err(HarnessError::Config(format!("grad_clip must be positive, got {clip}")));
                }
            }
        }
        if let Some(noise) = &self.noise {
            for rate in [noise.false_positive_rate, noise.false_negative_rate] {
                if !(0.0..=1.0).contains(&rate) {
                    return Err(HarnessError::Config(format!("noise rate {rate} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }

    /// The optimizer actually used: the explicit one, or the recipe default
    /// keyed on the output width (plain SGD for few clusters, Adam for the
    /// many-cluster regime).
    pub fn resolved_optimizer(&self) -> OptimizerConfig {
        self.optimizer.clone().unwrap_or_else(|| {
            if self.k_out >= 50 {
                OptimizerConfig::adam(0.001, vec![])
            } else {
                OptimizerConfig::sgd(0.1, vec![])
            }
        })
    }

    /// Eval policy: explicit, else test split for file-backed data and the
    /// target set for generators.
    pub fn resolved_eval_split(&self) -> EvalSplit {
        self.eval_split.unwrap_or(match self.dataset {
            DatasetSpec::Idx { .. } => EvalSplit::TestSplit,
            _ => EvalSplit::TargetSet,
        })
    }
}

/// FNV-1a 64 over the canonical JSON serialization: a deterministic run
/// identifier, stable across processes.
pub fn fingerprint(config: &RunConfig) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Names of the top-level config fields on which two configs differ.
/// Supports the controlled-comparison check: a loss ablation pair must
/// differ in `loss` alone.
pub fn config_field_diff(a: &RunConfig, b: &RunConfig) -> Vec<String> {
    let to_map = |c: &RunConfig| -> serde_json::Map<String, serde_json::Value> {
        match serde_json::to_value(c).expect("config serializes") {
            serde_json::Value::Object(map) => map,
            _ => unreachable!("config is a JSON object"),
        }
    };
    let ma = to_map(a);
    let mb = to_map(b);
    let mut fields: Vec<String> = ma
        .iter()
        .filter(|(k, v)| mb.get(*k) != Some(v))
        .map(|(k, _)| k.clone())
        .collect();
    for k in mb.keys() {
        if !ma.contains_key(k) && !fields.contains(k) {
            fields.push(k.clone());
        }
    }
    fields.sort();
    fields
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn base_config() -> RunConfig {
        RunConfig {
            dataset: DatasetSpec::Blobs { k: 4, per_cluster: 50, d: 2, separation: 8.0, seed: 1 },
            hidden_dims: vec![32, 32],
            activation: Activation::Relu,
            k_out: 4,
            loss: LossConfig::ccl(),
            optimizer: Some(OptimizerConfig::sgd(0.1, vec![100])),
            epochs: 10,
            batch_size: 50,
            stratified: false,
            standardize: false,
            noise: None,
            seed: 7,
            eval_split: None,
        }
    }

    #[test]
    fn json_round_trip() {
        let config = base_config();
        let text = config.to_json();
        let parsed = RunConfig::from_json(&text).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn fingerprint_is_content_addressed() {
        let a = base_config();
        let mut b = base_config();
        assert_eq!(fingerprint(&a), fingerprint(&b));
        b.seed = 8;
        assert_ne!(fingerprint(&a), fingerprint(&b));
    }

    #[test]
    fn validation_catches_bad_fields() {
        let mut c = base_config();
        c.k_out = 1;
        assert!(c.validate().is_err());
        let mut c = base_config();
        c.batch_size = 1;
        assert!(c.validate().is_err());
        let mut c = base_config();
        c.loss = LossConfig::kcl(-2.0);
        assert!(c.validate().is_err());
        let mut c = base_config();
        c.noise = Some(NoiseConfig { false_positive_rate: 1.2, false_negative_rate: 0.0, seed: None });
        assert!(c.validate().is_err());
    }

    #[test]
    fn parse_error_reports_config_error() {
        let err = RunConfig::from_json("{ not json").unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
    }

    #[test]
    fn recipe_default_optimizer_follows_output_width() {
        let mut c = base_config();
        c.optimizer = None;
        assert_eq!(c.resolved_optimizer().kind, OptimizerKind::Sgd);
        c.k_out = 50;
        assert_eq!(c.resolved_optimizer().kind, OptimizerKind::Adam);
        // explicit optimizer always wins
        c.optimizer = Some(OptimizerConfig::sgd(0.05, vec![]));
        assert_eq!(c.resolved_optimizer().kind, OptimizerKind::Sgd);
    }

    #[test]
    fn field_diff_isolates_the_loss_axis() {
        let a = base_config();
        let mut b = base_config();
        b.loss.kind = LossKind::Kcl;
        assert_eq!(config_field_diff(&a, &b), vec!["loss".to_string()]);
        assert!(config_field_diff(&a, &a).is_empty());
        let mut c = base_config();
        c.seed = 9;
        c.epochs = 11;
        assert_eq!(config_field_diff(&a, &c), vec!["epochs".to_string(), "seed".to_string()]);
    }

    #[test]
    fn eval_split_defaults() {
        let c = base_config();
        assert_eq!(c.resolved_eval_split(), EvalSplit::TargetSet);
        let mut c = base_config();
        c.dataset = DatasetSpec::Idx {
            images: "a".into(),
            labels: "b".into(),
            test_images: None,
            test_labels: None,
        };
        assert_eq!(c.resolved_eval_split(), EvalSplit::TestSplit);
    }
}
