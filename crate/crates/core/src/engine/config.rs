use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minibatch size in pairs, or every pair in a single batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BatchRepr", into = "BatchRepr")]
pub enum BatchSize {
    Full,
    Pairs(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BatchRepr {
    Count(i64),
    Word(String),
}

impl TryFrom<BatchRepr> for BatchSize {
    type Error = String;

    fn try_from(r: BatchRepr) -> std::result::Result<Self, String> {
        match r {
            BatchRepr::Count(-1) => Ok(BatchSize::Full),
            BatchRepr::Count(n) if n > 0 => Ok(BatchSize::Pairs(n as usize)),
            BatchRepr::Count(n) => Err(format!("invalid batch size {n}")),
            BatchRepr::Word(w) => w.parse().map_err(|e: Error| e.to_string()),
        }
    }
}

impl From<BatchSize> for BatchRepr {
    fn from(b: BatchSize) -> Self {
        match b {
            BatchSize::Full => BatchRepr::Word("full".into()),
            BatchSize::Pairs(n) => BatchRepr::Count(n as i64),
        }
    }
}

impl fmt::Display for BatchSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BatchSize::Full => f.write_str("full"),
            BatchSize::Pairs(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for BatchSize {
    type Err = Error;

    /// Accepts a positive count, `full`, or `-1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("full") || s == "-1" {
            return Ok(BatchSize::Full);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(BatchSize::Pairs(n)),
            _ => Err(Error::InvalidArgument(format!("invalid batch size `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[serde(alias = "SGD")]
    Sgd,
    #[serde(alias = "ADAM")]
    Adam,
}

/// Hyperparameters of a single training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: BatchSize,
    /// Global gradient norm cap, applied after the Riemannian correction.
    pub max_grad_norm: f64,
    pub max_epochs: usize,
    /// Epochs without a new best average distortion before stopping.
    pub patience: usize,
    pub burn_in_epochs: usize,
    /// Learning rate divisor during burn-in.
    pub burn_in_factor: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Gradient workers per batch. Results are deterministic for a fixed count.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: BatchSize::Full,
            max_grad_norm: 50.0,
            max_epochs: 3000,
            patience: 200,
            burn_in_epochs: 0,
            burn_in_factor: 10.0,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidArgument(m));
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return fail(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(self.max_grad_norm > 0.0) {
            return fail(format!(
                "max_grad_norm must be positive, got {}",
                self.max_grad_norm
            ));
        }
        if self.max_epochs == 0 {
            return fail("max_epochs must be >= 1".into());
        }
        if self.patience > self.max_epochs {
            return fail(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            ));
        }
        if self.burn_in_epochs >= self.max_epochs {
            return fail(format!(
                "burn_in_epochs {} must be below max_epochs {}",
                self.burn_in_epochs, self.max_epochs
            ));
        }
        if !(self.burn_in_factor > 0.0) {
            return fail("burn_in_factor must be positive".into());
        }
        if let BatchSize::Pairs(0) = self.batch_size {
            return fail("batch size must be positive".into());
        }
        if self.workers == 0 {
            return fail("workers must be >= 1".into());
        }
        Ok(())
    }

    /// Defaults for the recommender task: plain Riemannian SGD with a
    /// 10-epoch burn-in, 500 epochs and a 50-epoch plateau window.
    pub fn recsys() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: BatchSize::Pairs(256),
            max_epochs: 500,
            patience: 50,
            burn_in_epochs: 10,
            optimizer: OptimizerKind::Sgd,
            ..Self::default()
        }
    }

    /// Defaults for shallow link prediction: full-batch Adam, 1000 epochs,
    /// stopping after 200 epochs without a lower dev loss.
    pub fn linkpred() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: BatchSize::Full,
            max_epochs: 1000,
            patience: 200,
            ..Self::default()
        }
    }

    /// Learning rate in effect during `epoch` (0-based).
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        if epoch < self.burn_in_epochs {
            self.learning_rate / self.burn_in_factor
        } else {
            self.learning_rate
        }
    }
}

/// Axes of a hyperparameter sweep, enumerated learning rate first, then
/// batch size, then gradient cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<BatchSize>,
    pub max_grad_norms: Vec<f64>,
}

impl SearchGrid {
    /// The reconstruction sweep: 3 learning rates x 4 batch sizes x 3 caps.
    pub fn reconstruction() -> Self {
        Self {
            learning_rates: vec![0.1, 0.01, 0.001],
            batch_sizes: vec![
                BatchSize::Pairs(512),
                BatchSize::Pairs(1024),
                BatchSize::Pairs(2048),
                BatchSize::Full,
            ],
            max_grad_norms: vec![10.0, 50.0, 250.0],
        }
    }

    /// A single grid point taken from `cfg`.
    pub fn single(cfg: &TrainConfig) -> Self {
        Self {
            learning_rates: vec![cfg.learning_rate],
            batch_sizes: vec![cfg.batch_size],
            max_grad_norms: vec![cfg.max_grad_norm],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.learning_rates.is_empty()
            || self.batch_sizes.is_empty()
            || self.max_grad_norms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.learning_rates.len() * self.batch_sizes.len() * self.max_grad_norms.len()
    }

    /// Every grid point applied on top of `base`, in enumeration order.
    pub fn configs(&self, base: &TrainConfig) -> Vec<TrainConfig> {
        let mut out = Vec::with_capacity(self.len());
        for &lr in &self.learning_rates {
            for &batch in &self.batch_sizes {
                for &clip in &self.max_grad_norms {
                    out.push(TrainConfig {
                        learning_rate: lr,
                        batch_size: batch,
                        max_grad_norm: clip,
                        ..base.clone()
                    });
                }
            }
        }
        out
    }
}
