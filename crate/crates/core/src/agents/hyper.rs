use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{LossSpec, OptimizerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayLaw {
    #[default]
    LinearPerEpisode,
    ExponentialPerEpisode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub loss: LossSpec,
    pub optimizer: OptimizerKind,
    pub batch_size: usize,
    pub memory_size: usize,
    pub epsilon_min: f64,
    pub epsilon_max: f64,
    pub epsilon_start: f64,
    pub epsilon_decay: f64,
    pub decay_law: DecayLaw,
    /// Refresh a frozen target network every this many train steps; 0 disables it.
    pub target_update: u64,
    /// Hidden width of the default DQN network.
    pub hidden: usize,
    /// Gradient steps per environment step once the buffer holds a batch.
    pub train_every: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 1e-4,
            gamma: 0.99,
            loss: LossSpec::Huber { delta: 1.0 },
            optimizer: OptimizerKind::Adam,
            batch_size: 32,
            memory_size: 1_000_000,
            epsilon_min: 0.10,
            epsilon_max: 1.0,
            epsilon_start: 1.0,
            epsilon_decay: 0.005,
            decay_law: DecayLaw::LinearPerEpisode,
            target_update: 0,
            hidden: 64,
            train_every: 1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::InvalidConfig(format!("hyperparameter `{field}` {why}")));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha", "must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma", "must lie in [0, 1]");
        }
        if !(0.0 <= self.epsilon_min
            && self.epsilon_min <= self.epsilon_start
            && self.epsilon_start <= self.epsilon_max
            && self.epsilon_max <= 1.0)
        {
            return bad("epsilon_start", "must satisfy 0 <= epsilon_min <= epsilon_start <= epsilon_max <= 1");
        }
        if !(self.epsilon_decay >= 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon_decay", "must lie in [0, 1]");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be at least 1");
        }
        if self.memory_size == 0 {
            return bad("memory_size", "must be at least 1");
        }
        if self.hidden == 0 {
            return bad("hidden", "must be at least 1");
        }
        if self.train_every == 0 {
            return bad("train_every", "must be at least 1");
        }
        self.loss.validate()
    }

    pub fn optimizer_spec(&self) -> OptimizerSpec {
        match self.optimizer {
            OptimizerKind::Adam => OptimizerSpec::adam(self.alpha),
            OptimizerKind::Sgd => OptimizerSpec::Sgd { lr: self.alpha },
        }
    }
}

/// Exploration rate for an episode index, clamped to `[epsilon_min, epsilon_max]`.
pub fn epsilon_at(params: &Hyperparams, episode: u64) -> f64 {
    let raw = match params.decay_law {
        DecayLaw::LinearPerEpisode => params.epsilon_start - params.epsilon_decay * episode as f64,
        DecayLaw::ExponentialPerEpisode => {
            params.epsilon_start * (1.0 - params.epsilon_decay).powf(episode as f64)
        }
    };
    raw.clamp(params.epsilon_min, params.epsilon_max)
}
