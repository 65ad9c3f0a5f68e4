//! Tabular Q-learning, deep Q-networks with experience replay, and a random baseline.

mod dqn;
mod hyper;
mod replay;
mod tabular;

pub use dqn::{dqn_train_step, observation_tensor, DqnAgent, Experience};
pub use hyper::{epsilon_at, DecayLaw, Hyperparams, OptimizerKind};
pub use replay::{ReplayBuffer, SharedReplay};
pub use tabular::{select_action, QTable, RandomAgent, TabularAgent};
