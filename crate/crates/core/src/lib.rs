//! Grid-world game environments behind a shared gym-style interface, a small
//! neural network kernel, and Q-learning agents to train on them.

pub mod agents;
pub mod analysis;
pub mod env;
pub mod error;
pub mod harness;
pub mod linewars;
pub mod maze;
pub mod mdp;
pub mod neural;
pub mod registry;
pub mod rng;
pub mod rts;

pub use env::{Advance, Agent, ActionSpace, Environment, Info, ObsMode, Observation, ObservationSpec, StepResult, Transition};
pub use error::{Error, Result};
pub use registry::{EnvConfig, EnvKind, Registry, Scenario};
pub use rng::Rng;
