//! Deep Line Wars: a two-player lane-defence economy game.
//!
//! Each player sends mercenaries that walk along their row toward the enemy
//! base and builds towers on their own half to shoot the enemy's mercenaries.
//! A mercenary reaching the enemy base column takes one health point; a killed
//! one pays a bounty to the defender. Buying a mercenary raises the buyer's
//! passive income. The game ends when a health pool is empty or at the tick cap.
//!
//! Observations are always taken from one player's frame, with that player's
//! base on the left, so both seats see the game the same way.

mod config;
mod env;
mod game;

pub use config::{AuxCaps, DlwConfig, TowerKind, UnitKind};
pub use env::{append_stats_csv, outcome_code, play_match, DeepLineWarsEnv, DlwPolicy, STATS_HEADER};
pub use game::{
    action_space, observation_spec, Dir, DlwAction, DlwStats, GoldLedger, LineWarsGame, Outcome,
    PlayerState, TickReport, Tower, Unit,
};
