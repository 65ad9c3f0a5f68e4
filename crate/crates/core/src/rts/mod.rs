//! A small tick-based RTS: workers gather lumber, gold and oil and carry it to
//! a town hall. There is no combat; at the tick limit the player with the
//! larger resource count wins.
//!
//! Map text format: `.` grass, `F` forest, `G` gold mine, `O` oil,
//! `1`/`2` spawn tile (starting town hall) of player 0/1.

mod env;
mod game;
mod map;

pub use env::{write_action_histogram, DeepRtsEnv, RtsPolicy};
pub use game::{
    observation_spec, rts_action_set, Entity, EntityKind, EntityState, RtsAction, RtsConfig, RtsGame, RtsOutcome,
    RtsResources, RtsTickReport, Scoreboard, PLANES, POPULATION_CAP, RESOURCE_CAP,
};
pub use map::{Pos, ResourceKind, RtsMap, Tile, TileStocks};
