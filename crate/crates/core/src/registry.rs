//! Named scenarios (`Kind-Variant-WxH`) and a registry that builds them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::env::{Environment, ObsMode};
use crate::error::{Error, Result};
use crate::linewars::{DeepLineWarsEnv, DlwConfig, DlwPolicy};
use crate::maze::{DeepMazeEnv, MazeConfig, MazeMode};
use crate::rts::{DeepRtsEnv, RtsConfig, RtsPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvKind {
    DeepMaze,
    DeepLineWars,
    DeepRtsLite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "env", rename_all = "snake_case")]
pub enum EnvConfig {
    DeepMaze(MazeConfig),
    DeepLineWars { game: DlwConfig, opponent: DlwPolicy },
    DeepRtsLite { game: RtsConfig, opponent: RtsPolicy },
}

impl EnvConfig {
    pub fn kind(&self) -> EnvKind {
        match self {
            EnvConfig::DeepMaze(_) => EnvKind::DeepMaze,
            EnvConfig::DeepLineWars { .. } => EnvKind::DeepLineWars,
            EnvConfig::DeepRtsLite { .. } => EnvKind::DeepRtsLite,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub config: EnvConfig,
    pub seed: u64,
}

impl Scenario {
    pub fn new(id: impl Into<String>, config: EnvConfig, seed: u64) -> Self {
        Scenario { id: id.into(), config, seed }
    }

    pub fn env_kind(&self) -> EnvKind {
        self.config.kind()
    }

    pub fn build(&self) -> Result<Box<dyn Environment>> {
        self.build_seeded(self.seed)
    }

    pub fn build_seeded(&self, seed: u64) -> Result<Box<dyn Environment>> {
        Ok(match &self.config {
            EnvConfig::DeepMaze(c) => Box::new(DeepMazeEnv::new(c.clone(), seed)?),
            EnvConfig::DeepLineWars { game, opponent } => Box::new(DeepLineWarsEnv::new(game.clone(), *opponent, seed)?),
            EnvConfig::DeepRtsLite { game, opponent } => Box::new(DeepRtsEnv::new(game.clone(), *opponent, seed)?),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    scenarios: BTreeMap<String, Scenario>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    pub fn register(&mut self, scenario: Scenario) -> Result<()> {
        if self.scenarios.contains_key(&scenario.id) {
            return Err(Error::DuplicateId(scenario.id));
        }
        self.scenarios.insert(scenario.id.clone(), scenario);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&Scenario> {
        self.scenarios.get(id).ok_or_else(|| Error::UnknownScenario(id.to_string()))
    }

    /// Ids in lexicographic order.
    pub fn ids(&self) -> Vec<&str> {
        self.scenarios.keys().map(String::as_str).collect()
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn build(&self, id: &str) -> Result<Box<dyn Environment>> {
        self.get(id)?.build()
    }

    /// Built-in scenarios for all three environments.
    pub fn with_defaults() -> Self {
        let mut r = Registry::new();
        for size in [7, 9, 11, 15, 25, 55] {
            let c = MazeConfig::new(size, size, MazeMode::Deterministic);
            r.register(Scenario::new(format!("DeepMaze-Deterministic-{size}x{size}"), EnvConfig::DeepMaze(c), 0))
                .expect("unique");
        }
        for size in [7, 11, 25] {
            let c = MazeConfig::new(size, size, MazeMode::Stochastic);
            r.register(Scenario::new(format!("DeepMaze-Stochastic-{size}x{size}"), EnvConfig::DeepMaze(c), 0))
                .expect("unique");
        }
        for (variant, mode) in [
            ("Gray", ObsMode::HeatmapGray),
            ("Rgb", ObsMode::HeatmapRgb),
            ("Matrix", ObsMode::Matrix),
            ("Image", ObsMode::RawImage),
        ] {
            let game = DlwConfig { observation: mode, ..DlwConfig::default() };
            let id = format!("DeepLineWars-{variant}-{}x{}", game.width, game.height);
            r.register(Scenario::new(id, EnvConfig::DeepLineWars { game, opponent: DlwPolicy::Random }, 0))
                .expect("unique");
        }
        for size in [10, 16] {
            let game = RtsConfig { width: size, height: size, ..RtsConfig::default() };
            let id = format!("DeepRtsLite-Resource-{size}x{size}");
            r.register(Scenario::new(id, EnvConfig::DeepRtsLite { game, opponent: RtsPolicy::Random }, 0))
                .expect("unique");
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maze(id: &str) -> Scenario {
        Scenario::new(id, EnvConfig::DeepMaze(MazeConfig::new(11, 11, MazeMode::Deterministic)), 0)
    }

    #[test]
    fn register_and_duplicate() {
        let mut r = Registry::new();
        r.register(maze("DeepMaze-Deterministic-11x11")).unwrap();
        assert_eq!(r.len(), 1);
        let err = r.register(maze("DeepMaze-Deterministic-11x11")).unwrap_err();
        assert_eq!(err, Error::DuplicateId("DeepMaze-Deterministic-11x11".into()));
    }

    #[test]
    fn listing_is_sorted() {
        let mut r = Registry::new();
        for id in ["c", "a", "b"] {
            r.register(maze(id)).unwrap();
        }
        assert_eq!(r.ids(), vec!["a", "b", "c"]);
        assert!(matches!(r.build("zzz"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn defaults_cover_every_kind_and_build() {
        let r = Registry::with_defaults();
        for kind in [EnvKind::DeepMaze, EnvKind::DeepLineWars, EnvKind::DeepRtsLite] {
            assert!(r.ids().iter().any(|id| r.get(id).unwrap().env_kind() == kind));
        }
        for id in r.ids() {
            let mut env = r.build(id).unwrap();
            let obs = env.reset(Some(1)).unwrap();
            assert_eq!(obs.spec, env.observation_spec(), "{id}");
            assert!(!env.is_terminal(), "{id}");
        }
    }
}
