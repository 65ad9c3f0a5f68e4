use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{ActionSpace, Advance, Environment, Info, Observation, ObservationSpec};
use crate::error::{Error, Result};
use crate::rng::{mix_seed, Rng};

use super::game::{observation_spec, rts_action_set, RtsAction, RtsConfig, RtsGame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RtsPolicy {
    Random,
    Idle,
    /// Keep the selected worker harvesting.
    Harvester,
}

impl RtsPolicy {
    pub fn act(self, game: &RtsGame, player: usize, rng: &mut Rng) -> usize {
        match self {
            RtsPolicy::Random => rng.index(RtsAction::ALL.len()),
            RtsPolicy::Idle => 0,
            RtsPolicy::Harvester => {
                let busy = game
                    .selected_worker(player)
                    .is_some_and(|w| !matches!(game.entities()[w].state, super::EntityState::Idle));
                if busy {
                    0
                } else {
                    RtsAction::HarvestNearest as usize
                }
            }
        }
    }
}

/// Deep RTS as a single-agent [`Environment`]: the agent controls player 0
/// against a built-in opponent. The reward is the amount of resources the agent
/// deposited this tick.
#[derive(Debug, Clone)]
pub struct DeepRtsEnv {
    config: RtsConfig,
    opponent: RtsPolicy,
    spec: ObservationSpec,
    actions: ActionSpace,
    seed: u64,
    episode: Option<u64>,
    game: Option<RtsGame>,
    opponent_rng: Rng,
}

impl DeepRtsEnv {
    pub fn new(config: RtsConfig, opponent: RtsPolicy, seed: u64) -> Result<Self> {
        config.validate()?;
        let map = config.build_map(seed)?;
        Ok(DeepRtsEnv {
            spec: observation_spec(&config, &map)?,
            actions: rts_action_set(),
            opponent,
            seed,
            episode: None,
            game: None,
            opponent_rng: Rng::new(seed),
            config,
        })
    }

    pub fn game(&self) -> Option<&RtsGame> {
        self.game.as_ref()
    }

    /// Write the per-player action histogram as `player,action,count` rows.
    pub fn write_action_histogram(&self, path: &Path) -> Result<()> {
        let game = self.game.as_ref().ok_or(Error::InvalidConfig("no game to report".into()))?;
        write_action_histogram(game, path)
    }
}

pub fn write_action_histogram(game: &RtsGame, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["player", "action", "count"])?;
    for p in 0..2 {
        for (a, count) in RtsAction::ALL.iter().zip(game.action_histogram(p)) {
            w.write_record([p.to_string(), a.label().to_string(), count.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

impl Environment for DeepRtsEnv {
    fn action_space(&self) -> &ActionSpace {
        &self.actions
    }

    fn observation_spec(&self) -> ObservationSpec {
        self.spec
    }

    fn restart(&mut self, seed: Option<u64>) -> Result<()> {
        let episode = match (seed, self.episode) {
            (Some(s), _) => {
                self.seed = s;
                0
            }
            (None, None) => 0,
            (None, Some(e)) => e + 1,
        };
        self.episode = Some(episode);
        let map = self.config.build_map(self.seed)?;
        self.game = Some(RtsGame::new(self.config.clone(), map)?);
        self.opponent_rng = Rng::new(mix_seed(self.seed, episode));
        Ok(())
    }

    fn advance(&mut self, action: usize) -> Result<Advance> {
        let game = self.game.as_mut().ok_or(Error::SteppedTerminalEnv)?;
        self.actions.check(action)?;
        let opp = self.opponent.act(game, 1, &mut self.opponent_rng);
        let report = game.step([action, opp])?;
        Ok(Advance { reward: report.deposited[0] as f64, terminal: report.terminal })
    }

    fn observe(&self) -> Result<Observation> {
        let game = self.game.as_ref().ok_or(Error::InvalidConfig("reset before observe".into()))?;
        Ok(game.observe(0, self.spec))
    }

    fn is_terminal(&self) -> bool {
        self.game.as_ref().is_none_or(|g| g.is_terminal())
    }

    fn info(&self) -> Info {
        let mut info = Info::new();
        if let Some(g) = &self.game {
            let names = ["lumber", "gold", "oil", "food", "units"];
            let aux = g.aux_vector(0);
            for (i, n) in names.iter().enumerate() {
                info.insert(format!("aux.own_{n}"), aux[i]);
                info.insert(format!("aux.enemy_{n}"), aux[5 + i]);
            }
            let s = g.scoreboard(0);
            info.insert("resource_count".into(), s.resource_count as f64);
            info.insert("score".into(), s.score());
            info.insert("invalid_actions".into(), g.rejected_actions(0) as f64);
            info.insert("tick".into(), g.tick() as f64);
        }
        info
    }

    fn render(&self) -> Option<String> {
        self.game.as_ref().map(RtsGame::render)
    }
}
