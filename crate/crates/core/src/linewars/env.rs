use std::fs::OpenOptions;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{ActionSpace, Advance, Environment, Info, Observation, ObservationSpec};
use crate::error::{Error, Result};
use crate::rng::{mix_seed, Rng};

use super::config::DlwConfig;
use super::game::{observation_spec, DlwAction, LineWarsGame, Outcome};

/// Built-in controllers, used as the opponent of the single-agent wrapper and as
/// scripted baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DlwPolicy {
    Random,
    Idle,
    /// Buy the given unit kind whenever affordable.
    AlwaysSend(usize),
}

impl DlwPolicy {
    pub fn act(self, game: &LineWarsGame, player: usize, rng: &mut Rng) -> usize {
        match self {
            DlwPolicy::Random => game.action_space().sample(rng),
            DlwPolicy::Idle => 0,
            DlwPolicy::AlwaysSend(kind) => {
                let cost = game.config().units.get(kind).map_or(u32::MAX, |u| u.gold_cost);
                if game.player(player).gold >= cost {
                    game.encode(DlwAction::BuyUnit(kind)).unwrap_or(0)
                } else {
                    0
                }
            }
        }
    }
}

/// Deep Line Wars as a single-agent [`Environment`]: the agent plays player 0
/// against a built-in opponent policy.
///
/// The per-step reward is enemy health lost minus own health lost that tick.
#[derive(Debug, Clone)]
pub struct DeepLineWarsEnv {
    config: DlwConfig,
    opponent: DlwPolicy,
    spec: ObservationSpec,
    actions: ActionSpace,
    seed: u64,
    episode: Option<u64>,
    game: Option<LineWarsGame>,
    opponent_rng: Rng,
}

impl DeepLineWarsEnv {
    pub fn new(config: DlwConfig, opponent: DlwPolicy, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(DeepLineWarsEnv {
            spec: observation_spec(&config)?,
            actions: super::game::action_space(&config)?,
            opponent,
            seed,
            episode: None,
            game: None,
            opponent_rng: Rng::new(seed),
            config,
        })
    }

    pub fn game(&self) -> Option<&LineWarsGame> {
        self.game.as_ref()
    }

    /// Auxiliary economy vector for the agent.
    pub fn aux_vector(&self) -> Option<[f64; 8]> {
        self.game.as_ref().map(|g| g.aux_vector(0))
    }
}

impl Environment for DeepLineWarsEnv {
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
        let episode_seed = mix_seed(self.seed, episode);
        let mut rng = Rng::new(episode_seed);
        self.game = Some(LineWarsGame::new(self.config.clone(), rng.next_u64())?);
        self.opponent_rng = rng.split();
        Ok(())
    }

    fn advance(&mut self, action: usize) -> Result<Advance> {
        let game = self.game.as_mut().ok_or(Error::SteppedTerminalEnv)?;
        self.actions.check(action)?;
        let opp = self.opponent.act(game, 1, &mut self.opponent_rng);
        let report = game.step_pair(action, opp)?;
        Ok(Advance { reward: report.rewards[0], terminal: report.terminal })
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
            let aux = g.aux_vector(0);
            for (i, name) in ["health", "gold", "lumber", "income"].iter().enumerate() {
                info.insert(format!("aux.own_{name}"), aux[i]);
                info.insert(format!("aux.enemy_{name}"), aux[4 + i]);
            }
            info.insert("tick".into(), g.tick() as f64);
            if let Some(o) = g.outcome() {
                info.insert("winner".into(), outcome_code(o));
            }
        }
        info
    }

    fn render(&self) -> Option<String> {
        let g = self.game.as_ref()?;
        let (w, h) = (g.config().width, g.config().height);
        let mut rows = vec![vec!['.'; w]; h];
        for r in rows.iter_mut() {
            r[0] = '|';
            r[w - 1] = '|';
        }
        for t in g.towers() {
            rows[t.row][t.col] = if t.owner == 0 { 'T' } else { 't' };
        }
        for u in g.units() {
            rows[u.row][g.unit_abs_col(u)] = if u.owner == 0 { '>' } else { '<' };
        }
        let mut out = format!(
            "tick {} | p0 hp {} gold {} | p1 hp {} gold {}\n",
            g.tick(),
            g.player(0).health,
            g.player(0).gold,
            g.player(1).health,
            g.player(1).gold
        );
        for r in rows {
            out.extend(r);
            out.push('\n');
        }
        Some(out)
    }
}

/// `0`/`1` for a winner, `-1` for a draw.
pub fn outcome_code(o: Outcome) -> f64 {
    match o {
        Outcome::Winner(p) => p as f64,
        Outcome::Draw => -1.0,
    }
}

/// Play one full two-policy match and return the finished game.
pub fn play_match(config: &DlwConfig, seed: u64, policies: [DlwPolicy; 2]) -> Result<LineWarsGame> {
    let mut rng = Rng::new(seed);
    let mut game = LineWarsGame::new(config.clone(), rng.next_u64())?;
    let mut rngs = [rng.split(), rng.split()];
    while !game.is_terminal() {
        let a0 = policies[0].act(&game, 0, &mut rngs[0]);
        let a1 = policies[1].act(&game, 1, &mut rngs[1]);
        game.step_pair(a0, a1)?;
    }
    Ok(game)
}

pub const STATS_HEADER: [&str; 9] = [
    "seed",
    "winner",
    "ticks",
    "p0_units_bought",
    "p1_units_bought",
    "p0_leaks",
    "p1_leaks",
    "p0_kills",
    "p1_kills",
];

/// Append one finished match to a CSV file, writing the header when the file is new.
pub fn append_stats_csv(path: &Path, seed: u64, game: &LineWarsGame) -> Result<()> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(STATS_HEADER)?;
    }
    let s = game.stats();
    let winner = match game.outcome() {
        Some(Outcome::Winner(p)) => p.to_string(),
        Some(Outcome::Draw) => "draw".into(),
        None => "unfinished".into(),
    };
    w.write_record([
        seed.to_string(),
        winner,
        s.ticks.to_string(),
        s.units_bought[0].to_string(),
        s.units_bought[1].to_string(),
        s.leaks[0].to_string(),
        s.leaks[1].to_string(),
        s.kills[0].to_string(),
        s.kills[1].to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::ObsMode;

    #[test]
    fn always_send_beats_idle() {
        let game = play_match(&DlwConfig::default(), 4, [DlwPolicy::AlwaysSend(0), DlwPolicy::Idle]).unwrap();
        assert_eq!(game.outcome(), Some(Outcome::Winner(0)));
        assert_eq!(game.player(1).health, 0);
        assert!(game.stats().units_bought[0] >= 50);
    }

    #[test]
    fn env_replays_under_seed() {
        let cfg = DlwConfig { observation: ObsMode::Matrix, ..DlwConfig::default() };
        let run = || {
            let mut env = DeepLineWarsEnv::new(cfg.clone(), DlwPolicy::Random, 9).unwrap();
            let mut rng = Rng::new(1);
            let mut trace = vec![env.reset(None).unwrap().fingerprint()];
            for _ in 0..300 {
                let a = env.action_space().sample(&mut rng);
                let r = env.step(a).unwrap();
                trace.push(r.observation.fingerprint() ^ r.reward.to_bits());
                if r.terminal {
                    break;
                }
            }
            trace
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn stats_csv_appends_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dlw.csv");
        let cfg = DlwConfig { max_ticks: 50, ..DlwConfig::default() };
        for seed in 0..3 {
            let g = play_match(&cfg, seed, [DlwPolicy::Random, DlwPolicy::Random]).unwrap();
            append_stats_csv(&path, seed, &g).unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], STATS_HEADER.join(","));
        assert!(lines.iter().all(|l| l.split(',').count() == STATS_HEADER.len()));
    }
}
