use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{DqnAgent, Hyperparams, RandomAgent, TabularAgent};
use crate::env::{run_episode_summary, Agent, Environment, Observation, Transition};
use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::rng::mix_seed;

/// Bumped whenever the metrics columns change.
pub const METRICS_SCHEMA_VERSION: u32 = 1;
pub const METRICS_HEADER: [&str; 6] = ["schema_version", "episode", "steps", "total_reward", "loss_mean", "epsilon"];
pub const SUMMARY_HEADER: [&str; 5] = ["agent", "episodes", "mean_reward", "final_mean_reward", "mean_steps"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Tabular,
    Dqn,
    Random,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Tabular => "tabular",
            AgentKind::Dqn => "dqn",
            AgentKind::Random => "random",
        }
    }
}

impl std::str::FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tabular" => Ok(AgentKind::Tabular),
            "dqn" => Ok(AgentKind::Dqn),
            "random" => Ok(AgentKind::Random),
            other => Err(Error::InvalidConfig(format!(
                "`agent` must be one of tabular, dqn, random (got `{other}`)"
            ))),
        }
    }
}

fn default_episodes() -> usize {
    100
}

fn default_max_steps() -> usize {
    1000
}

fn default_true() -> bool {
    true
}

/// A training run, usually read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub agent: AgentKind,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Also run a uniform random agent on the same environment seeds.
    #[serde(default = "default_true")]
    pub baseline: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub hyperparams: Hyperparams,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub agent: Option<AgentKind>,
    pub episodes: Option<usize>,
    pub seed: Option<u64>,
    pub max_steps: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scenario: impl Into<String>, agent: AgentKind) -> Self {
        ExperimentConfig {
            scenario: scenario.into(),
            agent,
            episodes: default_episodes(),
            seed: 0,
            max_steps: default_max_steps(),
            baseline: true,
            output_dir: None,
            hyperparams: Hyperparams::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(a) = o.agent {
            self.agent = a;
        }
        if let Some(e) = o.episodes {
            self.episodes = e;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(m) = o.max_steps {
            self.max_steps = m;
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = Some(d.clone());
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::InvalidConfig("`episodes` must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("`max_steps` must be at least 1".into()));
        }
        self.hyperparams.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub steps: usize,
    pub total_reward: f64,
    pub loss_mean: Option<f64>,
    /// Exploration rate in effect during the episode.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub agent: AgentKind,
    pub records: Vec<EpisodeRecord>,
}

impl RunStats {
    pub fn mean_reward(&self) -> f64 {
        mean(self.records.iter().map(|r| r.total_reward))
    }

    /// Mean over the last tenth of episodes (at least one).
    pub fn final_mean_reward(&self) -> f64 {
        let k = (self.records.len() / 10).max(1);
        mean(self.records[self.records.len() - k..].iter().map(|r| r.total_reward))
    }

    pub fn mean_steps(&self) -> f64 {
        mean(self.records.iter().map(|r| r.steps as f64))
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub scenario: String,
    pub agent: RunStats,
    pub baseline: Option<RunStats>,
}

impl ExperimentSummary {
    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.scenario);
        for run in std::iter::once(&self.agent).chain(self.baseline.as_ref()) {
            out += &format!(
                "  {:<8} episodes {:>6}  mean reward {:>12.3}  final mean {:>12.3}  mean steps {:>9.1}\n",
                run.agent.name(),
                run.records.len(),
                run.mean_reward(),
                run.final_mean_reward(),
                run.mean_steps()
            );
        }
        out
    }
}

enum AnyAgent {
    Tabular(TabularAgent),
    Dqn(Box<DqnAgent>),
    Random(RandomAgent),
}

impl AnyAgent {
    fn build(kind: AgentKind, env: &dyn Environment, params: &Hyperparams, seed: u64) -> Result<Self> {
        let n = env.action_space().count();
        Ok(match kind {
            AgentKind::Tabular => AnyAgent::Tabular(TabularAgent::new(n, params.clone(), seed)?),
            AgentKind::Dqn => AnyAgent::Dqn(Box::new(DqnAgent::new(env.observation_spec(), n, params.clone(), seed)?)),
            AgentKind::Random => AnyAgent::Random(RandomAgent::new(n, seed)),
        })
    }

    fn epsilon(&self) -> f64 {
        match self {
            AnyAgent::Tabular(a) => a.epsilon(),
            AnyAgent::Dqn(a) => a.epsilon(),
            AnyAgent::Random(_) => 1.0,
        }
    }

    fn inner(&mut self) -> &mut dyn Agent {
        match self {
            AnyAgent::Tabular(a) => a,
            AnyAgent::Dqn(a) => a.as_mut(),
            AnyAgent::Random(a) => a,
        }
    }
}

impl Agent for AnyAgent {
    fn act(&mut self, observation: &Observation) -> Result<usize> {
        self.inner().act(observation)
    }
    fn observe(&mut self, t: &Transition) -> Result<()> {
        self.inner().observe(t)
    }
    fn end_episode(&mut self) {
        self.inner().end_episode()
    }
    fn take_loss_mean(&mut self) -> Option<f64> {
        self.inner().take_loss_mean()
    }
}

fn train(registry: &Registry, config: &ExperimentConfig, kind: AgentKind, salt: u64) -> Result<RunStats> {
    let mut env = registry.get(&config.scenario)?.build_seeded(config.seed)?;
    let mut agent = AnyAgent::build(kind, env.as_ref(), &config.hyperparams, mix_seed(config.seed, salt))?;
    let mut records = Vec::with_capacity(config.episodes);
    for episode in 0..config.episodes {
        let epsilon = agent.epsilon();
        let log = run_episode_summary(&mut env, &mut agent, config.max_steps)?;
        records.push(EpisodeRecord {
            episode,
            steps: log.steps,
            total_reward: log.total_reward,
            loss_mean: agent.take_loss_mean(),
            epsilon,
        });
    }
    Ok(RunStats { agent: kind, records })
}

/// Train the configured agent, optionally run the random baseline on the same
/// environment seeds, and write CSVs when `output_dir` is set.
pub fn run_experiment(registry: &Registry, config: &ExperimentConfig) -> Result<ExperimentSummary> {
    config.validate()?;
    let agent = train(registry, config, config.agent, 1)?;
    let baseline = if config.baseline { Some(train(registry, config, AgentKind::Random, 2)?) } else { None };
    let summary = ExperimentSummary { scenario: config.scenario.clone(), agent, baseline };
    if let Some(dir) = &config.output_dir {
        write_outputs(dir, &summary)?;
    }
    Ok(summary)
}

pub fn write_metrics_csv(path: &Path, run: &RunStats) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(METRICS_HEADER)?;
    for r in &run.records {
        w.write_record([
            METRICS_SCHEMA_VERSION.to_string(),
            r.episode.to_string(),
            r.steps.to_string(),
            r.total_reward.to_string(),
            r.loss_mean.map(|l| l.to_string()).unwrap_or_default(),
            r.epsilon.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_outputs(dir: &Path, summary: &ExperimentSummary) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_metrics_csv(&dir.join("metrics.csv"), &summary.agent)?;
    if let Some(b) = &summary.baseline {
        write_metrics_csv(&dir.join("baseline.csv"), b)?;
    }
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record(SUMMARY_HEADER)?;
    for run in std::iter::once(&summary.agent).chain(summary.baseline.as_ref()) {
        w.write_record([
            run.agent.name().to_string(),
            run.records.len().to_string(),
            run.mean_reward().to_string(),
            run.final_mean_reward().to_string(),
            run.mean_steps().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
