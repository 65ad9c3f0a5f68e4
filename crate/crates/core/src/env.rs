//! The uniform environment contract shared by every game in the crate.
//!
//! An [`Environment`] is a reset/step state machine over a discrete
//! [`ActionSpace`]. Observations are row-major, channel-last `f32` tensors
//! with values in `[0, 1]`, shaped by an [`ObservationSpec`].
//!
//! `advance` is the headless step used by benchmarks: it moves the simulation
//! one tick without encoding an observation. `step` is `advance` followed by
//! `observe`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpace {
    labels: Vec<String>,
}

impl ActionSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidConfig("action space needs at least one action".into()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate action label `{l}`")));
            }
        }
        Ok(ActionSpace { labels })
    }

    pub fn count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, action: usize) -> Option<&str> {
        self.labels.get(action).map(String::as_str)
    }

    pub fn check(&self, action: usize) -> Result<()> {
        if action < self.count() {
            Ok(())
        } else {
            Err(Error::InvalidAction { action, count: self.count() })
        }
    }

    /// Uniform draw over `[0, count)`.
    pub fn sample(&self, rng: &mut Rng) -> usize {
        rng.index(self.count())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObsMode {
    RawImage,
    Matrix,
    #[serde(rename = "HeatmapRGB")]
    HeatmapRgb,
    HeatmapGray,
}

impl ObsMode {
    pub const ALL: [ObsMode; 4] =
        [ObsMode::RawImage, ObsMode::Matrix, ObsMode::HeatmapRgb, ObsMode::HeatmapGray];

    pub fn name(self) -> &'static str {
        match self {
            ObsMode::RawImage => "RawImage",
            ObsMode::Matrix => "Matrix",
            ObsMode::HeatmapRgb => "HeatmapRGB",
            ObsMode::HeatmapGray => "HeatmapGray",
        }
    }
}

impl fmt::Display for ObsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObsMode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown observation mode `{s}`")))
    }
}

/// Shape of an observation tensor: `height x width x channels`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ObservationSpec {
    pub mode: ObsMode,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
}

impl ObservationSpec {
    pub fn new(mode: ObsMode, width: usize, height: usize, channels: usize) -> Result<Self> {
        let ok = match mode {
            ObsMode::RawImage | ObsMode::HeatmapRgb => channels == 3,
            ObsMode::HeatmapGray => channels == 1,
            ObsMode::Matrix => channels >= 1,
        };
        if !ok || width == 0 || height == 0 {
            return Err(Error::InvalidConfig(format!(
                "{mode} observation cannot be {height}x{width}x{channels}"
            )));
        }
        Ok(ObservationSpec { mode, width, height, channels })
    }

    pub fn data_size(&self) -> usize {
        self.width * self.height * self.channels
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.height, self.width, self.channels]
    }

    #[inline]
    pub fn offset(&self, x: usize, y: usize, channel: usize) -> usize {
        (y * self.width + x) * self.channels + channel
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub spec: ObservationSpec,
    pub data: Vec<f32>,
}

impl Observation {
    pub fn zeros(spec: ObservationSpec) -> Self {
        Observation { spec, data: vec![0.0; spec.data_size()] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, channel: usize) -> f32 {
        self.data[self.spec.offset(x, y, channel)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, channel: usize, value: f32) {
        let i = self.spec.offset(x, y, channel);
        self.data[i] = value;
    }

    /// Sum of one channel plane.
    pub fn plane_sum(&self, channel: usize) -> f64 {
        self.data
            .iter()
            .skip(channel)
            .step_by(self.spec.channels)
            .map(|&v| v as f64)
            .sum()
    }

    /// Exact equality on the bit patterns, so `-0.0 != 0.0` and NaNs compare.
    pub fn bitwise_eq(&self, other: &Observation) -> bool {
        self.spec == other.spec
            && self.data.len() == other.data.len()
            && self.data.iter().zip(&other.data).all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// 64-bit FNV-1a over the little-endian bytes of the data.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.data {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

/// Diagnostics attached to a step. Agents must not learn from it.
pub type Info = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminal: bool,
    pub info: Info,
}

/// Outcome of a headless tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advance {
    pub reward: f64,
    pub terminal: bool,
}

pub trait Environment: Send {
    fn action_space(&self) -> &ActionSpace;

    fn observation_spec(&self) -> ObservationSpec;

    /// Reset without encoding an observation. With a seed, the initial state is a
    /// pure function of the configuration and that seed.
    fn restart(&mut self, seed: Option<u64>) -> Result<()>;

    /// Advance one tick without encoding an observation.
    fn advance(&mut self, action: usize) -> Result<Advance>;

    fn observe(&self) -> Result<Observation>;

    fn is_terminal(&self) -> bool;

    fn info(&self) -> Info {
        Info::new()
    }

    /// Plain-text frame, when the environment has one.
    fn render(&self) -> Option<String> {
        None
    }

    fn reset(&mut self, seed: Option<u64>) -> Result<Observation> {
        self.restart(seed)?;
        self.observe()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        let Advance { reward, terminal } = self.advance(action)?;
        Ok(StepResult { observation: self.observe()?, reward, terminal, info: self.info() })
    }
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn action_space(&self) -> &ActionSpace {
        (**self).action_space()
    }
    fn observation_spec(&self) -> ObservationSpec {
        (**self).observation_spec()
    }
    fn restart(&mut self, seed: Option<u64>) -> Result<()> {
        (**self).restart(seed)
    }
    fn advance(&mut self, action: usize) -> Result<Advance> {
        (**self).advance(action)
    }
    fn observe(&self) -> Result<Observation> {
        (**self).observe()
    }
    fn is_terminal(&self) -> bool {
        (**self).is_terminal()
    }
    fn info(&self) -> Info {
        (**self).info()
    }
    fn render(&self) -> Option<String> {
        (**self).render()
    }
    fn reset(&mut self, seed: Option<u64>) -> Result<Observation> {
        (**self).reset(seed)
    }
    fn step(&mut self, action: usize) -> Result<StepResult> {
        (**self).step(action)
    }
}

/// One `(s, a, r, s', terminal)` record.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Observation,
    pub action: usize,
    pub reward: f64,
    pub next_state: Observation,
    pub terminal: bool,
}

pub trait Agent {
    fn act(&mut self, observation: &Observation) -> Result<usize>;

    /// Called once per transition, in order.
    fn observe(&mut self, _transition: &Transition) -> Result<()> {
        Ok(())
    }

    fn end_episode(&mut self) {}

    /// Mean training loss since the last call, if the agent trains a network.
    fn take_loss_mean(&mut self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Default)]
pub struct EpisodeLog {
    pub total_reward: f64,
    pub steps: usize,
    pub reached_terminal: bool,
    pub transitions: Vec<Transition>,
}

/// Reset, then act/step/observe until terminal or `max_steps` ticks.
pub fn run_episode<E, A>(env: &mut E, agent: &mut A, max_steps: usize) -> Result<EpisodeLog>
where
    E: Environment + ?Sized,
    A: Agent + ?Sized,
{
    drive_episode(env, agent, max_steps, true)
}

/// Like [`run_episode`] but drops the transition list.
pub fn run_episode_summary<E, A>(env: &mut E, agent: &mut A, max_steps: usize) -> Result<EpisodeLog>
where
    E: Environment + ?Sized,
    A: Agent + ?Sized,
{
    drive_episode(env, agent, max_steps, false)
}

fn drive_episode<E, A>(env: &mut E, agent: &mut A, max_steps: usize, keep: bool) -> Result<EpisodeLog>
where
    E: Environment + ?Sized,
    A: Agent + ?Sized,
{
    if max_steps == 0 {
        return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
    }
    let mut state = env.reset(None)?;
    let mut log = EpisodeLog::default();
    while log.steps < max_steps {
        let action = agent.act(&state)?;
        let step = env.step(action)?;
        log.steps += 1;
        log.total_reward += step.reward;
        let transition = Transition {
            state,
            action,
            reward: step.reward,
            next_state: step.observation,
            terminal: step.terminal,
        };
        agent.observe(&transition)?;
        if step.terminal {
            log.reached_terminal = true;
        }
        state = transition.next_state.clone();
        if keep {
            log.transitions.push(transition);
        }
        if step.terminal {
            break;
        }
    }
    agent.end_episode();
    Ok(log)
}
