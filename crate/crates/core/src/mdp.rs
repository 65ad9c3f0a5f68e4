//! Small deterministic MDPs given as transition and reward tables.

use crate::env::{ActionSpace, Advance, Environment, ObsMode, Observation, ObservationSpec};
use crate::error::{Error, Result};

/// `next[s][a]` is the successor state, or `None` when taking `a` in `s` ends
/// the episode. Observations are a one-hot row over the states.
#[derive(Debug, Clone)]
pub struct TableMdp {
    next: Vec<Vec<Option<usize>>>,
    reward: Vec<Vec<f64>>,
    start: usize,
    state: usize,
    terminal: bool,
    actions: ActionSpace,
    spec: ObservationSpec,
}

impl TableMdp {
    pub fn new(next: Vec<Vec<Option<usize>>>, reward: Vec<Vec<f64>>, start: usize) -> Result<Self> {
        let n = next.len();
        let a = next.first().map_or(0, Vec::len);
        if n == 0 || a == 0 || start >= n {
            return Err(Error::InvalidConfig("mdp needs at least one state and action and a valid start".into()));
        }
        let bad_row = next.iter().any(|r| r.len() != a || r.iter().flatten().any(|&s| s >= n));
        if bad_row || reward.len() != n || reward.iter().any(|r| r.len() != a) {
            return Err(Error::InvalidConfig("mdp tables must be n x a with successors in range".into()));
        }
        Ok(TableMdp {
            actions: ActionSpace::new((0..a).map(|i| format!("a{i}")))?,
            spec: ObservationSpec::new(ObsMode::HeatmapGray, n, 1, 1)?,
            next,
            reward,
            start,
            state: start,
            terminal: false,
        })
    }

    pub fn states(&self) -> usize {
        self.next.len()
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn successor(&self, s: usize, a: usize) -> Option<usize> {
        self.next[s][a]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s][a]
    }

    /// Observation emitted in state `s`.
    pub fn encode(&self, s: usize) -> Observation {
        let mut obs = Observation::zeros(self.spec);
        obs.set(s, 0, 0, 1.0);
        obs
    }
}

impl Environment for TableMdp {
    fn action_space(&self) -> &ActionSpace {
        &self.actions
    }

    fn observation_spec(&self) -> ObservationSpec {
        self.spec
    }

    fn restart(&mut self, _seed: Option<u64>) -> Result<()> {
        self.state = self.start;
        self.terminal = false;
        Ok(())
    }

    fn advance(&mut self, action: usize) -> Result<Advance> {
        if self.terminal {
            return Err(Error::SteppedTerminalEnv);
        }
        self.actions.check(action)?;
        let reward = self.reward[self.state][action];
        match self.next[self.state][action] {
            Some(s) => self.state = s,
            None => self.terminal = true,
        }
        Ok(Advance { reward, terminal: self.terminal })
    }

    fn observe(&self) -> Result<Observation> {
        Ok(self.encode(self.state))
    }

    fn is_terminal(&self) -> bool {
        self.terminal
    }
}
