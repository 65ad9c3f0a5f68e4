use std::collections::HashMap;

use crate::env::{Agent, Observation, Transition};
use crate::error::{Error, Result};
use crate::neural::argmax;
use crate::rng::Rng;

use super::hyper::{epsilon_at, Hyperparams};

/// ε-greedy choice: uniform with probability `epsilon`, otherwise the argmax
/// with ties broken toward the lowest index.
pub fn select_action(q: &[f64], epsilon: f64, rng: &mut Rng) -> usize {
    if rng.chance(epsilon) {
        rng.index(q.len())
    } else {
        argmax(q)
    }
}

/// Q-values keyed by a state key; unseen entries read as zero.
#[derive(Debug, Clone)]
pub struct QTable {
    actions: usize,
    table: HashMap<u64, Vec<f64>>,
}

impl QTable {
    pub fn new(actions: usize) -> Result<Self> {
        if actions == 0 {
            return Err(Error::InvalidConfig("q-table needs at least one action".into()));
        }
        Ok(QTable { actions, table: HashMap::new() })
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn values(&self, state: u64) -> Vec<f64> {
        self.table.get(&state).cloned().unwrap_or_else(|| vec![0.0; self.actions])
    }

    pub fn get(&self, state: u64, action: usize) -> f64 {
        self.table.get(&state).map_or(0.0, |v| v[action])
    }

    pub fn set(&mut self, state: u64, action: usize, value: f64) {
        let n = self.actions;
        self.table.entry(state).or_insert_with(|| vec![0.0; n])[action] = value;
    }

    pub fn max_value(&self, state: u64) -> f64 {
        self.table.get(&state).map_or(0.0, |v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// `Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))`, with the
    /// bootstrap term dropped on terminal transitions. Returns the new value.
    #[allow(clippy::too_many_arguments)]
    pub fn q_update(
        &mut self,
        s: u64,
        a: usize,
        r: f64,
        s_next: u64,
        terminal: bool,
        alpha: f64,
        gamma: f64,
    ) -> Result<f64> {
        if a >= self.actions {
            return Err(Error::InvalidAction { action: a, count: self.actions });
        }
        let future = if terminal { 0.0 } else { self.max_value(s_next) };
        let old = self.get(s, a);
        let new = old + alpha * (r + gamma * future - old);
        self.set(s, a, new);
        Ok(new)
    }
}

/// Tabular Q-learning agent keyed by the observation's byte hash.
#[derive(Debug, Clone)]
pub struct TabularAgent {
    pub table: QTable,
    pub params: Hyperparams,
    rng: Rng,
    episode: u64,
    epsilon: f64,
}

impl TabularAgent {
    pub fn new(actions: usize, params: Hyperparams, seed: u64) -> Result<Self> {
        params.validate()?;
        let epsilon = epsilon_at(&params, 0);
        Ok(TabularAgent { table: QTable::new(actions)?, params, rng: Rng::new(seed), episode: 0, epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    /// Greedy action with no exploration.
    pub fn greedy(&self, observation: &Observation) -> usize {
        argmax(&self.table.values(observation.fingerprint()))
    }
}

impl Agent for TabularAgent {
    fn act(&mut self, observation: &Observation) -> Result<usize> {
        let q = self.table.values(observation.fingerprint());
        Ok(select_action(&q, self.epsilon, &mut self.rng))
    }

    fn observe(&mut self, t: &Transition) -> Result<()> {
        self.table.q_update(
            t.state.fingerprint(),
            t.action,
            t.reward,
            t.next_state.fingerprint(),
            t.terminal,
            self.params.alpha,
            self.params.gamma,
        )?;
        Ok(())
    }

    fn end_episode(&mut self) {
        self.episode += 1;
        self.epsilon = epsilon_at(&self.params, self.episode);
    }
}

/// Uniform random baseline.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    actions: usize,
    rng: Rng,
}

impl RandomAgent {
    pub fn new(actions: usize, seed: u64) -> Self {
        RandomAgent { actions: actions.max(1), rng: Rng::new(seed) }
    }
}

impl Agent for RandomAgent {
    fn act(&mut self, _observation: &Observation) -> Result<usize> {
        Ok(self.rng.index(self.actions))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_examples() {
        let mut q = QTable::new(2).unwrap();
        let v = q.q_update(1, 0, 1.0, 2, true, 0.1, 0.99).unwrap();
        assert!((v - 0.1).abs() < 1e-15);
        q.set(2, 1, 5.0);
        let before = q.get(1, 0);
        assert_eq!(q.q_update(1, 0, 3.0, 2, false, 0.0, 0.99).unwrap(), before);
        // non-terminal bootstraps from max over next state
        let v = q.q_update(3, 1, 0.0, 2, false, 1.0, 0.5).unwrap();
        assert_eq!(v, 2.5);
        assert!(q.q_update(3, 2, 0.0, 2, false, 1.0, 0.5).is_err());
    }

    #[test]
    fn two_state_chain_converges() {
        // s0 -> s1 reward 0, s1 -> goal reward 1, every action
        let mut q = QTable::new(2).unwrap();
        for _ in 0..2000 {
            for a in 0..2 {
                q.q_update(1, a, 1.0, 99, true, 0.5, 0.9).unwrap();
                q.q_update(0, a, 0.0, 1, false, 0.5, 0.9).unwrap();
            }
        }
        for a in 0..2 {
            assert!((q.get(0, a) - 0.9).abs() < 1e-6);
            assert!((q.get(1, a) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn greedy_selection_and_ties() {
        let mut rng = Rng::new(0);
        assert_eq!(select_action(&[1.0, 3.0, 2.0], 0.0, &mut rng), 1);
        assert_eq!(select_action(&[2.0, 2.0, 1.0], 0.0, &mut rng), 0);
        let mut counts = [0usize; 4];
        for _ in 0..100_000 {
            counts[select_action(&[0.0, 9.0, 0.0, 0.0], 1.0, &mut rng)] += 1;
        }
        for c in counts {
            let f = c as f64 / 100_000.0;
            assert!((0.24..=0.26).contains(&f), "{f}");
        }
    }
}
