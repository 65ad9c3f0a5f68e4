use crate::env::{Agent, Observation, ObservationSpec, Transition};
use crate::error::{Error, Result};
use crate::neural::{Network, NetworkSpec, Optimizer, Tensor};
use crate::rng::Rng;

use super::hyper::{epsilon_at, Hyperparams};
use super::replay::ReplayBuffer;
use super::tabular::select_action;

/// Replay entry with observations already converted to network input.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: Tensor,
    pub action: usize,
    pub reward: f64,
    pub next_state: Tensor,
    pub terminal: bool,
}

impl Experience {
    pub fn from_transition(t: &Transition) -> Self {
        Experience {
            state: observation_tensor(&t.state),
            action: t.action,
            reward: t.reward,
            next_state: observation_tensor(&t.next_state),
            terminal: t.terminal,
        }
    }
}

pub fn observation_tensor(obs: &Observation) -> Tensor {
    let shape = obs.spec.shape().to_vec();
    Tensor::new(shape, obs.data.iter().map(|&v| v as f64).collect()).expect("observation matches its spec")
}

/// One gradient step on a minibatch.
///
/// Targets are `r + gamma * max_a' Q(s', a')` (just `r` on terminal
/// transitions), evaluated with `target` when given and the online network
/// otherwise. Only the taken action's output carries error. Returns the mean
/// loss over the batch, measured before the update.
pub fn dqn_train_step(
    net: &mut Network,
    target: Option<&Network>,
    batch: &[Experience],
    params: &Hyperparams,
    opt: &mut Optimizer,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = batch.len() as f64;
    let mut targets = Vec::with_capacity(batch.len());
    for e in batch {
        let y = if e.terminal {
            e.reward
        } else {
            let q_next = match target {
                Some(t) => t.predict(&e.next_state)?,
                None => net.predict(&e.next_state)?,
            };
            e.reward + params.gamma * q_next.data().iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };
        targets.push(y);
    }
    net.zero_grad();
    let mut total = 0.0;
    for (e, &y) in batch.iter().zip(&targets) {
        let q = net.forward(&e.state)?;
        if e.action >= q.len() {
            return Err(Error::InvalidAction { action: e.action, count: q.len() });
        }
        let residual = q.data()[e.action] - y;
        total += params.loss.elem(residual);
        let mut grad = Tensor::zeros(q.shape());
        grad.data_mut()[e.action] = params.loss.elem_grad(residual) / n;
        net.backward(&grad)?;
    }
    net.apply_gradients(opt)?;
    Ok(total / n)
}

/// Deep Q-network agent with uniform experience replay.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub net: Network,
    target: Option<Network>,
    opt: Optimizer,
    pub replay: ReplayBuffer<Experience>,
    pub params: Hyperparams,
    rng: Rng,
    episode: u64,
    epsilon: f64,
    env_steps: u64,
    train_steps: u64,
    losses: Vec<f64>,
}

impl DqnAgent {
    /// Agent with the default `Dense - ReLU - Dense` network.
    pub fn new(obs: ObservationSpec, actions: usize, params: Hyperparams, seed: u64) -> Result<Self> {
        let spec = NetworkSpec::mlp(&obs.shape(), params.hidden, actions);
        Self::with_network(spec, params, seed)
    }

    pub fn with_network(spec: NetworkSpec, params: Hyperparams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = Rng::new(seed);
        let net = Network::new(spec, rng.next_u64())?;
        let target = (params.target_update > 0).then(|| net.clone());
        Ok(DqnAgent {
            opt: Optimizer::new(params.optimizer_spec()),
            replay: ReplayBuffer::new(params.memory_size)?,
            epsilon: epsilon_at(&params, 0),
            target,
            net,
            params,
            rng,
            episode: 0,
            env_steps: 0,
            train_steps: 0,
            losses: Vec::new(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    pub fn q_values(&self, observation: &Observation) -> Result<Tensor> {
        self.net.predict(&observation_tensor(observation))
    }

    fn train(&mut self) -> Result<()> {
        let batch = self.replay.sample(self.params.batch_size, &mut self.rng)?;
        let loss = dqn_train_step(&mut self.net, self.target.as_ref(), &batch, &self.params, &mut self.opt)?;
        self.losses.push(loss);
        self.train_steps += 1;
        if let Some(t) = &mut self.target {
            if self.train_steps.is_multiple_of(self.params.target_update) {
                t.copy_weights_from(&self.net)?;
            }
        }
        Ok(())
    }
}

impl Agent for DqnAgent {
    fn act(&mut self, observation: &Observation) -> Result<usize> {
        let q = self.q_values(observation)?;
        Ok(select_action(q.data(), self.epsilon, &mut self.rng))
    }

    fn observe(&mut self, t: &Transition) -> Result<()> {
        self.replay.store(Experience::from_transition(t));
        self.env_steps += 1;
        if self.replay.len() >= self.params.batch_size && self.env_steps.is_multiple_of(self.params.train_every) {
            self.train()?;
        }
        Ok(())
    }

    fn end_episode(&mut self) {
        self.episode += 1;
        self.epsilon = epsilon_at(&self.params, self.episode);
    }

    fn take_loss_mean(&mut self) -> Option<f64> {
        if self.losses.is_empty() {
            return None;
        }
        let m = self.losses.iter().sum::<f64>() / self.losses.len() as f64;
        self.losses.clear();
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{LayerSpec, OptimizerSpec};

    fn one_hot(i: usize, n: usize) -> Tensor {
        let mut t = Tensor::zeros(&[n]);
        t.data_mut()[i] = 1.0;
        t
    }

    #[test]
    fn exact_terminal_target_is_a_fixed_point() {
        let spec = NetworkSpec { input_shape: vec![2], layers: vec![LayerSpec::Dense { input: 2, output: 2 }] };
        let mut net = Network::new(spec, 3).unwrap();
        let s = one_hot(0, 2);
        let q = net.predict(&s).unwrap();
        let e = Experience { state: s.clone(), action: 1, reward: q.data()[1], next_state: s, terminal: true };
        let before = net.to_bytes();
        let params = Hyperparams { loss: crate::neural::LossSpec::Mse, ..Hyperparams::default() };
        let mut opt = Optimizer::new(OptimizerSpec::Sgd { lr: 0.5 });
        let loss = dqn_train_step(&mut net, None, &[e], &params, &mut opt).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(net.to_bytes(), before);
    }

    #[test]
    fn zero_discount_targets_are_rewards() {
        let spec = NetworkSpec { input_shape: vec![3], layers: vec![LayerSpec::Dense { input: 3, output: 2 }] };
        let mut net = Network::new(spec, 1).unwrap();
        let params = Hyperparams { gamma: 0.0, loss: crate::neural::LossSpec::Mse, ..Hyperparams::default() };
        let mut opt = Optimizer::new(OptimizerSpec::Sgd { lr: 0.1 });
        let batch: Vec<Experience> = (0..3)
            .map(|i| Experience {
                state: one_hot(i, 3),
                action: i % 2,
                reward: i as f64 - 1.0,
                next_state: one_hot((i + 1) % 3, 3),
                terminal: false,
            })
            .collect();
        for _ in 0..2000 {
            dqn_train_step(&mut net, None, &batch, &params, &mut opt).unwrap();
        }
        for e in &batch {
            let q = net.predict(&e.state).unwrap();
            assert!((q.data()[e.action] - e.reward).abs() < 1e-6);
        }
        assert_eq!(dqn_train_step(&mut net, None, &[], &params, &mut opt).unwrap_err(), Error::EmptyBatch);
    }
}
