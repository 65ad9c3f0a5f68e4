use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Fixed-capacity FIFO experience memory with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    items: VecDeque<T>,
}

impl<T: Clone> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("replay capacity must be at least 1".into()));
        }
        Ok(ReplayBuffer { capacity, items: VecDeque::with_capacity(capacity.min(1 << 16)) })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Append, evicting the oldest entry when full.
    pub fn store(&mut self, item: T) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(item);
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    /// `n` uniform draws with replacement.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<Vec<T>> {
        Ok(self.sample_indices(n, rng)?.into_iter().map(|i| self.items[i].clone()).collect())
    }

    pub fn sample_indices(&self, n: usize, rng: &mut Rng) -> Result<Vec<usize>> {
        if self.items.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        if n == 0 {
            return Err(Error::EmptyBatch);
        }
        Ok((0..n).map(|_| rng.index(self.items.len())).collect())
    }
}

/// Thread-safe handle so several environment workers can feed one learner.
#[derive(Debug, Clone)]
pub struct SharedReplay<T> {
    inner: Arc<Mutex<ReplayBuffer<T>>>,
}

impl<T: Clone> SharedReplay<T> {
    pub fn new(capacity: usize) -> Result<Self> {
        Ok(SharedReplay { inner: Arc::new(Mutex::new(ReplayBuffer::new(capacity)?)) })
    }

    pub fn store(&self, item: T) {
        self.lock().store(item);
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.lock().is_empty()
    }

    /// Samples are drawn under one lock, so they come from a single snapshot.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<Vec<T>> {
        self.lock().sample(n, rng)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, ReplayBuffer<T>> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }
}
