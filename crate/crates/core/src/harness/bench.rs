use std::time::{Duration, Instant};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::rng::{mix_seed, Rng};

/// Length of the pre-generated action stream each worker cycles through.
const STREAM_LEN: usize = 1 << 16;
/// Ticks between clock reads.
const CHUNK: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub seconds: u64,
    pub workers: usize,
    pub warmup: Duration,
    /// Encode an observation every tick instead of stepping headless.
    pub observe: bool,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { seconds: 5, workers: 1, warmup: Duration::from_secs(1), observe: false, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerReport {
    /// Ticks completed in each measured second.
    pub per_second: Vec<u64>,
    pub median: f64,
    pub resets: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub scenario: String,
    pub observe: bool,
    pub workers: Vec<WorkerReport>,
    /// Sum of per-worker medians.
    pub aggregate: f64,
}

/// Seed-reproducible random action indices for a worker.
pub fn action_stream(seed: u64, worker: usize, actions: usize, len: usize) -> Vec<usize> {
    let mut rng = Rng::new(mix_seed(seed, worker as u64));
    (0..len).map(|_| rng.index(actions)).collect()
}

pub fn median(values: &[u64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

/// Step `env` with the action stream for `ticks` ticks, restarting on terminal.
/// Returns the number of restarts.
pub fn drive<E: Environment + ?Sized>(
    env: &mut E,
    stream: &[usize],
    cursor: &mut usize,
    ticks: u64,
    observe: bool,
) -> Result<u64> {
    let mut resets = 0;
    for _ in 0..ticks {
        let a = stream[*cursor];
        *cursor = (*cursor + 1) % stream.len();
        let terminal = if observe { env.step(a)?.terminal } else { env.advance(a)?.terminal };
        if terminal {
            env.restart(None)?;
            resets += 1;
        }
    }
    Ok(resets)
}

fn run_worker(env: &mut dyn Environment, opts: &BenchOptions, worker: usize) -> Result<WorkerReport> {
    let stream = action_stream(opts.seed, worker, env.action_space().count(), STREAM_LEN);
    env.restart(Some(mix_seed(opts.seed, worker as u64)))?;
    let mut cursor = 0;
    let mut resets = 0;
    let warm_end = Instant::now() + opts.warmup;
    while Instant::now() < warm_end {
        resets += drive(env, &stream, &mut cursor, CHUNK, opts.observe)?;
    }
    let mut per_second = Vec::with_capacity(opts.seconds as usize);
    let mut start = Instant::now();
    for _ in 0..opts.seconds {
        let end = start + Duration::from_secs(1);
        let mut ticks = 0;
        let mut now = Instant::now();
        while now < end {
            resets += drive(env, &stream, &mut cursor, CHUNK, opts.observe)?;
            ticks += CHUNK;
            now = Instant::now();
        }
        // scale to exactly one second of wall time
        let secs = (now - start).as_secs_f64();
        per_second.push((ticks as f64 / secs).round() as u64);
        start = now;
    }
    Ok(WorkerReport { median: median(&per_second), per_second, resets })
}

/// Measure steady-state ticks per second of a registered scenario, one
/// environment per worker thread.
pub fn bench_ticks(registry: &Registry, scenario: &str, opts: &BenchOptions) -> Result<BenchReport> {
    if opts.seconds == 0 {
        return Err(Error::InvalidConfig("benchmark duration must be at least 1 second".into()));
    }
    if opts.workers == 0 {
        return Err(Error::InvalidConfig("benchmark needs at least one worker".into()));
    }
    let sc = registry.get(scenario)?;
    let mut envs = (0..opts.workers).map(|_| sc.build()).collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<WorkerReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = envs
            .iter_mut()
            .enumerate()
            .map(|(w, env)| s.spawn(move || run_worker(env.as_mut(), opts, w)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("bench worker panicked")).collect()
    });
    let workers = results.into_iter().collect::<Result<Vec<_>>>()?;
    let aggregate = workers.iter().map(|w| w.median).sum();
    Ok(BenchReport { scenario: scenario.to_string(), observe: opts.observe, workers, aggregate })
}

impl BenchReport {
    pub fn render(&self) -> String {
        let mode = if self.observe { "with observation encoding" } else { "headless" };
        let mut out = format!("{} ({mode}), {} worker(s)\n", self.scenario, self.workers.len());
        for (i, w) in self.workers.iter().enumerate() {
            out += &format!("  worker {i}: median {:.0} ticks/s over {} samples, {} resets\n", w.median, w.per_second.len(), w.resets);
        }
        out += &format!("  aggregate: {:.0} ticks/s\n", self.aggregate);
        out
    }
}
