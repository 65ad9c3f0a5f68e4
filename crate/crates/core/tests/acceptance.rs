//! One line per acceptance criterion. Runs as a plain binary so the lines show
//! up in `cargo test` output; exits nonzero if anything fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use common::grad::{check_loss, check_network, single, TOL as GRAD_TOL};
use common::{branch3, chain2, loop4, oracle_policy, value_iteration};
use deeparena_core::agents::{Hyperparams, TabularAgent};
use deeparena_core::analysis::{capsnet_param_count, image_to_gray_ratio, maze_state_space, repr_data_size, CapsNetSpec};
use deeparena_core::env::{run_episode_summary, Environment, ObsMode};
use deeparena_core::harness::{action_stream, bench_ticks, run_experiment, AgentKind, BenchOptions, ExperimentConfig};
use deeparena_core::linewars::{play_match, DlwConfig, DlwPolicy, Outcome};
use deeparena_core::neural::{argmax, Activation, LayerSpec, LossSpec};
use deeparena_core::rng::Rng;
use deeparena_core::rts::{RtsConfig, RtsGame};
use deeparena_core::Registry;

const TABULAR_Q_TOL: f64 = 1e-4;
const MASTERY_SEEDS: u64 = 5;
const MASTERY_EPISODES: usize = 2000;
const MASTERY_WINDOW: usize = 50;
const MASTERY_RATE: f64 = 0.95;
const DQN_SEEDS: u64 = 3;
const DQN_EPISODES: usize = 300;
const DQN_WINDOW: usize = 50;
const DQN_BUDGET: Duration = Duration::from_secs(600);
const BALANCE_GAMES: u64 = 500;
const BALANCE_RANGE: (f64, f64) = (0.42, 0.58);
const SEND_VS_IDLE_GAMES: u64 = 100;
const FUZZ_ACTIONS: usize = 100_000;
const MIN_TICKS_PER_SEC: f64 = 1_000_000.0;
const BENCH_SECONDS: u64 = 3;
const REPLAY_STEPS: usize = 400;

type Check = std::result::Result<String, String>;
type GradCase = Box<dyn Fn(u64) -> f64>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn capsnet_counts() -> Check {
    let expected = [
        (28, [20_992, 5_308_672, 2_359_296, 7_688_960]),
        (84, [20_992, 5_308_672, 75_759_616, 81_089_280]),
    ];
    let mut bad = Vec::new();
    for (size, want) in expected {
        let c = capsnet_param_count(&CapsNetSpec::square(size, 1)).map_err(|e| e.to_string())?;
        let got = [c.conv, c.primary_caps, c.capsule_layer, c.total];
        if got != want {
            bad.push(format!("{size}x{size}: got {got:?}, want {want:?}"));
        }
    }
    ensure(bad.is_empty(), if bad.is_empty() { "6 counts exact".into() } else { bad.join("; ") })
}

fn representation_sizes() -> Check {
    let cases = [
        (ObsMode::RawImage, [800, 600, 3], 1_440_000),
        (ObsMode::Matrix, [15, 10, 5], 750),
        (ObsMode::HeatmapRgb, [15, 10, 3], 450),
        (ObsMode::HeatmapGray, [15, 10, 1], 150),
    ];
    let mut got = Vec::new();
    for (mode, d, _) in cases {
        got.push(repr_data_size(mode, d[0], d[1], d[2]).map_err(|e| e.to_string())?);
    }
    let want: Vec<u64> = cases.iter().map(|c| c.2).collect();
    let ratio = image_to_gray_ratio();
    ensure(got == want && ratio == 9600, format!("sizes {got:?}, image/gray ratio {ratio}"))
}

fn state_space() -> Check {
    let binom2 = |n: u64| -> BigUint {
        let n = BigUint::from(n);
        &n * (&n - 1u32) / 2u32
    };
    if maze_state_space(7, 7) != 1176 {
        return Err(format!("7x7 gave {}", maze_state_space(7, 7)));
    }
    let sizes: Vec<usize> = (7..=55).step_by(2).collect();
    for &w in &sizes {
        for &h in &sizes {
            let got = BigUint::from(maze_state_space(w, h));
            if got != binom2((w * h) as u64) {
                return Err(format!("{w}x{h}: {got}"));
            }
        }
    }
    let square: Vec<u128> = sizes.iter().map(|&s| maze_state_space(s, s)).collect();
    let monotone = square.windows(2).all(|p| p[0] < p[1]);
    ensure(monotone, format!("{} sizes agree with the binomial oracle, 55x55 = {}", sizes.len() * sizes.len(), square.last().unwrap()))
}

fn gradients() -> Check {
    let mut cases: Vec<(String, GradCase)> = vec![
        ("dense".into(), Box::new(|s| check_network(single(&[4], LayerSpec::Dense { input: 4, output: 3 }), s))),
        (
            "conv".into(),
            Box::new(|s| {
                let stride = 1 + s as usize % 2;
                check_network(single(&[7, 6, 2], LayerSpec::Conv2d { in_ch: 2, out_ch: 3, kernel: 3, stride }), s)
            }),
        ),
        ("maxpool".into(), Box::new(|s| check_network(single(&[6, 6, 2], LayerSpec::MaxPool { kernel: 2, stride: 2 }), s))),
        ("avgpool".into(), Box::new(|s| check_network(single(&[6, 5, 3], LayerSpec::AvgPool { kernel: 3, stride: 1 }), s))),
        ("mse".into(), Box::new(|s| check_loss(LossSpec::Mse, s))),
        ("huber".into(), Box::new(|s| check_loss(LossSpec::Huber { delta: 1.0 }, s))),
    ];
    for f in [Activation::TanH, Activation::Sigmoid, Activation::ReLU, Activation::LeakyReLU] {
        cases.push((f.name().to_string(), Box::new(move |s| check_network(single(&[10], LayerSpec::Activation { function: f }), s))));
    }
    let mut worst: f64 = 0.0;
    for (name, case) in &cases {
        for seed in 0..20 {
            let e = case(seed);
            if !(e < GRAD_TOL) {
                return Err(format!("{name} seed {seed}: relative error {e:e}"));
            }
            worst = worst.max(e);
        }
    }
    Ok(format!("{} cases x 20 seeds, worst relative error {worst:.1e}", cases.len()))
}

fn tabular_convergence() -> Check {
    let gamma = 0.9;
    let params = Hyperparams {
        alpha: 0.5,
        gamma,
        epsilon_min: 1.0,
        epsilon_max: 1.0,
        epsilon_start: 1.0,
        epsilon_decay: 0.0,
        ..Hyperparams::default()
    };
    let mut worst: f64 = 0.0;
    for (name, mut m) in [("chain2", chain2()), ("branch3", branch3()), ("loop4", loop4())] {
        let mut agent = TabularAgent::new(2, params.clone(), 1).map_err(|e| e.to_string())?;
        for _ in 0..3000 {
            run_episode_summary(&mut m, &mut agent, 50).map_err(|e| e.to_string())?;
        }
        let oracle = value_iteration(&m, 2, gamma);
        let policy = oracle_policy(&oracle);
        for s in 0..m.states() {
            let q = agent.table.values(m.encode(s).fingerprint());
            for a in 0..2 {
                worst = worst.max((q[a] - oracle[s][a]).abs());
            }
            if argmax(&q) != policy[s] {
                return Err(format!("{name}: greedy action differs at state {s}"));
            }
        }
    }
    ensure(worst < TABULAR_Q_TOL, format!("3 MDPs, max |Q - Q*| = {worst:.1e}"))
}

fn maze_mastery(registry: &Registry) -> Check {
    let mut rates = Vec::new();
    for seed in 0..MASTERY_SEEDS {
        let mut c = ExperimentConfig::new("DeepMaze-Deterministic-9x9", AgentKind::Tabular);
        c.episodes = MASTERY_EPISODES;
        c.seed = seed;
        c.baseline = false;
        c.hyperparams = Hyperparams { alpha: 0.5, epsilon_min: 0.0, epsilon_decay: 0.001, ..Hyperparams::default() };
        let s = run_experiment(registry, &c).map_err(|e| e.to_string())?;
        let tail = &s.agent.records[MASTERY_EPISODES - MASTERY_WINDOW..];
        let optimal = tail.iter().filter(|r| r.total_reward == 0.0).count();
        rates.push(optimal as f64 / MASTERY_WINDOW as f64);
    }
    let ok = rates.iter().all(|&r| r >= MASTERY_RATE);
    ensure(ok, format!("optimal share of final {MASTERY_WINDOW} episodes per seed: {rates:?}"))
}

fn dqn_sanity(registry: &Registry) -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for seed in 0..DQN_SEEDS {
        let start = Instant::now();
        let mut c = ExperimentConfig::new("DeepMaze-Deterministic-7x7", AgentKind::Dqn);
        c.episodes = DQN_EPISODES;
        c.seed = seed;
        c.max_steps = 500;
        c.hyperparams = Hyperparams { alpha: 1e-3, memory_size: 10_000, epsilon_decay: 0.01, ..Hyperparams::default() };
        let s = run_experiment(registry, &c).map_err(|e| e.to_string())?;
        let tail = |recs: &[deeparena_core::harness::EpisodeRecord]| {
            recs[recs.len() - DQN_WINDOW..].iter().map(|r| r.total_reward).sum::<f64>() / DQN_WINDOW as f64
        };
        let agent = tail(&s.agent.records);
        let random = tail(&s.baseline.as_ref().unwrap().records);
        let took = start.elapsed();
        ok &= agent > random && took < DQN_BUDGET;
        lines.push(format!("seed {seed}: {agent:.1} vs random {random:.1} in {:.0}s", took.as_secs_f64()));
    }
    ensure(ok, lines.join(", "))
}

fn line_wars_balance() -> Check {
    let cfg = DlwConfig::default();
    let mut wins = [0u64; 2];
    for seed in 0..BALANCE_GAMES {
        let g = play_match(&cfg, seed, [DlwPolicy::Random, DlwPolicy::Random]).map_err(|e| e.to_string())?;
        if let Some(Outcome::Winner(p)) = g.outcome() {
            wins[p] += 1;
        }
    }
    let rate = wins[0] as f64 / BALANCE_GAMES as f64;
    let mut sender_wins = 0;
    for seed in 0..SEND_VS_IDLE_GAMES {
        let sender = (seed % 2) as usize;
        let mut policies = [DlwPolicy::Idle, DlwPolicy::Idle];
        policies[sender] = DlwPolicy::AlwaysSend(0);
        let g = play_match(&cfg, seed, policies).map_err(|e| e.to_string())?;
        if g.outcome() == Some(Outcome::Winner(sender)) {
            sender_wins += 1;
        }
    }
    let ok = (BALANCE_RANGE.0..=BALANCE_RANGE.1).contains(&rate) && sender_wins == SEND_VS_IDLE_GAMES;
    ensure(
        ok,
        format!(
            "random p0 win rate {rate:.3} ({}/{} wins, {} draws), sender won {sender_wins}/{SEND_VS_IDLE_GAMES}",
            wins[0],
            wins[1],
            BALANCE_GAMES - wins[0] - wins[1]
        ),
    )
}

fn rts_conservation() -> Check {
    let cfg = RtsConfig::default();
    let mut rng = Rng::new(2024);
    let mut game = RtsGame::new(cfg.clone(), cfg.build_map(1).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut games = 1;
    let mut deposited = 0u64;
    for i in 0..FUZZ_ACTIONS {
        if game.is_terminal() {
            let map = cfg.build_map(rng.next_u64()).map_err(|e| e.to_string())?;
            game = RtsGame::new(cfg.clone(), map).map_err(|e| e.to_string())?;
            games += 1;
        }
        let report = game.step([rng.index(9), rng.index(9)]).map_err(|e| e.to_string())?;
        deposited += report.deposited.iter().map(|&d| d as u64).sum::<u64>();
        if !game.conservation_holds() {
            return Err(format!("ledger broken at action {i}"));
        }
        if !(0..2).all(|p| game.resources(p).within_limits()) {
            return Err(format!("clamp violated at action {i}"));
        }
    }
    Ok(format!("{FUZZ_ACTIONS} actions over {games} games, {deposited} units deposited"))
}

fn throughput(registry: &Registry) -> Check {
    let opts = BenchOptions { seconds: BENCH_SECONDS, workers: 1, warmup: Duration::from_secs(1), observe: false, seed: 0 };
    let r = bench_ticks(registry, "DeepMaze-Deterministic-7x7", &opts).map_err(|e| e.to_string())?;
    ensure(r.aggregate >= MIN_TICKS_PER_SEC, format!("{:.2}M ticks/s headless, one worker", r.aggregate / 1e6))
}

fn determinism(registry: &Registry) -> Check {
    let trace = |id: &str| -> deeparena_core::Result<Vec<u8>> {
        let mut env = registry.get(id)?.build_seeded(17)?;
        let stream = action_stream(17, 0, env.action_space().count(), REPLAY_STEPS);
        let mut bytes = Vec::new();
        let mut push = |o: &deeparena_core::Observation| bytes.extend(o.data.iter().flat_map(|v| v.to_le_bytes()));
        push(&env.reset(Some(17))?);
        let mut tail = Vec::new();
        for &a in &stream {
            let r = env.step(a)?;
            push(&r.observation);
            tail.extend(r.reward.to_le_bytes());
            tail.push(r.terminal as u8);
            if r.terminal {
                push(&env.reset(None)?);
            }
        }
        bytes.extend(tail);
        Ok(bytes)
    };
    let ids = registry.ids();
    for id in &ids {
        let (a, b) = (trace(id).map_err(|e| e.to_string())?, trace(id).map_err(|e| e.to_string())?);
        if a != b {
            return Err(format!("{id} diverged"));
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let mut c = ExperimentConfig::new("DeepMaze-Stochastic-7x7", AgentKind::Dqn);
        c.episodes = 15;
        c.max_steps = 100;
        c.seed = 3;
        c.output_dir = Some(dir.path().join(run));
        run_experiment(registry, &c).map_err(|e| e.to_string())?;
        let mut files = Vec::new();
        for f in ["metrics.csv", "baseline.csv", "summary.csv"] {
            files.push(std::fs::read(dir.path().join(run).join(f)).map_err(|e| e.to_string())?);
        }
        outputs.push(files);
    }
    ensure(outputs[0] == outputs[1], format!("{} scenarios replay byte-identically; run CSVs identical", ids.len()))
}

fn main() -> ExitCode {
    let registry = Registry::with_defaults();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        ("capsule network parameter counts", Box::new(capsnet_counts)),
        ("representation data sizes", Box::new(representation_sizes)),
        ("maze state-space formula", Box::new(state_space)),
        ("gradient suite", Box::new(gradients)),
        ("tabular Q-learning convergence", Box::new(tabular_convergence)),
        ("maze mastery 9x9", Box::new(|| maze_mastery(&registry))),
        ("DQN sanity 7x7", Box::new(|| dqn_sanity(&registry))),
        ("line wars balance", Box::new(line_wars_balance)),
        ("RTS resource conservation", Box::new(rts_conservation)),
        ("headless maze throughput", Box::new(|| throughput(&registry))),
        ("determinism", Box::new(|| determinism(&registry))),
    ];
    let mut passed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => {
                passed += 1;
                println!("PASS  {name:<34} {detail} [{secs:.1}s]");
            }
            Err(detail) => println!("FAIL  {name:<34} {detail} [{secs:.1}s]"),
        }
    }
    println!("acceptance: {passed}/{} criteria pass", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
