use std::collections::VecDeque;

use deeparena_core::env::{Environment, ObsMode};
use deeparena_core::maze::*;
use deeparena_core::rng::Rng;
use proptest::prelude::*;

/// Distances to `goal` by a plain queue flood, written against the wall bitmap only.
fn flood(grid: &MazeGrid, goal: Pos) -> Vec<Vec<Option<usize>>> {
    let (w, h) = (grid.width(), grid.height());
    let mut d = vec![vec![None; w]; h];
    d[goal.y][goal.x] = Some(0);
    let mut q = VecDeque::from([(goal.x, goal.y)]);
    while let Some((x, y)) = q.pop_front() {
        let here = d[y][x].unwrap();
        let cand = [(x.wrapping_sub(1), y), (x + 1, y), (x, y.wrapping_sub(1)), (x, y + 1)];
        for (nx, ny) in cand {
            if nx < w && ny < h && !grid.is_wall(Pos::new(nx, ny)) && d[ny][nx].is_none() {
                d[ny][nx] = Some(here + 1);
                q.push_back((nx, ny));
            }
        }
    }
    d
}

fn action_towards(from: Pos, to: Pos) -> usize {
    let a = if to.y < from.y {
        MazeAction::Up
    } else if to.y > from.y {
        MazeAction::Down
    } else if to.x < from.x {
        MazeAction::Left
    } else {
        MazeAction::Right
    };
    a.index()
}

fn downhill(grid: &MazeGrid, dist: &[Vec<Option<usize>>], p: Pos) -> Pos {
    let here = dist[p.y][p.x].unwrap();
    grid.neighbours(p).find(|q| dist[q.y][q.x] == Some(here - 1)).expect("a downhill neighbour")
}

#[test]
fn stochastic_layouts_vary_with_the_seed() {
    let cfg = MazeConfig::new(11, 11, MazeMode::Stochastic);
    let mut differing = 0;
    for s in 0..100u64 {
        let a = generate_maze(&cfg, s, 0).unwrap();
        let b = generate_maze(&cfg, s + 1000, 0).unwrap();
        if a != b {
            differing += 1;
        }
        assert_eq!(a, generate_maze(&cfg, s, 0).unwrap());
    }
    assert_eq!(differing, 100);
}

#[test]
fn stochastic_episodes_differ_and_deterministic_ones_repeat() {
    let mut env = DeepMazeEnv::new(MazeConfig::new(11, 11, MazeMode::Stochastic), 5).unwrap();
    let first = env.reset(Some(5)).unwrap();
    let second = env.reset(None).unwrap();
    assert!(!first.bitwise_eq(&second));
    let mut env = DeepMazeEnv::new(MazeConfig::new(11, 11, MazeMode::Deterministic), 5).unwrap();
    let first = env.reset(Some(5)).unwrap();
    for _ in 0..5 {
        assert!(env.reset(None).unwrap().bitwise_eq(&first));
    }
}

#[test]
fn stochastic_episodes_rarely_repeat_a_layout() {
    let cfg = MazeConfig::new(25, 25, MazeMode::Stochastic);
    let layouts: std::collections::HashSet<String> =
        (0..50).map(|e| generate_maze(&cfg, 9, e).unwrap().to_text()).collect();
    assert!(layouts.len() >= 49, "{} distinct", layouts.len());
}

#[test]
fn large_layouts_are_perfect_mazes() {
    let cfg = MazeConfig::new(25, 25, MazeMode::Deterministic);
    for seed in 0..50 {
        let g = generate_maze(&cfg, seed, 0).unwrap();
        let open: Vec<Pos> = g.corridors().collect();
        assert_eq!(open.len(), 2 * 12 * 12 - 1, "seed {seed}");
        let edges: usize = open.iter().map(|&p| g.neighbours(p).count()).sum::<usize>() / 2;
        assert_eq!(edges, open.len() - 1, "seed {seed}: a spanning tree has no cycles");
        let d = flood(&g, g.goal);
        assert!(open.iter().all(|p| d[p.y][p.x].is_some()), "seed {seed}: every corridor is connected");
        for i in 0..25 {
            for p in [Pos::new(i, 0), Pos::new(i, 24), Pos::new(0, i), Pos::new(24, i)] {
                assert!(g.is_wall(p));
            }
        }
        assert_eq!((g.start, g.goal), (Pos::new(1, 1), Pos::new(23, 23)));
    }
}

#[test]
fn optimal_walk_earns_zero_and_detours_cost_one_each() {
    for (mode, size) in [(MazeMode::Deterministic, 15), (MazeMode::Stochastic, 11)] {
        for seed in 0..20 {
            for detour in [0usize, 1, 3] {
                let mut env = DeepMazeEnv::new(MazeConfig::new(size, size, mode), seed).unwrap();
                env.restart(Some(seed)).unwrap();
                let g = env.grid().unwrap().clone();
                let d = flood(&g, g.goal);
                let optimal = d[g.start.y][g.start.x].unwrap();
                assert_eq!(env.optimal_length(), Some(optimal));
                let mut total = 0.0;
                // waste steps with round trips to a neighbour that is not the goal
                let p0 = env.player();
                let Some(side) = g.neighbours(p0).find(|&q| q != g.goal) else { continue };
                for _ in 0..detour {
                    total += env.advance(action_towards(p0, side)).unwrap().reward;
                    total += env.advance(action_towards(side, p0)).unwrap().reward;
                }
                let wasted = 2 * detour;
                let mut p = p0;
                let mut done = false;
                while !done {
                    let q = downhill(&g, &d, p);
                    let r = env.advance(action_towards(p, q)).unwrap();
                    total += r.reward;
                    done = r.terminal;
                    p = q;
                }
                assert_eq!(p, g.goal);
                assert_eq!(env.steps_taken(), optimal + wasted);
                assert_eq!(total, -(wasted as f64), "{mode:?} seed {seed} detour {detour}");
            }
        }
    }
}

#[test]
fn encodings_mark_one_player_and_one_goal() {
    for mode in [ObsMode::HeatmapGray, ObsMode::HeatmapRgb, ObsMode::Matrix, ObsMode::RawImage] {
        let cfg = MazeConfig::new(9, 9, MazeMode::Deterministic).with_observation(mode);
        let mut env = DeepMazeEnv::new(cfg, 2).unwrap();
        let obs = env.reset(Some(2)).unwrap();
        let spec = env.observation_spec();
        assert_eq!(obs.data.len(), spec.data_size());
        let walls = (81 - env.grid().unwrap().corridors().count()) as f64;
        match mode {
            ObsMode::HeatmapGray => {
                assert_eq!(obs.data.iter().filter(|&&v| v == GRAY_PLAYER).count(), 1);
                assert_eq!(obs.data.iter().filter(|&&v| v == GRAY_GOAL).count(), 1);
                assert_eq!(obs.data.iter().filter(|&&v| v == GRAY_WALL).count() as f64, walls);
            }
            ObsMode::Matrix => {
                assert_eq!([obs.plane_sum(0), obs.plane_sum(1), obs.plane_sum(2)], [walls, 1.0, 1.0]);
            }
            ObsMode::HeatmapRgb => {
                assert_eq!([obs.plane_sum(0), obs.plane_sum(1), obs.plane_sum(2)], [1.0, 1.0, walls]);
            }
            ObsMode::RawImage => {
                let s = (spec.width / 9) as f64;
                assert_eq!([obs.plane_sum(0), obs.plane_sum(2)], [s * s, walls * s * s]);
            }
        }
    }
}

#[test]
fn bad_sizes_are_rejected() {
    for (w, h) in [(8, 9), (5, 5), (57, 57), (9, 10)] {
        assert!(DeepMazeEnv::new(MazeConfig::new(w, h, MazeMode::Deterministic), 0).is_err(), "{w}x{h}");
    }
    let mut env = DeepMazeEnv::new(MazeConfig::new(7, 7, MazeMode::Deterministic), 0).unwrap();
    env.restart(Some(0)).unwrap();
    assert!(env.advance(4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trajectories_replay_byte_identically(seed in any::<u64>(), size in prop::sample::select(vec![7usize, 9, 11, 15]),
                                            stochastic in any::<bool>(), actions in prop::collection::vec(0usize..4, 1..300)) {
        let mode = if stochastic { MazeMode::Stochastic } else { MazeMode::Deterministic };
        let run = || {
            let mut env = DeepMazeEnv::new(MazeConfig::new(size, size, mode).with_observation(ObsMode::Matrix), seed).unwrap();
            let mut trace = vec![env.reset(Some(seed)).unwrap().data];
            for &a in &actions {
                let r = env.step(a).unwrap();
                trace.push(r.observation.data);
                trace.push(vec![r.reward as f32, r.terminal as u8 as f32]);
                if r.terminal {
                    trace.push(env.reset(None).unwrap().data);
                }
            }
            trace
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn player_stays_on_corridors_and_rewards_match_the_budget(seed in any::<u64>(), n in 1usize..400) {
        let mut env = DeepMazeEnv::new(MazeConfig::new(9, 9, MazeMode::Stochastic), seed).unwrap();
        env.restart(Some(seed)).unwrap();
        let optimal = env.optimal_length().unwrap();
        let mut rng = Rng::new(seed);
        for t in 1..=n {
            let r = env.advance(rng.index(4)).unwrap();
            prop_assert!(!env.grid().unwrap().is_wall(env.player()));
            prop_assert_eq!(r.reward, if t > optimal { -1.0 } else { 0.0 });
            if r.terminal {
                break;
            }
        }
    }
}
