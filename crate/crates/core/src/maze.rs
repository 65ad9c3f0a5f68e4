//! Deep Maze: a fully observable shortest-path grid world.
//!
//! Mazes are perfect (the corridor graph is a spanning tree) and generated by a
//! randomized depth-first backtracker over the odd lattice cells, which is why
//! generated sizes must be odd. The agent has four moves; bumping into a wall or
//! the border leaves it in place but still costs a step.
//!
//! Rewards are 0 for every step up to the BFS-optimal length and −1 for every
//! step beyond it, so an optimal episode scores 0 and a negative score counts
//! the extra steps taken.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::{ActionSpace, Advance, Environment, Info, ObsMode, Observation, ObservationSpec};
use crate::error::{Error, Result};
use crate::rng::{mix_seed, Rng};

pub const MIN_SIZE: usize = 7;
pub const MAX_SIZE: usize = 55;
pub const DEFAULT_MAX_STEPS: usize = 1000;

pub const GRAY_WALL: f32 = 1.0;
pub const GRAY_PLAYER: f32 = 0.6;
pub const GRAY_GOAL: f32 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub x: usize,
    pub y: usize,
}

impl Pos {
    pub const fn new(x: usize, y: usize) -> Self {
        Pos { x, y }
    }

    pub fn manhattan(self, other: Pos) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MazeMode {
    Deterministic,
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MazeAction {
    Up,
    Down,
    Left,
    Right,
}

impl MazeAction {
    pub const ALL: [MazeAction; 4] = [MazeAction::Up, MazeAction::Down, MazeAction::Left, MazeAction::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Neighbour of `p` in this direction, or `None` off the top/left edge.
    fn apply(self, p: Pos) -> Option<Pos> {
        match self {
            MazeAction::Up => p.y.checked_sub(1).map(|y| Pos::new(p.x, y)),
            MazeAction::Down => Some(Pos::new(p.x, p.y + 1)),
            MazeAction::Left => p.x.checked_sub(1).map(|x| Pos::new(x, p.y)),
            MazeAction::Right => Some(Pos::new(p.x + 1, p.y)),
        }
    }

    fn label(self) -> &'static str {
        match self {
            MazeAction::Up => "Up",
            MazeAction::Down => "Down",
            MazeAction::Left => "Left",
            MazeAction::Right => "Right",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MazeConfig {
    pub width: usize,
    pub height: usize,
    pub mode: MazeMode,
    pub observation: ObsMode,
    /// Episode cap; reaching it ends the episode (reported as `truncated` in info).
    pub max_steps: usize,
    /// Pixel scale for `RawImage` observations.
    pub pixels_per_cell: usize,
}

impl Default for MazeConfig {
    fn default() -> Self {
        MazeConfig {
            width: 11,
            height: 11,
            mode: MazeMode::Deterministic,
            observation: ObsMode::HeatmapGray,
            max_steps: DEFAULT_MAX_STEPS,
            pixels_per_cell: 4,
        }
    }
}

impl MazeConfig {
    pub fn new(width: usize, height: usize, mode: MazeMode) -> Self {
        MazeConfig { width, height, mode, ..Default::default() }
    }

    pub fn with_observation(mut self, mode: ObsMode) -> Self {
        self.observation = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("width", self.width), ("height", self.height)] {
            if v % 2 == 0 || !(MIN_SIZE..=MAX_SIZE).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "maze {name} must be odd and within {MIN_SIZE}..={MAX_SIZE}, got {v}"
                )));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("maze max_steps must be at least 1".into()));
        }
        if self.pixels_per_cell == 0 {
            return Err(Error::InvalidConfig("pixels_per_cell must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MazeGrid {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    pub start: Pos,
    pub goal: Pos,
}

impl MazeGrid {
    /// Build from a wall mask. Validates start/goal but not reachability.
    pub fn new(width: usize, height: usize, walls: Vec<bool>, start: Pos, goal: Pos) -> Result<Self> {
        if width == 0 || height == 0 || walls.len() != width * height {
            return Err(Error::InvalidConfig("wall mask does not match grid size".into()));
        }
        let grid = MazeGrid { width, height, walls, start, goal };
        for (name, p) in [("start", start), ("goal", goal)] {
            if !grid.in_bounds(p) || grid.is_wall(p) {
                return Err(Error::InvalidConfig(format!("{name} must be a corridor cell")));
            }
        }
        if start == goal {
            return Err(Error::InvalidConfig("start and goal must differ".into()));
        }
        Ok(grid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x < self.width && p.y < self.height
    }

    #[inline]
    pub fn is_wall(&self, p: Pos) -> bool {
        self.walls[p.y * self.width + p.x]
    }

    pub fn corridors(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.height)
            .flat_map(move |y| (0..self.width).map(move |x| Pos::new(x, y)))
            .filter(move |&p| !self.is_wall(p))
    }

    /// Open neighbours under 4-connectivity.
    pub fn neighbours(&self, p: Pos) -> impl Iterator<Item = Pos> + '_ {
        MazeAction::ALL
            .into_iter()
            .filter_map(move |a| a.apply(p))
            .filter(move |&q| self.in_bounds(q) && !self.is_wall(q))
    }

    /// Parse the plain-text layout: `#` wall, `.` corridor, `S` start, `G` goal.
    pub fn from_text(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut walls = Vec::with_capacity(width * height);
        let (mut start, mut goal) = (None, None);
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::Parse(format!("maze row {} has a different width", y + 1)));
            }
            for (x, ch) in row.chars().enumerate() {
                let here = Pos::new(x, y);
                match ch {
                    '#' => walls.push(true),
                    '.' => walls.push(false),
                    'S' if start.is_none() => {
                        start = Some(here);
                        walls.push(false)
                    }
                    'G' if goal.is_none() => {
                        goal = Some(here);
                        walls.push(false)
                    }
                    'S' | 'G' => {
                        return Err(Error::Parse(format!("duplicate `{ch}` at row {}", y + 1)))
                    }
                    other => {
                        return Err(Error::Parse(format!("unexpected `{other}` at row {}", y + 1)))
                    }
                }
            }
        }
        let start = start.ok_or_else(|| Error::Parse("maze has no start `S`".into()))?;
        let goal = goal.ok_or_else(|| Error::Parse("maze has no goal `G`".into()))?;
        MazeGrid::new(width, height, walls, start, goal)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let p = Pos::new(x, y);
                out.push(if p == self.start {
                    'S'
                } else if p == self.goal {
                    'G'
                } else if self.is_wall(p) {
                    '#'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for MazeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for MazeGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MazeGrid::from_text(s)
    }
}

/// Generate the layout for `episode`. Deterministic mode ignores `episode`.
pub fn generate_maze(config: &MazeConfig, seed: u64, episode: u64) -> Result<MazeGrid> {
    config.validate()?;
    let (w, h) = (config.width, config.height);
    let layout_seed = match config.mode {
        MazeMode::Deterministic => mix_seed(seed, 0),
        MazeMode::Stochastic => mix_seed(seed, episode.wrapping_add(1)),
    };
    let mut rng = Rng::new(layout_seed);

    // lattice cells live at odd coordinates; carving removes the wall between two
    let (cw, ch) = ((w - 1) / 2, (h - 1) / 2);
    let mut walls = vec![true; w * h];
    let mut visited = vec![false; cw * ch];
    let open = |walls: &mut Vec<bool>, x: usize, y: usize| walls[y * w + x] = false;

    let first = (rng.index(cw), rng.index(ch));
    visited[first.1 * cw + first.0] = true;
    open(&mut walls, 2 * first.0 + 1, 2 * first.1 + 1);
    let mut stack = vec![first];
    let mut choices = Vec::with_capacity(4);
    while let Some(&(cx, cy)) = stack.last() {
        choices.clear();
        if cy > 0 && !visited[(cy - 1) * cw + cx] {
            choices.push((cx, cy - 1));
        }
        if cy + 1 < ch && !visited[(cy + 1) * cw + cx] {
            choices.push((cx, cy + 1));
        }
        if cx > 0 && !visited[cy * cw + cx - 1] {
            choices.push((cx - 1, cy));
        }
        if cx + 1 < cw && !visited[cy * cw + cx + 1] {
            choices.push((cx + 1, cy));
        }
        if choices.is_empty() {
            stack.pop();
            continue;
        }
        let (nx, ny) = choices[rng.index(choices.len())];
        visited[ny * cw + nx] = true;
        open(&mut walls, cx + nx + 1, cy + ny + 1);
        open(&mut walls, 2 * nx + 1, 2 * ny + 1);
        stack.push((nx, ny));
    }

    let (start, goal) = match config.mode {
        MazeMode::Deterministic => (Pos::new(1, 1), Pos::new(w - 2, h - 2)),
        MazeMode::Stochastic => {
            let corridors: Vec<Pos> = (0..h)
                .flat_map(|y| (0..w).map(move |x| Pos::new(x, y)))
                .filter(|p| !walls[p.y * w + p.x])
                .collect();
            let s = rng.index(corridors.len());
            let mut g = rng.index(corridors.len() - 1);
            if g >= s {
                g += 1;
            }
            (corridors[s], corridors[g])
        }
    };
    let grid = MazeGrid::new(w, h, walls, start, goal)?;
    debug_assert!(bfs_shortest_path(&grid, start, goal).is_ok());
    Ok(grid)
}

/// BFS distance from `target` to every cell; `None` for walls and unreachable cells.
pub fn bfs_distance_map(grid: &MazeGrid, target: Pos) -> Vec<Option<u32>> {
    let mut dist = vec![None; grid.width * grid.height];
    if !grid.in_bounds(target) || grid.is_wall(target) {
        return dist;
    }
    dist[target.y * grid.width + target.x] = Some(0);
    let mut queue = VecDeque::from([target]);
    while let Some(p) = queue.pop_front() {
        let d = dist[p.y * grid.width + p.x].unwrap_or(0);
        for q in grid.neighbours(p) {
            let slot = &mut dist[q.y * grid.width + q.x];
            if slot.is_none() {
                *slot = Some(d + 1);
                queue.push_back(q);
            }
        }
    }
    dist
}

/// Minimal number of 4-neighbour moves from `from` to `to`.
pub fn bfs_shortest_path(grid: &MazeGrid, from: Pos, to: Pos) -> Result<usize> {
    for p in [from, to] {
        if !grid.in_bounds(p) || grid.is_wall(p) {
            return Err(Error::InvalidConfig(format!("({}, {}) is not a corridor cell", p.x, p.y)));
        }
    }
    bfs_distance_map(grid, to)[from.y * grid.width + from.x]
        .map(|d| d as usize)
        .ok_or(Error::Unreachable)
}

/// Upper bound on distinct (player, goal) placements: `C(w*h, 2)`.
pub fn maze_state_space(width: usize, height: usize) -> u128 {
    let n = (width as u128) * (height as u128);
    assert!(n >= 2, "state space needs at least two cells");
    n * (n - 1) / 2
}

#[derive(Debug, Clone)]
struct Layout {
    grid: MazeGrid,
    optimal_length: usize,
    seed: u64,
    episode: u64,
}

/// Deep Maze as an [`Environment`].
#[derive(Debug, Clone)]
pub struct DeepMazeEnv {
    config: MazeConfig,
    spec: ObservationSpec,
    actions: ActionSpace,
    fixed_grid: bool,
    seed: u64,
    episode: Option<u64>,
    layout: Option<Layout>,
    player: Pos,
    steps_taken: usize,
    terminal: bool,
    truncated: bool,
}

impl DeepMazeEnv {
    pub fn new(config: MazeConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let spec = observation_spec(&config, config.width, config.height)?;
        Ok(DeepMazeEnv {
            spec,
            actions: maze_action_space(),
            fixed_grid: false,
            seed,
            episode: None,
            layout: None,
            player: Pos::new(0, 0),
            steps_taken: 0,
            terminal: true,
            truncated: false,
            config,
        })
    }

    /// An environment over a hand-built grid. Size limits do not apply.
    pub fn from_grid(grid: MazeGrid, observation: ObsMode, max_steps: usize) -> Result<Self> {
        let optimal_length = bfs_shortest_path(&grid, grid.start, grid.goal)?;
        let config = MazeConfig {
            width: grid.width,
            height: grid.height,
            mode: MazeMode::Deterministic,
            observation,
            max_steps,
            ..Default::default()
        };
        if max_steps == 0 {
            return Err(Error::InvalidConfig("maze max_steps must be at least 1".into()));
        }
        let spec = observation_spec(&config, grid.width, grid.height)?;
        Ok(DeepMazeEnv {
            spec,
            actions: maze_action_space(),
            fixed_grid: true,
            seed: 0,
            episode: None,
            player: grid.start,
            layout: Some(Layout { grid, optimal_length, seed: 0, episode: 0 }),
            steps_taken: 0,
            terminal: true,
            truncated: false,
            config,
        })
    }

    pub fn config(&self) -> &MazeConfig {
        &self.config
    }

    pub fn grid(&self) -> Option<&MazeGrid> {
        self.layout.as_ref().map(|l| &l.grid)
    }

    pub fn player(&self) -> Pos {
        self.player
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn optimal_length(&self) -> Option<usize> {
        self.layout.as_ref().map(|l| l.optimal_length)
    }

    /// Index of the current episode since the last seeded reset.
    pub fn episode(&self) -> Option<u64> {
        self.episode
    }

    fn ensure_layout(&mut self, episode: u64) -> Result<()> {
        if self.fixed_grid {
            return Ok(());
        }
        let layout_episode = match self.config.mode {
            MazeMode::Deterministic => 0,
            MazeMode::Stochastic => episode,
        };
        let fresh = self
            .layout
            .as_ref()
            .is_some_and(|l| l.seed == self.seed && l.episode == layout_episode);
        if !fresh {
            let grid = generate_maze(&self.config, self.seed, layout_episode)?;
            let optimal_length = bfs_shortest_path(&grid, grid.start, grid.goal)?;
            self.layout = Some(Layout { grid, optimal_length, seed: self.seed, episode: layout_episode });
        }
        Ok(())
    }

    fn layout(&self) -> &Layout {
        self.layout.as_ref().expect("layout exists after restart")
    }
}

fn maze_action_space() -> ActionSpace {
    ActionSpace::new(MazeAction::ALL.iter().map(|a| a.label())).expect("static labels")
}

fn observation_spec(config: &MazeConfig, w: usize, h: usize) -> Result<ObservationSpec> {
    match config.observation {
        ObsMode::HeatmapGray => ObservationSpec::new(ObsMode::HeatmapGray, w, h, 1),
        ObsMode::HeatmapRgb => ObservationSpec::new(ObsMode::HeatmapRgb, w, h, 3),
        ObsMode::Matrix => ObservationSpec::new(ObsMode::Matrix, w, h, 3),
        ObsMode::RawImage => {
            let s = config.pixels_per_cell;
            ObservationSpec::new(ObsMode::RawImage, w * s, h * s, 3)
        }
    }
}

/// Encode a maze position.
///
/// * `HeatmapGray`: wall 1.0, corridor 0.0, player 0.6, goal 0.3.
/// * `HeatmapRGB`: player on red, goal on green, walls on blue.
/// * `Matrix`: planes `[walls, player one-hot, goal one-hot]`.
/// * `RawImage`: the RGB heatmap upscaled by `pixels_per_cell`.
pub fn maze_observe(grid: &MazeGrid, player: Pos, spec: ObservationSpec) -> Observation {
    let mut obs = Observation::zeros(spec);
    let scale = match spec.mode {
        ObsMode::RawImage => spec.width / grid.width,
        _ => 1,
    };
    for y in 0..grid.height {
        for x in 0..grid.width {
            let p = Pos::new(x, y);
            let wall = grid.is_wall(p);
            let values: [f32; 3] = match spec.mode {
                ObsMode::HeatmapGray => {
                    let v = if p == player {
                        GRAY_PLAYER
                    } else if p == grid.goal {
                        GRAY_GOAL
                    } else if wall {
                        GRAY_WALL
                    } else {
                        0.0
                    };
                    [v, 0.0, 0.0]
                }
                ObsMode::Matrix => [
                    wall as u8 as f32,
                    (p == player) as u8 as f32,
                    (p == grid.goal) as u8 as f32,
                ],
                ObsMode::HeatmapRgb | ObsMode::RawImage => [
                    (p == player) as u8 as f32,
                    (p == grid.goal && p != player) as u8 as f32,
                    wall as u8 as f32,
                ],
            };
            for sy in 0..scale {
                for sx in 0..scale {
                    for (c, &v) in values.iter().enumerate().take(spec.channels) {
                        if v != 0.0 {
                            obs.set(x * scale + sx, y * scale + sy, c, v);
                        }
                    }
                }
            }
        }
    }
    obs
}

impl Environment for DeepMazeEnv {
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
        self.ensure_layout(episode)?;
        self.episode = Some(episode);
        self.player = self.layout().grid.start;
        self.steps_taken = 0;
        self.terminal = false;
        self.truncated = false;
        Ok(())
    }

    #[inline]
    fn advance(&mut self, action: usize) -> Result<Advance> {
        if self.terminal {
            return Err(Error::SteppedTerminalEnv);
        }
        let dir = MazeAction::from_index(action)
            .ok_or(Error::InvalidAction { action, count: MazeAction::ALL.len() })?;
        let layout = self.layout.as_ref().expect("layout exists after restart");
        if let Some(next) = dir.apply(self.player) {
            if layout.grid.in_bounds(next) && !layout.grid.is_wall(next) {
                self.player = next;
            }
        }
        self.steps_taken += 1;
        let reward = if self.steps_taken > layout.optimal_length { -1.0 } else { 0.0 };
        if self.player == layout.grid.goal {
            self.terminal = true;
        } else if self.steps_taken >= self.config.max_steps {
            self.terminal = true;
            self.truncated = true;
        }
        Ok(Advance { reward, terminal: self.terminal })
    }

    fn observe(&self) -> Result<Observation> {
        let layout = self.layout.as_ref().ok_or(Error::InvalidConfig("reset before observe".into()))?;
        Ok(maze_observe(&layout.grid, self.player, self.spec))
    }

    fn is_terminal(&self) -> bool {
        self.terminal
    }

    fn info(&self) -> Info {
        let mut info = Info::new();
        info.insert("steps_taken".into(), self.steps_taken as f64);
        if let Some(l) = &self.layout {
            info.insert("optimal_length".into(), l.optimal_length as f64);
        }
        info.insert("truncated".into(), self.truncated as u8 as f64);
        info
    }

    fn render(&self) -> Option<String> {
        let layout = self.layout.as_ref()?;
        let mut text: Vec<Vec<char>> =
            layout.grid.to_text().lines().map(|l| l.chars().collect()).collect();
        text[self.player.y][self.player.x] = '@';
        Some(text.into_iter().map(|r| r.into_iter().collect::<String>() + "\n").collect())
    }
}
