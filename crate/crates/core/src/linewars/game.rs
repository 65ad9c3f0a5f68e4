use crate::env::{ActionSpace, ObsMode, Observation, ObservationSpec};
use crate::error::{Error, Result};
use crate::rng::Rng;

use super::config::DlwConfig;

/// Cursor/lane direction in the acting player's own frame: `Right` always points
/// toward the enemy base.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Up,
    Down,
    Left,
    Right,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::Up, Dir::Down, Dir::Left, Dir::Right];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlwAction {
    NoOp,
    BuyUnit(usize),
    BuildTower(usize),
    MoveCursor(Dir),
    /// Build at an owner-local cell, bypassing the cursor.
    BuildAt { kind: usize, col: usize, row: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GoldLedger {
    pub initial: u64,
    pub grants: u64,
    pub bounties: u64,
    pub purchases: u64,
}

impl GoldLedger {
    pub fn expected(&self) -> u64 {
        self.initial + self.grants + self.bounties - self.purchases
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerState {
    pub health: u32,
    pub gold: u32,
    pub lumber: u32,
    pub income: u32,
    /// Owner-local `(col, row)`.
    pub cursor: (usize, usize),
    pub ledger: GoldLedger,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub kind: usize,
    pub owner: usize,
    pub row: usize,
    /// Distance travelled from the owner's base, in thousandths of a cell.
    pub progress_milli: u32,
    pub hp_remaining: u32,
}

impl Unit {
    pub fn local_col(&self) -> usize {
        (self.progress_milli / 1000) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tower {
    pub kind: usize,
    pub owner: usize,
    /// Absolute column.
    pub col: usize,
    pub row: usize,
    pub cooldown_remaining: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Winner(usize),
    Draw,
}

/// Per-episode counters, indexed by player.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DlwStats {
    pub ticks: u32,
    pub units_bought: [u32; 2],
    pub towers_built: [u32; 2],
    /// Units of this player that reached the enemy base.
    pub leaks: [u32; 2],
    /// Enemy units killed by this player's towers.
    pub kills: [u32; 2],
    pub rejected_actions: [u32; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickReport {
    /// Health damage dealt minus damage taken this tick.
    pub rewards: [f64; 2],
    pub terminal: bool,
    pub outcome: Option<Outcome>,
}

/// Two-player lockstep Deep Line Wars match.
///
/// Within a tick, the phases run in a fixed order: purchases, tower
/// construction and cursor moves, unit movement, tower fire, leak damage, income.
#[derive(Debug, Clone)]
pub struct LineWarsGame {
    config: DlwConfig,
    actions: ActionSpace,
    rng: Rng,
    tick: u32,
    players: [PlayerState; 2],
    units: Vec<Unit>,
    towers: Vec<Tower>,
    outcome: Option<Outcome>,
    stats: DlwStats,
}

impl LineWarsGame {
    pub fn new(config: DlwConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let actions = action_space(&config)?;
        let player = PlayerState {
            health: config.starting_health,
            gold: config.starting_gold,
            lumber: config.starting_lumber,
            income: config.starting_income,
            cursor: ((config.build_min_col + config.build_max_col) / 2, config.height / 2),
            ledger: GoldLedger { initial: config.starting_gold as u64, ..Default::default() },
        };
        Ok(LineWarsGame {
            actions,
            rng: Rng::new(seed),
            tick: 0,
            players: [player.clone(), player],
            units: Vec::new(),
            towers: Vec::new(),
            outcome: None,
            stats: DlwStats::default(),
            config,
        })
    }

    pub fn config(&self) -> &DlwConfig {
        &self.config
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.actions
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn player(&self, p: usize) -> &PlayerState {
        &self.players[p]
    }

    pub fn player_mut(&mut self, p: usize) -> &mut PlayerState {
        &mut self.players[p]
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    /// Direct access for building fixtures.
    pub fn units_mut(&mut self) -> &mut Vec<Unit> {
        &mut self.units
    }

    pub fn towers(&self) -> &[Tower] {
        &self.towers
    }

    pub fn stats(&self) -> &DlwStats {
        &self.stats
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some()
    }

    /// Absolute column for a column in `owner`'s frame (and vice versa).
    #[inline]
    pub fn mirror_col(&self, owner: usize, col: usize) -> usize {
        if owner == 0 {
            col
        } else {
            self.config.width - 1 - col
        }
    }

    pub fn unit_abs_col(&self, unit: &Unit) -> usize {
        self.mirror_col(unit.owner, unit.local_col())
    }

    pub fn ledger_balanced(&self) -> bool {
        self.players.iter().all(|p| p.gold as u64 == p.ledger.expected())
    }

    pub fn decode(&self, action: usize) -> Result<DlwAction> {
        self.actions.check(action)?;
        let (nu, nt) = (self.config.units.len(), self.config.towers.len());
        let mut i = action;
        if i == 0 {
            return Ok(DlwAction::NoOp);
        }
        i -= 1;
        if i < nu {
            return Ok(DlwAction::BuyUnit(i));
        }
        i -= nu;
        if i < nt {
            return Ok(DlwAction::BuildTower(i));
        }
        i -= nt;
        if i < 4 {
            return Ok(DlwAction::MoveCursor(Dir::ALL[i]));
        }
        i -= 4;
        let cells = self.config.build_columns() * self.config.height;
        let kind = i / cells;
        let cell = i % cells;
        Ok(DlwAction::BuildAt {
            kind,
            col: self.config.build_min_col + cell % self.config.build_columns(),
            row: cell / self.config.build_columns(),
        })
    }

    pub fn encode(&self, action: DlwAction) -> Option<usize> {
        let (nu, nt) = (self.config.units.len(), self.config.towers.len());
        let idx = match action {
            DlwAction::NoOp => 0,
            DlwAction::BuyUnit(k) if k < nu => 1 + k,
            DlwAction::BuildTower(k) if k < nt => 1 + nu + k,
            DlwAction::MoveCursor(d) => 1 + nu + nt + Dir::ALL.iter().position(|&x| x == d)?,
            DlwAction::BuildAt { kind, col, row } if self.config.direct_build && kind < nt => {
                let c = col.checked_sub(self.config.build_min_col)?;
                if c >= self.config.build_columns() || row >= self.config.height {
                    return None;
                }
                let cells = self.config.build_columns() * self.config.height;
                1 + nu + nt + 4 + kind * cells + row * self.config.build_columns() + c
            }
            _ => return None,
        };
        Some(idx)
    }

    /// Purchase a mercenary for `owner`; it spawns at a random row of the owner's base.
    pub fn buy_unit(&mut self, owner: usize, kind: usize) -> Result<usize> {
        let k = self
            .config
            .units
            .get(kind)
            .ok_or(Error::InvalidAction { action: kind, count: self.config.units.len() })?;
        let (cost, hp, bonus) = (k.gold_cost, k.hp, k.income_bonus_percent);
        let p = &mut self.players[owner];
        if p.gold < cost {
            return Err(Error::InsufficientGold { have: p.gold, need: cost });
        }
        p.gold -= cost;
        p.ledger.purchases += cost as u64;
        p.income += percent_of(cost, bonus);
        let row = self.rng.index(self.config.height);
        self.units.push(Unit { kind, owner, row, progress_milli: 0, hp_remaining: hp });
        self.stats.units_bought[owner] += 1;
        Ok(self.units.len() - 1)
    }

    /// Build a tower at an owner-local cell.
    pub fn build_tower(&mut self, owner: usize, kind: usize, local_col: usize, row: usize) -> Result<()> {
        let k = self
            .config
            .towers
            .get(kind)
            .ok_or(Error::InvalidAction { action: kind, count: self.config.towers.len() })?;
        if !(self.config.build_min_col..=self.config.build_max_col).contains(&local_col) || row >= self.config.height {
            return Err(Error::InvalidConfig("towers must be built on the owner's half".into()));
        }
        let col = self.mirror_col(owner, local_col);
        if self.towers.iter().any(|t| t.col == col && t.row == row) {
            return Err(Error::InvalidConfig("cell already holds a tower".into()));
        }
        let cost = k.gold_cost;
        let p = &mut self.players[owner];
        if p.gold < cost {
            return Err(Error::InsufficientGold { have: p.gold, need: cost });
        }
        p.gold -= cost;
        p.ledger.purchases += cost as u64;
        self.towers.push(Tower { kind, owner, col, row, cooldown_remaining: 0 });
        self.stats.towers_built[owner] += 1;
        Ok(())
    }

    /// Gold awarded to the opponent when a unit of `kind` dies to tower fire.
    pub fn kill_bounty(&self, kind: usize) -> u32 {
        percent_of(self.config.units[kind].gold_cost, self.config.bounty_percent)
    }

    fn move_cursor(&mut self, owner: usize, dir: Dir) {
        let (lo, hi, h) = (self.config.build_min_col, self.config.build_max_col, self.config.height);
        let (c, r) = &mut self.players[owner].cursor;
        match dir {
            Dir::Up => *r = r.saturating_sub(1),
            Dir::Down => *r = (*r + 1).min(h - 1),
            Dir::Left => *c = c.saturating_sub(1).max(lo),
            Dir::Right => *c = (*c + 1).min(hi),
        }
    }

    /// Advance one lockstep tick with both players' flat action indices.
    pub fn step_pair(&mut self, a0: usize, a1: usize) -> Result<TickReport> {
        if self.is_terminal() {
            return Err(Error::SteppedTerminalEnv);
        }
        let acts = [self.decode(a0)?, self.decode(a1)?];
        let health_before = [self.players[0].health, self.players[1].health];

        for (owner, act) in acts.iter().enumerate() {
            if let DlwAction::BuyUnit(k) = *act {
                if self.buy_unit(owner, k).is_err() {
                    self.stats.rejected_actions[owner] += 1;
                }
            }
        }
        for (owner, act) in acts.iter().enumerate() {
            let built = match *act {
                DlwAction::BuildTower(k) => {
                    let (c, r) = self.players[owner].cursor;
                    self.build_tower(owner, k, c, r)
                }
                DlwAction::BuildAt { kind, col, row } => self.build_tower(owner, kind, col, row),
                DlwAction::MoveCursor(d) => {
                    self.move_cursor(owner, d);
                    Ok(())
                }
                _ => Ok(()),
            };
            if built.is_err() {
                self.stats.rejected_actions[owner] += 1;
            }
        }

        let end_milli = ((self.config.width - 1) * 1000) as u32;
        for u in &mut self.units {
            let speed = self.config.units[u.kind].speed_milli;
            u.progress_milli = (u.progress_milli + speed).min(end_milli);
        }

        self.fire_towers();

        let last = self.config.width - 1;
        let mut leaked = [0u32; 2];
        self.units.retain(|u| {
            if u.local_col() >= last {
                leaked[u.owner] += 1;
                false
            } else {
                true
            }
        });
        for owner in 0..2 {
            let enemy = &mut self.players[1 - owner];
            enemy.health = enemy.health.saturating_sub(leaked[owner]);
            self.stats.leaks[owner] += leaked[owner];
        }

        self.tick += 1;
        self.stats.ticks = self.tick;
        if self.tick.is_multiple_of(self.config.income_interval) {
            for p in &mut self.players {
                p.gold += p.income;
                p.ledger.grants += p.income as u64;
            }
        }
        debug_assert!(self.ledger_balanced(), "gold ledger out of balance");

        let lost = [
            (health_before[0] - self.players[0].health) as f64,
            (health_before[1] - self.players[1].health) as f64,
        ];
        let rewards = [lost[1] - lost[0], lost[0] - lost[1]];

        self.outcome = match (self.players[0].health == 0, self.players[1].health == 0) {
            (true, true) => Some(Outcome::Draw),
            (false, true) => Some(Outcome::Winner(0)),
            (true, false) => Some(Outcome::Winner(1)),
            (false, false) if self.tick >= self.config.max_ticks => Some(Outcome::Draw),
            _ => None,
        };
        Ok(TickReport { rewards, terminal: self.outcome.is_some(), outcome: self.outcome })
    }

    fn fire_towers(&mut self) {
        let mut dead = vec![false; self.units.len()];
        for ti in 0..self.towers.len() {
            let tower = &mut self.towers[ti];
            if tower.cooldown_remaining > 0 {
                tower.cooldown_remaining -= 1;
            }
            if tower.cooldown_remaining > 0 {
                continue;
            }
            let kind = &self.config.towers[tower.kind];
            let reach = (kind.range * kind.range) as usize;
            let (tc, tr, owner) = (tower.col, tower.row, tower.owner);
            let width = self.config.width;
            let target = self
                .units
                .iter()
                .enumerate()
                .filter(|(i, u)| u.owner != owner && !dead[*i])
                .map(|(i, u)| {
                    let uc = if u.owner == 0 { u.local_col() } else { width - 1 - u.local_col() };
                    (i, uc.abs_diff(tc).pow(2) + u.row.abs_diff(tr).pow(2))
                })
                .filter(|&(_, d2)| d2 <= reach)
                .min_by_key(|&(i, d2)| (d2, i))
                .map(|(i, _)| i);
            let Some(i) = target else { continue };
            tower.cooldown_remaining = kind.cooldown;
            let unit = &mut self.units[i];
            unit.hp_remaining = unit.hp_remaining.saturating_sub(kind.damage);
            if unit.hp_remaining == 0 {
                dead[i] = true;
                let bounty = percent_of(self.config.units[unit.kind].gold_cost, self.config.bounty_percent);
                let p = &mut self.players[owner];
                p.gold += bounty;
                p.ledger.bounties += bounty as u64;
                self.stats.kills[owner] += 1;
            }
        }
        let mut i = 0;
        self.units.retain(|_| {
            i += 1;
            !dead[i - 1]
        });
    }

    /// Encode the board from `perspective`'s frame (own base on the left).
    pub fn observe(&self, perspective: usize, spec: ObservationSpec) -> Observation {
        let (w, h) = (self.config.width, self.config.height);
        // planes: friendly towers, friendly units, enemy towers, enemy units, cursor
        let mut planes = vec![[0f32; 5]; w * h];
        let local = |owner_abs_col: usize| self.mirror_col(perspective, owner_abs_col);
        for t in &self.towers {
            let plane = if t.owner == perspective { 0 } else { 2 };
            planes[t.row * w + local(t.col)][plane] = 1.0;
        }
        for u in &self.units {
            let plane = if u.owner == perspective { 1 } else { 3 };
            planes[u.row * w + local(self.unit_abs_col(u))][plane] = 1.0;
        }
        let (cc, cr) = self.players[perspective].cursor;
        planes[cr * w + cc][4] = 1.0;

        let rgb = |c: &[f32; 5]| -> [f32; 3] { [c[0], c[3].max(c[4]), c[4]] };
        let mut obs = Observation::zeros(spec);
        match spec.mode {
            ObsMode::Matrix => {
                for (i, c) in planes.iter().enumerate() {
                    obs.data[i * 5..i * 5 + 5].copy_from_slice(c);
                }
            }
            ObsMode::HeatmapRgb => {
                for (i, c) in planes.iter().enumerate() {
                    obs.data[i * 3..i * 3 + 3].copy_from_slice(&rgb(c));
                }
            }
            ObsMode::HeatmapGray => {
                for (i, c) in planes.iter().enumerate() {
                    let [r, g, b] = rgb(c);
                    obs.data[i] = (r + g + b) / 3.0;
                }
            }
            ObsMode::RawImage => {
                for py in 0..spec.height {
                    let y = py * h / spec.height;
                    for px in 0..spec.width {
                        let x = px * w / spec.width;
                        let mut color = rgb(&planes[y * w + x]);
                        if color == [0.0; 3] && (x == 0 || x == w - 1) {
                            // base zones
                            color = [0.35, 0.0, 0.0];
                        }
                        let o = spec.offset(px, py, 0);
                        obs.data[o..o + 3].copy_from_slice(&color);
                    }
                }
            }
        }
        obs
    }

    /// `[own health, gold, lumber, income, enemy health, gold, lumber, income]`, each
    /// divided by its cap and clipped to 1.
    pub fn aux_vector(&self, perspective: usize) -> [f64; 8] {
        let caps = &self.config.caps;
        let norm = |v: u32, cap: u32| if cap == 0 { 1.0 } else { (v as f64 / cap as f64).min(1.0) };
        let mut out = [0.0; 8];
        for (slot, p) in [perspective, 1 - perspective].into_iter().enumerate() {
            let s = &self.players[p];
            out[slot * 4] = norm(s.health, caps.health);
            out[slot * 4 + 1] = norm(s.gold, caps.gold);
            out[slot * 4 + 2] = norm(s.lumber, caps.lumber);
            out[slot * 4 + 3] = norm(s.income, caps.income);
        }
        out
    }
}

/// `round(value * percent / 100)`, halves rounded up.
fn percent_of(value: u32, percent: u32) -> u32 {
    ((value as u64 * percent as u64 + 50) / 100) as u32
}

pub fn action_space(config: &DlwConfig) -> Result<ActionSpace> {
    let mut labels = vec!["NoOp".to_string()];
    labels.extend(config.units.iter().map(|u| format!("Buy{}", u.name)));
    labels.extend(config.towers.iter().map(|t| format!("Build{}", t.name)));
    labels.extend(["CursorUp", "CursorDown", "CursorLeft", "CursorRight"].map(String::from));
    if config.direct_build {
        for t in &config.towers {
            for row in 0..config.height {
                for col in config.build_min_col..=config.build_max_col {
                    labels.push(format!("Build{}At{col}x{row}", t.name));
                }
            }
        }
    }
    ActionSpace::new(labels)
}

pub fn observation_spec(config: &DlwConfig) -> Result<ObservationSpec> {
    let (w, h) = (config.width, config.height);
    match config.observation {
        ObsMode::RawImage => ObservationSpec::new(ObsMode::RawImage, config.image_width, config.image_height, 3),
        ObsMode::Matrix => ObservationSpec::new(ObsMode::Matrix, w, h, 5),
        ObsMode::HeatmapRgb => ObservationSpec::new(ObsMode::HeatmapRgb, w, h, 3),
        ObsMode::HeatmapGray => ObservationSpec::new(ObsMode::HeatmapGray, w, h, 1),
    }
}
