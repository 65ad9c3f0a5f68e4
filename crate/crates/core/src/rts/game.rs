use serde::{Deserialize, Serialize};

use crate::env::{ActionSpace, ObsMode, Observation, ObservationSpec};
use crate::error::{Error, Result};

use super::map::{Pos, ResourceKind, RtsMap, Tile, TileStocks};

pub const RESOURCE_CAP: u32 = 1_000_000;
pub const POPULATION_CAP: u32 = 200;
pub const PLANES: usize = 9;

/// Player stockpile; every field is kept inside its range at all times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RtsResources {
    pub lumber: u32,
    pub gold: u32,
    pub oil: u32,
    pub food: u32,
    pub units: u32,
}

impl RtsResources {
    pub fn get(&self, kind: ResourceKind) -> u32 {
        match kind {
            ResourceKind::Lumber => self.lumber,
            ResourceKind::Gold => self.gold,
            ResourceKind::Oil => self.oil,
        }
    }

    /// Add with saturation at the cap.
    pub fn add(&mut self, kind: ResourceKind, amount: u32) {
        let slot = match kind {
            ResourceKind::Lumber => &mut self.lumber,
            ResourceKind::Gold => &mut self.gold,
            ResourceKind::Oil => &mut self.oil,
        };
        *slot = slot.saturating_add(amount).min(RESOURCE_CAP);
    }

    pub fn add_food(&mut self, amount: u32) {
        self.food = self.food.saturating_add(amount).min(POPULATION_CAP);
    }

    pub fn within_limits(&self) -> bool {
        self.lumber <= RESOURCE_CAP
            && self.gold <= RESOURCE_CAP
            && self.oil <= RESOURCE_CAP
            && self.food <= POPULATION_CAP
            && self.units <= POPULATION_CAP
            && self.units <= self.food
    }

    /// `[lumber, gold, oil, food, units]`, each divided by its cap.
    pub fn normalized(&self) -> [f64; 5] {
        let r = RESOURCE_CAP as f64;
        let p = POPULATION_CAP as f64;
        [
            self.lumber as f64 / r,
            self.gold as f64 / r,
            self.oil as f64 / r,
            self.food as f64 / p,
            self.units as f64 / p,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Scoreboard {
    pub kills: u64,
    pub defensive_points: u64,
    pub offensive_points: u64,
    pub resource_count: u64,
}

impl Scoreboard {
    /// Reported score: resource_count / 100.
    pub fn score(&self) -> f64 {
        self.resource_count as f64 / 100.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Worker,
    TownHall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityState {
    Idle,
    MovingTo(Pos),
    /// Walking to or working the given resource tile.
    Harvesting(Pos),
    /// Constructing a town hall; ticks left.
    Building(u32),
    /// Walking to the nearest own town hall to unload.
    Depositing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub kind: EntityKind,
    pub owner: usize,
    pub pos: Pos,
    pub state: EntityState,
    pub carry: u32,
    pub carry_kind: Option<ResourceKind>,
    /// Tile to resume after unloading.
    pub harvest_target: Option<Pos>,
    /// Resource kind of the current assignment.
    pub harvest_kind: Option<ResourceKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtsAction {
    NoOp,
    SelectNextUnit,
    MoveUp,
    MoveDown,
    MoveLeft,
    MoveRight,
    HarvestNearest,
    ReturnToDepot,
    BuildTownHall,
}

impl RtsAction {
    pub const ALL: [RtsAction; 9] = [
        RtsAction::NoOp,
        RtsAction::SelectNextUnit,
        RtsAction::MoveUp,
        RtsAction::MoveDown,
        RtsAction::MoveLeft,
        RtsAction::MoveRight,
        RtsAction::HarvestNearest,
        RtsAction::ReturnToDepot,
        RtsAction::BuildTownHall,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RtsAction::NoOp => "NoOp",
            RtsAction::SelectNextUnit => "SelectNextUnit",
            RtsAction::MoveUp => "MoveUp",
            RtsAction::MoveDown => "MoveDown",
            RtsAction::MoveLeft => "MoveLeft",
            RtsAction::MoveRight => "MoveRight",
            RtsAction::HarvestNearest => "HarvestNearest",
            RtsAction::ReturnToDepot => "ReturnToDepot",
            RtsAction::BuildTownHall => "BuildTownHall",
        }
    }
}

pub fn rts_action_set() -> ActionSpace {
    ActionSpace::new(RtsAction::ALL.iter().map(|a| a.label()).collect::<Vec<_>>())
        .expect("static action labels are valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RtsConfig {
    /// Generated map size, used when `map` is unset.
    pub width: usize,
    pub height: usize,
    /// Plain-text map; overrides generation.
    pub map: Option<String>,
    pub stocks: TileStocks,
    pub harvest_rate: u32,
    pub carry_cap: u32,
    pub max_ticks: u32,
    pub town_hall_gold: u32,
    pub town_hall_lumber: u32,
    pub build_ticks: u32,
    pub food_per_hall: u32,
    pub starting: RtsResources,
    pub observation: ObsMode,
}

impl Default for RtsConfig {
    fn default() -> Self {
        RtsConfig {
            width: 10,
            height: 10,
            map: None,
            stocks: TileStocks::default(),
            harvest_rate: 1,
            carry_cap: 10,
            max_ticks: 600,
            town_hall_gold: 100,
            town_hall_lumber: 50,
            build_ticks: 20,
            food_per_hall: 5,
            starting: RtsResources::default(),
            observation: ObsMode::Matrix,
        }
    }
}

impl RtsConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RtsConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("deep rts: {m}")));
        if self.harvest_rate == 0 || self.carry_cap == 0 || self.max_ticks == 0 {
            return bad("harvest rate, carry cap and max ticks must be positive");
        }
        if self.map.is_none() && (self.width < 6 || self.height < 6) {
            return bad("generated maps must be at least 6x6");
        }
        if !self.starting.within_limits() {
            return bad("starting resources exceed their ranges");
        }
        observation_spec_for(self.observation, 1, 1)?;
        Ok(())
    }

    pub fn build_map(&self, seed: u64) -> Result<RtsMap> {
        match &self.map {
            Some(text) => RtsMap::from_text(text, &self.stocks),
            None => RtsMap::generate(self.width, self.height, seed, &self.stocks),
        }
    }
}

fn observation_spec_for(mode: ObsMode, w: usize, h: usize) -> Result<ObservationSpec> {
    match mode {
        ObsMode::Matrix => ObservationSpec::new(ObsMode::Matrix, w, h, PLANES),
        other => Err(Error::UnsupportedMode(format!("deep rts supports Matrix only, not {other}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtsOutcome {
    Winner(usize),
    Draw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RtsTickReport {
    /// Resources deposited by each player this tick.
    pub deposited: [u32; 2],
    /// Whether each player's action was rejected and treated as NoOp.
    pub rejected: [bool; 2],
    pub terminal: bool,
    pub outcome: Option<RtsOutcome>,
}

/// Two-player simplified RTS: workers harvest lumber, gold and oil and bring
/// it back to a town hall. The winner at the tick limit is the player with the
/// higher resource count.
#[derive(Debug, Clone)]
pub struct RtsGame {
    config: RtsConfig,
    map: RtsMap,
    entities: Vec<Entity>,
    resources: [RtsResources; 2],
    scores: [Scoreboard; 2],
    selected: [usize; 2],
    tick: u32,
    initial_stock: [u64; 3],
    /// Per player, per resource kind.
    deposited: [[u64; 3]; 2],
    histogram: [[u64; 9]; 2],
    rejected: [u64; 2],
    outcome: Option<RtsOutcome>,
}

impl RtsGame {
    /// Each player starts with a town hall on its first spawn tile and one
    /// worker next to it.
    pub fn new(config: RtsConfig, map: RtsMap) -> Result<Self> {
        config.validate()?;
        map.validate()?;
        let mut entities = Vec::new();
        let mut resources = [config.starting; 2];
        for (p, res) in resources.iter_mut().enumerate() {
            let hall = map.spawns(p)[0];
            entities.push(Entity {
                kind: EntityKind::TownHall,
                owner: p,
                pos: hall,
                state: EntityState::Idle,
                carry: 0,
                carry_kind: None,
                harvest_target: None,
                harvest_kind: None,
            });
            res.add_food(config.food_per_hall);
        }
        for p in 0..2 {
            let hall = map.spawns(p)[0];
            let spot = neighbours(&map, hall)
                .find(|&q| walkable_in(&map, &entities, q))
                .ok_or_else(|| Error::InvalidConfig(format!("no free tile next to player {p}'s town hall")))?;
            entities.push(Entity {
                kind: EntityKind::Worker,
                owner: p,
                pos: spot,
                state: EntityState::Idle,
                carry: 0,
                carry_kind: None,
                harvest_target: None,
                harvest_kind: None,
            });
            resources[p].units = (resources[p].units + 1).min(POPULATION_CAP);
        }
        Ok(RtsGame {
            initial_stock: map.stock_totals(),
            config,
            map,
            entities,
            resources,
            scores: [Scoreboard::default(); 2],
            selected: [0; 2],
            tick: 0,
            deposited: [[0; 3]; 2],
            histogram: [[0; 9]; 2],
            rejected: [0; 2],
            outcome: None,
        })
    }

    pub fn config(&self) -> &RtsConfig {
        &self.config
    }

    pub fn map(&self) -> &RtsMap {
        &self.map
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn resources(&self, p: usize) -> &RtsResources {
        &self.resources[p]
    }

    pub fn resources_mut(&mut self, p: usize) -> &mut RtsResources {
        &mut self.resources[p]
    }

    pub fn scoreboard(&self, p: usize) -> &Scoreboard {
        &self.scores[p]
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn outcome(&self) -> Option<RtsOutcome> {
        self.outcome
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome.is_some()
    }

    /// Counts of every action index submitted by player `p`.
    pub fn action_histogram(&self, p: usize) -> &[u64; 9] {
        &self.histogram[p]
    }

    pub fn rejected_actions(&self, p: usize) -> u64 {
        self.rejected[p]
    }

    pub fn deposited(&self, p: usize) -> [u64; 3] {
        self.deposited[p]
    }

    pub fn workers(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        self.entities
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.owner == p && e.kind == EntityKind::Worker)
            .map(|(i, _)| i)
    }

    /// Entity index of player `p`'s selected worker.
    pub fn selected_worker(&self, p: usize) -> Option<usize> {
        self.workers(p).nth(self.selected[p])
    }

    pub fn in_transit(&self) -> [u64; 3] {
        let mut out = [0u64; 3];
        for e in &self.entities {
            if let Some(k) = e.carry_kind {
                out[k.index()] += e.carry as u64;
            }
        }
        out
    }

    /// Deposited = initial stock - remaining stock - carried, per resource kind.
    pub fn conservation_holds(&self) -> bool {
        let remaining = self.map.stock_totals();
        let carried = self.in_transit();
        (0..3).all(|k| {
            self.deposited[0][k] + self.deposited[1][k] + remaining[k] + carried[k] == self.initial_stock[k]
        })
    }

    /// Advance one tick with both players' action indices.
    pub fn step(&mut self, actions: [usize; 2]) -> Result<RtsTickReport> {
        if self.is_terminal() {
            return Err(Error::SteppedTerminalEnv);
        }
        for &a in &actions {
            if a >= RtsAction::ALL.len() {
                return Err(Error::InvalidAction { action: a, count: RtsAction::ALL.len() });
            }
        }
        let mut rejected = [false; 2];
        for p in 0..2 {
            self.histogram[p][actions[p]] += 1;
            if !self.apply(p, RtsAction::ALL[actions[p]]) {
                rejected[p] = true;
                self.rejected[p] += 1;
            }
        }
        let mut deposited = [0u32; 2];
        for i in 0..self.entities.len() {
            if self.entities[i].kind == EntityKind::Worker {
                let owner = self.entities[i].owner;
                deposited[owner] += self.update_worker(i);
            }
        }
        self.tick += 1;
        debug_assert!(self.conservation_holds());
        debug_assert!(self.resources.iter().all(RtsResources::within_limits));
        if self.tick >= self.config.max_ticks {
            let (a, b) = (self.scores[0].resource_count, self.scores[1].resource_count);
            self.outcome = Some(match a.cmp(&b) {
                std::cmp::Ordering::Greater => RtsOutcome::Winner(0),
                std::cmp::Ordering::Less => RtsOutcome::Winner(1),
                std::cmp::Ordering::Equal => RtsOutcome::Draw,
            });
        }
        Ok(RtsTickReport { deposited, rejected, terminal: self.is_terminal(), outcome: self.outcome })
    }

    /// Apply a command; returns false when it is not valid in this state.
    fn apply(&mut self, p: usize, action: RtsAction) -> bool {
        if action == RtsAction::NoOp {
            return true;
        }
        if action == RtsAction::SelectNextUnit {
            let n = self.workers(p).count();
            if n == 0 {
                return false;
            }
            self.selected[p] = (self.selected[p] + 1) % n;
            return true;
        }
        let Some(w) = self.selected_worker(p) else {
            return false;
        };
        if matches!(self.entities[w].state, EntityState::Building(_)) {
            return false;
        }
        let pos = self.entities[w].pos;
        match action {
            RtsAction::MoveUp | RtsAction::MoveDown | RtsAction::MoveLeft | RtsAction::MoveRight => {
                let (dx, dy): (isize, isize) = match action {
                    RtsAction::MoveUp => (0, -1),
                    RtsAction::MoveDown => (0, 1),
                    RtsAction::MoveLeft => (-1, 0),
                    _ => (1, 0),
                };
                let dest = (pos.0.wrapping_add_signed(dx), pos.1.wrapping_add_signed(dy));
                if !self.walkable(dest) {
                    return false;
                }
                self.entities[w].state = EntityState::MovingTo(dest);
                true
            }
            RtsAction::HarvestNearest => {
                let Some(target) = nearest(self.map.positions().filter(|&q| self.map.tile(q).resource().is_some()), pos)
                else {
                    return false;
                };
                let kind = self.map.tile(target).resource().map(|(k, _)| k);
                let e = &mut self.entities[w];
                e.harvest_target = Some(target);
                e.harvest_kind = kind;
                e.state = if e.carry > 0 && e.carry_kind != kind {
                    EntityState::Depositing
                } else {
                    EntityState::Harvesting(target)
                };
                true
            }
            RtsAction::ReturnToDepot => {
                if self.entities[w].carry == 0 || self.halls(p).next().is_none() {
                    return false;
                }
                self.entities[w].state = EntityState::Depositing;
                true
            }
            RtsAction::BuildTownHall => {
                let (g, l) = (self.config.town_hall_gold, self.config.town_hall_lumber);
                let res = &self.resources[p];
                if res.gold < g || res.lumber < l || self.map.tile(pos) != Tile::Grass || self.hall_at(pos) {
                    return false;
                }
                let res = &mut self.resources[p];
                res.gold -= g;
                res.lumber -= l;
                self.entities[w].state = EntityState::Building(self.config.build_ticks.max(1));
                true
            }
            RtsAction::NoOp | RtsAction::SelectNextUnit => unreachable!(),
        }
    }

    /// Run one tick of a worker's state machine; returns the amount deposited.
    fn update_worker(&mut self, i: usize) -> u32 {
        let e = self.entities[i].clone();
        match e.state {
            EntityState::Idle => 0,
            EntityState::MovingTo(dest) => {
                if e.pos != dest {
                    self.step_toward(i, dest, 0);
                }
                if self.entities[i].pos == dest {
                    self.entities[i].state = EntityState::Idle;
                }
                0
            }
            EntityState::Harvesting(target) => {
                let Some((kind, _)) = self.map.tile(target).resource() else {
                    self.entities[i].state = self.next_target(i);
                    return 0;
                };
                if manhattan(e.pos, target) > 1 {
                    self.step_toward(i, target, 1);
                    return 0;
                }
                let room = self.config.carry_cap.saturating_sub(e.carry);
                let got = self.map.take(target, self.config.harvest_rate.min(room));
                let e = &mut self.entities[i];
                e.carry += got;
                if got > 0 {
                    e.carry_kind = Some(kind);
                }
                let depleted = self.map.tile(target).resource().is_none();
                if e.carry >= self.config.carry_cap || depleted {
                    e.state = EntityState::Depositing;
                }
                0
            }
            EntityState::Building(left) => {
                if left > 1 {
                    self.entities[i].state = EntityState::Building(left - 1);
                } else {
                    self.entities.push(Entity {
                        kind: EntityKind::TownHall,
                        owner: e.owner,
                        pos: e.pos,
                        state: EntityState::Idle,
                        carry: 0,
                        carry_kind: None,
                        harvest_target: None,
                        harvest_kind: None,
                    });
                    self.resources[e.owner].add_food(self.config.food_per_hall);
                    self.entities[i].state = EntityState::Idle;
                }
                0
            }
            EntityState::Depositing => {
                let Some(hall) = nearest(self.halls(e.owner), e.pos) else {
                    self.entities[i].state = EntityState::Idle;
                    return 0;
                };
                if manhattan(e.pos, hall) > 1 {
                    self.step_toward(i, hall, 1);
                    return 0;
                }
                let amount = e.carry;
                if let Some(kind) = e.carry_kind {
                    self.resources[e.owner].add(kind, amount);
                    self.deposited[e.owner][kind.index()] += amount as u64;
                    self.scores[e.owner].resource_count += amount as u64;
                }
                let next = self.next_target(i);
                let w = &mut self.entities[i];
                w.carry = 0;
                w.carry_kind = None;
                w.state = next;
                amount
            }
        }
    }

    /// Resume harvesting after unloading: the previous tile, else the nearest
    /// tile of the same kind, else idle.
    fn next_target(&self, i: usize) -> EntityState {
        let e = &self.entities[i];
        let Some(prev) = e.harvest_target else {
            return EntityState::Idle;
        };
        if self.map.tile(prev).resource().is_some() {
            return EntityState::Harvesting(prev);
        }
        let Some(kind) = e.harvest_kind else {
            return EntityState::Idle;
        };
        let same = self.map.positions().filter(|&q| self.map.tile(q).resource().is_some_and(|(k, _)| k == kind));
        nearest(same, e.pos).map_or(EntityState::Idle, EntityState::Harvesting)
    }

    fn halls(&self, p: usize) -> impl Iterator<Item = Pos> + '_ {
        self.entities.iter().filter(move |e| e.owner == p && e.kind == EntityKind::TownHall).map(|e| e.pos)
    }

    fn hall_at(&self, pos: Pos) -> bool {
        self.entities.iter().any(|e| e.kind == EntityKind::TownHall && e.pos == pos)
    }

    fn walkable(&self, pos: Pos) -> bool {
        walkable_in(&self.map, &self.entities, pos)
    }

    /// One greedy 4-neighbourhood step toward `goal`, stopping at distance
    /// `stop`. Tries the longer axis first and slides along the other when blocked.
    fn step_toward(&mut self, i: usize, goal: Pos, stop: usize) {
        let pos = self.entities[i].pos;
        if manhattan(pos, goal) <= stop {
            return;
        }
        let dx = goal.0 as isize - pos.0 as isize;
        let dy = goal.1 as isize - pos.1 as isize;
        let horiz = (pos.0.wrapping_add_signed(dx.signum()), pos.1);
        let vert = (pos.0, pos.1.wrapping_add_signed(dy.signum()));
        let order = if dx.abs() >= dy.abs() { [horiz, vert] } else { [vert, horiz] };
        for cand in order {
            if cand != pos && self.walkable(cand) {
                self.entities[i].pos = cand;
                return;
            }
        }
    }

    /// Matrix observation from `perspective`: tile one-hots (grass, forest,
    /// gold, oil), own units, enemy units, own buildings, enemy buildings,
    /// selected unit.
    pub fn observe(&self, perspective: usize, spec: ObservationSpec) -> Observation {
        let mut obs = Observation::zeros(spec);
        for pos in self.map.positions() {
            obs.set(pos.0, pos.1, self.map.tile(pos).plane(), 1.0);
        }
        for e in &self.entities {
            let own = e.owner == perspective;
            let plane = match (e.kind, own) {
                (EntityKind::Worker, true) => 4,
                (EntityKind::Worker, false) => 5,
                (EntityKind::TownHall, true) => 6,
                (EntityKind::TownHall, false) => 7,
            };
            obs.set(e.pos.0, e.pos.1, plane, 1.0);
        }
        if let Some(w) = self.selected_worker(perspective) {
            let pos = self.entities[w].pos;
            obs.set(pos.0, pos.1, 8, 1.0);
        }
        obs
    }

    /// Own then enemy normalised resources.
    pub fn aux_vector(&self, perspective: usize) -> [f64; 10] {
        let mut out = [0.0; 10];
        out[..5].copy_from_slice(&self.resources[perspective].normalized());
        out[5..].copy_from_slice(&self.resources[1 - perspective].normalized());
        out
    }

    pub fn render(&self) -> String {
        let mut rows: Vec<Vec<char>> = self.map.to_text().lines().map(|l| l.chars().collect()).collect();
        for e in &self.entities {
            rows[e.pos.1][e.pos.0] = match (e.kind, e.owner) {
                (EntityKind::TownHall, 0) => 'H',
                (EntityKind::TownHall, _) => 'h',
                (EntityKind::Worker, 0) => 'W',
                (EntityKind::Worker, _) => 'w',
            };
        }
        rows.into_iter().map(|r| r.into_iter().collect::<String>() + "\n").collect()
    }
}

pub fn observation_spec(config: &RtsConfig, map: &RtsMap) -> Result<ObservationSpec> {
    observation_spec_for(config.observation, map.width(), map.height())
}

fn walkable_in(map: &RtsMap, entities: &[Entity], pos: Pos) -> bool {
    map.in_bounds(pos)
        && map.tile(pos) == Tile::Grass
        && !entities.iter().any(|e| e.kind == EntityKind::TownHall && e.pos == pos)
}

fn neighbours(map: &RtsMap, (x, y): Pos) -> impl Iterator<Item = Pos> + '_ {
    [(x.wrapping_add(1), y), (x, y.wrapping_add(1)), (x.wrapping_sub(1), y), (x, y.wrapping_sub(1))]
        .into_iter()
        .filter(|&p| map.in_bounds(p))
}

fn manhattan(a: Pos, b: Pos) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

/// Closest position by Manhattan distance; ties go to the first in row-major order.
fn nearest(cands: impl Iterator<Item = Pos>, from: Pos) -> Option<Pos> {
    cands.min_by_key(|&p| (manhattan(p, from), p.1, p.0))
}
