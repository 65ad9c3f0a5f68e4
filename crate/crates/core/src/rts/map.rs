use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

pub type Pos = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResourceKind {
    Lumber,
    Gold,
    Oil,
}

impl ResourceKind {
    pub const ALL: [ResourceKind; 3] = [ResourceKind::Lumber, ResourceKind::Gold, ResourceKind::Oil];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A map tile. Resource tiles carry their remaining stock and revert to grass
/// when emptied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tile {
    Grass,
    Forest(u32),
    GoldMine(u32),
    Oil(u32),
    /// Starting town hall site of a player.
    Spawn(usize),
}

impl Tile {
    pub fn resource(self) -> Option<(ResourceKind, u32)> {
        match self {
            Tile::Forest(s) => Some((ResourceKind::Lumber, s)),
            Tile::GoldMine(s) => Some((ResourceKind::Gold, s)),
            Tile::Oil(s) => Some((ResourceKind::Oil, s)),
            _ => None,
        }
    }

    fn with_stock(self, stock: u32) -> Tile {
        if stock == 0 {
            return Tile::Grass;
        }
        match self {
            Tile::Forest(_) => Tile::Forest(stock),
            Tile::GoldMine(_) => Tile::GoldMine(stock),
            Tile::Oil(_) => Tile::Oil(stock),
            t => t,
        }
    }

    /// Index of the tile-kind one-hot plane (spawn sites count as grass).
    pub fn plane(self) -> usize {
        match self {
            Tile::Grass | Tile::Spawn(_) => 0,
            Tile::Forest(_) => 1,
            Tile::GoldMine(_) => 2,
            Tile::Oil(_) => 3,
        }
    }
}

/// Initial stock per resource tile kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TileStocks {
    pub forest: u32,
    pub gold_mine: u32,
    pub oil: u32,
}

impl Default for TileStocks {
    fn default() -> Self {
        TileStocks { forest: 50, gold_mine: 100, oil: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtsMap {
    width: usize,
    height: usize,
    tiles: Vec<Tile>,
}

impl RtsMap {
    pub fn filled(width: usize, height: usize, tile: Tile) -> Self {
        RtsMap { width, height, tiles: vec![tile; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn in_bounds(&self, (x, y): Pos) -> bool {
        x < self.width && y < self.height
    }

    pub fn tile(&self, (x, y): Pos) -> Tile {
        self.tiles[y * self.width + x]
    }

    pub fn set_tile(&mut self, (x, y): Pos, tile: Tile) {
        self.tiles[y * self.width + x] = tile;
    }

    /// Remove up to `amount` from a resource tile and return what was taken.
    pub fn take(&mut self, pos: Pos, amount: u32) -> u32 {
        let tile = self.tile(pos);
        match tile.resource() {
            Some((_, stock)) => {
                let got = amount.min(stock);
                self.set_tile(pos, tile.with_stock(stock - got));
                got
            }
            None => 0,
        }
    }

    pub fn spawns(&self, player: usize) -> Vec<Pos> {
        self.positions().filter(|&p| self.tile(p) == Tile::Spawn(player)).collect()
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| (x, y)))
    }

    /// Remaining stock per resource kind, in [`ResourceKind::ALL`] order.
    pub fn stock_totals(&self) -> [u64; 3] {
        let mut out = [0u64; 3];
        for t in &self.tiles {
            if let Some((k, s)) = t.resource() {
                out[k.index()] += s as u64;
            }
        }
        out
    }

    /// Parse a plain-text map: `.` grass, `F` forest, `G` gold mine, `O` oil,
    /// `1`/`2` spawn sites of player 0/1.
    pub fn from_text(text: &str, stocks: &TileStocks) -> Result<Self> {
        let rows: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect();
        let width = rows.first().map_or(0, |r| r.chars().count());
        if width == 0 || rows.iter().any(|r| r.chars().count() != width) {
            return Err(Error::Parse("map rows must be non-empty and equally wide".into()));
        }
        let mut tiles = Vec::with_capacity(width * rows.len());
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.chars().enumerate() {
                tiles.push(match c {
                    '.' => Tile::Grass,
                    'F' => Tile::Forest(stocks.forest),
                    'G' => Tile::GoldMine(stocks.gold_mine),
                    'O' => Tile::Oil(stocks.oil),
                    '1' => Tile::Spawn(0),
                    '2' => Tile::Spawn(1),
                    _ => return Err(Error::Parse(format!("unknown tile {c:?} at row {y}, column {x}"))),
                });
            }
        }
        let map = RtsMap { width, height: rows.len(), tiles };
        map.validate()?;
        Ok(map)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(match self.tile((x, y)) {
                    Tile::Grass => '.',
                    Tile::Forest(_) => 'F',
                    Tile::GoldMine(_) => 'G',
                    Tile::Oil(_) => 'O',
                    Tile::Spawn(p) => if p == 0 { '1' } else { '2' },
                });
            }
            out.push('\n');
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for p in 0..2 {
            if self.spawns(p).is_empty() {
                return Err(Error::InvalidConfig(format!("map has no spawn for player {p}")));
            }
        }
        Ok(())
    }

    /// Point-symmetric random map with spawns in opposite corners.
    pub fn generate(width: usize, height: usize, seed: u64, stocks: &TileStocks) -> Result<Self> {
        if width < 6 || height < 6 {
            return Err(Error::InvalidConfig("generated maps must be at least 6x6".into()));
        }
        let mut map = RtsMap::filled(width, height, Tile::Grass);
        let s0 = (1, 1);
        let s1 = (width - 2, height - 2);
        map.set_tile(s0, Tile::Spawn(0));
        map.set_tile(s1, Tile::Spawn(1));
        let mirror = |(x, y): Pos| (width - 1 - x, height - 1 - y);
        let clear = |p: Pos| {
            let d = |a: Pos| a.0.abs_diff(p.0) + a.1.abs_diff(p.1);
            d(s0) > 2 && d(s1) > 2
        };
        let mut rng = Rng::new(seed);
        let kinds = [Tile::GoldMine(stocks.gold_mine), Tile::Forest(stocks.forest), Tile::Oil(stocks.oil)];
        let target = (width * height / 16).max(3);
        let mut placed = 0;
        let mut attempts = 0;
        while placed < target && attempts < 100 * target {
            attempts += 1;
            let p = (rng.index(width), rng.index(height));
            let q = mirror(p);
            if p == q || !clear(p) || map.tile(p) != Tile::Grass || map.tile(q) != Tile::Grass {
                continue;
            }
            let t = kinds[placed % kinds.len()];
            map.set_tile(p, t);
            map.set_tile(q, t);
            placed += 1;
        }
        Ok(map)
    }
}
