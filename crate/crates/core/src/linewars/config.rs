use serde::{Deserialize, Serialize};

use crate::env::ObsMode;
use crate::error::{Error, Result};

/// A mercenary type. `speed_milli` is thousandths of a cell per tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitKind {
    pub name: String,
    pub gold_cost: u32,
    pub hp: u32,
    pub speed_milli: u32,
    pub income_bonus_percent: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerKind {
    pub name: String,
    pub gold_cost: u32,
    pub damage: u32,
    /// Euclidean reach in cells.
    pub range: u32,
    /// Ticks between shots.
    pub cooldown: u32,
}

/// Normalisation caps for the auxiliary economy vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuxCaps {
    pub health: u32,
    pub gold: u32,
    pub lumber: u32,
    pub income: u32,
}

impl Default for AuxCaps {
    fn default() -> Self {
        AuxCaps { health: 50, gold: 1000, lumber: 1000, income: 200 }
    }
}

/// Match rules and catalog. The defaults are tuning choices, not canonical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DlwConfig {
    /// Columns along the lane axis; column 0 is player 0's base.
    pub width: usize,
    /// Rows (lanes).
    pub height: usize,
    /// Inclusive column range, in owner-local coordinates, where towers may stand.
    pub build_min_col: usize,
    pub build_max_col: usize,
    pub ticks_per_second: u32,
    pub income_interval: u32,
    pub starting_gold: u32,
    pub starting_health: u32,
    pub starting_income: u32,
    pub starting_lumber: u32,
    pub bounty_percent: u32,
    /// Hard cap on episode length; reaching it is a draw.
    pub max_ticks: u32,
    /// Expose one BuildAt action per (tower kind, buildable cell).
    pub direct_build: bool,
    pub observation: ObsMode,
    pub image_width: usize,
    pub image_height: usize,
    pub caps: AuxCaps,
    pub units: Vec<UnitKind>,
    pub towers: Vec<TowerKind>,
}

impl Default for DlwConfig {
    fn default() -> Self {
        DlwConfig {
            width: 15,
            height: 10,
            build_min_col: 1,
            build_max_col: 3,
            ticks_per_second: 10,
            income_interval: 10,
            starting_gold: 50,
            starting_health: 50,
            starting_income: 10,
            starting_lumber: 0,
            bounty_percent: 50,
            max_ticks: 5000,
            direct_build: false,
            observation: ObsMode::HeatmapGray,
            image_width: 800,
            image_height: 600,
            caps: AuxCaps::default(),
            units: vec![
                UnitKind { name: "Soldier".into(), gold_cost: 10, hp: 20, speed_milli: 250, income_bonus_percent: 10 },
                UnitKind { name: "Runner".into(), gold_cost: 25, hp: 30, speed_milli: 500, income_bonus_percent: 10 },
                UnitKind { name: "Tank".into(), gold_cost: 60, hp: 120, speed_milli: 200, income_bonus_percent: 10 },
            ],
            towers: vec![
                TowerKind { name: "Arrow".into(), gold_cost: 30, damage: 6, range: 1, cooldown: 2 },
                TowerKind { name: "Cannon".into(), gold_cost: 80, damage: 20, range: 1, cooldown: 4 },
            ],
        }
    }
}

impl DlwConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: DlwConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("deep line wars: {m}")));
        if self.width < 3 || self.height == 0 {
            return bad("grid must be at least 3 columns and 1 row");
        }
        if self.build_min_col == 0 || self.build_min_col > self.build_max_col || self.build_max_col >= self.width / 2 {
            return bad("build columns must lie strictly between the base and the midline");
        }
        if self.units.is_empty() || self.towers.is_empty() {
            return bad("unit and tower catalogs must be non-empty");
        }
        if self.units.iter().any(|u| u.hp == 0 || u.speed_milli == 0) {
            return bad("units need positive hp and speed");
        }
        if self.towers.iter().any(|t| t.cooldown == 0) {
            return bad("tower cooldown must be at least 1 tick");
        }
        if self.income_interval == 0 || self.max_ticks == 0 || self.starting_health == 0 {
            return bad("income interval, max ticks and starting health must be positive");
        }
        if self.image_width == 0 || self.image_height == 0 {
            return bad("image size must be positive");
        }
        Ok(())
    }

    pub fn build_columns(&self) -> usize {
        self.build_max_col - self.build_min_col + 1
    }
}
