use serde::{Deserialize, Serialize};
use std::str::FromStr;

use super::grid::{generate_grid, GridKind};
use super::params::PhysParams;
use crate::error::CapacityError;
use crate::geometry::{Point, Rect};

/// Movement corridor kept free inside every zone, in µm. Not scaled.
pub const CORRIDOR_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Default,
    Doubled,
    Auto,
}

impl FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(Scale::Default),
            "doubled" => Ok(Scale::Doubled),
            "auto" => Ok(Scale::Auto),
            other => Err(format!("unknown scale `{other}` (expected default, doubled or auto)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Zone rectangles of the array. The right cache doubles as the readout zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneLayout {
    pub factor: f64,
    pub bounds: Rect,
    pub left_cache: Rect,
    pub compute: Rect,
    pub right_cache: Rect,
    pub memory: Rect,
}

impl ZoneLayout {
    /// 370×190 µm array: caches 80×130, compute 190×130, memory 190×50.
    pub fn standard() -> Self {
        ZoneLayout {
            factor: 1.0,
            bounds: Rect::new(0.0, 0.0, 370.0, 190.0),
            left_cache: Rect::new(10.0, 55.0, 90.0, 185.0),
            compute: Rect::new(90.0, 55.0, 280.0, 185.0),
            right_cache: Rect::new(280.0, 55.0, 360.0, 185.0),
            memory: Rect::new(90.0, 5.0, 280.0, 55.0),
        }
    }

    pub fn doubled() -> Self {
        Self::standard().scaled(2.0)
    }

    fn scaled(&self, k: f64) -> Self {
        ZoneLayout {
            factor: self.factor * k,
            bounds: self.bounds.scaled(k),
            left_cache: self.left_cache.scaled(k),
            compute: self.compute.scaled(k),
            right_cache: self.right_cache.scaled(k),
            memory: self.memory.scaled(k),
        }
    }

    pub fn readout(&self) -> Rect {
        self.right_cache
    }

    pub fn cache(&self, side: Side) -> Rect {
        match side {
            Side::Left => self.left_cache,
            Side::Right => self.right_cache,
        }
    }

    pub fn zones(&self) -> [(&'static str, Rect); 4] {
        [
            ("left_cache", self.left_cache),
            ("compute", self.compute),
            ("right_cache", self.right_cache),
            ("memory", self.memory),
        ]
    }

    /// Column parking slots per cache.
    pub fn cache_slots(&self, params: &PhysParams) -> usize {
        let usable = self.left_cache.width() - 2.0 * CORRIDOR_MARGIN;
        (usable / params.storage_pitch + 1e-9).floor() as usize + 1
    }

    pub fn aod_capacity(&self, params: &PhysParams) -> usize {
        self.cache_slots(params) * params.max_atoms_per_column
    }

    /// x of cache slot `i`, counted from the cache edge facing compute.
    pub fn cache_slot_x(&self, side: Side, i: usize, params: &PhysParams) -> f64 {
        let off = CORRIDOR_MARGIN + i as f64 * params.storage_pitch;
        match side {
            Side::Left => self.left_cache.x_max - off,
            Side::Right => self.right_cache.x_min + off,
        }
    }

    /// x of cache slot `i`, counted from the outer edge of the cache.
    pub fn cache_outer_slot_x(&self, side: Side, i: usize, params: &PhysParams) -> f64 {
        let off = CORRIDOR_MARGIN + i as f64 * params.storage_pitch;
        match side {
            Side::Left => self.left_cache.x_min + off,
            Side::Right => self.right_cache.x_max - off,
        }
    }

    /// y of storage row `r` in a cache, top row first.
    pub fn cache_row_y(&self, r: usize, params: &PhysParams) -> f64 {
        self.right_cache.y_max - CORRIDOR_MARGIN - r as f64 * params.storage_pitch
    }

    /// y of readout row `r` for atoms brought up from compute, bottom row first.
    pub fn readout_low_row_y(&self, r: usize, params: &PhysParams) -> f64 {
        self.right_cache.y_min + CORRIDOR_MARGIN + r as f64 * params.storage_pitch
    }

    /// Memory storage rows, top row (nearest compute) first.
    pub fn memory_rows(&self, params: &PhysParams) -> Vec<f64> {
        let top = self.memory.y_max - CORRIDOR_MARGIN;
        let bottom = self.memory.y_min + CORRIDOR_MARGIN;
        let n = ((top - bottom) / params.storage_pitch + 1e-9).floor() as usize + 1;
        (0..n).map(|r| top - r as f64 * params.storage_pitch).collect()
    }

    /// Memory storage column positions, left to right.
    pub fn memory_columns(&self, params: &PhysParams) -> Vec<f64> {
        let left = self.memory.x_min + CORRIDOR_MARGIN;
        let right = self.memory.x_max - CORRIDOR_MARGIN;
        let n = ((right - left) / params.storage_pitch + 1e-9).floor() as usize + 1;
        (0..n).map(|c| left + c as f64 * params.storage_pitch).collect()
    }

    pub fn in_compute(&self, p: Point) -> bool {
        self.compute.contains(p)
    }

    pub fn in_any_zone(&self, p: Point) -> bool {
        self.zones().iter().any(|(_, r)| r.contains(p))
    }
}

/// Qubits a layout can hold with a given grid: usable SLM sites plus cache
/// column slots.
pub fn layout_capacity(layout: &ZoneLayout, kind: GridKind, params: &PhysParams) -> usize {
    let slm = generate_grid(kind, layout, params, 0)
        .map(|g| g.usable_count())
        .unwrap_or(0);
    slm + layout.aod_capacity(params)
}

/// Picks the layout for a circuit. `Auto` switches to the doubled layout when
/// the standard one cannot hold every qubit.
pub fn build_layout(
    num_qubits: usize,
    scale: Scale,
    kind: GridKind,
    params: &PhysParams,
) -> Result<ZoneLayout, CapacityError> {
    let standard = ZoneLayout::standard();
    let layout = match scale {
        Scale::Default => standard,
        Scale::Doubled => ZoneLayout::doubled(),
        Scale::Auto => {
            if num_qubits <= layout_capacity(&standard, kind, params) {
                standard
            } else {
                let doubled = ZoneLayout::doubled();
                let cap = layout_capacity(&doubled, kind, params);
                if num_qubits > cap {
                    return Err(CapacityError::ExceedsLayout {
                        qubits: num_qubits,
                        capacity: cap,
                    });
                }
                doubled
            }
        }
    };
    let cap = layout_capacity(&layout, kind, params);
    if num_qubits > cap {
        return Err(CapacityError::InsufficientSlm {
            needed: num_qubits,
            available: cap,
        });
    }
    Ok(layout)
}
