//! Timed event schedule and its JSON form.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::circuit::U3Angles;
use crate::machine::{GridKind, PhysParams};
use crate::metrics::event_duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Pachinqo,
    Degreesplit,
    Onecache,
    Trapchange,
}

impl Technique {
    pub const ALL: [Technique; 4] = [
        Technique::Pachinqo,
        Technique::Degreesplit,
        Technique::Onecache,
        Technique::Trapchange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Pachinqo => "pachinqo",
            Technique::Degreesplit => "degreesplit",
            Technique::Onecache => "onecache",
            Technique::Trapchange => "trapchange",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Technique::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown technique `{s}` (expected pachinqo, degreesplit, onecache or trapchange)"))
    }
}

/// Which gate an executed entry corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateRef {
    /// Index into the lowered circuit's gate list.
    Circuit(usize),
    /// Step of an inserted SWAP between qubits `a` and `b`.
    Swap { id: u32, step: u8, a: usize, b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomMove {
    pub atom: usize,
    pub from_y: f64,
    pub to_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMove {
    pub column: usize,
    pub from_x: f64,
    pub to_x: f64,
    pub atoms: Vec<AtomMove>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct U3Entry {
    pub qubit: usize,
    pub atom: usize,
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
    pub gate: GateRef,
}

impl U3Entry {
    pub fn angles(&self) -> U3Angles {
        U3Angles::new(self.theta, self.phi, self.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CzEntry {
    pub qubits: [usize; 2],
    pub atoms: [usize; 2],
    pub positions: [[f64; 2]; 2],
    pub gate: GateRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrapDirection {
    SlmToAod,
    AodToSlm,
}

/// One atom changing trap type at (x, y). `column` is the AOD column that
/// receives or releases it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    pub atom: usize,
    pub column: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    ColumnMove { moves: Vec<ColumnMove> },
    U3Layer { gates: Vec<U3Entry> },
    Illumination { pairs: Vec<CzEntry> },
    TrapChange { direction: TrapDirection, transfers: Vec<Transfer> },
    Measure { atoms: Vec<usize> },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::ColumnMove { .. } => "column-move",
            Payload::U3Layer { .. } => "u3-layer",
            Payload::Illumination { .. } => "illumination",
            Payload::TrapChange { .. } => "trap-change",
            Payload::Measure { .. } => "measure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t_start_us: f64,
    pub t_end_us: f64,
    pub layer: usize,
    #[serde(flatten)]
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMeta {
    pub technique: Technique,
    pub grid: GridKind,
    pub params_hash: String,
    pub serial_movement: bool,
    pub num_qubits: usize,
    pub layout_factor: f64,
}

/// Where an atom starts: every atom is loaded into a memory SLM trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub atom: usize,
    pub qubit: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub meta: ScheduleMeta,
    pub initial_atoms: Vec<AtomRecord>,
    pub events: Vec<Event>,
    /// `final_mapping[q]` is the atom holding qubit `q` at readout.
    pub final_mapping: Vec<usize>,
}

impl Schedule {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Schedule> {
        serde_json::from_str(text)
    }
}

/// Appends events back to back, stamping each with its duration.
#[derive(Debug, Clone)]
pub struct Timeline<'p> {
    params: &'p PhysParams,
    serial_movement: bool,
    now: f64,
    pub events: Vec<Event>,
}

impl<'p> Timeline<'p> {
    pub fn new(params: &'p PhysParams, serial_movement: bool) -> Self {
        Timeline {
            params,
            serial_movement,
            now: 0.0,
            events: Vec::new(),
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn push(&mut self, layer: usize, payload: Payload) {
        let d = event_duration(&payload, self.params, self.serial_movement);
        let t0 = self.now;
        self.now += d;
        self.events.push(Event {
            t_start_us: t0,
            t_end_us: self.now,
            layer,
            payload,
        });
    }

    /// Moves with no displacement are dropped; an empty batch emits nothing.
    pub fn push_moves(&mut self, layer: usize, moves: Vec<ColumnMove>) {
        let moves: Vec<ColumnMove> = moves
            .into_iter()
            .filter(|m| m.from_x != m.to_x || m.atoms.iter().any(|a| a.from_y != a.to_y))
            .collect();
        if !moves.is_empty() {
            self.push(layer, Payload::ColumnMove { moves });
        }
    }

    pub fn trap_changes(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.payload, Payload::TrapChange { .. }))
            .count()
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}
