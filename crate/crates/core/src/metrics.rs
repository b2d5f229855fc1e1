//! Runtime, success-probability and movement figures for a schedule.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::machine::PhysParams;
use crate::schedule::{ColumnMove, GateRef, Payload, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub u3: usize,
    pub cz: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub runtime_us: f64,
    pub esp: f64,
    pub swap_count: usize,
    pub trap_change_count: usize,
    pub total_movement_um: f64,
    pub gate_counts: GateCounts,
    pub compile_time_ms: f64,
}

/// Time for one column: x travel then the longest y travel of its atoms.
pub fn column_move_time(m: &ColumnMove, params: &PhysParams) -> f64 {
    let dy = m.atoms.iter().map(|a| (a.to_y - a.from_y).abs()).fold(0.0, f64::max);
    ((m.to_x - m.from_x).abs() + dy) / params.aod_speed
}

/// Duration of a batch of column moves. Columns move concurrently unless
/// `serial` is set.
pub fn layer_time(moves: &[ColumnMove], params: &PhysParams, serial: bool) -> f64 {
    let times = moves.iter().map(|m| column_move_time(m, params));
    if serial {
        times.sum()
    } else {
        times.fold(0.0, f64::max)
    }
}

pub fn event_duration(payload: &Payload, params: &PhysParams, serial: bool) -> f64 {
    match payload {
        Payload::ColumnMove { moves } => layer_time(moves, params, serial),
        Payload::U3Layer { .. } => params.u3_time,
        Payload::Illumination { .. } => params.cz_time,
        Payload::TrapChange { .. } => params.trap_change_time,
        Payload::Measure { .. } => 0.0,
    }
}

/// Sum of event durations. Equals the last event's end time for schedules
/// built by the compiler.
pub fn total_runtime(schedule: &Schedule, params: &PhysParams) -> f64 {
    schedule
        .events
        .iter()
        .map(|e| event_duration(&e.payload, params, schedule.meta.serial_movement))
        .sum()
}

/// Per-atom Manhattan distance summed over every column move.
pub fn movement_total(schedule: &Schedule) -> f64 {
    schedule
        .events
        .iter()
        .filter_map(|e| match &e.payload {
            Payload::ColumnMove { moves } => Some(moves),
            _ => None,
        })
        .flatten()
        .map(|m| {
            let dx = (m.to_x - m.from_x).abs();
            m.atoms.iter().map(|a| dx + (a.to_y - a.from_y).abs()).sum::<f64>()
        })
        .sum()
}

pub fn gate_counts(schedule: &Schedule) -> GateCounts {
    let mut c = GateCounts { u3: 0, cz: 0 };
    for e in &schedule.events {
        match &e.payload {
            Payload::U3Layer { gates } => c.u3 += gates.len(),
            Payload::Illumination { pairs } => c.cz += pairs.len(),
            _ => {}
        }
    }
    c
}

pub fn swap_count(schedule: &Schedule) -> usize {
    let mut ids = BTreeSet::new();
    for e in &schedule.events {
        let refs: Vec<GateRef> = match &e.payload {
            Payload::U3Layer { gates } => gates.iter().map(|g| g.gate).collect(),
            Payload::Illumination { pairs } => pairs.iter().map(|p| p.gate).collect(),
            _ => continue,
        };
        for r in refs {
            if let GateRef::Swap { id, .. } = r {
                ids.insert(id);
            }
        }
    }
    ids.len()
}

pub fn trap_change_count(schedule: &Schedule) -> usize {
    schedule
        .events
        .iter()
        .filter(|e| matches!(e.payload, Payload::TrapChange { .. }))
        .count()
}

/// Product of gate success rates, readout and loss survival, and T1/T2
/// decay of every qubit over the whole runtime (µs).
pub fn esp_from_counts(counts: GateCounts, num_qubits: usize, runtime_us: f64, params: &PhysParams) -> f64 {
    let t = runtime_us * 1e-6;
    let n = num_qubits as i32;
    let decay = (-t / params.t1).exp() * (-t / params.t2).exp();
    (1.0 - params.cz_error).powi(counts.cz as i32)
        * (1.0 - params.u3_error).powi(counts.u3 as i32)
        * (1.0 - params.readout_error).powi(n)
        * (1.0 - params.atom_loss).powi(n)
        * decay.powi(n)
}

pub fn esp(schedule: &Schedule, params: &PhysParams, num_qubits: usize) -> f64 {
    esp_from_counts(gate_counts(schedule), num_qubits, total_runtime(schedule, params), params)
}

/// Error of one SWAP built from three CZs and six U3s.
pub fn composed_swap_error(params: &PhysParams) -> f64 {
    1.0 - (1.0 - params.cz_error).powi(3) * (1.0 - params.u3_error).powi(6)
}

pub fn report(schedule: &Schedule, params: &PhysParams, compile_time_ms: f64) -> MetricsReport {
    let runtime = total_runtime(schedule, params);
    let counts = gate_counts(schedule);
    MetricsReport {
        runtime_us: runtime,
        esp: esp_from_counts(counts, schedule.meta.num_qubits, runtime, params),
        swap_count: swap_count(schedule),
        trap_change_count: trap_change_count(schedule),
        total_movement_um: movement_total(schedule),
        gate_counts: counts,
        compile_time_ms,
    }
}
