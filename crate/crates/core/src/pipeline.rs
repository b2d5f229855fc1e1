//! QASM text to validated schedule and metrics in one call.

use std::time::Instant;

use crate::circuit::{decompose_to_basis, parse_qasm, Circuit};
use crate::error::{CapacityError, Error, Result};
use crate::machine::{validate_geometry, GridKind, PhysParams, Scale};
use crate::metrics::{report, MetricsReport};
use crate::schedule::Technique;
use crate::scheduler::{compile, Compiled};
use crate::verify::{equivalence_check, validate_schedule, Equivalence, EQUIVALENCE_MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub technique: Technique,
    pub grid: GridKind,
    pub scale: Scale,
    pub serial_movement: bool,
    /// Replay the schedule and, for small circuits, check equivalence.
    pub validate: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            technique: Technique::Pachinqo,
            grid: GridKind::LargeSquare,
            scale: Scale::Default,
            serial_movement: false,
            validate: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    pub circuit: Circuit,
    pub compiled: Compiled,
    pub report: MetricsReport,
}

pub fn compile_circuit(circuit: Circuit, params: &PhysParams, opts: &CompileOptions) -> Result<Output> {
    let t0 = Instant::now();
    let compiled = compile(&circuit, opts.technique, opts.grid, params, opts.scale, opts.serial_movement)?;
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    if opts.validate {
        let geo = validate_geometry(&compiled.layout, &compiled.grid, params);
        if let Some(g) = geo.first() {
            return Err(CapacityError::Geometry(g.0.clone()).into());
        }
        let v = validate_schedule(&compiled.schedule, &compiled.layout, &compiled.grid, params, &circuit);
        if !v.is_empty() {
            let shown: Vec<String> = v.iter().take(5).map(ToString::to_string).collect();
            return Err(Error::Verification(format!("{} violations: {}", v.len(), shown.join("; "))));
        }
        if circuit.num_qubits <= EQUIVALENCE_MAX_QUBITS {
            if let Equivalence::Diverged(d) = equivalence_check(&compiled.schedule, &circuit)? {
                return Err(Error::Verification(format!("output distribution diverged (TVD {d:e})")));
            }
        }
    }
    let report = report(&compiled.schedule, params, ms);
    Ok(Output { circuit, compiled, report })
}

pub fn compile_qasm(text: &str, name: &str, params: &PhysParams, opts: &CompileOptions) -> Result<Output> {
    let raw = parse_qasm(text, name)?;
    compile_circuit(decompose_to_basis(&raw), params, opts)
}

/// Process exit status for an error: 1 input, 2 capacity or geometry,
/// 3 validation.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity(_) => 2,
        Error::Verification(_) | Error::Oracle(_) => 3,
        Error::Parse(_) | Error::Config(_) | Error::Io { .. } | Error::Json(_) => 1,
    }
}
