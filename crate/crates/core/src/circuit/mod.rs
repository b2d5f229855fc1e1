//! Circuit representation in the {U3, CZ} basis, the QASM front end, and the
//! per-qubit dependency frontier the scheduler walks.

mod frontier;
pub mod qasm;

pub use frontier::{Frontier, NextGate, SwapCompleted, SwapId};
pub use qasm::{parse_qasm, RawCircuit, RawGate};

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Angles of a U3 rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct U3Angles {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

impl U3Angles {
    pub const fn new(theta: f64, phi: f64, lambda: f64) -> Self {
        Self { theta, phi, lambda }
    }

    pub const HADAMARD: U3Angles = U3Angles::new(FRAC_PI_2, 0.0, PI);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    U3 { qubit: usize, angles: U3Angles },
    Cz(usize, usize),
}

impl Op {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Op::U3 { qubit, .. } => (qubit, None),
            Op::Cz(a, b) => (a, Some(b)),
        }
    }

    pub fn touches(&self, q: usize) -> bool {
        match *self {
            Op::U3 { qubit, .. } => qubit == q,
            Op::Cz(a, b) => a == q || b == q,
        }
    }

    pub fn is_cz(&self) -> bool {
        matches!(self, Op::Cz(..))
    }
}

/// Where a basis gate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Native,
    /// Step `0..9` of the fixed SWAP template.
    SwapComponent { swap: u32, step: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub op: Op,
    pub origin: Origin,
}

impl Gate {
    pub fn u3(qubit: usize, angles: U3Angles) -> Self {
        Gate {
            op: Op::U3 { qubit, angles },
            origin: Origin::Native,
        }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Gate {
            op: Op::Cz(a, b),
            origin: Origin::Native,
        }
    }
}

/// Lowered circuit: only U3 and CZ gates, list order is dependency order.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub source_name: String,
}

impl Circuit {
    pub fn new(num_qubits: usize, source_name: impl Into<String>) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
            source_name: source_name.into(),
        }
    }

    /// Appends a gate, checking the basis invariants.
    pub fn push(&mut self, gate: Gate) {
        match gate.op {
            Op::U3 { qubit, .. } => assert!(qubit < self.num_qubits, "qubit {qubit} out of range"),
            Op::Cz(a, b) => {
                assert!(a != b, "CZ operands must differ");
                assert!(a < self.num_qubits && b < self.num_qubits, "CZ operand out of range");
            }
        }
        self.gates.push(gate);
    }

    pub fn cz_count(&self) -> usize {
        self.gates.iter().filter(|g| g.op.is_cz()).count()
    }

    pub fn u3_count(&self) -> usize {
        self.gates.len() - self.cz_count()
    }

    /// Gate indices touching each qubit, in list order.
    pub fn per_qubit(&self) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.num_qubits];
        for (i, g) in self.gates.iter().enumerate() {
            match g.op {
                Op::U3 { qubit, .. } => lists[qubit].push(i),
                Op::Cz(a, b) => {
                    lists[a].push(i);
                    lists[b].push(i);
                }
            }
        }
        lists
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("SWAP operands must differ (got {0} twice)")]
pub struct SameQubitSwap(pub usize);

/// Fixed nine-gate SWAP template: three CZs conjugated by Hadamard-type U3s.
/// CZ steps sit at indices 1, 4 and 7.
pub fn decompose_swap(a: usize, b: usize, swap: u32) -> Result<[Gate; 9], SameQubitSwap> {
    if a == b {
        return Err(SameQubitSwap(a));
    }
    let h = |q| Op::U3 {
        qubit: q,
        angles: U3Angles::HADAMARD,
    };
    let ops = [
        h(b),
        Op::Cz(a, b),
        h(b),
        h(a),
        Op::Cz(b, a),
        h(a),
        h(b),
        Op::Cz(a, b),
        h(b),
    ];
    Ok(std::array::from_fn(|i| Gate {
        op: ops[i],
        origin: Origin::SwapComponent {
            swap,
            step: i as u8,
        },
    }))
}

/// U3 angles for each supported one-qubit standard gate.
pub(crate) fn one_qubit_angles(gate: &RawGate) -> Option<(usize, U3Angles)> {
    use RawGate::*;
    let a = |t, p, l| U3Angles::new(t, p, l);
    Some(match *gate {
        U3(q, t, p, l) => (q, a(t, p, l)),
        U2(q, p, l) => (q, a(FRAC_PI_2, p, l)),
        U1(q, l) | P(q, l) | Rz(q, l) => (q, a(0.0, 0.0, l)),
        Rx(q, t) => (q, a(t, -FRAC_PI_2, FRAC_PI_2)),
        Ry(q, t) => (q, a(t, 0.0, 0.0)),
        X(q) => (q, a(PI, 0.0, PI)),
        Y(q) => (q, a(PI, FRAC_PI_2, FRAC_PI_2)),
        Z(q) => (q, a(0.0, 0.0, PI)),
        H(q) => (q, U3Angles::HADAMARD),
        S(q) => (q, a(0.0, 0.0, FRAC_PI_2)),
        Sdg(q) => (q, a(0.0, 0.0, -FRAC_PI_2)),
        T(q) => (q, a(0.0, 0.0, FRAC_PI_4)),
        Tdg(q) => (q, a(0.0, 0.0, -FRAC_PI_4)),
        Cx(..) | Cz(..) | Swap(..) | Ccx(..) => return None,
    })
}

/// Standard six-CX Toffoli expansion over {H, T, Tdg, CX}.
pub(crate) fn expand_ccx(a: usize, b: usize, c: usize) -> Vec<RawGate> {
    use RawGate::*;
    vec![
        H(c),
        Cx(b, c),
        Tdg(c),
        Cx(a, c),
        T(c),
        Cx(b, c),
        Tdg(c),
        Cx(a, c),
        T(b),
        T(c),
        H(c),
        Cx(a, b),
        T(a),
        Tdg(b),
        Cx(a, b),
    ]
}

/// Lowers every raw gate into its fixed {U3, CZ} template. Per-qubit order is
/// preserved; SWAPs from the source use the same template as inserted SWAPs.
pub fn decompose_to_basis(raw: &RawCircuit) -> Circuit {
    let mut out = Circuit::new(raw.num_qubits, raw.source_name.clone());
    let mut next_swap = 0u32;
    let mut stack: Vec<RawGate> = Vec::new();
    for gate in &raw.gates {
        stack.clear();
        match *gate {
            RawGate::Ccx(a, b, c) => stack.extend(expand_ccx(a, b, c)),
            g => stack.push(g),
        }
        for g in &stack {
            if let Some((q, angles)) = one_qubit_angles(g) {
                out.push(Gate::u3(q, angles));
                continue;
            }
            match *g {
                RawGate::Cz(a, b) => out.push(Gate::cz(a, b)),
                RawGate::Cx(a, b) => {
                    out.push(Gate::u3(b, U3Angles::HADAMARD));
                    out.push(Gate::cz(a, b));
                    out.push(Gate::u3(b, U3Angles::HADAMARD));
                }
                RawGate::Swap(a, b) => {
                    let seq = decompose_swap(a, b, next_swap)
                        .expect("parser rejects SWAP with repeated operand");
                    next_swap += 1;
                    for gate in seq {
                        out.push(gate);
                    }
                }
                _ => unreachable!("one-qubit gates handled above"),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_template_counts_and_cz_steps() {
        let seq = decompose_swap(0, 1, 7).unwrap();
        let cz_steps: Vec<usize> = seq
            .iter()
            .enumerate()
            .filter(|(_, g)| g.op.is_cz())
            .map(|(i, _)| i)
            .collect();
        assert_eq!(cz_steps, vec![1, 4, 7]);
        assert_eq!(seq.iter().filter(|g| !g.op.is_cz()).count(), 6);
        for (i, g) in seq.iter().enumerate() {
            assert_eq!(
                g.origin,
                Origin::SwapComponent {
                    swap: 7,
                    step: i as u8
                }
            );
        }
    }

    #[test]
    fn swap_rejects_same_qubit() {
        assert_eq!(decompose_swap(3, 3, 0).unwrap_err(), SameQubitSwap(3));
    }

    #[test]
    fn cx_lowers_to_h_conjugated_cz() {
        let raw = RawCircuit {
            num_qubits: 2,
            gates: vec![RawGate::Cx(0, 1)],
            source_name: "cx".into(),
        };
        let c = decompose_to_basis(&raw);
        assert_eq!(
            c.gates.iter().map(|g| g.op).collect::<Vec<_>>(),
            vec![
                Op::U3 {
                    qubit: 1,
                    angles: U3Angles::HADAMARD
                },
                Op::Cz(0, 1),
                Op::U3 {
                    qubit: 1,
                    angles: U3Angles::HADAMARD
                },
            ]
        );
    }

    #[test]
    fn hadamard_is_single_u3() {
        let raw = RawCircuit {
            num_qubits: 1,
            gates: vec![RawGate::H(0)],
            source_name: "h".into(),
        };
        let c = decompose_to_basis(&raw);
        assert_eq!(c.gates.len(), 1);
        assert_eq!(
            c.gates[0].op,
            Op::U3 {
                qubit: 0,
                angles: U3Angles::new(FRAC_PI_2, 0.0, PI)
            }
        );
    }

    #[test]
    fn ghz3_lowers_to_seven_gates() {
        let raw = parse_qasm(
            "OPENQASM 2.0; include \"qelib1.inc\"; qreg q[3]; h q[0]; cx q[0],q[1]; cx q[1],q[2];",
            "ghz3",
        )
        .unwrap();
        let c = decompose_to_basis(&raw);
        assert_eq!(c.gates.len(), 7);
        assert_eq!(c.cz_count(), 2);
    }

    #[test]
    fn per_qubit_lists_follow_list_order() {
        let mut c = Circuit::new(3, "t");
        c.push(Gate::u3(0, U3Angles::HADAMARD));
        c.push(Gate::cz(0, 1));
        c.push(Gate::cz(1, 2));
        assert_eq!(c.per_qubit(), vec![vec![0, 1], vec![1, 2], vec![2]]);
    }
}
