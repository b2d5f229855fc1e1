use super::{decompose_swap, Circuit, Gate, Op};

pub type SwapId = u32;

/// What a qubit executes next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextGate {
    /// Index into `Circuit::gates`.
    Circuit(usize),
    /// Pending step of an inserted SWAP.
    Swap { id: SwapId, step: u8 },
    Done,
}

/// Emitted when the ninth step of an inserted SWAP executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapCompleted {
    pub id: SwapId,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone)]
struct SwapState {
    a: usize,
    b: usize,
    template: [Gate; 9],
    /// Steps already executed, `0..=9`.
    done: u8,
}

/// Per-qubit cursor into the gate list plus the SWAP lock table.
///
/// Cursors only move forward. A qubit locked to a SWAP executes nothing but
/// that SWAP's template until all nine steps are done.
#[derive(Debug, Clone)]
pub struct Frontier<'c> {
    circuit: &'c Circuit,
    per_qubit: Vec<Vec<usize>>,
    cursor: Vec<usize>,
    lock: Vec<Option<SwapId>>,
    swaps: Vec<SwapState>,
    remaining: usize,
}

impl<'c> Frontier<'c> {
    pub fn new(circuit: &'c Circuit) -> Self {
        Frontier {
            circuit,
            per_qubit: circuit.per_qubit(),
            cursor: vec![0; circuit.num_qubits],
            lock: vec![None; circuit.num_qubits],
            swaps: Vec::new(),
            remaining: circuit.gates.len(),
        }
    }

    pub fn circuit(&self) -> &'c Circuit {
        self.circuit
    }

    pub fn num_qubits(&self) -> usize {
        self.cursor.len()
    }

    /// Circuit gate the qubit's cursor points at, ignoring locks.
    pub fn cursor_gate(&self, q: usize) -> Option<usize> {
        self.per_qubit[q].get(self.cursor[q]).copied()
    }

    pub fn next(&self, q: usize) -> NextGate {
        if let Some(id) = self.lock[q] {
            return NextGate::Swap {
                id,
                step: self.swaps[id as usize].done,
            };
        }
        match self.cursor_gate(q) {
            Some(g) => NextGate::Circuit(g),
            None => NextGate::Done,
        }
    }

    pub fn lock_of(&self, q: usize) -> Option<SwapId> {
        self.lock[q]
    }

    pub fn is_locked(&self, q: usize) -> bool {
        self.lock[q].is_some()
    }

    /// Circuit gates still unexecuted.
    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn active_swaps(&self) -> usize {
        self.swaps.iter().filter(|s| s.done < 9).count()
    }

    pub fn swaps_started(&self) -> usize {
        self.swaps.len()
    }

    pub fn all_done(&self) -> bool {
        self.remaining == 0 && self.active_swaps() == 0
    }

    /// Qubits that have no gates left at all.
    pub fn is_finished(&self, q: usize) -> bool {
        self.lock[q].is_none() && self.cursor[q] >= self.per_qubit[q].len()
    }

    /// Remaining circuit gates on `q` (cursor onwards).
    pub fn remaining_on(&self, q: usize) -> &[usize] {
        &self.per_qubit[q][self.cursor[q].min(self.per_qubit[q].len())..]
    }

    /// Partner of the next CZ on `q` in its remaining circuit gates.
    pub fn next_cz_partner(&self, q: usize) -> Option<(usize, usize)> {
        self.remaining_on(q).iter().find_map(|&g| match self.circuit.gates[g].op {
            Op::Cz(a, b) => Some((g, if a == q { b } else { a })),
            Op::U3 { .. } => None,
        })
    }

    pub fn swap_gate(&self, id: SwapId, step: u8) -> Gate {
        self.swaps[id as usize].template[step as usize]
    }

    pub fn swap_operands(&self, id: SwapId) -> (usize, usize) {
        let s = &self.swaps[id as usize];
        (s.a, s.b)
    }

    /// The gate a qubit would execute next, with its reference.
    pub fn next_gate(&self, q: usize) -> Option<(NextGate, Gate)> {
        match self.next(q) {
            NextGate::Circuit(i) => Some((NextGate::Circuit(i), self.circuit.gates[i])),
            NextGate::Swap { id, step } => Some((NextGate::Swap { id, step }, self.swap_gate(id, step))),
            NextGate::Done => None,
        }
    }

    /// True iff both qubits point at the same pending CZ: either an unlocked
    /// circuit CZ or the current CZ step of a SWAP both are locked to.
    pub fn executable_cz(&self, q1: usize, q2: usize) -> bool {
        if q1 == q2 {
            return false;
        }
        match (self.next(q1), self.next(q2)) {
            (NextGate::Circuit(g1), NextGate::Circuit(g2)) => {
                g1 == g2 && self.circuit.gates[g1].op.is_cz()
            }
            (NextGate::Swap { id: s1, step }, NextGate::Swap { id: s2, .. }) => {
                s1 == s2 && self.swap_gate(s1, step).op.is_cz()
            }
            _ => false,
        }
    }

    /// The executable CZ `q` takes part in, if any, with its partner qubit.
    pub fn exposed_cz(&self, q: usize) -> Option<(NextGate, usize)> {
        let (r, gate) = self.next_gate(q)?;
        match gate.op {
            Op::Cz(a, b) => {
                let partner = if a == q { b } else { a };
                self.executable_cz(q, partner).then_some((r, partner))
            }
            Op::U3 { .. } => None,
        }
    }

    /// The executable U3 on `q`, if its next gate is one. A SWAP step acting
    /// on the other operand is not reported for `q`.
    pub fn exposed_u3(&self, q: usize) -> Option<(NextGate, Gate)> {
        let (r, gate) = self.next_gate(q)?;
        matches!(gate.op, Op::U3 { qubit, .. } if qubit == q).then_some((r, gate))
    }

    /// Locks both qubits to a new SWAP. Both must be unlocked.
    pub fn begin_swap(&mut self, a: usize, b: usize) -> SwapId {
        assert!(
            self.lock[a].is_none() && self.lock[b].is_none(),
            "SWAP on a locked qubit"
        );
        let id = self.swaps.len() as SwapId;
        let template = decompose_swap(a, b, id).expect("distinct SWAP operands");
        self.swaps.push(SwapState {
            a,
            b,
            template,
            done: 0,
        });
        self.lock[a] = Some(id);
        self.lock[b] = Some(id);
        id
    }

    /// Marks `executed` done and moves the affected cursors.
    ///
    /// # Panics
    /// If the gate is not executable in the current state.
    pub fn advance(&mut self, executed: NextGate) -> Option<SwapCompleted> {
        match executed {
            NextGate::Circuit(g) => {
                let gate = self.circuit.gates[g];
                let (a, b) = gate.op.qubits();
                for q in std::iter::once(a).chain(b) {
                    assert!(
                        self.next(q) == NextGate::Circuit(g),
                        "gate {g} is not executable on qubit {q}"
                    );
                }
                for q in std::iter::once(a).chain(b) {
                    self.cursor[q] += 1;
                }
                self.remaining -= 1;
                None
            }
            NextGate::Swap { id, step } => {
                let s = &mut self.swaps[id as usize];
                assert!(
                    s.done == step && step < 9,
                    "SWAP {id} step {step} is not next (at {})",
                    s.done
                );
                s.done += 1;
                if s.done == 9 {
                    let (a, b) = (s.a, s.b);
                    self.lock[a] = None;
                    self.lock[b] = None;
                    Some(SwapCompleted { id, a, b })
                } else {
                    None
                }
            }
            NextGate::Done => panic!("cannot advance past the end"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::U3Angles;

    fn circuit(n: usize, gates: &[Gate]) -> Circuit {
        let mut c = Circuit::new(n, "t");
        for &g in gates {
            c.push(g);
        }
        c
    }

    #[test]
    fn fresh_single_cz_is_executable() {
        let c = circuit(2, &[Gate::cz(0, 1)]);
        let f = Frontier::new(&c);
        assert!(f.executable_cz(0, 1));
    }

    #[test]
    fn pending_u3_blocks_cz_until_advanced() {
        let c = circuit(2, &[Gate::u3(0, U3Angles::HADAMARD), Gate::cz(0, 1)]);
        let mut f = Frontier::new(&c);
        assert!(!f.executable_cz(0, 1));
        f.advance(NextGate::Circuit(0));
        assert!(f.executable_cz(0, 1));
    }

    #[test]
    fn advancing_last_gate_reaches_end() {
        let c = circuit(2, &[Gate::cz(0, 1)]);
        let mut f = Frontier::new(&c);
        f.advance(NextGate::Circuit(0));
        assert_eq!(f.next(0), NextGate::Done);
        assert_eq!(f.next(1), NextGate::Done);
        assert!(f.all_done());
    }

    #[test]
    #[should_panic(expected = "not executable")]
    fn advancing_blocked_gate_panics() {
        let c = circuit(2, &[Gate::u3(0, U3Angles::HADAMARD), Gate::cz(0, 1)]);
        let mut f = Frontier::new(&c);
        f.advance(NextGate::Circuit(1));
    }

    #[test]
    fn swap_lock_runs_template_then_unlocks() {
        let c = circuit(3, &[Gate::cz(0, 2)]);
        let mut f = Frontier::new(&c);
        let id = f.begin_swap(0, 1);
        assert!(!f.executable_cz(0, 2), "locked qubit cannot run circuit gates");
        for step in 0..9u8 {
            let g = f.swap_gate(id, step);
            if g.op.is_cz() {
                assert!(f.executable_cz(0, 1));
            }
            let done = f.advance(NextGate::Swap { id, step });
            if step < 8 {
                assert!(done.is_none());
                assert!(f.is_locked(0) && f.is_locked(1));
            } else {
                assert_eq!(done, Some(SwapCompleted { id, a: 0, b: 1 }));
            }
        }
        assert!(!f.is_locked(0));
        assert!(f.executable_cz(0, 2));
    }
}
