use num_complex::Complex64;

use crate::circuit::{Circuit, Op, RawCircuit, RawGate, U3Angles};
use crate::error::{Error, Result};
use crate::schedule::{Payload, Schedule};

pub const ORACLE_MAX_QUBITS: usize = 12;
pub const EQUIVALENCE_MAX_QUBITS: usize = 10;
const TVD_TOLERANCE: f64 = 1e-9;

type Mat2 = [[Complex64; 2]; 2];

fn u3_matrix(a: U3Angles) -> Mat2 {
    let (c, s) = ((a.theta / 2.0).cos(), (a.theta / 2.0).sin());
    let e = |t: f64| Complex64::from_polar(1.0, t);
    [
        [Complex64::new(c, 0.0), -e(a.lambda) * s],
        [e(a.phi) * s, e(a.phi + a.lambda) * c],
    ]
}

struct State {
    amp: Vec<Complex64>,
}

impl State {
    fn zero(n: usize) -> Self {
        let mut amp = vec![Complex64::new(0.0, 0.0); 1 << n];
        amp[0] = Complex64::new(1.0, 0.0);
        State { amp }
    }

    fn apply1(&mut self, q: usize, m: &Mat2) {
        let bit = 1 << q;
        for i in 0..self.amp.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amp[i], self.amp[i | bit]);
                self.amp[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amp[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn cz(&mut self, a: usize, b: usize) {
        let mask = (1 << a) | (1 << b);
        for (i, v) in self.amp.iter_mut().enumerate() {
            if i & mask == mask {
                *v = -*v;
            }
        }
    }

    fn cx(&mut self, c: usize, t: usize) {
        let (cb, tb) = (1 << c, 1 << t);
        for i in 0..self.amp.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amp.swap(i, i | tb);
            }
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        let (ab, bb) = (1 << a, 1 << b);
        for i in 0..self.amp.len() {
            if i & ab != 0 && i & bb == 0 {
                self.amp.swap(i, (i & !ab) | bb);
            }
        }
    }

    fn ccx(&mut self, a: usize, b: usize, t: usize) {
        let (m, tb) = ((1 << a) | (1 << b), 1 << t);
        for i in 0..self.amp.len() {
            if i & m == m && i & tb == 0 {
                self.amp.swap(i, i | tb);
            }
        }
    }

    fn probabilities(&self) -> Vec<f64> {
        self.amp.iter().map(|a| a.norm_sqr()).collect()
    }
}

fn check_size(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::Oracle(format!("{n} qubits exceeds the simulation limit of {max}")));
    }
    Ok(())
}

/// Output distribution of a basis circuit run on |0...0>. Index bit `q` is
/// qubit `q`.
pub fn statevector_oracle(circuit: &Circuit) -> Result<Vec<f64>> {
    check_size(circuit.num_qubits, ORACLE_MAX_QUBITS)?;
    let mut s = State::zero(circuit.num_qubits);
    for g in &circuit.gates {
        match g.op {
            Op::U3 { qubit, angles } => s.apply1(qubit, &u3_matrix(angles)),
            Op::Cz(a, b) => s.cz(a, b),
        }
    }
    Ok(s.probabilities())
}

/// Distribution of a parsed circuit using each standard gate's own matrix, for
/// checking the basis lowering.
pub fn raw_distribution(raw: &RawCircuit) -> Result<Vec<f64>> {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
    check_size(raw.num_qubits, ORACLE_MAX_QUBITS)?;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let diag = |l: f64| [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, l)]];
    let mut s = State::zero(raw.num_qubits);
    for g in &raw.gates {
        use RawGate::*;
        match *g {
            U3(q, t, p, l) => s.apply1(q, &u3_matrix(U3Angles::new(t, p, l))),
            U2(q, p, l) => s.apply1(q, &u3_matrix(U3Angles::new(FRAC_PI_2, p, l))),
            U1(q, l) | P(q, l) => s.apply1(q, &diag(l)),
            Rz(q, t) => s.apply1(
                q,
                &[[Complex64::from_polar(1.0, -t / 2.0), c(0.0, 0.0)], [c(0.0, 0.0), Complex64::from_polar(1.0, t / 2.0)]],
            ),
            Rx(q, t) => {
                let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
                s.apply1(q, &[[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]])
            }
            Ry(q, t) => {
                let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
                s.apply1(q, &[[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]])
            }
            X(q) => s.apply1(q, &[[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]),
            Y(q) => s.apply1(q, &[[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]),
            Z(q) => s.apply1(q, &diag(PI)),
            H(q) => {
                let h = FRAC_1_SQRT_2;
                s.apply1(q, &[[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]])
            }
            S(q) => s.apply1(q, &diag(FRAC_PI_2)),
            Sdg(q) => s.apply1(q, &diag(-FRAC_PI_2)),
            T(q) => s.apply1(q, &diag(FRAC_PI_4)),
            Tdg(q) => s.apply1(q, &diag(-FRAC_PI_4)),
            Cx(a, b) => s.cx(a, b),
            Cz(a, b) => s.cz(a, b),
            Swap(a, b) => s.swap(a, b),
            Ccx(a, b, t) => s.ccx(a, b, t),
        }
    }
    Ok(s.probabilities())
}

pub fn tvd(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different spaces");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// A gate as executed on physical atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExecutedGate {
    U3 { atom: usize, angles: U3Angles },
    Cz(usize, usize),
}

/// Gates in execution order, addressed by atom.
pub fn executed_gates(schedule: &Schedule) -> Vec<ExecutedGate> {
    let mut out = Vec::new();
    for e in &schedule.events {
        match &e.payload {
            Payload::U3Layer { gates } => {
                out.extend(gates.iter().map(|g| ExecutedGate::U3 { atom: g.atom, angles: g.angles() }))
            }
            Payload::Illumination { pairs } => {
                out.extend(pairs.iter().map(|p| ExecutedGate::Cz(p.atoms[0], p.atoms[1])))
            }
            _ => {}
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equivalence {
    Equal,
    Diverged(f64),
}

impl Equivalence {
    pub fn is_equal(self) -> bool {
        self == Equivalence::Equal
    }
}

/// Simulates the schedule on atoms, reads qubit `q` from atom
/// `final_mapping[q]` and compares against the circuit's own distribution.
pub fn equivalence_check(schedule: &Schedule, circuit: &Circuit) -> Result<Equivalence> {
    let n = circuit.num_qubits;
    check_size(n, EQUIVALENCE_MAX_QUBITS)?;
    let atoms = schedule.initial_atoms.len();
    if atoms != n || schedule.final_mapping.len() != n {
        return Err(Error::Oracle(format!(
            "schedule holds {atoms} atoms and maps {} qubits, circuit has {n}",
            schedule.final_mapping.len()
        )));
    }
    let mut s = State::zero(n);
    for g in executed_gates(schedule) {
        match g {
            ExecutedGate::U3 { atom, angles } if atom < n => s.apply1(atom, &u3_matrix(angles)),
            ExecutedGate::Cz(a, b) if a < n && b < n && a != b => s.cz(a, b),
            bad => return Err(Error::Oracle(format!("gate {bad:?} addresses an unknown atom"))),
        }
    }
    let by_atom = s.probabilities();
    let mut by_qubit = vec![0.0; by_atom.len()];
    for (i, p) in by_atom.iter().enumerate() {
        let mut j = 0usize;
        for (q, &a) in schedule.final_mapping.iter().enumerate() {
            if i >> a & 1 == 1 {
                j |= 1 << q;
            }
        }
        by_qubit[j] += p;
    }
    let d = tvd(&by_qubit, &statevector_oracle(circuit)?);
    Ok(if d < TVD_TOLERANCE { Equivalence::Equal } else { Equivalence::Diverged(d) })
}
