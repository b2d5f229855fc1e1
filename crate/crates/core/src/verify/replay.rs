use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::{decompose_swap, Circuit, Op};
use crate::geometry::{Point, Rect};
use crate::machine::{PhysParams, SlmGrid, ZoneLayout};
use crate::schedule::{GateRef, Payload, Schedule, TrapDirection};

const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCode {
    Ordering,
    Tandem,
    Blockade,
    ZoneBounds,
    Dependency,
    DoubleMeasure,
    Timing,
}

impl ViolationCode {
    pub fn name(self) -> &'static str {
        match self {
            ViolationCode::Ordering => "ordering",
            ViolationCode::Tandem => "tandem",
            ViolationCode::Blockade => "blockade",
            ViolationCode::ZoneBounds => "zone-bounds",
            ViolationCode::Dependency => "dependency",
            ViolationCode::DoubleMeasure => "double-measure",
            ViolationCode::Timing => "timing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub event: usize,
    pub description: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] event {}: {}", self.code.name(), self.event, self.description)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Holder {
    Static,
    Column(usize),
}

fn inside(r: &Rect, p: Point) -> bool {
    p.x >= r.x_min - TOL && p.x <= r.x_max + TOL && p.y >= r.y_min - TOL && p.y <= r.y_max + TOL
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Gate progress tracked from the circuit alone.
struct Progress<'c> {
    circuit: &'c Circuit,
    lists: Vec<Vec<usize>>,
    cursor: Vec<usize>,
    /// (swap id, steps done) per locked qubit.
    lock: Vec<Option<(u32, u8)>>,
    swaps: BTreeMap<u32, (usize, usize, u8)>,
    qubit_atom: Vec<usize>,
}

impl<'c> Progress<'c> {
    fn new(circuit: &'c Circuit, qubit_atom: Vec<usize>) -> Self {
        let n = circuit.num_qubits;
        let mut lists = vec![Vec::new(); n];
        for (i, g) in circuit.gates.iter().enumerate() {
            match g.op {
                Op::U3 { qubit, .. } => lists[qubit].push(i),
                Op::Cz(a, b) => {
                    lists[a].push(i);
                    lists[b].push(i);
                }
            }
        }
        Progress {
            circuit,
            lists,
            cursor: vec![0; n],
            lock: vec![None; n],
            swaps: BTreeMap::new(),
            qubit_atom,
        }
    }

    fn head(&self, q: usize) -> Option<usize> {
        self.lists[q].get(self.cursor[q]).copied()
    }

    /// Executes one gate on `qubits` via `atoms`. Returns an error text when
    /// it is not the next gate of its operands.
    fn execute(&mut self, gate: GateRef, qubits: &[usize], atoms: &[usize], cz: bool) -> Result<(), String> {
        let n = self.cursor.len();
        if qubits.iter().any(|&q| q >= n) {
            return Err(format!("qubit out of range in {qubits:?}"));
        }
        for (&q, &a) in qubits.iter().zip(atoms) {
            if self.qubit_atom[q] != a {
                return Err(format!("qubit {q} is held by atom {}, not {a}", self.qubit_atom[q]));
            }
        }
        match gate {
            GateRef::Circuit(g) => {
                let Some(op) = self.circuit.gates.get(g).map(|g| g.op) else {
                    return Err(format!("gate {g} does not exist"));
                };
                let expect: Vec<usize> = match op {
                    Op::U3 { qubit, .. } => vec![qubit],
                    Op::Cz(a, b) => vec![a, b],
                };
                if cz != op.is_cz() || !same_set(&expect, qubits) {
                    return Err(format!("entry does not match gate {g}"));
                }
                for &q in &expect {
                    if self.lock[q].is_some() {
                        return Err(format!("qubit {q} runs gate {g} inside a SWAP"));
                    }
                    if self.head(q) != Some(g) {
                        return Err(format!("gate {g} is not next on qubit {q}"));
                    }
                }
                for &q in &expect {
                    self.cursor[q] += 1;
                }
                Ok(())
            }
            GateRef::Swap { id, step, a, b } => {
                if a >= n || b >= n || a == b {
                    return Err(format!("SWAP {id} has bad operands ({a}, {b})"));
                }
                match self.swaps.get(&id) {
                    None => {
                        if step != 0 {
                            return Err(format!("SWAP {id} starts at step {step}"));
                        }
                        if self.lock[a].is_some() || self.lock[b].is_some() {
                            return Err(format!("SWAP {id} overlaps another SWAP"));
                        }
                        self.swaps.insert(id, (a, b, 0));
                        self.lock[a] = Some((id, 0));
                        self.lock[b] = Some((id, 0));
                    }
                    Some(&(sa, sb, done)) => {
                        if (sa, sb) != (a, b) || done != step {
                            return Err(format!("SWAP {id} step {step} out of order (done {done})"));
                        }
                    }
                }
                let tmpl = decompose_swap(a, b, id).map_err(|e| e.to_string())?;
                let Some(t) = tmpl.get(step as usize) else {
                    return Err(format!("SWAP {id} has no step {step}"));
                };
                let expect: Vec<usize> = match t.op {
                    Op::U3 { qubit, .. } => vec![qubit],
                    Op::Cz(x, y) => vec![x, y],
                };
                if cz != t.op.is_cz() || !same_set(&expect, qubits) {
                    return Err(format!("entry does not match SWAP {id} step {step}"));
                }
                let done = step + 1;
                if done == 9 {
                    self.lock[a] = None;
                    self.lock[b] = None;
                    self.qubit_atom.swap(a, b);
                } else {
                    self.lock[a] = Some((id, done));
                    self.lock[b] = Some((id, done));
                }
                self.swaps.insert(id, (a, b, done));
                Ok(())
            }
        }
    }

    fn unfinished(&self) -> Vec<String> {
        let mut out = Vec::new();
        for q in 0..self.cursor.len() {
            if self.cursor[q] < self.lists[q].len() {
                out.push(format!("qubit {q} has {} gates left", self.lists[q].len() - self.cursor[q]));
            }
        }
        for (id, (_, _, done)) in &self.swaps {
            if *done < 9 {
                out.push(format!("SWAP {id} stopped after {done} steps"));
            }
        }
        out
    }
}

fn same_set(a: &[usize], b: &[usize]) -> bool {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    x.sort_unstable();
    y.sort_unstable();
    x == y
}

struct Replay<'a> {
    layout: &'a ZoneLayout,
    grid: &'a SlmGrid,
    pos: Vec<Point>,
    holder: Vec<Holder>,
    columns: BTreeMap<usize, (f64, BTreeSet<usize>)>,
    measured: Vec<Option<usize>>,
    out: Vec<Violation>,
}

impl Replay<'_> {
    fn flag(&mut self, code: ViolationCode, event: usize, description: String) {
        self.out.push(Violation { code, event, description });
    }

    fn check_atom(&mut self, atom: usize, event: usize) -> bool {
        if atom >= self.pos.len() {
            self.flag(ViolationCode::Dependency, event, format!("unknown atom {atom}"));
            return false;
        }
        true
    }

    fn in_zone(&self, p: Point) -> bool {
        self.layout.zones().iter().any(|(_, r)| inside(r, p))
    }

    fn on_site(&self, p: Point) -> bool {
        self.grid.usable.iter().any(|&s| {
            let q = self.grid.sites[s];
            near(q.x, p.x) && near(q.y, p.y)
        })
    }

    fn column_order(&mut self, before: &BTreeMap<usize, f64>, event: usize) {
        let live: Vec<(usize, f64)> = self
            .columns
            .iter()
            .filter(|(_, (_, a))| !a.is_empty())
            .map(|(&id, (x, _))| (id, *x))
            .collect();
        for i in 0..live.len() {
            for j in i + 1..live.len() {
                let (ci, xi) = live[i];
                let (cj, xj) = live[j];
                if near(xi, xj) {
                    self.flag(ViolationCode::Tandem, event, format!("columns {ci} and {cj} share x = {xi}"));
                    continue;
                }
                if let (Some(&bi), Some(&bj)) = (before.get(&ci), before.get(&cj)) {
                    if !near(bi, bj) && (bi < bj) != (xi < xj) {
                        self.flag(ViolationCode::Ordering, event, format!("columns {ci} and {cj} cross"));
                    }
                }
            }
        }
    }

    fn live_positions(&self) -> BTreeMap<usize, f64> {
        self.columns
            .iter()
            .filter(|(_, (_, a))| !a.is_empty())
            .map(|(&id, (x, _))| (id, *x))
            .collect()
    }
}

/// Replays the schedule from its initial atoms and reports every broken
/// constraint. An empty result means the schedule is valid.
pub fn validate_schedule(
    schedule: &Schedule,
    layout: &ZoneLayout,
    grid: &SlmGrid,
    params: &PhysParams,
    circuit: &Circuit,
) -> Vec<Violation> {
    use ViolationCode::*;
    let n = schedule.initial_atoms.len();
    let mut rp = Replay {
        layout,
        grid,
        pos: vec![Point::new(0.0, 0.0); n],
        holder: vec![Holder::Static; n],
        columns: BTreeMap::new(),
        measured: vec![None; n],
        out: Vec::new(),
    };
    let mut qubit_atom = vec![usize::MAX; circuit.num_qubits];
    let mut seen = vec![false; n];
    for r in &schedule.initial_atoms {
        if r.atom >= n || seen[r.atom] || r.qubit >= circuit.num_qubits || qubit_atom[r.qubit] != usize::MAX {
            rp.flag(Dependency, 0, format!("malformed initial record for atom {}", r.atom));
            return rp.out;
        }
        seen[r.atom] = true;
        qubit_atom[r.qubit] = r.atom;
        let p = Point::new(r.x, r.y);
        rp.pos[r.atom] = p;
        if !inside(&layout.memory, p) {
            rp.flag(ZoneBounds, 0, format!("atom {} starts outside memory", r.atom));
        }
    }
    if n != circuit.num_qubits {
        rp.flag(Dependency, 0, format!("{n} atoms for {} qubits", circuit.num_qubits));
        return rp.out;
    }
    let mut prog = Progress::new(circuit, qubit_atom);
    let mut t_prev = 0.0f64;

    for (ei, ev) in schedule.events.iter().enumerate() {
        if ev.t_start_us < t_prev - TOL || ev.t_end_us < ev.t_start_us - TOL || !ev.t_start_us.is_finite() || !ev.t_end_us.is_finite() {
            rp.flag(Timing, ei, format!("interval [{}, {}] after {}", ev.t_start_us, ev.t_end_us, t_prev));
        }
        t_prev = t_prev.max(ev.t_end_us);

        match &ev.payload {
            Payload::TrapChange { direction, transfers } => {
                for t in transfers {
                    if !rp.check_atom(t.atom, ei) {
                        continue;
                    }
                    let p = rp.pos[t.atom];
                    if !near(p.x, t.x) || !near(p.y, t.y) {
                        rp.flag(ZoneBounds, ei, format!("atom {} is at ({}, {}), not ({}, {})", t.atom, p.x, p.y, t.x, t.y));
                    }
                    match direction {
                        TrapDirection::SlmToAod => {
                            if rp.holder[t.atom] != Holder::Static {
                                rp.flag(Dependency, ei, format!("atom {} is already in a column", t.atom));
                                continue;
                            }
                            let col = rp.columns.entry(t.column).or_insert((p.x, BTreeSet::new()));
                            let off = !col.1.is_empty() && !near(col.0, p.x);
                            if col.1.is_empty() {
                                col.0 = p.x;
                            }
                            col.1.insert(t.atom);
                            if off {
                                rp.flag(Tandem, ei, format!("atom {} loaded off column {}'s x", t.atom, t.column));
                            }
                            rp.holder[t.atom] = Holder::Column(t.column);
                        }
                        TrapDirection::AodToSlm => {
                            if rp.holder[t.atom] != Holder::Column(t.column) {
                                rp.flag(Dependency, ei, format!("atom {} is not in column {}", t.atom, t.column));
                                continue;
                            }
                            if let Some(col) = rp.columns.get_mut(&t.column) {
                                col.1.remove(&t.atom);
                            }
                            rp.holder[t.atom] = Holder::Static;
                            if inside(&layout.compute, p) && !rp.on_site(p) {
                                rp.flag(ZoneBounds, ei, format!("atom {} released off-grid in compute", t.atom));
                            }
                        }
                    }
                }
            }
            Payload::ColumnMove { moves } => {
                let before = rp.live_positions();
                for m in moves {
                    let Some((x, atoms)) = rp.columns.get(&m.column).cloned() else {
                        rp.flag(Dependency, ei, format!("column {} does not exist", m.column));
                        continue;
                    };
                    if !near(x, m.from_x) {
                        rp.flag(Ordering, ei, format!("column {} is at x = {x}, not {}", m.column, m.from_x));
                    }
                    let listed: BTreeSet<usize> = m.atoms.iter().map(|a| a.atom).collect();
                    if listed != atoms || listed.len() != m.atoms.len() {
                        rp.flag(Dependency, ei, format!("move of column {} lists the wrong atoms", m.column));
                        continue;
                    }
                    for am in &m.atoms {
                        if !near(rp.pos[am.atom].y, am.from_y) {
                            rp.flag(Ordering, ei, format!("atom {} is at y = {}, not {}", am.atom, rp.pos[am.atom].y, am.from_y));
                        }
                        rp.pos[am.atom] = Point::new(m.to_x, am.to_y);
                    }
                    rp.columns.get_mut(&m.column).expect("checked above").0 = m.to_x;
                    let mut ys: Vec<f64> = m.atoms.iter().map(|a| a.to_y).collect();
                    ys.sort_by(f64::total_cmp);
                    if ys.windows(2).any(|w| near(w[0], w[1])) {
                        rp.flag(Tandem, ei, format!("column {} stacks two atoms at one y", m.column));
                    }
                }
                rp.column_order(&before, ei);
                for a in 0..n {
                    if rp.measured[a].is_none() && !rp.in_zone(rp.pos[a]) {
                        let p = rp.pos[a];
                        rp.flag(ZoneBounds, ei, format!("atom {a} at ({}, {}) is outside every zone", p.x, p.y));
                    }
                }
            }
            Payload::U3Layer { gates } => {
                let mut used = BTreeSet::new();
                for g in gates {
                    if !rp.check_atom(g.atom, ei) {
                        continue;
                    }
                    if rp.measured[g.atom].is_some() {
                        rp.flag(Dependency, ei, format!("atom {} rotated after measurement", g.atom));
                    }
                    if !used.insert(g.atom) {
                        rp.flag(Dependency, ei, format!("atom {} rotated twice in one layer", g.atom));
                    }
                    if let Err(e) = prog.execute(g.gate, &[g.qubit], &[g.atom], false) {
                        rp.flag(Dependency, ei, e);
                    }
                }
            }
            Payload::Illumination { pairs } => {
                let mut used = BTreeSet::new();
                let mut members = Vec::new();
                for p in pairs {
                    let [a, b] = p.atoms;
                    if !rp.check_atom(a, ei) || !rp.check_atom(b, ei) {
                        continue;
                    }
                    for (k, &at) in p.atoms.iter().enumerate() {
                        if rp.measured[at].is_some() {
                            rp.flag(Dependency, ei, format!("atom {at} entangled after measurement"));
                        }
                        if !used.insert(at) {
                            rp.flag(Dependency, ei, format!("atom {at} in two pairs"));
                        }
                        let q = rp.pos[at];
                        if !near(q.x, p.positions[k][0]) || !near(q.y, p.positions[k][1]) {
                            rp.flag(ZoneBounds, ei, format!("atom {at} is not where the pair says"));
                        }
                        if !inside(&layout.compute, q) {
                            rp.flag(ZoneBounds, ei, format!("atom {at} illuminated outside compute"));
                        }
                    }
                    let d = dist(rp.pos[a], rp.pos[b]);
                    if d >= params.interaction_radius - 1e-9 {
                        rp.flag(Blockade, ei, format!("pair ({a}, {b}) is {d:.3} um apart"));
                    }
                    members.push((a, b));
                    if let Err(e) = prog.execute(p.gate, &p.qubits, &p.atoms, true) {
                        rp.flag(Dependency, ei, e);
                    }
                }
                let lit: Vec<usize> = (0..n)
                    .filter(|&a| rp.measured[a].is_none() && inside(&layout.compute, rp.pos[a]))
                    .collect();
                for &(a, b) in &members {
                    for &o in &lit {
                        if o == a || o == b {
                            continue;
                        }
                        for x in [a, b] {
                            let d = dist(rp.pos[o], rp.pos[x]);
                            if d < params.crosstalk_radius - 1e-9 {
                                rp.flag(Blockade, ei, format!("atom {o} is {d:.3} um from illuminated atom {x}"));
                            }
                        }
                    }
                }
            }
            Payload::Measure { atoms } => {
                for &a in atoms {
                    if !rp.check_atom(a, ei) {
                        continue;
                    }
                    if let Some(prev) = rp.measured[a] {
                        rp.flag(DoubleMeasure, ei, format!("atom {a} already measured at event {prev}"));
                        continue;
                    }
                    rp.measured[a] = Some(ei);
                    if !inside(&layout.readout(), rp.pos[a]) {
                        rp.flag(ZoneBounds, ei, format!("atom {a} measured outside readout"));
                    }
                }
            }
        }
    }

    let last = schedule.events.len().saturating_sub(1);
    for a in 0..n {
        if rp.measured[a].is_none() {
            rp.flag(DoubleMeasure, last, format!("atom {a} is never measured"));
        }
    }
    for u in prog.unfinished() {
        rp.flag(Dependency, last, u);
    }
    if schedule.final_mapping != prog.qubit_atom {
        rp.flag(Dependency, last, "final mapping disagrees with executed SWAPs".into());
    }
    rp.out
}
