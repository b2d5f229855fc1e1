use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::spread::spread_column;
use super::swap::{pick_swap_partner, SwapCandidate, SwapRank};
use crate::circuit::{Circuit, Frontier, NextGate, Op};
use crate::geometry::{Point, EPS};
use crate::machine::{AodColumn, ColumnAtom, PhysParams, Side, SlmGrid, ZoneLayout, INTERACTION_OFFSET};
use crate::placement::{Initialized, Mapping};
use crate::schedule::{
    AtomMove, ColumnMove, CzEntry, GateRef, Payload, Technique, Timeline, TrapDirection, Transfer, U3Entry,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Trap {
    Site(usize),
    Column(usize),
    Readout,
}

struct Plan {
    x: f64,
    ys: Vec<(usize, f64)>,
    pairs: Vec<(usize, usize, NextGate)>,
    deposit: Option<(usize, usize)>,
    extract: Option<(usize, usize)>,
}

enum Outcome {
    Plan(Plan),
    Blocked,
    Idle,
}

/// Per-pass bookkeeping inside one CZ layer.
struct Pass {
    frontier: Option<f64>,
    lit: Vec<(usize, Point)>,
    busy: BTreeSet<usize>,
    used_sites: BTreeSet<usize>,
}

pub(super) struct Engine<'a> {
    circuit: &'a Circuit,
    params: &'a PhysParams,
    layout: &'a ZoneLayout,
    grid: &'a SlmGrid,
    technique: Technique,
    frontier: Frontier<'a>,
    mapping: Mapping,
    pub(super) tl: Timeline<'a>,
    pos: Vec<Point>,
    trap: Vec<Trap>,
    site_atom: Vec<Option<usize>>,
    usable: Vec<bool>,
    cols: Vec<AodColumn>,
    marked: Vec<bool>,
    reserved: Vec<bool>,
    layer: usize,
    next_column_id: usize,
    start: Side,
}

impl<'a> Engine<'a> {
    #[allow(clippy::too_many_arguments)]
    pub(super) fn new(
        circuit: &'a Circuit,
        params: &'a PhysParams,
        layout: &'a ZoneLayout,
        grid: &'a SlmGrid,
        technique: Technique,
        mapping: Mapping,
        slm_sites: &[(usize, usize)],
        init: Initialized,
        tl: Timeline<'a>,
    ) -> Self {
        let n = mapping.len();
        let mut pos = vec![Point::new(0.0, 0.0); n];
        let mut trap = vec![Trap::Readout; n];
        let mut site_atom = vec![None; grid.sites.len()];
        for &(atom, s) in slm_sites {
            pos[atom] = grid.sites[s];
            trap[atom] = Trap::Site(s);
            site_atom[s] = Some(atom);
        }
        for (ci, c) in init.columns.iter().enumerate() {
            for a in &c.atoms {
                pos[a.atom] = Point::new(c.x, a.y);
                trap[a.atom] = Trap::Column(ci);
            }
        }
        let mut usable = vec![false; grid.sites.len()];
        for &u in &grid.usable {
            usable[u] = true;
        }
        Engine {
            circuit,
            params,
            layout,
            grid,
            technique,
            frontier: Frontier::new(circuit),
            mapping,
            tl,
            pos,
            trap,
            site_atom,
            usable,
            cols: init.columns,
            marked: vec![false; circuit.gates.len()],
            reserved: vec![false; n],
            layer: 0,
            next_column_id: init.next_column_id,
            start: Side::Right,
        }
    }

    pub(super) fn final_mapping(&self) -> Vec<usize> {
        self.mapping.qubit_to_atom().to_vec()
    }

    pub(super) fn run(&mut self) {
        while !self.frontier.all_done() {
            let u3 = self.run_u3_layers();
            if self.frontier.all_done() {
                break;
            }
            if self.cz_layer() || u3 {
                continue;
            }
            if !self.deadlock_guard() {
                panic!(
                    "scheduler made no progress with {} gates and {} swaps pending",
                    self.frontier.remaining(),
                    self.frontier.active_swaps()
                );
            }
        }
        self.measurement_epilogue();
    }

    // ---- gate bookkeeping -------------------------------------------------

    fn gate_ref(&self, ng: NextGate) -> GateRef {
        match ng {
            NextGate::Circuit(g) => GateRef::Circuit(g),
            NextGate::Swap { id, step } => {
                let (a, b) = self.frontier.swap_operands(id);
                GateRef::Swap { id, step, a, b }
            }
            NextGate::Done => unreachable!("no gate to reference"),
        }
    }

    fn execute(&mut self, ng: NextGate) {
        if let NextGate::Circuit(g) = ng {
            if self.marked[g] {
                if let Op::Cz(a, b) = self.circuit.gates[g].op {
                    self.reserved[a] = false;
                    self.reserved[b] = false;
                }
            }
        }
        if let Some(done) = self.frontier.advance(ng) {
            self.mapping.swap_qubits(done.a, done.b);
        }
    }

    fn exposed_cz_of_atom(&self, atom: usize) -> Option<(NextGate, usize)> {
        let q = self.mapping.qubit_of(atom);
        self.frontier
            .exposed_cz(q)
            .map(|(ng, p)| (ng, self.mapping.atom_of(p)))
    }

    fn in_column(&self, atom: usize) -> bool {
        matches!(self.trap[atom], Trap::Column(_))
    }

    fn site_of(&self, atom: usize) -> Option<usize> {
        match self.trap[atom] {
            Trap::Site(s) => Some(s),
            _ => None,
        }
    }

    // ---- U3 layers ----------------------------------------------------------

    /// Runs U3 layers until none is executable or a CZ becomes exposed.
    fn run_u3_layers(&mut self) -> bool {
        let mut any = false;
        loop {
            let ready: Vec<(usize, NextGate, Op)> = (0..self.frontier.num_qubits())
                .filter_map(|q| self.frontier.exposed_u3(q).map(|(ng, g)| (q, ng, g.op)))
                .collect();
            if ready.is_empty() {
                break;
            }
            self.layer += 1;
            let mut gates = Vec::with_capacity(ready.len());
            for &(q, ng, op) in &ready {
                let Op::U3 { angles, .. } = op else { unreachable!() };
                gates.push(U3Entry {
                    qubit: q,
                    atom: self.mapping.atom_of(q),
                    theta: angles.theta,
                    phi: angles.phi,
                    lambda: angles.lambda,
                    gate: self.gate_ref(ng),
                });
            }
            for &(_, ng, _) in &ready {
                self.execute(ng);
            }
            self.tl.push(self.layer, Payload::U3Layer { gates });
            any = true;
            if (0..self.frontier.num_qubits()).any(|q| self.frontier.exposed_cz(q).is_some()) {
                break;
            }
        }
        any
    }

    // ---- SWAP bookkeeping -------------------------------------------------

    fn rank_for(&self, qb: usize, want_column: bool) -> SwapRank {
        if let Some((_, r)) = self.frontier.next_cz_partner(qb) {
            if self.in_column(self.mapping.atom_of(r)) == want_column {
                return SwapRank::Mutual;
            }
        }
        if self.frontier.is_finished(qb) {
            SwapRank::Finished
        } else {
            SwapRank::Fallback
        }
    }

    /// Partner in the opposite trap type for the atom of qubit `q`, whose
    /// pending CZ partner is `other`.
    fn select_swap_partner(&self, atom: usize, other: usize, staged: &BTreeSet<usize>) -> Option<usize> {
        let want_column = !self.in_column(atom);
        let from = self.pos[atom];
        let candidates = (0..self.pos.len()).filter_map(|b| {
            if self.in_column(b) != want_column || matches!(self.trap[b], Trap::Readout) {
                return None;
            }
            let qb = self.mapping.qubit_of(b);
            if qb == other || self.frontier.is_locked(qb) || self.reserved[qb] || staged.contains(&b) {
                return None;
            }
            Some(SwapCandidate {
                atom: b,
                rank: self.rank_for(qb, want_column),
                distance: from.dist(self.pos[b]),
            })
        });
        pick_swap_partner(candidates)
    }

    fn begin_swap(&mut self, g: usize, q: usize, other: usize, partner_atom: usize) {
        let qb = self.mapping.qubit_of(partner_atom);
        self.frontier.begin_swap(q, qb);
        self.marked[g] = true;
        self.reserved[q] = true;
        self.reserved[other] = true;
    }

    /// Starts SWAPs for column atoms whose next CZ partner is also in a column.
    fn initiate_swaps(&mut self, order: &[usize]) -> usize {
        let mut started = 0;
        for &ci in order {
            for atom in self.column_atoms_top_down(ci) {
                let Some((NextGate::Circuit(g), pa)) = self.exposed_cz_of_atom(atom) else { continue };
                if self.marked[g] || !self.in_column(pa) {
                    continue;
                }
                let q = self.mapping.qubit_of(atom);
                let other = self.mapping.qubit_of(pa);
                if self.reserved[q] || self.reserved[other] {
                    continue;
                }
                if let Some(b) = self.select_swap_partner(atom, other, &BTreeSet::new()) {
                    self.begin_swap(g, q, other, b);
                    started += 1;
                }
            }
        }
        started
    }

    /// Forces a SWAP for the lowest blocked SLM-SLM pair.
    fn deadlock_guard(&mut self) -> bool {
        for q in 0..self.frontier.num_qubits() {
            let Some((NextGate::Circuit(g), other)) = self.frontier.exposed_cz(q) else { continue };
            let (a, pa) = (self.mapping.atom_of(q), self.mapping.atom_of(other));
            if self.marked[g] || self.in_column(a) || self.in_column(pa) {
                continue;
            }
            if self.reserved[q] || self.reserved[other] {
                continue;
            }
            if let Some(c) = self.select_swap_partner(a, other, &BTreeSet::new()) {
                self.begin_swap(g, q, other, c);
                return true;
            }
        }
        // column pairs with no SLM partner free at layer time
        for q in 0..self.frontier.num_qubits() {
            let Some((NextGate::Circuit(g), other)) = self.frontier.exposed_cz(q) else { continue };
            let (a, pa) = (self.mapping.atom_of(q), self.mapping.atom_of(other));
            if self.marked[g] || !self.in_column(a) || !self.in_column(pa) {
                continue;
            }
            if let Some(c) = self.select_swap_partner(a, other, &BTreeSet::new()) {
                self.begin_swap(g, q, other, c);
                return true;
            }
        }
        false
    }

    // ---- geometry helpers ---------------------------------------------------

    fn column_atoms_top_down(&self, ci: usize) -> Vec<usize> {
        let mut v: Vec<&ColumnAtom> = self.cols[ci].atoms.iter().collect();
        v.sort_by(|a, b| b.y.total_cmp(&a.y).then(a.atom.cmp(&b.atom)));
        v.into_iter().map(|a| a.atom).collect()
    }

    fn clear_of(&self, p: Point, lit: &[(usize, Point)], except: &[usize]) -> bool {
        let r = self.params.crosstalk_radius - EPS;
        lit.iter().all(|(a, q)| except.contains(a) || p.dist(*q) >= r)
    }

    fn spread(&self, x: f64, anchor: f64, fixed: &[f64], count: usize, lit: &[(usize, Point)]) -> Option<Vec<f64>> {
        let compute = self.layout.compute;
        spread_column(
            anchor,
            fixed,
            count,
            self.params.crosstalk_radius,
            self.layout.memory.y_min,
            compute.y_max,
            |y| {
                let p = Point::new(x, y);
                !compute.contains(p) || self.clear_of(p, lit, &[])
            },
        )
    }

    fn frontier_ok(&self, pass: &Pass, s: f64, x: f64) -> bool {
        pass.frontier
            .is_none_or(|f| s * (x - f) >= self.params.storage_pitch - EPS)
    }

    fn slm_lit(&self) -> Vec<(usize, Point)> {
        self.site_atom
            .iter()
            .flatten()
            .map(|&a| (a, self.pos[a]))
            .collect()
    }

    /// Moves column `ci` and its atoms, returning the move record.
    fn move_column(&mut self, ci: usize, x: f64, ys: &[(usize, f64)]) -> ColumnMove {
        let c = &mut self.cols[ci];
        let from_x = c.x;
        let mut atoms = Vec::with_capacity(c.atoms.len());
        for ca in c.atoms.iter_mut() {
            let to_y = ys
                .iter()
                .find(|(a, _)| *a == ca.atom)
                .map(|&(_, y)| y)
                .expect("target for every column atom");
            atoms.push(AtomMove { atom: ca.atom, from_y: ca.y, to_y });
            ca.y = to_y;
            self.pos[ca.atom] = Point::new(x, to_y);
        }
        c.x = x;
        ColumnMove { column: c.id, from_x, to_x: x, atoms }
    }

    /// Targets in a storage block: atoms keep their top-down order.
    fn stack_rows(&self, ci: usize, rows: impl Fn(usize) -> f64) -> Vec<(usize, f64)> {
        self.column_atoms_top_down(ci)
            .into_iter()
            .enumerate()
            .map(|(j, a)| (a, rows(j)))
            .collect()
    }

    fn park_in_cache(&mut self, ci: usize, x: f64) -> ColumnMove {
        let p = self.params;
        let l = self.layout;
        let ys = self.stack_rows(ci, |j| l.cache_row_y(j, p));
        self.move_column(ci, x, &ys)
    }

    fn park_in_memory(&mut self, ci: usize, x: f64) -> ColumnMove {
        let rows = self.layout.memory_rows(self.params);
        let ys = self.stack_rows(ci, |j| rows[j]);
        self.move_column(ci, x, &ys)
    }

    fn occupied(&self, ci: usize) -> bool {
        !self.cols[ci].atoms.is_empty()
    }

    fn occupied_columns(&self) -> Vec<usize> {
        (0..self.cols.len()).filter(|&ci| self.occupied(ci)).collect()
    }

    // ---- CZ layers ------------------------------------------------------------

    fn has_free_site(&self) -> bool {
        self.grid.usable.iter().any(|&s| self.site_atom[s].is_none())
    }

    fn has_free_slot(&self) -> bool {
        self.cols.iter().any(|c| c.atoms.len() < self.params.max_atoms_per_column)
    }

    fn has_layer_work(&self) -> bool {
        let tc = self.technique == Technique::Trapchange;
        let free_site = tc && self.has_free_site();
        let free_slot = tc && self.has_free_slot();
        for a in 0..self.pos.len() {
            let Some((ng, pa)) = self.exposed_cz_of_atom(a) else { continue };
            match (self.trap[a], self.trap[pa]) {
                (Trap::Column(_), Trap::Site(_)) => return true,
                (Trap::Column(_), Trap::Column(_)) if free_site && matches!(ng, NextGate::Circuit(_)) => return true,
                (Trap::Site(_), Trap::Site(_)) if free_slot && matches!(ng, NextGate::Circuit(_)) => return true,
                _ => {}
            }
        }
        false
    }

    fn cz_layer(&mut self) -> bool {
        let start = match self.technique {
            Technique::Onecache => Side::Right,
            _ => self.start,
        };
        let k = self.cols.len();
        let order: Vec<usize> = match start {
            Side::Right => (0..k).collect(),
            Side::Left => (0..k).rev().collect(),
        };
        let swaps_allowed = self.technique != Technique::Trapchange || !self.has_free_site();
        let started = if swaps_allowed { self.initiate_swaps(&order) } else { 0 };
        if !self.has_layer_work() {
            return started > 0;
        }
        self.layer += 1;
        let moves: Vec<ColumnMove> = self.occupied_columns()
            .into_iter()
            .map(|ci| {
                let slot = match start {
                    Side::Right => ci,
                    Side::Left => k - 1 - ci,
                };
                let x = self.layout.cache_slot_x(start, slot, self.params);
                self.park_in_cache(ci, x)
            })
            .collect();
        self.tl.push_moves(self.layer, moves);
        let progress = self.run_passes(start, order);
        if self.technique == Technique::Onecache {
            let moves: Vec<ColumnMove> = self.occupied_columns()
                .into_iter()
                .map(|ci| {
                    let x = self.layout.cache_slot_x(Side::Right, self.cols[ci].home_slot, self.params);
                    self.park_in_cache(ci, x)
                })
                .collect();
            self.tl.push_moves(self.layer, moves);
        } else {
            self.start = start.opposite();
        }
        progress || started > 0
    }

    fn run_passes(&mut self, start: Side, order: Vec<usize>) -> bool {
        let s = match start {
            Side::Right => 1.0,
            Side::Left => -1.0,
        };
        let opposite = start.opposite();
        let mut remaining: VecDeque<usize> = order.into();
        let mut opp_slot = 0usize;
        let mut far_slot = 0usize;
        let mut progress = false;
        while !remaining.is_empty() {
            let mut pass = Pass {
                frontier: None,
                lit: self.slm_lit(),
                busy: BTreeSet::new(),
                used_sites: BTreeSet::new(),
            };
            let mut moves = Vec::new();
            let mut pairs: Vec<(usize, usize, NextGate)> = Vec::new();
            let mut deposits: Vec<(usize, usize, usize)> = Vec::new();
            let mut extracts: Vec<(usize, usize, usize)> = Vec::new();
            let mut processed = Vec::new();
            while let Some(&ci) = remaining.front() {
                if !self.occupied(ci) && !(self.technique == Technique::Trapchange && self.has_sl_conflict()) {
                    remaining.pop_front();
                    continue;
                }
                match self.plan_column(ci, &pass, s) {
                    Outcome::Plan(p) => {
                        moves.push(self.move_column(ci, p.x, &p.ys));
                        for a in &self.cols[ci].atoms {
                            let pt = self.pos[a.atom];
                            if self.layout.compute.contains(pt) {
                                pass.lit.push((a.atom, pt));
                            }
                        }
                        for &(a, b, ng) in &p.pairs {
                            pass.busy.insert(a);
                            pass.busy.insert(b);
                            pairs.push((a, b, ng));
                        }
                        if let Some((a, site)) = p.deposit {
                            pass.busy.insert(a);
                            if let Some((_, pa)) = self.exposed_cz_of_atom(a) {
                                pass.busy.insert(pa);
                            }
                            pass.used_sites.insert(site);
                            deposits.push((a, ci, site));
                        }
                        if let Some((b, site)) = p.extract {
                            pass.busy.insert(b);
                            if let Some((_, pb)) = self.exposed_cz_of_atom(b) {
                                pass.busy.insert(pb);
                            }
                            extracts.push((b, ci, site));
                        }
                        pass.frontier = Some(p.x);
                    }
                    Outcome::Blocked => break,
                    Outcome::Idle => match pass.frontier {
                        None if self.technique == Technique::Onecache => {
                            let x = self.layout.memory.x_min + far_slot as f64 * self.params.storage_pitch;
                            far_slot += 1;
                            moves.push(self.park_in_memory(ci, x));
                            pass.frontier = Some(x);
                        }
                        None => {
                            let x = self.layout.cache_outer_slot_x(opposite, opp_slot, self.params);
                            opp_slot += 1;
                            moves.push(self.park_in_cache(ci, x));
                        }
                        Some(f) => {
                            let x = f + s * self.params.storage_pitch;
                            let m = self.layout.memory;
                            if x < m.x_min - EPS || x > m.x_max + EPS {
                                break;
                            }
                            moves.push(self.park_in_memory(ci, x));
                            pass.frontier = Some(x);
                        }
                    },
                }
                remaining.pop_front();
                processed.push(ci);
            }
            self.tl.push_moves(self.layer, moves);
            if !deposits.is_empty() {
                let transfers = deposits
                    .iter()
                    .map(|&(a, ci, site)| {
                        self.cols[ci].atoms.retain(|ca| ca.atom != a);
                        self.trap[a] = Trap::Site(site);
                        self.site_atom[site] = Some(a);
                        let p = self.pos[a];
                        Transfer { atom: a, column: self.cols[ci].id, x: p.x, y: p.y }
                    })
                    .collect();
                self.tl.push(self.layer, Payload::TrapChange { direction: TrapDirection::AodToSlm, transfers });
                progress = true;
            }
            if !extracts.is_empty() {
                let transfers = extracts
                    .iter()
                    .map(|&(b, ci, site)| {
                        let p = self.pos[b];
                        self.cols[ci].atoms.push(ColumnAtom { atom: b, y: p.y });
                        self.trap[b] = Trap::Column(ci);
                        self.site_atom[site] = None;
                        Transfer { atom: b, column: self.cols[ci].id, x: p.x, y: p.y }
                    })
                    .collect();
                self.tl.push(self.layer, Payload::TrapChange { direction: TrapDirection::SlmToAod, transfers });
                progress = true;
            }
            if !pairs.is_empty() {
                self.illuminate(&pairs);
                progress = true;
            }
            if remaining.is_empty() || self.technique == Technique::Onecache {
                break;
            }
            let mut clear = Vec::new();
            for ci in processed {
                if !self.occupied(ci) || self.layout.cache(opposite).contains(Point::new(self.cols[ci].x, self.layout.cache(opposite).y_min)) {
                    continue;
                }
                let x = self.layout.cache_outer_slot_x(opposite, opp_slot, self.params);
                opp_slot += 1;
                clear.push(self.park_in_cache(ci, x));
            }
            self.tl.push_moves(self.layer, clear);
        }
        progress
    }

    fn has_sl_conflict(&self) -> bool {
        self.site_atom.iter().flatten().any(|&b| {
            matches!(self.exposed_cz_of_atom(b), Some((NextGate::Circuit(_), pb)) if self.site_of(pb).is_some())
        })
    }

    fn illuminate(&mut self, pairs: &[(usize, usize, NextGate)]) {
        let mut entries = Vec::with_capacity(pairs.len());
        for &(_, _, ng) in pairs {
            let op = match ng {
                NextGate::Circuit(g) => self.circuit.gates[g].op,
                NextGate::Swap { id, step } => self.frontier.swap_gate(id, step).op,
                NextGate::Done => unreachable!(),
            };
            let Op::Cz(q1, q2) = op else { unreachable!("staged gate is a CZ") };
            let (a1, a2) = (self.mapping.atom_of(q1), self.mapping.atom_of(q2));
            let (p1, p2) = (self.pos[a1], self.pos[a2]);
            entries.push(CzEntry {
                qubits: [q1, q2],
                atoms: [a1, a2],
                positions: [[p1.x, p1.y], [p2.x, p2.y]],
                gate: self.gate_ref(ng),
            });
        }
        for &(_, _, ng) in pairs {
            self.execute(ng);
        }
        self.tl.push(self.layer, Payload::Illumination { pairs: entries });
    }

    fn plan_column(&self, ci: usize, pass: &Pass, s: f64) -> Outcome {
        let mut blocked = false;
        if let Some(p) = self.plan_cz(ci, pass, s, &mut blocked) {
            return Outcome::Plan(p);
        }
        if self.technique == Technique::Trapchange {
            if let Some(p) = self.plan_deposit(ci, pass, s, &mut blocked) {
                return Outcome::Plan(p);
            }
            if let Some(p) = self.plan_extract(ci, pass, s, &mut blocked) {
                return Outcome::Plan(p);
            }
        }
        if blocked {
            Outcome::Blocked
        } else {
            Outcome::Idle
        }
    }

    /// Column x sits `INTERACTION_OFFSET` right of the partner site, the
    /// active atom level with it; other atoms with partners in the same grid
    /// column join, the rest spread out.
    fn plan_cz(&self, ci: usize, pass: &Pass, s: f64, blocked: &mut bool) -> Option<Plan> {
        let atoms = self.column_atoms_top_down(ci);
        let targets: Vec<Option<(usize, usize, NextGate)>> = atoms
            .iter()
            .map(|&a| {
                let (ng, b) = self.exposed_cz_of_atom(a)?;
                let site = self.site_of(b)?;
                (!pass.busy.contains(&b)).then_some((b, site, ng))
            })
            .collect();
        for (i, &a) in atoms.iter().enumerate() {
            let Some((b, site, ng)) = targets[i] else { continue };
            let sp = self.grid.sites[site];
            let x = sp.x + INTERACTION_OFFSET;
            if !self.frontier_ok(pass, s, x) {
                *blocked = true;
                continue;
            }
            if !self.clear_of(Point::new(x, sp.y), &pass.lit, &[b]) {
                continue;
            }
            let mut actives = vec![(a, sp.y, b, ng)];
            for (j, &a2) in atoms.iter().enumerate() {
                if j == i {
                    continue;
                }
                let Some((b2, s2, ng2)) = targets[j] else { continue };
                let sp2 = self.grid.sites[s2];
                if (sp2.x - sp.x).abs() > EPS {
                    continue;
                }
                let r = self.params.crosstalk_radius - EPS;
                if actives.iter().any(|&(_, y, _, _)| (y - sp2.y).abs() < r) {
                    continue;
                }
                let p2 = Point::new(x, sp2.y);
                let others: Vec<usize> = actives.iter().map(|t| t.2).collect();
                if !self.clear_of(p2, &pass.lit, &[b2]) {
                    continue;
                }
                // earlier actives' partners must stay clear of this atom too
                if others.iter().any(|&o| self.pos[o].dist(p2) < r) {
                    continue;
                }
                actives.push((a2, sp2.y, b2, ng2));
            }
            let fixed: Vec<f64> = actives.iter().map(|t| t.1).collect();
            let idle: Vec<usize> = atoms.iter().copied().filter(|a| !actives.iter().any(|t| t.0 == *a)).collect();
            let Some(ys) = self.spread(x, sp.y, &fixed, idle.len(), &pass.lit) else { continue };
            let mut all: Vec<(usize, f64)> = actives.iter().map(|t| (t.0, t.1)).collect();
            all.extend(idle.into_iter().zip(ys));
            return Some(Plan {
                x,
                ys: all,
                pairs: actives.iter().map(|t| (t.0, t.2, t.3)).collect(),
                deposit: None,
                extract: None,
            });
        }
        None
    }

    fn sites_in_pass_order(&self, s: f64) -> Vec<usize> {
        let mut v: Vec<usize> = self.grid.usable.clone();
        v.sort_by(|&a, &b| {
            let (pa, pb) = (self.grid.sites[a], self.grid.sites[b]);
            (s * pa.x).total_cmp(&(s * pb.x)).then(pa.y.total_cmp(&pb.y))
        });
        v
    }

    /// Drops a column atom whose CZ partner is also in a column into a free
    /// grid site.
    fn plan_deposit(&self, ci: usize, pass: &Pass, s: f64, blocked: &mut bool) -> Option<Plan> {
        let atoms = self.column_atoms_top_down(ci);
        let sites = self.sites_in_pass_order(s);
        for &a in &atoms {
            let Some((NextGate::Circuit(_), pa)) = self.exposed_cz_of_atom(a) else { continue };
            if !self.in_column(pa) || pass.busy.contains(&a) || pass.busy.contains(&pa) {
                continue;
            }
            for &site in &sites {
                if self.site_atom[site].is_some() || pass.used_sites.contains(&site) || !self.usable[site] {
                    continue;
                }
                let sp = self.grid.sites[site];
                if !self.frontier_ok(pass, s, sp.x) {
                    *blocked = true;
                    continue;
                }
                if !self.clear_of(sp, &pass.lit, &[]) {
                    continue;
                }
                let idle: Vec<usize> = atoms.iter().copied().filter(|&o| o != a).collect();
                let Some(ys) = self.spread(sp.x, sp.y, &[sp.y], idle.len(), &pass.lit) else { continue };
                let mut all = vec![(a, sp.y)];
                all.extend(idle.into_iter().zip(ys));
                return Some(Plan {
                    x: sp.x,
                    ys: all,
                    pairs: Vec::new(),
                    deposit: Some((a, site)),
                    extract: None,
                });
            }
        }
        None
    }

    /// Lifts a grid atom whose CZ partner is also on the grid into a free
    /// slot of this column.
    fn plan_extract(&self, ci: usize, pass: &Pass, s: f64, blocked: &mut bool) -> Option<Plan> {
        if self.cols[ci].atoms.len() >= self.params.max_atoms_per_column {
            return None;
        }
        let atoms = self.column_atoms_top_down(ci);
        for site in self.sites_in_pass_order(s) {
            let Some(b) = self.site_atom[site] else { continue };
            let Some((NextGate::Circuit(_), pb)) = self.exposed_cz_of_atom(b) else { continue };
            if self.site_of(pb).is_none() || pass.busy.contains(&b) || pass.busy.contains(&pb) {
                continue;
            }
            let sp = self.grid.sites[site];
            if !self.frontier_ok(pass, s, sp.x) {
                *blocked = true;
                continue;
            }
            let Some(ys) = self.spread(sp.x, sp.y, &[sp.y], atoms.len(), &pass.lit) else { continue };
            return Some(Plan {
                x: sp.x,
                ys: atoms.into_iter().zip(ys).collect(),
                pairs: Vec::new(),
                deposit: None,
                extract: Some((b, site)),
            });
        }
        None
    }

    // ---- measurement ----------------------------------------------------------

    /// Working columns go to readout and are measured; the grid atoms are
    /// lifted by fresh transport columns, carried to readout and measured.
    fn measurement_epilogue(&mut self) {
        self.layer += 1;
        let layer = self.layer;
        let p = self.params;
        let l = self.layout;

        let moves: Vec<ColumnMove> = self.occupied_columns()
            .into_iter()
            .map(|ci| {
                let x = l.cache_slot_x(Side::Right, ci, p);
                self.park_in_cache(ci, x)
            })
            .collect();
        self.tl.push_moves(layer, moves);
        let aod_atoms: Vec<usize> = self.cols.iter().flat_map(|c| c.atoms.iter().map(|a| a.atom)).collect();
        if !aod_atoms.is_empty() {
            self.tl.push(layer, Payload::Measure { atoms: aod_atoms.clone() });
        }
        let release = self
            .cols
            .iter()
            .flat_map(|c| c.atoms.iter().map(move |a| Transfer { atom: a.atom, column: c.id, x: c.x, y: a.y }))
            .collect();
        self.tl.push(layer, Payload::TrapChange { direction: TrapDirection::AodToSlm, transfers: release });
        for c in &mut self.cols {
            for a in c.atoms.drain(..) {
                self.trap[a.atom] = Trap::Readout;
            }
        }

        let mut by_x: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for &a in self.site_atom.iter().flatten() {
            by_x.entry((self.pos[a].x * 1e6).round() as i64).or_default().push(a);
        }
        let mut pickup = Vec::new();
        let mut moves = Vec::new();
        let mut release = Vec::new();
        let mut measured = Vec::new();
        for (k, atoms) in by_x.values_mut().enumerate() {
            atoms.sort_by(|&a, &b| self.pos[b].y.total_cmp(&self.pos[a].y));
            let id = self.next_column_id + k;
            let x0 = self.pos[atoms[0]].x;
            let x1 = l.cache_slot_x(Side::Right, k, p);
            let m = atoms.len();
            let mut am = Vec::new();
            for (j, &a) in atoms.iter().enumerate() {
                let from = self.pos[a];
                let to_y = l.readout_low_row_y(m - 1 - j, p);
                pickup.push(Transfer { atom: a, column: id, x: from.x, y: from.y });
                am.push(AtomMove { atom: a, from_y: from.y, to_y });
                release.push(Transfer { atom: a, column: id, x: x1, y: to_y });
                self.pos[a] = Point::new(x1, to_y);
                self.trap[a] = Trap::Readout;
                measured.push(a);
            }
            moves.push(ColumnMove { column: id, from_x: x0, to_x: x1, atoms: am });
        }
        for s in self.site_atom.iter_mut() {
            *s = None;
        }
        self.tl.push(layer, Payload::TrapChange { direction: TrapDirection::SlmToAod, transfers: pickup });
        self.tl.push_moves(layer, moves);
        self.tl.push(layer, Payload::TrapChange { direction: TrapDirection::AodToSlm, transfers: release });
        if !measured.is_empty() {
            self.tl.push(layer, Payload::Measure { atoms: measured });
        }
    }
}
