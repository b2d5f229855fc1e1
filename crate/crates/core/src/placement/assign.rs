use super::grouping::Grouping;
use crate::error::CapacityError;
use crate::geometry::{Point, EPS};
use crate::machine::{AodColumn, ColumnAtom, PhysParams, Side, SlmGrid, ZoneLayout};
use crate::schedule::{AtomMove, AtomRecord, ColumnMove, Payload, Timeline, TrapDirection, Transfer};

/// Qubit to atom bijection. Atom `i` starts out holding qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    qubit_to_atom: Vec<usize>,
    atom_to_qubit: Vec<usize>,
}

impl Mapping {
    pub fn identity(n: usize) -> Self {
        Mapping {
            qubit_to_atom: (0..n).collect(),
            atom_to_qubit: (0..n).collect(),
        }
    }

    pub fn atom_of(&self, q: usize) -> usize {
        self.qubit_to_atom[q]
    }

    pub fn qubit_of(&self, a: usize) -> usize {
        self.atom_to_qubit[a]
    }

    pub fn len(&self) -> usize {
        self.qubit_to_atom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubit_to_atom.is_empty()
    }

    /// Exchanges the atoms of two qubits.
    pub fn swap_qubits(&mut self, qa: usize, qb: usize) {
        let (a, b) = (self.qubit_to_atom[qa], self.qubit_to_atom[qb]);
        self.qubit_to_atom.swap(qa, qb);
        self.atom_to_qubit[a] = qb;
        self.atom_to_qubit[b] = qa;
    }

    pub fn qubit_to_atom(&self) -> &[usize] {
        &self.qubit_to_atom
    }
}

/// Initial trap assignment: SLM atoms with their site index, AOD atoms packed
/// into columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub mapping: Mapping,
    /// (atom, site index) in grouping order.
    pub slm_sites: Vec<(usize, usize)>,
    /// Atoms of each AOD column, in grouping order.
    pub columns: Vec<Vec<usize>>,
}

pub fn assign_atoms(
    g: &Grouping,
    grid: &SlmGrid,
    layout: &ZoneLayout,
    params: &PhysParams,
) -> Result<Assignment, CapacityError> {
    let n = g.slm_qubits.len() + g.aod_qubits.len();
    let mapping = Mapping::identity(n);
    if g.slm_qubits.len() > grid.usable_count() {
        return Err(CapacityError::InsufficientSlm {
            needed: g.slm_qubits.len(),
            available: grid.usable_count(),
        });
    }
    let aod_cap = layout.aod_capacity(params);
    if g.aod_qubits.len() > aod_cap {
        return Err(CapacityError::InsufficientAod {
            needed: g.aod_qubits.len(),
            available: aod_cap,
        });
    }
    let slm_sites = g
        .slm_qubits
        .iter()
        .zip(&grid.usable)
        .map(|(&q, &s)| (mapping.atom_of(q), s))
        .collect();
    let columns = g
        .aod_qubits
        .chunks(params.max_atoms_per_column)
        .map(|c| c.iter().map(|&q| mapping.atom_of(q)).collect())
        .collect();
    Ok(Assignment {
        mapping,
        slm_sites,
        columns,
    })
}

/// Result of loading the array.
#[derive(Debug, Clone, PartialEq)]
pub struct Initialized {
    pub initial_atoms: Vec<AtomRecord>,
    /// Working AOD columns parked in the right cache, ids in x order.
    pub columns: Vec<AodColumn>,
    /// First column id free for later transport columns.
    pub next_column_id: usize,
    pub trap_changes: usize,
}

/// Loads atoms from memory into their initial traps with three serial trap
/// changes: SLM-group pickup, SLM-group release onto the grid, AOD-group
/// pickup. SLM-group atoms are stored one memory column per target site x so
/// each transport column carries a whole grid column in one move.
pub fn initialization_schedule(
    a: &Assignment,
    grid: &SlmGrid,
    layout: &ZoneLayout,
    params: &PhysParams,
    timeline: &mut Timeline<'_>,
) -> Result<Initialized, CapacityError> {
    let mem_cols = layout.memory_columns(params);
    let mem_rows = layout.memory_rows(params);

    // group SLM atoms by target x, each group sorted top-down by site y
    let mut by_x: Vec<(f64, Vec<(usize, Point)>)> = Vec::new();
    let mut sorted: Vec<(usize, Point)> = a.slm_sites.iter().map(|&(atom, s)| (atom, grid.sites[s])).collect();
    sorted.sort_by(|l, r| l.1.x.total_cmp(&r.1.x).then(r.1.y.total_cmp(&l.1.y)));
    for (atom, p) in sorted {
        match by_x.last_mut() {
            Some((x, v)) if (*x - p.x).abs() < EPS => v.push((atom, p)),
            _ => by_x.push((p.x, vec![(atom, p)])),
        }
    }
    let t = by_x.len();
    let k = a.columns.len();
    if t + k > mem_cols.len() {
        return Err(CapacityError::Memory(format!(
            "{} storage columns needed, {} available",
            t + k,
            mem_cols.len()
        )));
    }
    let tallest = by_x
        .iter()
        .map(|(_, v)| v.len())
        .chain(a.columns.iter().map(Vec::len))
        .max()
        .unwrap_or(0);
    if tallest > mem_rows.len() {
        return Err(CapacityError::Memory(format!(
            "{tallest} storage rows needed, {} available",
            mem_rows.len()
        )));
    }
    if k > layout.cache_slots(params) {
        return Err(CapacityError::InsufficientAod {
            needed: k * params.max_atoms_per_column,
            available: layout.aod_capacity(params),
        });
    }

    let mut initial = vec![None; a.mapping.len()];
    let mut record = |atom: usize, x: f64, y: f64| {
        initial[atom] = Some(AtomRecord {
            atom,
            qubit: a.mapping.qubit_of(atom),
            x,
            y,
        });
    };

    // 1. transport columns pick up SLM-group atoms
    let mut pickup = Vec::new();
    let mut moves = Vec::new();
    let mut release = Vec::new();
    for (c, (sx, atoms)) in by_x.iter().enumerate() {
        let mx = mem_cols[c];
        let mut am = Vec::new();
        for (r, &(atom, site)) in atoms.iter().enumerate() {
            let my = mem_rows[r];
            record(atom, mx, my);
            pickup.push(Transfer { atom, column: c, x: mx, y: my });
            am.push(AtomMove { atom, from_y: my, to_y: site.y });
            release.push(Transfer { atom, column: c, x: *sx, y: site.y });
        }
        moves.push(ColumnMove { column: c, from_x: mx, to_x: *sx, atoms: am });
    }
    timeline.push(0, Payload::TrapChange { direction: TrapDirection::SlmToAod, transfers: pickup });
    // 2. carry them over the grid and release
    timeline.push_moves(0, moves);
    timeline.push(0, Payload::TrapChange { direction: TrapDirection::AodToSlm, transfers: release });

    // 3. working columns pick up the AOD group and park in the right cache
    let mut pickup = Vec::new();
    let mut moves = Vec::new();
    let mut columns = Vec::new();
    for (e, atoms) in a.columns.iter().enumerate() {
        let id = t + e;
        let mx = mem_cols[t + e];
        let cx = layout.cache_slot_x(Side::Right, e, params);
        let mut am = Vec::new();
        let mut col_atoms = Vec::new();
        for (r, &atom) in atoms.iter().enumerate() {
            let my = mem_rows[r];
            let cy = layout.cache_row_y(r, params);
            record(atom, mx, my);
            pickup.push(Transfer { atom, column: id, x: mx, y: my });
            am.push(AtomMove { atom, from_y: my, to_y: cy });
            col_atoms.push(ColumnAtom { atom, y: cy });
        }
        moves.push(ColumnMove { column: id, from_x: mx, to_x: cx, atoms: am });
        columns.push(AodColumn { id, x: cx, atoms: col_atoms, home_slot: e });
    }
    timeline.push(0, Payload::TrapChange { direction: TrapDirection::SlmToAod, transfers: pickup });
    timeline.push_moves(0, moves);

    Ok(Initialized {
        initial_atoms: initial.into_iter().map(|r| r.expect("every atom is stored")).collect(),
        columns,
        next_column_id: t + k,
        trap_changes: 3,
    })
}
