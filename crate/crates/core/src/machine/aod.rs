use serde::{Deserialize, Serialize};

use crate::geometry::EPS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnAtom {
    pub atom: usize,
    pub y: f64,
}

/// One AOD column. Every atom shares the column's x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AodColumn {
    pub id: usize,
    pub x: f64,
    pub atoms: Vec<ColumnAtom>,
    pub home_slot: usize,
}

impl AodColumn {
    pub fn holds(&self, atom: usize) -> bool {
        self.atoms.iter().any(|a| a.atom == atom)
    }

    pub fn y_of(&self, atom: usize) -> Option<f64> {
        self.atoms.iter().find(|a| a.atom == atom).map(|a| a.y)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AodState {
    pub columns: Vec<AodColumn>,
}

impl AodState {
    /// First adjacent pair of occupied columns that breaks strict x order.
    /// Empty columns carry no atoms and are ignored.
    pub fn ordering_violation(&self) -> Option<(usize, usize)> {
        let mut prev: Option<&AodColumn> = None;
        for c in self.columns.iter().filter(|c| !c.atoms.is_empty()) {
            if let Some(p) = prev {
                if c.x <= p.x + EPS {
                    return Some((p.id, c.id));
                }
            }
            prev = Some(c);
        }
        None
    }

    /// Column with two atoms at the same y, or more atoms than allowed.
    pub fn column_violation(&self, max_atoms: usize) -> Option<usize> {
        self.columns.iter().find_map(|c| {
            let over = c.atoms.len() > max_atoms;
            let dup = c
                .atoms
                .iter()
                .enumerate()
                .any(|(i, a)| c.atoms[i + 1..].iter().any(|b| (a.y - b.y).abs() < EPS));
            (over || dup).then_some(c.id)
        })
    }

    pub fn column_of(&self, atom: usize) -> Option<usize> {
        self.columns.iter().position(|c| c.holds(atom))
    }
}
