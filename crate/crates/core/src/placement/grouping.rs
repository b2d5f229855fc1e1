use std::collections::BTreeSet;

use crate::circuit::{Circuit, Op};
use crate::error::CapacityError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Slm,
    Aod,
}

impl Group {
    fn other(self) -> Group {
        match self {
            Group::Slm => Group::Aod,
            Group::Aod => Group::Slm,
        }
    }
}

/// Partition of the circuit's qubits into static and movable traps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    pub slm_qubits: Vec<usize>,
    pub aod_qubits: Vec<usize>,
    pub slm_capacity: usize,
    pub aod_capacity: usize,
}

impl Grouping {
    pub fn group_of(&self, q: usize) -> Option<Group> {
        if self.slm_qubits.contains(&q) {
            Some(Group::Slm)
        } else if self.aod_qubits.contains(&q) {
            Some(Group::Aod)
        } else {
            None
        }
    }

    /// Distinct interacting pairs split across the groups, and the total.
    pub fn cut_edges(&self, c: &Circuit) -> (usize, usize) {
        let slm: BTreeSet<usize> = self.slm_qubits.iter().copied().collect();
        let edges = interaction_edges(c);
        let cut = edges.iter().filter(|(a, b)| slm.contains(a) != slm.contains(b)).count();
        (cut, edges.len())
    }
}

/// Distinct unordered CZ pairs, smaller index first.
pub fn interaction_edges(c: &Circuit) -> BTreeSet<(usize, usize)> {
    c.gates
        .iter()
        .filter_map(|g| match g.op {
            Op::Cz(a, b) => Some((a.min(b), a.max(b))),
            Op::U3 { .. } => None,
        })
        .collect()
}

struct Builder {
    group: Vec<Option<Group>>,
    slm: Vec<usize>,
    aod: Vec<usize>,
    slm_cap: usize,
    aod_cap: usize,
}

impl Builder {
    fn new(n: usize, slm_cap: usize, aod_cap: usize) -> Result<Self, CapacityError> {
        if slm_cap + aod_cap < n {
            return Err(CapacityError::GroupsFull {
                remaining: n - slm_cap - aod_cap,
            });
        }
        Ok(Builder {
            group: vec![None; n],
            slm: Vec::new(),
            aod: Vec::new(),
            slm_cap,
            aod_cap,
        })
    }

    fn room(&self, g: Group) -> bool {
        match g {
            Group::Slm => self.slm.len() < self.slm_cap,
            Group::Aod => self.aod.len() < self.aod_cap,
        }
    }

    /// Places `q` in `want`, or the other group when `want` is full.
    fn put(&mut self, q: usize, want: Group) -> Result<(), CapacityError> {
        let g = if self.room(want) {
            want
        } else if self.room(want.other()) {
            want.other()
        } else {
            let remaining = self.group.iter().filter(|g| g.is_none()).count();
            return Err(CapacityError::GroupsFull { remaining });
        };
        self.group[q] = Some(g);
        match g {
            Group::Slm => self.slm.push(q),
            Group::Aod => self.aod.push(q),
        }
        Ok(())
    }

    fn finish(mut self) -> Result<Grouping, CapacityError> {
        for q in 0..self.group.len() {
            if self.group[q].is_none() {
                self.put(q, Group::Aod)?;
            }
        }
        Ok(Grouping {
            slm_qubits: self.slm,
            aod_qubits: self.aod,
            slm_capacity: self.slm_cap,
            aod_capacity: self.aod_cap,
        })
    }
}

/// Greedy MaxCut: walk the CZs in order, sending the first operand of a fresh
/// pair to the AOD and the second to the SLM, and a lone ungrouped operand to
/// the group opposite its partner.
pub fn greedy_maxcut_group(c: &Circuit, slm_capacity: usize, aod_capacity: usize) -> Result<Grouping, CapacityError> {
    let mut b = Builder::new(c.num_qubits, slm_capacity, aod_capacity)?;
    for g in &c.gates {
        let Op::Cz(q1, q2) = g.op else { continue };
        match (b.group[q1], b.group[q2]) {
            (None, None) => {
                b.put(q1, Group::Aod)?;
                b.put(q2, Group::Slm)?;
            }
            (Some(g1), None) => b.put(q2, g1.other())?,
            (None, Some(g2)) => b.put(q1, g2.other())?,
            (Some(_), Some(_)) => {}
        }
    }
    b.finish()
}

/// Weighted degree of every qubit in the CZ interaction graph.
pub fn weighted_degrees(c: &Circuit) -> Vec<usize> {
    let mut d = vec![0; c.num_qubits];
    for g in &c.gates {
        if let Op::Cz(a, b) = g.op {
            d[a] += 1;
            d[b] += 1;
        }
    }
    d
}

/// Highest-degree qubits fill the AOD up to half the register; the rest go
/// to the SLM.
pub fn degree_split_group(c: &Circuit, slm_capacity: usize, aod_capacity: usize) -> Result<Grouping, CapacityError> {
    let n = c.num_qubits;
    let mut b = Builder::new(n, slm_capacity, aod_capacity)?;
    let deg = weighted_degrees(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| deg[y].cmp(&deg[x]).then(x.cmp(&y)));
    let target = aod_capacity.min(n.div_ceil(2));
    for (i, &q) in order.iter().enumerate() {
        let want = if i < target { Group::Aod } else { Group::Slm };
        b.put(q, want)?;
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    fn cz_circuit(n: usize, pairs: &[(usize, usize)]) -> Circuit {
        let mut c = Circuit::new(n, "t");
        for &(a, b) in pairs {
            c.push(Gate::cz(a, b));
        }
        c
    }

    #[test]
    fn single_cz() {
        let g = greedy_maxcut_group(&cz_circuit(2, &[(0, 1)]), 10, 10).unwrap();
        assert_eq!(g.aod_qubits, vec![0]);
        assert_eq!(g.slm_qubits, vec![1]);
    }

    #[test]
    fn path_is_fully_cut() {
        let c = cz_circuit(4, &[(0, 1), (1, 2), (2, 3)]);
        let g = greedy_maxcut_group(&c, 10, 10).unwrap();
        assert_eq!(g.aod_qubits, vec![0, 2]);
        assert_eq!(g.slm_qubits, vec![1, 3]);
        assert_eq!(g.cut_edges(&c), (3, 3));
    }

    #[test]
    fn triangle_leaves_one_edge() {
        let c = cz_circuit(3, &[(0, 1), (1, 2), (0, 2)]);
        let g = greedy_maxcut_group(&c, 10, 10).unwrap();
        assert_eq!(g.aod_qubits, vec![0, 2]);
        assert_eq!(g.slm_qubits, vec![1]);
        assert_eq!(g.cut_edges(&c), (2, 3));
    }

    #[test]
    fn untouched_qubits_prefer_aod_then_overflow() {
        let g = greedy_maxcut_group(&cz_circuit(3, &[]), 5, 2).unwrap();
        assert_eq!(g.aod_qubits, vec![0, 1]);
        assert_eq!(g.slm_qubits, vec![2]);
    }

    #[test]
    fn full_target_group_falls_back() {
        let c = cz_circuit(4, &[(0, 1), (2, 3)]);
        let g = greedy_maxcut_group(&c, 1, 3).unwrap();
        assert_eq!(g.slm_qubits, vec![1]);
        assert_eq!(g.aod_qubits, vec![0, 2, 3]);
        assert!(matches!(
            greedy_maxcut_group(&c, 1, 2).unwrap_err(),
            CapacityError::GroupsFull { .. }
        ));
    }

    #[test]
    fn degree_split_star_and_path() {
        let star = cz_circuit(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(weighted_degrees(&star), vec![3, 1, 1, 1]);
        let g = degree_split_group(&star, 10, 10).unwrap();
        assert_eq!(g.aod_qubits[0], 0);
        let path = cz_circuit(4, &[(0, 1), (1, 2), (2, 3)]);
        let g = degree_split_group(&path, 10, 10).unwrap();
        assert_eq!(g.aod_qubits, vec![1, 2]);
        assert_eq!(g.slm_qubits, vec![0, 3]);
    }

    #[test]
    fn degree_split_ties_prefer_low_index() {
        let g = degree_split_group(&cz_circuit(5, &[]), 10, 10).unwrap();
        assert_eq!(g.aod_qubits, vec![0, 1, 2]);
        assert_eq!(g.slm_qubits, vec![3, 4]);
    }
}
