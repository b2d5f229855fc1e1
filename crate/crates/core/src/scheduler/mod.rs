//! Layer-by-layer compilation of a lowered circuit into a timed schedule.

mod engine;
mod spread;
mod swap;

pub use spread::spread_column;
pub use swap::{pick_swap_partner, SwapCandidate, SwapRank};

use crate::circuit::Circuit;
use crate::error::Result;
use crate::machine::{build_layout, generate_grid, GridKind, PhysParams, Scale, SlmGrid, ZoneLayout};
use crate::placement::{
    assign_atoms, degree_split_group, greedy_maxcut_group, initialization_schedule, Grouping,
};
use crate::schedule::{Schedule, ScheduleMeta, Technique, Timeline};
use engine::Engine;

/// A compiled schedule with the geometry it was compiled for.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub schedule: Schedule,
    pub layout: ZoneLayout,
    pub grid: SlmGrid,
    pub grouping: Grouping,
}

/// Compiles on a layout chosen by `scale`.
pub fn compile(
    circuit: &Circuit,
    technique: Technique,
    grid_kind: GridKind,
    params: &PhysParams,
    scale: Scale,
    serial_movement: bool,
) -> Result<Compiled> {
    let layout = build_layout(circuit.num_qubits.max(1), scale, grid_kind, params)?;
    compile_on(circuit, technique, grid_kind, params, layout, serial_movement)
}

pub fn compile_on(
    circuit: &Circuit,
    technique: Technique,
    grid_kind: GridKind,
    params: &PhysParams,
    layout: ZoneLayout,
    serial_movement: bool,
) -> Result<Compiled> {
    let grid = generate_grid(grid_kind, &layout, params, 0)?;
    let slm_cap = grid.usable_count();
    let aod_cap = layout.aod_capacity(params);
    let grouping = match technique {
        Technique::Degreesplit => degree_split_group(circuit, slm_cap, aod_cap)?,
        _ => greedy_maxcut_group(circuit, slm_cap, aod_cap)?,
    };
    let assignment = assign_atoms(&grouping, &grid, &layout, params)?;
    let mut tl = Timeline::new(params, serial_movement);
    let init = initialization_schedule(&assignment, &grid, &layout, params, &mut tl)?;
    let initial_atoms = init.initial_atoms.clone();
    let mut engine = Engine::new(
        circuit,
        params,
        &layout,
        &grid,
        technique,
        assignment.mapping.clone(),
        &assignment.slm_sites,
        init,
        tl,
    );
    engine.run();
    let final_mapping = engine.final_mapping();
    let events = engine.tl.into_events();
    let schedule = Schedule {
        meta: ScheduleMeta {
            technique,
            grid: grid_kind,
            params_hash: params.digest(),
            serial_movement,
            num_qubits: circuit.num_qubits,
            layout_factor: layout.factor,
        },
        initial_atoms,
        events,
        final_mapping,
    };
    Ok(Compiled { schedule, layout, grid, grouping })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, U3Angles};
    use crate::schedule::{GateRef, Payload};

    fn run(c: &Circuit, t: Technique) -> Compiled {
        compile(c, t, GridKind::LargeSquare, &PhysParams::default(), Scale::Auto, false).unwrap()
    }

    fn kinds(s: &Schedule) -> Vec<&'static str> {
        s.events.iter().map(|e| e.payload.kind()).collect()
    }

    fn trap_changes(s: &Schedule) -> usize {
        kinds(s).iter().filter(|&&k| k == "trap-change").count()
    }

    #[test]
    fn single_cz() {
        let mut c = Circuit::new(2, "cz");
        c.push(Gate::cz(0, 1));
        let s = run(&c, Technique::Pachinqo).schedule;
        assert_eq!(trap_changes(&s), 6);
        let ill: Vec<_> = s
            .events
            .iter()
            .filter_map(|e| match &e.payload {
                Payload::Illumination { pairs } => Some(pairs.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(ill.len(), 1);
        assert_eq!(ill[0].len(), 1);
        assert_eq!(ill[0][0].gate, GateRef::Circuit(0));
        let [a, b] = ill[0][0].positions;
        // column sits 1.5 um right of the site, level with it
        assert!((a[0] - b[0]).abs() - 1.5 < 1e-9 && a[1] == b[1]);
        assert_eq!(s.final_mapping, vec![0, 1]);
        // three loading trap changes first, measurement last
        assert_eq!(&kinds(&s)[..3], &["trap-change", "column-move", "trap-change"]);
        assert_eq!(*kinds(&s).last().unwrap(), "measure");
    }

    #[test]
    fn empty_circuit_is_init_plus_measurement() {
        for t in Technique::ALL {
            let s = run(&Circuit::new(3, "e"), t).schedule;
            assert_eq!(trap_changes(&s), 6, "{t}");
            assert!(!kinds(&s).contains(&"illumination"));
            assert!(!kinds(&s).contains(&"u3-layer"));
        }
    }

    #[test]
    fn two_columns_share_one_illumination() {
        // five disjoint pairs: AOD atoms 0,2,4,6 | 8 in two columns
        let mut c = Circuit::new(10, "pairs");
        for i in 0..5 {
            c.push(Gate::cz(2 * i, 2 * i + 1));
        }
        let cp = run(&c, Technique::Pachinqo);
        let first = cp
            .schedule
            .events
            .iter()
            .find_map(|e| match &e.payload {
                Payload::Illumination { pairs } => Some(pairs.clone()),
                _ => None,
            })
            .unwrap();
        let cols: std::collections::BTreeSet<u64> = first.iter().map(|p| p.positions[0][0].to_bits()).collect();
        assert!(cols.len() >= 2, "{first:?}");
    }

    #[test]
    fn u3_layer_runs_all_pending_rotations_at_once() {
        let mut c = Circuit::new(3, "u3");
        for q in 0..3 {
            c.push(Gate::u3(q, U3Angles::HADAMARD));
        }
        let s = run(&c, Technique::Pachinqo).schedule;
        let layers: Vec<_> = s
            .events
            .iter()
            .filter(|e| matches!(e.payload, Payload::U3Layer { .. }))
            .collect();
        assert_eq!(layers.len(), 1);
        assert_eq!(layers[0].t_end_us - layers[0].t_start_us, 2.0);
        let Payload::U3Layer { gates } = &layers[0].payload else { unreachable!() };
        assert_eq!(gates.len(), 3);
    }

    #[test]
    fn u3_behind_cz_waits() {
        let mut c = Circuit::new(2, "w");
        c.push(Gate::cz(0, 1));
        c.push(Gate::u3(0, U3Angles::HADAMARD));
        let s = run(&c, Technique::Pachinqo).schedule;
        let k = kinds(&s);
        let ill = k.iter().position(|&x| x == "illumination").unwrap();
        let u3 = k.iter().position(|&x| x == "u3-layer").unwrap();
        assert!(ill < u3);
    }

    #[test]
    fn cz_layers_toggle_start_cache() {
        // a chain needs one CZ layer per bond
        let mut c = Circuit::new(4, "chain");
        for i in 0..3 {
            c.push(Gate::cz(i, i + 1));
        }
        let cp = run(&c, Technique::Pachinqo);
        let l = cp.layout;
        // before each illumination the working column starts from alternating caches
        let mut starts = Vec::new();
        let evs = &cp.schedule.events;
        for (i, e) in evs.iter().enumerate() {
            if let Payload::Illumination { .. } = e.payload {
                let mv = evs[..i]
                    .iter()
                    .rev()
                    .filter_map(|e| match &e.payload {
                        Payload::ColumnMove { moves } => Some(moves[0].from_x),
                        _ => None,
                    })
                    .next()
                    .unwrap();
                starts.push(l.right_cache.x_min <= mv);
            }
        }
        assert_eq!(starts, vec![true, false, true]);
    }

    #[test]
    fn onecache_returns_columns_home() {
        let mut c = Circuit::new(4, "chain");
        for i in 0..3 {
            c.push(Gate::cz(i, i + 1));
        }
        let cp = run(&c, Technique::Onecache);
        let evs = &cp.schedule.events;
        for (i, e) in evs.iter().enumerate() {
            if let Payload::Illumination { .. } = e.payload {
                let back = evs[i + 1..]
                    .iter()
                    .find_map(|e| match &e.payload {
                        Payload::ColumnMove { moves } => Some(moves[0].to_x),
                        _ => None,
                    })
                    .unwrap();
                assert_eq!(back, 290.0);
            }
        }
    }

    #[test]
    fn compile_is_deterministic() {
        let mut c = Circuit::new(6, "d");
        for i in 0..5 {
            c.push(Gate::cz(i, (i + 2) % 6));
            c.push(Gate::u3(i, U3Angles::HADAMARD));
        }
        for t in Technique::ALL {
            assert_eq!(run(&c, t).schedule.to_json(), run(&c, t).schedule.to_json());
        }
    }
}
