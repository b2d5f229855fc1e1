//! Seeded benchmark generators emitting OpenQASM 2.0 text.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

fn header(n: usize) -> String {
    format!("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[{n}];\ncreg c[{n}];\n")
}

fn footer(out: &mut String) {
    out.push_str("measure q -> c;\n");
}

/// Random circuit over {h, x, rz, u3, cx, cz} with roughly half two-qubit gates.
pub fn random_qasm(seed: u64, num_qubits: usize, num_gates: usize) -> String {
    assert!(num_qubits >= 2, "random circuits need two qubits");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = header(num_qubits);
    for _ in 0..num_gates {
        let a = rng.gen_range(0..num_qubits);
        let mut b = rng.gen_range(0..num_qubits - 1);
        if b >= a {
            b += 1;
        }
        let line = match rng.gen_range(0..6) {
            0 => format!("h q[{a}];"),
            1 => format!("x q[{a}];"),
            2 => format!("rz({}) q[{a}];", rng.gen_range(0.0..std::f64::consts::TAU)),
            3 => {
                let (t, p, l): (f64, f64, f64) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0));
                format!("u3({t},{p},{l}) q[{a}];")
            }
            4 => format!("cx q[{a}],q[{b}];"),
            _ => format!("cz q[{a}],q[{b}];"),
        };
        writeln!(out, "{line}").unwrap();
    }
    footer(&mut out);
    out
}

/// CZ(i, i+1) for i = 0..n-1.
pub fn staircase_qasm(num_qubits: usize) -> String {
    let mut out = header(num_qubits);
    for i in 0..num_qubits.saturating_sub(1) {
        writeln!(out, "cz q[{i}],q[{}];", i + 1).unwrap();
    }
    footer(&mut out);
    out
}

/// Trotterized transverse-field Ising chain: each round is an rx layer
/// followed by a ZZ staircase.
pub fn tfim_qasm(num_qubits: usize, rounds: usize) -> String {
    let mut out = header(num_qubits);
    for i in 0..num_qubits {
        writeln!(out, "h q[{i}];").unwrap();
    }
    for _ in 0..rounds {
        for i in 0..num_qubits {
            writeln!(out, "rx(0.2) q[{i}];").unwrap();
        }
        for i in 0..num_qubits.saturating_sub(1) {
            let j = i + 1;
            writeln!(out, "cx q[{i}],q[{j}];\nrz(0.4) q[{j}];\ncx q[{i}],q[{j}];").unwrap();
        }
    }
    footer(&mut out);
    out
}

/// Seed, width and gate count of the `i`-th random corpus member.
pub fn corpus_spec(seed: u64, i: usize) -> (u64, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    (rng.gen(), rng.gen_range(4..=40), rng.gen_range(10..=500))
}

/// Writes `count` random circuits as `rand_000.qasm`, ... into `dir`.
pub fn write_random_corpus(dir: &Path, count: usize, seed: u64) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.display().to_string(), source: e })?;
    let mut names = Vec::with_capacity(count);
    for i in 0..count {
        let (s, n, g) = corpus_spec(seed, i);
        let name = format!("rand_{i:03}.qasm");
        let path = dir.join(&name);
        std::fs::write(&path, random_qasm(s, n, g))
            .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
        names.push(name);
    }
    Ok(names)
}
