//! Acceptance suite. Each criterion writes one `PASS`/`FAIL` line to stderr
//! (unbuffered, so it shows without `--nocapture`); the test fails if any
//! criterion fails.

use std::io::Write as _;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use pachinqo::circuit::{decompose_swap, decompose_to_basis, parse_qasm, Circuit, Op, U3Angles};
use pachinqo::cli::{run_suite, suite_csv, CSV_HEADER};
use pachinqo::corpus::{corpus_spec, random_qasm, staircase_qasm, tfim_qasm, write_random_corpus};
use pachinqo::machine::{GridKind, PhysParams, Scale};
use pachinqo::metrics::{composed_swap_error, esp_from_counts, GateCounts};
use pachinqo::pipeline::{compile_circuit, CompileOptions, Output};
use pachinqo::schedule::Technique;
use pachinqo::verify::{equivalence_check, validate_schedule, Equivalence, EQUIVALENCE_MAX_QUBITS};

const CORPUS_SEED: u64 = 0x5eed_2024;
const CORPUS_SIZE: usize = 200;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn within(limit: Duration, elapsed: Duration, v: Verdict) -> Verdict {
    if elapsed < limit {
        Verdict { detail: format!("{} ({:.2?})", v.detail, elapsed), ..v }
    } else {
        verdict(false, format!("{} but took {:.2?} (limit {:?})", v.detail, elapsed, limit))
    }
}

fn lowered(text: &str, name: &str) -> Circuit {
    decompose_to_basis(&parse_qasm(text, name).expect("generated QASM parses"))
}

fn compile(c: &Circuit, technique: Technique, grid: GridKind) -> Output {
    let opts = CompileOptions { technique, grid, ..CompileOptions::default() };
    compile_circuit(c.clone(), &PhysParams::default(), &opts)
        .unwrap_or_else(|e| panic!("{} {technique} {grid}: {e}", c.source_name))
}

fn corpus() -> Vec<Circuit> {
    (0..CORPUS_SIZE)
        .map(|i| {
            let (s, n, g) = corpus_spec(CORPUS_SEED, i);
            lowered(&random_qasm(s, n, g), &format!("rand_{i:03}.qasm"))
        })
        .collect()
}

fn configs() -> Vec<(Technique, GridKind)> {
    Technique::ALL.iter().flat_map(|&t| GridKind::ALL.iter().map(move |&g| (t, g))).collect()
}

fn u3_matrix(a: U3Angles) -> [[Complex64; 2]; 2] {
    let (c, s) = ((a.theta / 2.0).cos(), (a.theta / 2.0).sin());
    let e = |x: f64| Complex64::from_polar(1.0, x);
    [[c.into(), -e(a.lambda) * s], [e(a.phi) * s, e(a.phi + a.lambda) * c]]
}

type Mat4 = [[Complex64; 4]; 4];

/// Two-qubit operator with qubit 0 as the low bit of the basis index.
fn embed(op: Op) -> Mat4 {
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    match op {
        Op::U3 { qubit, angles } => {
            let u = u3_matrix(angles);
            for (row, r) in m.iter_mut().enumerate() {
                for (col, x) in r.iter_mut().enumerate() {
                    let (rb, cb) = ((row >> qubit) & 1, (col >> qubit) & 1);
                    let other = 1 - qubit;
                    if (row >> other) & 1 == (col >> other) & 1 {
                        *x = u[rb][cb];
                    }
                }
            }
        }
        Op::Cz(..) => {
            for (i, r) in m.iter_mut().enumerate() {
                r[i] = if i == 3 { (-1.0).into() } else { 1.0.into() };
            }
        }
    }
    m
}

fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

fn c1_swap_template() -> Verdict {
    let t0 = Instant::now();
    let gates = decompose_swap(0, 1, 0).unwrap();
    let cz = gates.iter().filter(|g| g.op.is_cz()).count();
    let u3 = gates.len() - cz;
    let mut u: Mat4 = std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0.into() } else { 0.0.into() }));
    for g in &gates {
        u = mul(&embed(g.op), &u);
    }
    let swap = [0usize, 2, 1, 3];
    let mut err: f64 = 0.0;
    for (i, row) in u.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let want = if swap[j] == i { 1.0 } else { 0.0 };
            err = err.max((x - want).norm());
        }
    }
    let v = verdict(cz == 3 && u3 == 6 && err < 1e-9, format!("{cz} CZ + {u3} U3, max |U - SWAP| = {err:.2e}"));
    within(Duration::from_secs(1), t0.elapsed(), v)
}

fn benchmark_suite() -> Vec<Circuit> {
    let mut v = vec![
        lowered(&staircase_qasm(4), "stair4"),
        lowered(&staircase_qasm(8), "stair8"),
        lowered(&staircase_qasm(16), "stair16"),
        lowered(&staircase_qasm(32), "stair32"),
        lowered(&tfim_qasm(8, 2), "tfim8"),
        lowered(&tfim_qasm(16, 5), "tfim16"),
        lowered(
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[5];\nh q[0];\ncx q[0],q[1];\ncx q[1],q[2];\ncx q[2],q[3];\ncx q[3],q[4];\n",
            "ghz5",
        ),
    ];
    for (i, (s, n, g)) in [(11u64, 12usize, 120usize), (12, 24, 300), (13, 40, 500)].into_iter().enumerate() {
        v.push(lowered(&random_qasm(s, n, g), &format!("rand{i}")));
    }
    v
}

fn c2_trap_changes() -> Verdict {
    let t0 = Instant::now();
    let suite = benchmark_suite();
    let jobs: Vec<(usize, Technique, GridKind)> =
        (0..suite.len()).flat_map(|i| configs().into_iter().map(move |(t, g)| (i, t, g))).collect();
    let bad: Vec<String> = jobs
        .par_iter()
        .filter_map(|&(i, t, g)| {
            let tc = compile(&suite[i], t, g).report.trap_change_count;
            let ok = if t == Technique::Trapchange { tc >= 6 } else { tc == 6 };
            (!ok).then(|| format!("{} {t} {g}: {tc}", suite[i].source_name))
        })
        .collect();
    let v = verdict(
        bad.is_empty(),
        format!("{} schedules over {} circuits; mismatches: {:?}", jobs.len(), suite.len(), bad),
    );
    within(Duration::from_secs(10), t0.elapsed(), v)
}

fn c3_swap_error() -> Verdict {
    let e = composed_swap_error(&PhysParams::default());
    verdict((e - 0.0151).abs() <= 5e-4, format!("composed {e:.6} vs 0.0151"))
}

struct CorpusRun {
    violations: Vec<String>,
    swap_bound: Vec<String>,
    divergent: Vec<String>,
    equivalence_checked: usize,
    schedules: usize,
    compile_validate: Duration,
    equivalence: Duration,
}

enum Check {
    Skipped,
    Equal,
    Diverged(String),
}

fn run_corpus(corpus: &[Circuit]) -> CorpusRun {
    let params = PhysParams::default();
    let jobs: Vec<(usize, Technique, GridKind)> =
        (0..corpus.len()).flat_map(|i| configs().into_iter().map(move |(t, g)| (i, t, g))).collect();
    let results: Vec<(String, usize, bool, Check, Duration, Duration)> = jobs
        .par_iter()
        .map(|&(i, t, g)| {
            let c = &corpus[i];
            let tag = format!("{} {t} {g}", c.source_name);
            let s = Instant::now();
            let o = compile(c, t, g);
            let v = validate_schedule(&o.compiled.schedule, &o.compiled.layout, &o.compiled.grid, &params, c);
            let cv = s.elapsed();
            let s = Instant::now();
            let check = if c.num_qubits > EQUIVALENCE_MAX_QUBITS {
                Check::Skipped
            } else {
                match equivalence_check(&o.compiled.schedule, c) {
                    Ok(Equivalence::Equal) => Check::Equal,
                    Ok(Equivalence::Diverged(d)) => Check::Diverged(format!("{tag}: TVD {d:e}")),
                    Err(e) => Check::Diverged(format!("{tag}: {e}")),
                }
            };
            (tag, v.len(), o.report.swap_count <= c.cz_count(), check, cv, s.elapsed())
        })
        .collect();
    let mut run = CorpusRun {
        violations: Vec::new(),
        swap_bound: Vec::new(),
        divergent: Vec::new(),
        equivalence_checked: 0,
        schedules: results.len(),
        compile_validate: Duration::ZERO,
        equivalence: Duration::ZERO,
    };
    for (tag, nv, bounded, check, cv, eq) in results {
        if nv > 0 {
            run.violations.push(format!("{tag}: {nv}"));
        }
        if !bounded {
            run.swap_bound.push(tag);
        }
        match check {
            Check::Skipped => {}
            Check::Equal => run.equivalence_checked += 1,
            Check::Diverged(d) => {
                run.equivalence_checked += 1;
                run.divergent.push(d);
            }
        }
        run.compile_validate += cv;
        run.equivalence += eq;
    }
    run
}

fn c4_validator(r: &CorpusRun) -> Verdict {
    let v = verdict(
        r.violations.is_empty() && r.schedules >= CORPUS_SIZE * 16,
        format!("{}/{} schedules valid; failing: {:?}", r.schedules - r.violations.len(), r.schedules, r.violations),
    );
    within(Duration::from_secs(120), r.compile_validate, v)
}

fn c5_equivalence(r: &CorpusRun) -> Verdict {
    let v = verdict(
        r.divergent.is_empty() && r.equivalence_checked > 0,
        format!("{} small-circuit schedules checked; diverged: {:?}", r.equivalence_checked, r.divergent),
    );
    within(Duration::from_secs(120), r.equivalence, v)
}

fn c6_staircase() -> Verdict {
    let t0 = Instant::now();
    let swaps: Vec<(usize, usize)> = [4, 8, 16, 32]
        .into_iter()
        .map(|n| (n, compile(&lowered(&staircase_qasm(n), "stair"), Technique::Pachinqo, GridKind::LargeSquare).report.swap_count))
        .collect();
    let v = verdict(swaps.iter().all(|&(_, s)| s == 0), format!("(n, swaps) = {swaps:?}"));
    within(Duration::from_secs(5), t0.elapsed(), v)
}

fn c7_tfim() -> Verdict {
    let t0 = Instant::now();
    let c = lowered(&tfim_qasm(16, 5), "tfim16");
    let r = |t| compile(&c, t, GridKind::LargeSquare).report;
    let (p, d, o, tc) = (r(Technique::Pachinqo), r(Technique::Degreesplit), r(Technique::Onecache), r(Technique::Trapchange));
    let a = p.swap_count <= d.swap_count;
    let b = p.total_movement_um < o.total_movement_um;
    let mid = tc.trap_change_count.saturating_sub(6);
    let cc = mid == 0 || p.runtime_us < tc.runtime_us;
    let c_note = if mid == 0 {
        "trapchange made no mid-circuit trap change, (c) not triggered".to_string()
    } else {
        format!("runtime {:.1} < {:.1} us with {mid} mid-circuit trap changes", p.runtime_us, tc.runtime_us)
    };
    let v = verdict(
        a && b && cc,
        format!(
            "(a) swaps {} <= {}: {a}; (b) movement {:.0} < {:.0} um: {b}; (c) {c_note}: {cc}",
            p.swap_count, d.swap_count, p.total_movement_um, o.total_movement_um
        ),
    );
    within(Duration::from_secs(10), t0.elapsed(), v)
}

fn c8_swap_bound(r: &CorpusRun) -> Verdict {
    verdict(
        r.swap_bound.is_empty(),
        format!("{} schedules; over the CZ bound: {:?}", r.schedules, r.swap_bound),
    )
}

fn median_compile_ms(c: &Circuit, reps: usize) -> f64 {
    let mut t: Vec<f64> = (0..reps)
        .map(|_| {
            let s = Instant::now();
            compile(c, Technique::Pachinqo, GridKind::LargeSquare);
            s.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    t.sort_by(f64::total_cmp);
    t[reps / 2]
}

fn c9_scaling() -> Verdict {
    let t0 = Instant::now();
    let width = 50;
    let g1 = lowered(&random_qasm(91, width, 1000), "g1");
    let g2 = lowered(&random_qasm(92, width, 2000), "g2");
    let (m1, m2) = (median_compile_ms(&g1, 5), median_compile_ms(&g2, 5));
    let ratio = m2 / m1;
    let big = lowered(&random_qasm(93, 100, 1000), "q100");
    let s = Instant::now();
    compile(&big, Technique::Pachinqo, GridKind::LargeSquare);
    let big_s = s.elapsed().as_secs_f64();
    let v = verdict(
        ratio <= 4.0 && big_s < 5.0,
        format!("{width} qubits: {m1:.1} ms -> {m2:.1} ms (x{ratio:.2}); 100q/1000g in {big_s:.3} s"),
    );
    within(Duration::from_secs(60), t0.elapsed(), v)
}

fn c10_esp() -> Verdict {
    let p = PhysParams::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, u3, cz, t) in [(1, 0, 0, 500.0), (4, 10, 5, 1200.0), (16, 300, 120, 5000.0), (40, 2000, 900, 40000.0)] {
        let counts = GateCounts { u3, cz };
        let e = esp_from_counts(counts, n, t, &p);
        let more_u3 = esp_from_counts(GateCounts { u3: u3 + 1, cz }, n, t, &p);
        let more_cz = esp_from_counts(GateCounts { u3, cz: cz + 1 }, n, t, &p);
        let longer = esp_from_counts(counts, n, t + 100.0, &p);
        if !(e > 0.0 && e <= 1.0 && more_u3 <= e && more_cz <= e && longer <= e) {
            ok = false;
            notes.push(format!("n={n}: {e} {more_u3} {more_cz} {longer}"));
        }
    }
    let empty = lowered("OPENQASM 2.0;\nqreg q[1];\n", "empty");
    let out = compile(&empty, Technique::Pachinqo, GridKind::LargeSquare);
    let t = out.report.runtime_us * 1e-6;
    let closed = (1.0 - 0.05) * (1.0 - 0.007) * (-t / 4.0).exp() * (-t / 1.49).exp();
    let diff = (out.report.esp - closed).abs();
    ok &= diff < 1e-12 && out.report.gate_counts.u3 == 0 && out.report.gate_counts.cz == 0;
    notes.push(format!("zero-gate ESP {:.12} vs closed form {closed:.12} at T = {:.1} us", out.report.esp, out.report.runtime_us));
    verdict(ok, notes.join("; "))
}

fn strip_compile_ms(csv: &str) -> String {
    let col = CSV_HEADER.iter().position(|&h| h == "compile_ms").unwrap();
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(csv.as_bytes());
    r.records()
        .map(|rec| {
            let rec = rec.expect("suite CSV parses");
            rec.iter().enumerate().filter(|&(i, _)| i != col).map(|(_, f)| f).collect::<Vec<_>>().join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn c11_determinism() -> Verdict {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    write_random_corpus(dir.path(), CORPUS_SIZE, CORPUS_SEED).unwrap();
    let params = PhysParams::default();
    let base = CompileOptions { scale: Scale::Default, ..CompileOptions::default() };
    let run = || {
        let rows = run_suite(dir.path(), &Technique::ALL, &GridKind::ALL, &params, base).unwrap();
        let json: Vec<Option<String>> =
            rows.iter().map(|r| r.outcome.as_ref().ok().map(|(_, j)| hex::encode(Sha256::digest(j)))).collect();
        let csv = strip_compile_ms(&suite_csv(&rows).unwrap());
        (rows.len(), json, csv)
    };
    let (rows, ja, ca) = run();
    let (_, jb, cb) = run();
    let failures = ja.iter().filter(|j| j.is_none()).count();
    let same_json = ja == jb;
    let same_csv = ca == cb;
    let v = verdict(
        same_json && same_csv && failures == 0,
        format!("{rows} rows; schedule JSON identical: {same_json}; CSV identical: {same_csv}; failed rows: {failures}"),
    );
    within(Duration::from_secs(120), t0.elapsed(), v)
}

#[test]
fn acceptance() {
    let corpus = corpus();
    let run = run_corpus(&corpus);
    let results = [
        ("1 SWAP template", c1_swap_template()),
        ("2 trap-change accounting", c2_trap_changes()),
        ("3 SWAP error composition", c3_swap_error()),
        ("4 validator pass rate", c4_validator(&run)),
        ("5 semantic equivalence", c5_equivalence(&run)),
        ("6 zero-SWAP staircases", c6_staircase()),
        ("7 TFIM-16 comparisons", c7_tfim()),
        ("8 SWAP bound", c8_swap_bound(&run)),
        ("9 compile-time scaling", c9_scaling()),
        ("10 ESP properties", c10_esp()),
        ("11 determinism", c11_determinism()),
    ];
    let mut err = std::io::stderr().lock();
    for (name, v) in &results {
        writeln!(err, "{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail).unwrap();
    }
    let failed: Vec<&str> = results.iter().filter(|(_, v)| !v.pass).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
