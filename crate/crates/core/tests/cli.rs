use std::path::Path;
use std::process::{Command, Output};

use pachinqo::cli::CSV_HEADER;
use pachinqo::corpus::{staircase_qasm, write_random_corpus};
use pachinqo::schedule::Schedule;

const GHZ: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\ncreg c[3];\nh q[0];\ncx q[0],q[1];\ncx q[1],q[2];\nmeasure q -> c;\n";

fn pachinqo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pachinqo"))
        .current_dir(dir)
        .env_remove("PACHINQO_PARAMS")
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn compile_writes_schedule_report_and_trace() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("ghz.qasm"), GHZ).unwrap();
    let out = pachinqo(
        d.path(),
        &["compile", "--input", "ghz.qasm", "--technique", "onecache", "--validate", "--out-trace", "t.txt"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let schedule = Schedule::from_json(&std::fs::read_to_string(d.path().join("schedule.json")).unwrap()).unwrap();
    assert!(!schedule.events.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["trap_change_count"], 6);
    assert_eq!(report["gate_counts"]["cz"], 2);
    let trace = std::fs::read_to_string(d.path().join("t.txt")).unwrap();
    assert_eq!(trace.lines().count(), schedule.events.len());
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.qasm"), "OPENQASM 2.0;\nqreg q[2];\nfoo q[0];\n").unwrap();
    std::fs::write(d.path().join("huge.qasm"), staircase_qasm(600)).unwrap();
    std::fs::write(d.path().join("bad.json"), "{\"aod_speed\": ").unwrap();
    std::fs::write(d.path().join("ghz.qasm"), GHZ).unwrap();
    let code = |args: &[&str]| pachinqo(d.path(), args).status.code();
    assert_eq!(code(&["compile", "--input", "bad.qasm"]), Some(1));
    assert_eq!(code(&["compile", "--input", "missing.qasm"]), Some(1));
    assert_eq!(code(&["compile", "--input", "ghz.qasm", "--params", "bad.json"]), Some(1));
    assert_eq!(code(&["compile", "--input", "ghz.qasm", "--technique", "nope"]), Some(1));
    assert_eq!(code(&["compile", "--input", "huge.qasm"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn params_file_and_scale_flag() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("ghz.qasm"), GHZ).unwrap();
    std::fs::write(d.path().join("p.json"), r#"{"trap_change_time": 150.0}"#).unwrap();
    let runtime = |args: &[&str]| {
        let mut full = vec!["compile", "--input", "ghz.qasm"];
        full.extend_from_slice(args);
        let out = pachinqo(d.path(), &full);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let r: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(d.path().join("report.json")).unwrap()).unwrap();
        r["runtime_us"].as_f64().unwrap()
    };
    let base = runtime(&[]);
    let slow = runtime(&["--params", "p.json"]);
    assert!((slow - base - 6.0 * 25.0).abs() < 1e-9, "{base} {slow}");
    let doubled = runtime(&["--scale", "doubled"]);
    assert!(doubled > base);
}

#[test]
fn suite_csv_is_sorted_and_complete() {
    let d = tempfile::tempdir().unwrap();
    let corpus = d.path().join("corpus");
    write_random_corpus(&corpus, 3, 7).unwrap();
    std::fs::write(corpus.join("bad.qasm"), "not qasm").unwrap();
    std::fs::write(corpus.join("notes.txt"), "ignored").unwrap();
    let out = pachinqo(
        d.path(),
        &["suite", "--suite-dir", "corpus", "--technique", "pachinqo", "--technique", "trapchange", "--out-schedule", "sched"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4 * 2 * 4);
    let keys: Vec<(String, String, String)> =
        rows.iter().map(|r| (r[0].to_owned(), r[1].to_owned(), r[2].to_owned())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for row in &rows {
        if &row[0] == "bad.qasm" {
            assert!(!row[11].is_empty() && row[3].is_empty());
        } else {
            assert!(row[11].is_empty(), "{row:?}");
            let stem = row[0].trim_end_matches(".qasm");
            assert!(d.path().join("sched").join(format!("{stem}.{}.{}.json", &row[1], &row[2])).exists());
        }
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.qasm"));
}

#[test]
fn suite_fails_when_every_row_fails() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.qasm"), "not qasm").unwrap();
    let out = pachinqo(d.path(), &["suite", "--suite-dir", ".", "--out-csv", "out.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(d.path().join("out.csv").exists());
}
