//! Command-line front end: single-file compilation and directory suites.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::machine::{load_params, GridKind, PhysParams, Scale};
use crate::pipeline::{compile_qasm, exit_code, CompileOptions, Output};
use crate::schedule::{Payload, Schedule, Technique};

pub const CSV_HEADER: [&str; 12] = [
    "name",
    "technique",
    "grid",
    "runtime_us",
    "esp",
    "swaps",
    "trap_changes",
    "movement_um",
    "u3",
    "cz",
    "compile_ms",
    "error",
];

#[derive(Debug, Parser)]
#[command(name = "pachinqo", version, about = "Compile circuits for zoned neutral-atom arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile one QASM file.
    Compile(CompileArgs),
    /// Compile every .qasm file in a directory and write a CSV table.
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON parameter overrides.
    #[arg(long, env = "PACHINQO_PARAMS")]
    params: Option<PathBuf>,
    /// Layout size; defaults to the params file's `scale`, else `default`.
    #[arg(long)]
    scale: Option<Scale>,
    /// Charge column moves one after another instead of concurrently.
    #[arg(long)]
    serial_movement: bool,
    /// Replay each schedule and check equivalence for small circuits.
    #[arg(long)]
    validate: bool,
}

#[derive(Debug, Args)]
struct CompileArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "pachinqo")]
    technique: Technique,
    #[arg(long, default_value = "large-square")]
    grid: GridKind,
    #[arg(long, default_value = "schedule.json")]
    out_schedule: PathBuf,
    #[arg(long, default_value = "report.json")]
    out_report: PathBuf,
    /// Human-readable event listing.
    #[arg(long)]
    out_trace: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    #[arg(long)]
    suite_dir: PathBuf,
    /// Techniques to run; all four when omitted.
    #[arg(long)]
    technique: Vec<Technique>,
    /// Grids to run; all four when omitted.
    #[arg(long)]
    grid: Vec<GridKind>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Directory for per-row schedule JSON files.
    #[arg(long)]
    out_schedule: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, data: &str) -> Result<()> {
    std::fs::write(path, data).map_err(|e| io_err(path, e))
}

fn resolve_params(c: &Common) -> Result<(PhysParams, Scale)> {
    let text = c.params.as_deref().map(read).transpose()?;
    let cfg = load_params(text.as_deref())?;
    Ok((cfg.params, c.scale.or(cfg.scale).unwrap_or(Scale::Default)))
}

/// One line per event: times, layer, kind and a short summary.
pub fn trace(schedule: &Schedule) -> String {
    let mut out = String::new();
    for (i, e) in schedule.events.iter().enumerate() {
        let detail = match &e.payload {
            Payload::ColumnMove { moves } => moves
                .iter()
                .map(|m| format!("c{} {}->{}", m.column, m.from_x, m.to_x))
                .collect::<Vec<_>>()
                .join(", "),
            Payload::U3Layer { gates } => gates
                .iter()
                .map(|g| format!("q{}@a{}", g.qubit, g.atom))
                .collect::<Vec<_>>()
                .join(" "),
            Payload::Illumination { pairs } => pairs
                .iter()
                .map(|p| format!("(q{},q{})", p.qubits[0], p.qubits[1]))
                .collect::<Vec<_>>()
                .join(" "),
            Payload::TrapChange { direction, transfers } => {
                format!("{direction:?} x{}", transfers.len())
            }
            Payload::Measure { atoms } => format!("{} atoms", atoms.len()),
        };
        writeln!(
            out,
            "{i:5} {:12.3} {:12.3} L{:<4} {:13} {detail}",
            e.t_start_us,
            e.t_end_us,
            e.layer,
            e.payload.kind()
        )
        .unwrap();
    }
    out
}

fn run_compile(a: &CompileArgs) -> Result<()> {
    let (params, scale) = resolve_params(&a.common)?;
    let text = read(&a.input)?;
    let name = a.input.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let opts = CompileOptions {
        technique: a.technique,
        grid: a.grid,
        scale,
        serial_movement: a.common.serial_movement,
        validate: a.common.validate,
    };
    let Output { compiled, report, .. } = compile_qasm(&text, &name, &params, &opts)?;
    write(&a.out_schedule, &compiled.schedule.to_json())?;
    write(&a.out_report, &serde_json::to_string_pretty(&report)?)?;
    if let Some(p) = &a.out_trace {
        write(p, &trace(&compiled.schedule))?;
    }
    Ok(())
}

/// Result of one (file, technique, grid) compilation in a suite.
#[derive(Debug, Clone)]
pub struct SuiteRow {
    pub name: String,
    pub technique: Technique,
    pub grid: GridKind,
    pub outcome: std::result::Result<(crate::metrics::MetricsReport, String), (i32, String)>,
}

impl SuiteRow {
    pub fn record(&self) -> Vec<String> {
        let mut r = vec![self.name.clone(), self.technique.to_string(), self.grid.to_string()];
        match &self.outcome {
            Ok((m, _)) => r.extend([
                m.runtime_us.to_string(),
                m.esp.to_string(),
                m.swap_count.to_string(),
                m.trap_change_count.to_string(),
                m.total_movement_um.to_string(),
                m.gate_counts.u3.to_string(),
                m.gate_counts.cz.to_string(),
                format!("{:.3}", m.compile_time_ms),
                String::new(),
            ]),
            Err((_, e)) => {
                r.extend(std::iter::repeat_n(String::new(), 8));
                r.push(e.clone());
            }
        }
        r
    }
}

/// Compiles every `.qasm` file in `dir` under each technique and grid. Rows
/// come back sorted by file name, technique and grid name.
pub fn run_suite(
    dir: &Path,
    techniques: &[Technique],
    grids: &[GridKind],
    params: &PhysParams,
    base: CompileOptions,
) -> Result<Vec<SuiteRow>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    files.sort();
    let sources: Vec<(String, std::result::Result<String, String>)> = files
        .iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, read(p).map_err(|e| e.to_string()))
        })
        .collect();
    let mut jobs = Vec::new();
    for (i, _) in sources.iter().enumerate() {
        for &t in techniques {
            for &g in grids {
                jobs.push((i, t, g));
            }
        }
    }
    let mut rows: Vec<SuiteRow> = jobs
        .par_iter()
        .map(|&(i, technique, grid)| {
            let (name, src) = &sources[i];
            let opts = CompileOptions { technique, grid, ..base };
            let outcome = match src {
                Err(e) => Err((1, e.clone())),
                Ok(text) => compile_qasm(text, name, params, &opts)
                    .map(|o| (o.report, o.compiled.schedule.to_json()))
                    .map_err(|e| (exit_code(&e), e.to_string())),
            };
            SuiteRow { name: name.clone(), technique, grid, outcome }
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.name.as_str(), a.technique.name(), a.grid.name()).cmp(&(b.name.as_str(), b.technique.name(), b.grid.name()))
    });
    Ok(rows)
}

pub fn suite_csv(rows: &[SuiteRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Verification(format!("csv output: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.record()).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Verification(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn run_suite_cmd(a: &SuiteArgs) -> Result<i32> {
    let (params, scale) = resolve_params(&a.common)?;
    let techniques = if a.technique.is_empty() { Technique::ALL.to_vec() } else { a.technique.clone() };
    let grids = if a.grid.is_empty() { GridKind::ALL.to_vec() } else { a.grid.clone() };
    let base = CompileOptions {
        scale,
        serial_movement: a.common.serial_movement,
        validate: a.common.validate,
        ..CompileOptions::default()
    };
    let rows = run_suite(&a.suite_dir, &techniques, &grids, &params, base)?;
    let csv = suite_csv(&rows)?;
    match &a.out_csv {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(dir) = &a.out_schedule {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        for r in &rows {
            if let Ok((_, json)) = &r.outcome {
                let stem = Path::new(&r.name).file_stem().unwrap().to_string_lossy();
                write(&dir.join(format!("{stem}.{}.{}.json", r.technique, r.grid)), json)?;
            }
        }
    }
    for r in &rows {
        if let Err((_, e)) = &r.outcome {
            eprintln!("{} {} {}: {e}", r.name, r.technique, r.grid);
        }
    }
    if !rows.is_empty() && rows.iter().all(|r| r.outcome.is_err()) {
        return Ok(rows.iter().find_map(|r| r.outcome.as_ref().err().map(|e| e.0)).unwrap_or(1));
    }
    Ok(0)
}

/// Runs the CLI on `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Compile(a) => run_compile(a).map(|()| 0),
        Command::Suite(a) => run_suite_cmd(a),
    };
    match result {
        Ok(code) => {
            let _ = std::io::stdout().flush();
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
