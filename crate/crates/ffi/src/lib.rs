//! C interface to the pachinqo compiler.
//!
//! Compile a QASM string with [`pq_compile_qasm`], read figures and JSON from
//! the returned handle, release it with [`pq_result_free`]. Failing calls
//! return a nonzero [`PqStatus`]; [`pq_last_error_message`] describes the
//! most recent failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pachinqo::machine::{load_params, GridKind, Scale};
use pachinqo::pipeline::{compile_qasm, exit_code, CompileOptions};
use pachinqo::schedule::Technique;

/// Status codes. The first three match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PqStatus {
    Ok = 0,
    /// Malformed QASM or parameter JSON.
    Parse = 1,
    /// Circuit does not fit the layout, or invalid geometry.
    Capacity = 2,
    /// Schedule failed validation or equivalence.
    Validation = 3,
    /// Null pointer, bad UTF-8 or unknown technique/grid/scale name.
    InvalidArgument = 4,
    /// Internal failure.
    Internal = 5,
}

pub const PQ_FLAG_VALIDATE: u32 = 1;
pub const PQ_FLAG_SERIAL_MOVEMENT: u32 = 2;

/// Opaque compilation result.
pub struct PqResult {
    runtime_us: f64,
    esp: f64,
    swap_count: usize,
    trap_change_count: usize,
    movement_um: f64,
    u3_count: usize,
    cz_count: usize,
    compile_time_ms: f64,
    num_qubits: usize,
    schedule_json: CString,
    report_json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn fail(status: PqStatus, msg: impl Into<String>) -> PqStatus {
    set_error(msg);
    status
}

unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, PqStatus> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| fail(PqStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn status_of(code: i32) -> PqStatus {
    match code {
        1 => PqStatus::Parse,
        2 => PqStatus::Capacity,
        3 => PqStatus::Validation,
        _ => PqStatus::Internal,
    }
}

unsafe fn compile_inner(
    qasm: *const c_char,
    technique: *const c_char,
    grid: *const c_char,
    scale: *const c_char,
    params_json: *const c_char,
    flags: u32,
    out: *mut *mut PqResult,
) -> PqStatus {
    if out.is_null() {
        return fail(PqStatus::InvalidArgument, "out is null");
    }
    *out = ptr::null_mut();
    let qasm = match opt_str(qasm, "qasm") {
        Ok(Some(q)) => q,
        Ok(None) => return fail(PqStatus::InvalidArgument, "qasm is null"),
        Err(s) => return s,
    };
    let parse_or = |p: *const c_char, what: &str, default: &str| -> Result<String, PqStatus> {
        Ok(opt_str(p, what)?.unwrap_or(default).to_owned())
    };
    let (technique, grid, scale, params) = match (
        parse_or(technique, "technique", "pachinqo"),
        parse_or(grid, "grid", "large-square"),
        opt_str(scale, "scale"),
        opt_str(params_json, "params_json"),
    ) {
        (Ok(t), Ok(g), Ok(s), Ok(p)) => (t, g, s, p),
        (Err(e), ..) | (_, Err(e), ..) | (_, _, Err(e), _) | (.., Err(e)) => return e,
    };
    let technique: Technique = match technique.parse() {
        Ok(t) => t,
        Err(e) => return fail(PqStatus::InvalidArgument, e),
    };
    let grid: GridKind = match grid.parse() {
        Ok(g) => g,
        Err(e) => return fail(PqStatus::InvalidArgument, e),
    };
    let cfg = match load_params(params) {
        Ok(c) => c,
        Err(e) => return fail(PqStatus::Parse, e.to_string()),
    };
    let scale: Scale = match scale {
        Some(s) => match s.parse() {
            Ok(s) => s,
            Err(e) => return fail(PqStatus::InvalidArgument, e),
        },
        None => cfg.scale.unwrap_or(Scale::Default),
    };
    let opts = CompileOptions {
        technique,
        grid,
        scale,
        serial_movement: flags & PQ_FLAG_SERIAL_MOVEMENT != 0,
        validate: flags & PQ_FLAG_VALIDATE != 0,
    };
    let o = match compile_qasm(qasm, "input.qasm", &cfg.params, &opts) {
        Ok(o) => o,
        Err(e) => return fail(status_of(exit_code(&e)), e.to_string()),
    };
    let report_json = serde_json::to_string_pretty(&o.report).expect("report serializes");
    let r = &o.report;
    let res = PqResult {
        runtime_us: r.runtime_us,
        esp: r.esp,
        swap_count: r.swap_count,
        trap_change_count: r.trap_change_count,
        movement_um: r.total_movement_um,
        u3_count: r.gate_counts.u3,
        cz_count: r.gate_counts.cz,
        compile_time_ms: r.compile_time_ms,
        num_qubits: o.circuit.num_qubits,
        schedule_json: CString::new(o.compiled.schedule.to_json()).expect("json has no NUL"),
        report_json: CString::new(report_json).expect("json has no NUL"),
    };
    *out = Box::into_raw(Box::new(res));
    PqStatus::Ok
}

/// Compiles OpenQASM 2.0 text.
///
/// `technique`, `grid`, `scale` and `params_json` may be null for the
/// defaults (pachinqo, large-square, the params file's scale or `default`,
/// built-in parameters). `flags` is a bitwise OR of `PQ_FLAG_*`. On success
/// `*out` receives a handle to free with [`pq_result_free`].
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pq_compile_qasm(
    qasm: *const c_char,
    technique: *const c_char,
    grid: *const c_char,
    scale: *const c_char,
    params_json: *const c_char,
    flags: u32,
    out: *mut *mut PqResult,
) -> PqStatus {
    match catch_unwind(AssertUnwindSafe(|| compile_inner(qasm, technique, grid, scale, params_json, flags, out))) {
        Ok(s) => s,
        Err(_) => fail(PqStatus::Internal, "internal error during compilation"),
    }
}

/// # Safety
/// `r` must be null or a handle from [`pq_compile_qasm`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pq_result_free(r: *mut PqResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Total schedule duration in microseconds. Zero for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_result_runtime_us(r: *const PqResult) -> f64 {
    r.as_ref().map_or(0.0, |r| r.runtime_us)
}

/// Estimated success probability. Zero for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_result_esp(r: *const PqResult) -> f64 {
    r.as_ref().map_or(0.0, |r| r.esp)
}

/// Distinct inserted SWAPs. Zero for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_result_swap_count(r: *const PqResult) -> usize {
    r.as_ref().map_or(0, |r| r.swap_count)
}

/// Serial trap-change events, loading and readout included. Zero for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_result_trap_change_count(r: *const PqResult) -> usize {
    r.as_ref().map_or(0, |r| r.trap_change_count)
}

/// Summed Manhattan displacement of all atoms, in micrometres. Zero for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_result_movement_um(r: *const PqResult) -> f64 {
    r.as_ref().map_or(0.0, |r| r.movement_um)
}

/// Executed U3 gates, SWAP components included. Zero for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_result_u3_count(r: *const PqResult) -> usize {
    r.as_ref().map_or(0, |r| r.u3_count)
}

/// Executed CZ gates, SWAP components included. Zero for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_result_cz_count(r: *const PqResult) -> usize {
    r.as_ref().map_or(0, |r| r.cz_count)
}

/// Wall-clock compile time in milliseconds. Zero for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_result_compile_time_ms(r: *const PqResult) -> f64 {
    r.as_ref().map_or(0.0, |r| r.compile_time_ms)
}

/// Qubits in the compiled circuit. Zero for a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_result_num_qubits(r: *const PqResult) -> usize {
    r.as_ref().map_or(0, |r| r.num_qubits)
}

/// Schedule JSON, valid until the handle is freed.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_result_schedule_json(r: *const PqResult) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.schedule_json.as_ptr())
}

/// Metrics report JSON, valid until the handle is freed.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_result_report_json(r: *const PqResult) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.report_json.as_ptr())
}

/// Message for the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn pq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
