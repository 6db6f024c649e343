//! C ABI over the simulation library: opaque handles, status codes, and
//! JSON/CSV strings at the boundary.
//!
//! Conventions:
//!
//! * Every fallible call returns [`LawnStatus`]; `LAWN_STATUS_OK` is zero.
//! * Output parameters are written only on success.
//! * Strings returned through `char **` are NUL-terminated, owned by the
//!   caller, and must be released with [`lawn_string_free`].
//! * Handles must be released with their matching `*_free` function.
//! * [`lawn_last_error_message`] returns the message of the most recent
//!   failure on the calling thread.
//!
//! The C header is generated into `include/lawnsim.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lawnsim::harness::{run_experiment_parallel, summarize, ExperimentSpec, ResultTable};
use lawnsim::scenario::generate_scenario;
use lawnsim::{ChannelParams, Error, Scenario, ScenarioConfig, TopologyGraph};

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawnStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Configuration rejected (bad JSON or invalid parameter ranges).
    ConfigError = 3,
    /// A documented API precondition was violated.
    ContractViolation = 4,
    /// The engine failed on a domain or geometry precondition.
    EngineError = 5,
    /// A numerical routine failed beyond recovery.
    NumericalError = 6,
    IoError = 7,
    /// The library panicked; state may be inconsistent.
    Panic = 8,
}

/// cbindgen:ignore
mod handles {
    /// Opaque deployment handle.
    pub struct LawnScenario(pub(crate) lawnsim::Scenario);

    /// Opaque topology-graph handle.
    pub struct LawnGraph(pub(crate) lawnsim::TopologyGraph);
}

pub use handles::{LawnGraph, LawnScenario};

fn set_last_error(msg: &str) {
    let cstring = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn status_of(err: &Error) -> LawnStatus {
    match err {
        Error::InvalidConfig(_) | Error::Json(_) => LawnStatus::ConfigError,
        Error::ContractViolation(_) | Error::TooManyUsers { .. } => LawnStatus::ContractViolation,
        Error::Domain(_) | Error::InfeasibleMeasurement(_) | Error::DegenerateGeometry(_) => {
            LawnStatus::EngineError
        }
        Error::Numerical(_) => LawnStatus::NumericalError,
        Error::Io(_) => LawnStatus::IoError,
    }
}

fn fail(err: Error) -> LawnStatus {
    set_last_error(&err.to_string());
    status_of(&err)
}

/// Run a closure, translating errors and panics into status codes.
fn guarded(f: impl FnOnce() -> Result<LawnStatus, Error>) -> LawnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(err)) => fail(err),
        Err(_) => {
            set_last_error("internal panic");
            LawnStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be NULL or a NUL-terminated string valid for the call.
unsafe fn read_utf8<'a>(ptr: *const c_char) -> Result<&'a str, LawnStatus> {
    if ptr.is_null() {
        set_last_error("NULL string argument");
        return Err(LawnStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error("string argument is not valid UTF-8");
        LawnStatus::InvalidUtf8
    })
}

fn give_string(out: *mut *mut c_char, value: String) -> LawnStatus {
    let cstring = match CString::new(value) {
        Ok(s) => s,
        Err(_) => {
            set_last_error("output contained an interior NUL byte");
            return LawnStatus::NumericalError;
        }
    };
    unsafe { *out = cstring.into_raw() };
    LawnStatus::Ok
}

/// Crate version as a static NUL-terminated string; never freed.
#[no_mangle]
pub extern "C" fn lawn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failure on this thread, or NULL if none.
/// The caller owns the returned string (free with [`lawn_string_free`]).
#[no_mangle]
pub extern "C" fn lawn_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer previously returned by a `lawn_*`
/// function that hands ownership to the caller, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lawn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Friis free-space path loss in dB.
///
/// # Safety
/// `out_db` must point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn lawn_fspl_db(
    distance_m: f64,
    freq_hz: f64,
    out_db: *mut f64,
) -> LawnStatus {
    if out_db.is_null() {
        set_last_error("out_db is NULL");
        return LawnStatus::NullPointer;
    }
    guarded(|| {
        let v = lawnsim::channel::fspl_db(distance_m, freq_hz)?;
        unsafe { *out_db = v };
        Ok(LawnStatus::Ok)
    })
}

/// Generate a deployment from a scenario-config JSON document (the same
/// schema as the spec's `scenario` block). On success `*out` receives a
/// handle to free with [`lawn_scenario_free`].
///
/// # Safety
/// `config_json` must be NULL-terminated UTF-8; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lawn_scenario_generate(
    config_json: *const c_char,
    out: *mut *mut LawnScenario,
) -> LawnStatus {
    if out.is_null() {
        set_last_error("out is NULL");
        return LawnStatus::NullPointer;
    }
    let text = match read_utf8(config_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let config: ScenarioConfig = serde_json::from_str(text).map_err(Error::Json)?;
        let scenario = generate_scenario(&config)?;
        unsafe { *out = Box::into_raw(Box::new(LawnScenario(scenario))) };
        Ok(LawnStatus::Ok)
    })
}

/// # Safety
/// `scenario` must be a live handle from [`lawn_scenario_generate`].
unsafe fn scenario_ref<'a>(scenario: *const LawnScenario) -> Result<&'a Scenario, LawnStatus> {
    if scenario.is_null() {
        set_last_error("scenario handle is NULL");
        return Err(LawnStatus::NullPointer);
    }
    Ok(&(*scenario).0)
}

/// Number of nodes in the deployment.
///
/// # Safety
/// `scenario` must be a live handle; `out_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lawn_scenario_node_count(
    scenario: *const LawnScenario,
    out_count: *mut usize,
) -> LawnStatus {
    if out_count.is_null() {
        set_last_error("out_count is NULL");
        return LawnStatus::NullPointer;
    }
    match scenario_ref(scenario) {
        Ok(s) => {
            *out_count = s.node_count();
            LawnStatus::Ok
        }
        Err(status) => status,
    }
}

/// Full node list as a JSON document (caller frees).
///
/// # Safety
/// `scenario` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lawn_scenario_to_json(
    scenario: *const LawnScenario,
    out_json: *mut *mut c_char,
) -> LawnStatus {
    if out_json.is_null() {
        set_last_error("out_json is NULL");
        return LawnStatus::NullPointer;
    }
    let s = match scenario_ref(scenario) {
        Ok(s) => s,
        Err(status) => return status,
    };
    guarded(|| {
        let json = s.to_json()?;
        Ok(give_string(out_json, json))
    })
}

/// # Safety
/// `scenario` must be NULL or a live handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lawn_scenario_free(scenario: *mut LawnScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Build the thresholded graph over a deployment. `channel_json` may be
/// NULL for default radio parameters. On success `*out` receives a handle
/// to free with [`lawn_graph_free`].
///
/// # Safety
/// `scenario` must be a live handle; `channel_json` NULL or
/// NUL-terminated UTF-8; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lawn_graph_build(
    scenario: *const LawnScenario,
    channel_json: *const c_char,
    threshold_db: f64,
    out: *mut *mut LawnGraph,
) -> LawnStatus {
    if out.is_null() {
        set_last_error("out is NULL");
        return LawnStatus::NullPointer;
    }
    let s = match scenario_ref(scenario) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let params: Result<ChannelParams, LawnStatus> = if channel_json.is_null() {
        Ok(ChannelParams::default())
    } else {
        match read_utf8(channel_json) {
            Ok(text) => match serde_json::from_str(text) {
                Ok(p) => Ok(p),
                Err(e) => {
                    set_last_error(&format!("channel JSON rejected: {e}"));
                    Err(LawnStatus::ConfigError)
                }
            },
            Err(status) => Err(status),
        }
    };
    let params = match params {
        Ok(p) => p,
        Err(status) => return status,
    };
    guarded(|| {
        let graph = TopologyGraph::build(s, &params, threshold_db)?;
        unsafe { *out = Box::into_raw(Box::new(LawnGraph(graph))) };
        Ok(LawnStatus::Ok)
    })
}

/// # Safety
/// `graph` must be a live handle from [`lawn_graph_build`].
unsafe fn graph_ref<'a>(graph: *const LawnGraph) -> Result<&'a TopologyGraph, LawnStatus> {
    if graph.is_null() {
        set_last_error("graph handle is NULL");
        return Err(LawnStatus::NullPointer);
    }
    Ok(&(*graph).0)
}

/// Degree statistics over active nodes and live edges. Any output
/// pointer may be NULL to skip that value.
///
/// # Safety
/// `graph` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lawn_graph_degree_stats(
    graph: *const LawnGraph,
    out_mean_degree: *mut f64,
    out_min_degree: *mut u32,
    out_max_degree: *mut u32,
    out_components: *mut u32,
) -> LawnStatus {
    let g = match graph_ref(graph) {
        Ok(g) => g,
        Err(status) => return status,
    };
    let stats = g.degree_stats();
    if !out_mean_degree.is_null() {
        *out_mean_degree = stats.mean_degree;
    }
    if !out_min_degree.is_null() {
        *out_min_degree = stats.min_degree;
    }
    if !out_max_degree.is_null() {
        *out_max_degree = stats.max_degree;
    }
    if !out_components.is_null() {
        *out_components = stats.components;
    }
    LawnStatus::Ok
}

/// Number of live edges.
///
/// # Safety
/// `graph` must be a live handle; `out_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lawn_graph_edge_count(
    graph: *const LawnGraph,
    out_count: *mut usize,
) -> LawnStatus {
    if out_count.is_null() {
        set_last_error("out_count is NULL");
        return LawnStatus::NullPointer;
    }
    match graph_ref(graph) {
        Ok(g) => {
            *out_count = g.live_edge_count();
            LawnStatus::Ok
        }
        Err(status) => status,
    }
}

/// Live edge list as `a,b,kind,weight_db,distance_m` CSV (caller frees).
///
/// # Safety
/// `graph` must be a live handle; `out_csv` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lawn_graph_edge_csv(
    graph: *const LawnGraph,
    out_csv: *mut *mut c_char,
) -> LawnStatus {
    if out_csv.is_null() {
        set_last_error("out_csv is NULL");
        return LawnStatus::NullPointer;
    }
    match graph_ref(graph) {
        Ok(g) => give_string(out_csv, g.edge_csv()),
        Err(status) => status,
    }
}

/// # Safety
/// `graph` must be NULL or a live handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lawn_graph_free(graph: *mut LawnGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Run a full experiment spec (the CLI's JSON schema) with `jobs` worker
/// threads and return the result table as CSV (caller frees). The table
/// bytes are identical for any worker count.
///
/// # Safety
/// `spec_json` must be NUL-terminated UTF-8; `out_table_csv` writable.
#[no_mangle]
pub unsafe extern "C" fn lawn_run_experiment(
    spec_json: *const c_char,
    jobs: usize,
    out_table_csv: *mut *mut c_char,
) -> LawnStatus {
    if out_table_csv.is_null() {
        set_last_error("out_table_csv is NULL");
        return LawnStatus::NullPointer;
    }
    let text = match read_utf8(spec_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let spec = ExperimentSpec::from_json(text)?;
        let run = run_experiment_parallel(&spec, jobs)?;
        Ok(give_string(out_table_csv, run.table.to_csv()))
    })
}

/// Summarize a result-table CSV into the summary JSON document
/// (caller frees).
///
/// # Safety
/// `table_csv` must be NUL-terminated UTF-8; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn lawn_summarize_table(
    table_csv: *const c_char,
    out_json: *mut *mut c_char,
) -> LawnStatus {
    if out_json.is_null() {
        set_last_error("out_json is NULL");
        return LawnStatus::NullPointer;
    }
    let text = match read_utf8(table_csv) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let table = ResultTable::from_csv(text)?;
        let summary = summarize(&table)?;
        let json = serde_json::to_string_pretty(&summary).map_err(Error::Json)?;
        Ok(give_string(out_json, json))
    })
}
