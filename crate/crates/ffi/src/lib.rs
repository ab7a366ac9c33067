//! C ABI over `loalign`.
//!
//! Conventions:
//!
//! * Every fallible function returns an [`LoStatus`]; on anything but
//!   `LO_STATUS_OK` a message is available from [`lo_last_error`] on the same
//!   thread until the next call into the library.
//! * Objects are opaque handles created by `*_new`/`*_load`/`*_run` functions
//!   and released by the matching `*_free`. Passing NULL to a `*_free` is a no-op.
//! * Strings handed out by the library are NUL-terminated UTF-8 and must be
//!   released with [`lo_string_free`]. Strings passed in must be NUL-terminated
//!   UTF-8.
//! * Panics never cross the boundary; they surface as `LO_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use loalign::catalog::{catalog_stats, parse_framework, ColumnMap, FrameworkCatalog};
use loalign::pipeline::{run_pipeline, Analysis, PipelineConfig};
use loalign::runstore::{export_dashboard_bundle, load_run, publish_analysis, RunSnapshot};
use loalign::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// File system failure.
    Io = 3,
    /// The catalog or another input could not be parsed.
    InvalidInput = 4,
    /// The configuration was rejected.
    InvalidConfig = 5,
    /// An analysis stage failed.
    Pipeline = 6,
    /// A published run is missing, corrupt or of an unsupported version.
    RunStore = 7,
    /// The requested subject, topic or outcome does not exist.
    NotFound = 8,
    Panic = 9,
}

/// Parsed curriculum catalog.
pub struct LoCatalog(FrameworkCatalog);

/// In-memory result of running the full pipeline over a catalog.
pub struct LoAnalysis(Analysis);

/// A loaded, published run ready to answer API requests.
pub struct LoSnapshot(RunSnapshot);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(LoStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => LoStatus::Io,
            Error::Catalog(_) | Error::Text(_) | Error::Validation(_) => LoStatus::InvalidInput,
            Error::Config(_) => LoStatus::InvalidConfig,
            Error::Embed(_) | Error::Topic(_) | Error::Align(_) => LoStatus::Pipeline,
            Error::RunStore(_) => LoStatus::RunStore,
        };
        Fail(status, e.to_string())
    }
}

/// Runs `f`, turning errors and panics into a status plus the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LoStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LoStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            LoStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(LoStatus::NullArgument, format!("`{name}` is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(LoStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(LoStatus::NullArgument, format!("`{name}` is NULL")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail(LoStatus::NullArgument, format!("`{name}` is NULL")))
}

fn c_string(s: impl Into<Vec<u8>>) -> *mut c_char {
    let mut bytes = s.into();
    bytes.retain(|&b| b != 0);
    CString::new(bytes).expect("NULs removed").into_raw()
}

fn config_from(json: Option<&str>) -> Result<PipelineConfig, Fail> {
    match json {
        None => Ok(PipelineConfig::default()),
        Some(j) => serde_json::from_str(j).map_err(|e| Fail(LoStatus::InvalidConfig, format!("config: {e}"))),
    }
}

/// Message of the last failed call on this thread, or NULL. Owned by the
/// library; valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn lo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn lo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default pipeline configuration as JSON, with `seed` applied to both the
/// embedder and clustering. Edit and pass to [`lo_analysis_run`] or [`lo_publish`].
///
/// # Safety
/// `out_json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lo_config_default(seed: u64, out_json: *mut *mut c_char) -> LoStatus {
    guard(|| {
        let out = out_ptr(out_json, "out_json")?;
        let json = serde_json::to_string_pretty(&PipelineConfig::seeded(seed)).expect("config serializes");
        *out = c_string(json);
        Ok(())
    })
}

/// Parses a catalog CSV file with the default column names.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lo_catalog_load(path: *const c_char, out: *mut *mut LoCatalog) -> LoStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_ptr(out, "out")?;
        let bytes = std::fs::read(path).map_err(|e| Fail(LoStatus::Io, format!("{path}: {e}")))?;
        let cat = parse_framework(bytes.as_slice(), &ColumnMap::default()).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(LoCatalog(cat)));
        Ok(())
    })
}

/// Parses catalog CSV held in memory.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lo_catalog_parse(data: *const u8, len: usize, out: *mut *mut LoCatalog) -> LoStatus {
    guard(|| {
        if data.is_null() {
            return Err(Fail(LoStatus::NullArgument, "`data` is NULL".into()));
        }
        let out = out_ptr(out, "out")?;
        let bytes = std::slice::from_raw_parts(data, len);
        let cat = parse_framework(bytes, &ColumnMap::default()).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(LoCatalog(cat)));
        Ok(())
    })
}

/// Number of outcomes, or 0 for NULL.
///
/// # Safety
/// `catalog` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lo_catalog_len(catalog: *const LoCatalog) -> usize {
    catalog.as_ref().map_or(0, |c| c.0.len())
}

/// Ordered outcome pairs considered by the matcher, n·(n−1).
///
/// # Safety
/// `catalog` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lo_catalog_pair_count(catalog: *const LoCatalog) -> u64 {
    catalog.as_ref().map_or(0, |c| catalog_stats(&c.0).ordered_pair_count)
}

/// # Safety
/// `catalog` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn lo_catalog_free(catalog: *mut LoCatalog) {
    if !catalog.is_null() {
        drop(Box::from_raw(catalog));
    }
}

/// Runs embedding, topic fitting, analytics and validation in memory.
/// `config_json` may be NULL for the defaults. The catalog is not consumed.
///
/// # Safety
/// `catalog` must be a live handle, `config_json` NULL or a NUL-terminated
/// string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lo_analysis_run(
    catalog: *const LoCatalog,
    config_json: *const c_char,
    out: *mut *mut LoAnalysis,
) -> LoStatus {
    guard(|| {
        let cat = handle(catalog, "catalog")?;
        let cfg = config_from(opt_str_arg(config_json, "config_json")?)?;
        let out = out_ptr(out, "out")?;
        let a = run_pipeline(cat.0.clone(), &cfg, None, None)?;
        *out = Box::into_raw(Box::new(LoAnalysis(a)));
        Ok(())
    })
}

/// Number of topics found (outliers excluded).
///
/// # Safety
/// `analysis` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lo_analysis_topic_count(analysis: *const LoAnalysis) -> usize {
    analysis.as_ref().map_or(0, |a| a.0.model.assignment.k())
}

/// Framework consistency at the standard level, in [0, 1].
///
/// # Safety
/// `analysis` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lo_analysis_consistency(analysis: *const LoAnalysis, out: *mut f64) -> LoStatus {
    guard(|| {
        let a = handle(analysis, "analysis")?;
        *out_ptr(out, "out")? = a.0.validation.standard.accuracy;
        Ok(())
    })
}

/// Directed subject-matrix cell as an exact ratio: `numerator` outcomes of
/// `subject_a` out of `denominator` have a match in `subject_b`.
///
/// # Safety
/// `analysis` must be a live handle, the subjects NUL-terminated strings and
/// the outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lo_analysis_subject_cell(
    analysis: *const LoAnalysis,
    subject_a: *const c_char,
    subject_b: *const c_char,
    numerator: *mut u32,
    denominator: *mut u32,
) -> LoStatus {
    guard(|| {
        let a = handle(analysis, "analysis")?;
        let (sa, sb) = (str_arg(subject_a, "subject_a")?, str_arg(subject_b, "subject_b")?);
        let (num, den) = (out_ptr(numerator, "numerator")?, out_ptr(denominator, "denominator")?);
        let m = &a.0.analytics.subject_matrix;
        let pct = m
            .cell(sa, sb)
            .ok_or_else(|| Fail(LoStatus::NotFound, format!("no cell for {sa} -> {sb}")))?;
        *num = pct.num;
        *den = pct.den;
        Ok(())
    })
}

/// Subject matrix (all outcomes) as CSV.
///
/// # Safety
/// `analysis` must be a live handle and `out_csv` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lo_analysis_matrix_csv(analysis: *const LoAnalysis, out_csv: *mut *mut c_char) -> LoStatus {
    guard(|| {
        let a = handle(analysis, "analysis")?;
        let out = out_ptr(out_csv, "out_csv")?;
        *out = c_string(a.0.analytics.subject_matrix.to_csv());
        Ok(())
    })
}

/// # Safety
/// `analysis` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn lo_analysis_free(analysis: *mut LoAnalysis) {
    if !analysis.is_null() {
        drop(Box::from_raw(analysis));
    }
}

/// Runs the pipeline and publishes an immutable run under `out_root`.
/// Writes the run directory path to `out_run_dir`. Publishing the same
/// inputs again returns the existing run.
///
/// # Safety
/// `catalog` must be a live handle; `config_json` and `programs_toml` NULL or
/// NUL-terminated; `out_root` NUL-terminated; `out_run_dir` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lo_publish(
    catalog: *const LoCatalog,
    config_json: *const c_char,
    programs_toml: *const c_char,
    out_root: *const c_char,
    out_run_dir: *mut *mut c_char,
) -> LoStatus {
    guard(|| {
        let cat = handle(catalog, "catalog")?;
        let cfg = config_from(opt_str_arg(config_json, "config_json")?)?;
        let programs = opt_str_arg(programs_toml, "programs_toml")?.unwrap_or("");
        let root = Path::new(str_arg(out_root, "out_root")?);
        let out = out_ptr(out_run_dir, "out_run_dir")?;
        let m = publish_analysis(root, &cat.0, programs, &cfg, None, None)?;
        *out = c_string(root.join(&m.run_id).to_string_lossy().into_owned());
        Ok(())
    })
}

/// Loads and verifies a published run (its directory or `manifest.json`).
///
/// # Safety
/// `path` must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lo_snapshot_load(path: *const c_char, out: *mut *mut LoSnapshot) -> LoStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_ptr(out, "out")?;
        let snap = load_run(Path::new(path))?;
        *out = Box::into_raw(Box::new(LoSnapshot(snap)));
        Ok(())
    })
}

/// Run id of a loaded snapshot.
///
/// # Safety
/// `snapshot` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lo_snapshot_run_id(snapshot: *const LoSnapshot, out: *mut *mut c_char) -> LoStatus {
    guard(|| {
        let s = handle(snapshot, "snapshot")?;
        *out_ptr(out, "out")? = c_string(s.0.run_id.clone());
        Ok(())
    })
}

/// Answers one API request, e.g. `GET /api/v1/heatmap?cycle=2`. The call
/// itself succeeds whenever the request could be answered; `out_status`
/// carries the HTTP status and `out_body` the JSON document.
///
/// # Safety
/// `snapshot` must be a live handle, `method` and `target` NUL-terminated,
/// the outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lo_snapshot_request(
    snapshot: *const LoSnapshot,
    method: *const c_char,
    target: *const c_char,
    out_status: *mut u16,
    out_body: *mut *mut c_char,
) -> LoStatus {
    guard(|| {
        let s = handle(snapshot, "snapshot")?;
        let (method, target) = (str_arg(method, "method")?, str_arg(target, "target")?);
        let (status, body) = (out_ptr(out_status, "out_status")?, out_ptr(out_body, "out_body")?);
        let r = loalign::service::respond(&s.0, method, target);
        *status = r.status;
        *body = c_string(r.body);
        Ok(())
    })
}

/// Writes the static dashboard bundle into `dir`.
///
/// # Safety
/// `snapshot` must be a live handle and `dir` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn lo_snapshot_export(snapshot: *const LoSnapshot, dir: *const c_char) -> LoStatus {
    guard(|| {
        let s = handle(snapshot, "snapshot")?;
        let dir = str_arg(dir, "dir")?;
        export_dashboard_bundle(&s.0, Path::new(dir))?;
        Ok(())
    })
}

/// # Safety
/// `snapshot` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn lo_snapshot_free(snapshot: *mut LoSnapshot) {
    if !snapshot.is_null() {
        drop(Box::from_raw(snapshot));
    }
}
