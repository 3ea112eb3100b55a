//! C interface to `flatmoduli`.
//!
//! Objects cross the boundary as opaque handles created by `fm_*_new` style
//! functions and released by the matching `fm_*_free`. Every fallible call
//! returns an [`FmStatus`]; on failure the message is available from
//! [`fm_last_error`] on the same thread until the next failing call.
//! Strings handed out by the library are released with [`fm_string_free`].

use flatmoduli::cli::{execute, parse_config, Command, JobConfig};
use flatmoduli::lie::{build_group, certify, Family, GroupSpec, Verdict};
use flatmoduli::report::{Outcome, Report};
use flatmoduli::torus::{make_torus, TorusGeom};
use flatmoduli::Error;
use num_complex::Complex64;
use serde_json::json;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Config = 4,
    Numerical = 5,
    Unsupported = 6,
    Io = 7,
    Panic = 8,
}

/// Report outcome, mirroring the command line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FmOutcome {
    Pass = 0,
    Fail = 1,
    Undecided = 2,
}

/// A parsed job configuration.
pub struct FmJob {
    cfg: JobConfig,
}

/// The result of running a command.
pub struct FmReport {
    report: Report,
}

/// A solvable matrix group.
pub struct FmGroup {
    spec: Arc<GroupSpec>,
}

/// A flat complex torus with its spectral cutoff.
pub struct FmTorus {
    geom: Arc<TorusGeom>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FmStatus {
    match e {
        Error::Config(_) | Error::Json(_) | Error::Format(_) => FmStatus::Config,
        Error::UnsupportedGroup(_) => FmStatus::Unsupported,
        Error::Io(_) => FmStatus::Io,
        Error::BandOverflow { .. }
        | Error::Singular
        | Error::NonFlat(_)
        | Error::HarmonicObstruction { .. }
        | Error::NotUnipotent(_) => FmStatus::Numerical,
        _ => FmStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (FmStatus, String)>) -> FmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FmStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FmStatus::Panic
        }
    }
}

fn lib(e: Error) -> (FmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FmStatus, String) {
    (FmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FmStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| (FmStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (FmStatus, String)> {
    unsafe { p.as_mut() }.ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FmStatus, String)> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

fn give(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses a JSON job configuration.
///
/// # Safety
/// `config_json` must be a nul-terminated string, `out_job` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_job_from_json(config_json: *const c_char, out_job: *mut *mut FmJob) -> FmStatus {
    guard(|| {
        let slot = unsafe { out(out_job, "out_job") }?;
        *slot = ptr::null_mut();
        let cfg = parse_config(unsafe { text(config_json, "config_json") }?).map_err(lib)?;
        *slot = Box::into_raw(Box::new(FmJob { cfg }));
        Ok(())
    })
}

/// Overrides the seed of a job.
///
/// # Safety
/// `job` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fm_job_set_seed(job: *mut FmJob, seed: u64) -> FmStatus {
    guard(|| {
        unsafe { out(job, "job") }?.cfg.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `job` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn fm_job_free(job: *mut FmJob) {
    if !job.is_null() {
        drop(unsafe { Box::from_raw(job) });
    }
}

/// Runs `command` (for example `"classify"`) on a job. A report is produced
/// even when checks fail; inspect it with [`fm_report_outcome`].
///
/// # Safety
/// `job` must be a live handle, `command` a nul-terminated string and
/// `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_job_run(job: *const FmJob, command: *const c_char, out_report: *mut *mut FmReport) -> FmStatus {
    guard(|| {
        let slot = unsafe { out(out_report, "out_report") }?;
        *slot = ptr::null_mut();
        let job = unsafe { handle(job, "job") }?;
        let name = unsafe { text(command, "command") }?;
        let command: Command = name.parse().map_err(|e: Error| (FmStatus::InvalidArgument, e.to_string()))?;
        if let Some(c) = job.cfg.command {
            if c != command {
                return Err((FmStatus::Config, format!("configuration is for {c}, not {command}")));
            }
        }
        let report = execute(&job.cfg, command).map_err(lib)?;
        *slot = Box::into_raw(Box::new(FmReport { report }));
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle, `out_outcome` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_report_outcome(report: *const FmReport, out_outcome: *mut FmOutcome) -> FmStatus {
    guard(|| {
        let r = unsafe { handle(report, "report") }?;
        *unsafe { out(out_outcome, "out_outcome") }? = match r.report.outcome() {
            Outcome::Pass => FmOutcome::Pass,
            Outcome::Fail => FmOutcome::Fail,
            Outcome::Undecided => FmOutcome::Undecided,
        };
        Ok(())
    })
}

/// The report as JSON lines without a timestamp. Free with [`fm_string_free`].
///
/// # Safety
/// `report` must be a live handle, `out_text` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_report_jsonl(report: *const FmReport, out_text: *mut *mut c_char) -> FmStatus {
    guard(|| {
        let slot = unsafe { out(out_text, "out_text") }?;
        *slot = ptr::null_mut();
        *slot = give(unsafe { handle(report, "report") }?.report.to_jsonl(None));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn fm_report_free(report: *mut FmReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Builds a group from a family name (`"T"`, `"BorelSp"`, `"BorelSO"`) and
/// the size of its matrices.
///
/// # Safety
/// `family` must be a nul-terminated string, `out_group` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_group_new(family: *const c_char, size: usize, out_group: *mut *mut FmGroup) -> FmStatus {
    guard(|| {
        let slot = unsafe { out(out_group, "out_group") }?;
        *slot = ptr::null_mut();
        let name = unsafe { text(family, "family") }?;
        let fam = Family::parse(name, size).map_err(|f| (FmStatus::Unsupported, format!("unknown family {f}")))?;
        let spec = build_group(fam).map_err(lib)?;
        *slot = Box::into_raw(Box::new(FmGroup { spec: Arc::new(spec) }));
        Ok(())
    })
}

/// Ambient matrix size, dimension of the algebra and rank of the torus part.
///
/// # Safety
/// `group` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_group_dims(
    group: *const FmGroup,
    out_ambient: *mut usize,
    out_dim: *mut usize,
    out_rank: *mut usize,
) -> FmStatus {
    guard(|| {
        let s = &unsafe { handle(group, "group") }?.spec;
        *unsafe { out(out_ambient, "out_ambient") }? = s.ambient_dim;
        *unsafe { out(out_dim, "out_dim") }? = s.dim();
        *unsafe { out(out_rank, "out_rank") }? = s.rank();
        Ok(())
    })
}

/// Hodge certificate of the group as JSON with fields `verdict`
/// (`"certified"`, `"failed"` or `"unknown"`), `certificate` and `report`.
/// Free with [`fm_string_free`].
///
/// # Safety
/// `group` must be a live handle, `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_group_certificate(group: *const FmGroup, out_json: *mut *mut c_char) -> FmStatus {
    guard(|| {
        let slot = unsafe { out(out_json, "out_json") }?;
        *slot = ptr::null_mut();
        let s = &unsafe { handle(group, "group") }?.spec;
        let name = match s.family {
            Family::Triangular(_) => "T",
            Family::BorelSp(_) => "BorelSp",
            Family::BorelSO(_) => "BorelSO",
        };
        let v = match certify(name, s.ambient_dim) {
            Verdict::Certified(c, r) => json!({ "verdict": "certified", "certificate": c, "report": r }),
            Verdict::Failed(c, r) => json!({ "verdict": "failed", "certificate": c, "report": r }),
            Verdict::Unknown(why) => json!({ "verdict": "unknown", "reason": why }),
        };
        *slot = give(v.to_string());
        Ok(())
    })
}

/// # Safety
/// `group` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn fm_group_free(group: *mut FmGroup) {
    if !group.is_null() {
        drop(unsafe { Box::from_raw(group) });
    }
}

/// Builds the torus `ℂ^g / Λ`. `periods` holds the `g × 2g` period matrix
/// row-major as interleaved real and imaginary parts (`4 g²` doubles).
///
/// # Safety
/// `periods` must point to `4 g²` readable doubles, `out_torus` writable.
#[no_mangle]
pub unsafe extern "C" fn fm_torus_new(g: usize, periods: *const f64, cutoff: usize, out_torus: *mut *mut FmTorus) -> FmStatus {
    guard(|| {
        let slot = unsafe { out(out_torus, "out_torus") }?;
        *slot = ptr::null_mut();
        if periods.is_null() {
            return Err(null("periods"));
        }
        if g == 0 || g > 8 {
            return Err((FmStatus::InvalidArgument, format!("complex dimension {g} out of range")));
        }
        let raw = unsafe { std::slice::from_raw_parts(periods, 4 * g * g) };
        let rows = raw
            .chunks(4 * g)
            .map(|r| r.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
            .collect();
        let geom = make_torus(g, rows, cutoff).map_err(lib)?;
        *slot = Box::into_raw(Box::new(FmTorus { geom }));
        Ok(())
    })
}

/// Complex dimension and number of Fourier modes in the band.
///
/// # Safety
/// `torus` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_torus_dims(torus: *const FmTorus, out_g: *mut usize, out_modes: *mut usize) -> FmStatus {
    guard(|| {
        let t = &unsafe { handle(torus, "torus") }?.geom;
        *unsafe { out(out_g, "out_g") }? = t.g;
        *unsafe { out(out_modes, "out_modes") }? = t.num_modes();
        Ok(())
    })
}

/// # Safety
/// `torus` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn fm_torus_free(torus: *mut FmTorus) {
    if !torus.is_null() {
        drop(unsafe { Box::from_raw(torus) });
    }
}
