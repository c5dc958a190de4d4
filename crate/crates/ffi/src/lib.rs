//! C ABI over the `rmdp` solver library.
//!
//! Instances live behind the opaque [`RmdpInstance`] handle, created by
//! `rmdp_instance_from_json`, `rmdp_instance_read_file` or
//! `rmdp_generate_instance` and released with `rmdp_instance_free`. Every
//! fallible call returns an [`RmdpStatus`]; on failure a description is
//! available from `rmdp_last_error_message` on the same thread. Output
//! buffers are always caller-allocated, except strings returned through
//! `char **`, which must be released with `rmdp_string_free`.
//!
//! The header `include/rmdp.h` is regenerated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rmdp::bellman::{extract_policy, robust_bellman, robust_value_iteration};
use rmdp::format::{load_instance, read_instance, write_instance};
use rmdp::instancegen::random_rmdp;
use rmdp::projection::project;
use rmdp::{DivergenceKind, Error, MdpInstance, ProjectionQuery, ProjectionStatus, ValueVector};

/// Opaque handle to a validated RMDP instance.
pub struct RmdpInstance {
    inner: MdpInstance,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmdpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    InfeasibleMargin = 5,
    SizeLimit = 6,
    Io = 7,
    /// Value iteration hit its iteration cap; outputs hold the last iterate.
    NotConverged = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmdpDivergence {
    Kl = 0,
    Burg = 1,
    Variation = 2,
    ChiSquared = 3,
}

impl From<RmdpDivergence> for DivergenceKind {
    fn from(d: RmdpDivergence) -> Self {
        match d {
            RmdpDivergence::Kl => DivergenceKind::Kl,
            RmdpDivergence::Burg => DivergenceKind::Burg,
            RmdpDivergence::Variation => DivergenceKind::Variation,
            RmdpDivergence::ChiSquared => DivergenceKind::ChiSquared,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmdpProjectionStatus {
    Solved = 0,
    /// The nominal distribution already satisfies the threshold.
    Trivial = 1,
    /// No distribution satisfies the threshold; bounds are +inf.
    Infeasible = 2,
}

/// Value bracket of one projection. `alpha` and `zeta` are NaN when absent.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmdpProjection {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub zeta: f64,
    pub status: RmdpProjectionStatus,
    pub iterations: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: RmdpStatus, msg: impl Into<String>) -> RmdpStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> RmdpStatus {
    let status = match &e {
        Error::InvalidArgument(_) | Error::Domain(_) => RmdpStatus::InvalidArgument,
        Error::InfeasibleMargin { .. } => RmdpStatus::InfeasibleMargin,
        Error::SizeLimit(_) => RmdpStatus::SizeLimit,
        Error::Parse(_) => RmdpStatus::Parse,
        Error::Validation(_) => RmdpStatus::Validation,
        Error::Io(_) | Error::Csv(_) => RmdpStatus::Io,
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting panics into `RmdpStatus::Panic`.
fn guard(f: impl FnOnce() -> RmdpStatus) -> RmdpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == RmdpStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            status
        }
        Err(_) => fail(RmdpStatus::Panic, "internal panic"),
    }
}

macro_rules! check_ptr {
    ($p:expr, $name:literal) => {
        if $p.is_null() {
            return fail(RmdpStatus::NullPointer, concat!($name, " is NULL"));
        }
    };
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, RmdpStatus> {
    CStr::from_ptr(p).to_str().map_err(|_| fail(RmdpStatus::InvalidArgument, "string is not valid UTF-8"))
}

unsafe fn write_handle(out: *mut *mut RmdpInstance, inner: MdpInstance) {
    *out = Box::into_raw(Box::new(RmdpInstance { inner }));
}

/// Parses and validates an instance document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmdp_instance_from_json(json: *const c_char, out: *mut *mut RmdpInstance) -> RmdpStatus {
    guard(|| {
        check_ptr!(json, "json");
        check_ptr!(out, "out");
        *out = ptr::null_mut();
        match read_instance(CStr::from_ptr(json).to_bytes()) {
            Ok(inst) => {
                write_handle(out, inst);
                RmdpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Loads an instance document from disk.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmdp_instance_read_file(path: *const c_char, out: *mut *mut RmdpInstance) -> RmdpStatus {
    guard(|| {
        check_ptr!(path, "path");
        check_ptr!(out, "out");
        *out = ptr::null_mut();
        let path = match c_str(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_instance(Path::new(path)) {
            Ok(inst) => {
                write_handle(out, inst);
                RmdpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Generates a seeded random instance (`kappa ~ U(0,1)`, rewards `U(0,1)`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmdp_generate_instance(
    states: usize,
    actions: usize,
    seed: u64,
    discount: f64,
    divergence: RmdpDivergence,
    out: *mut *mut RmdpInstance,
) -> RmdpStatus {
    guard(|| {
        check_ptr!(out, "out");
        *out = ptr::null_mut();
        match random_rmdp(states, actions, seed, discount, divergence.into()) {
            Ok(inst) => {
                write_handle(out, inst);
                RmdpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases an instance. NULL is ignored.
///
/// # Safety
/// `instance` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rmdp_instance_free(instance: *mut RmdpInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of states, or 0 for NULL.
///
/// # Safety
/// `instance` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rmdp_instance_states(instance: *const RmdpInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.states())
}

/// Number of actions, or 0 for NULL.
///
/// # Safety
/// `instance` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rmdp_instance_actions(instance: *const RmdpInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.actions())
}

/// Serializes an instance; release the string with `rmdp_string_free`.
///
/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmdp_instance_to_json(instance: *const RmdpInstance, out: *mut *mut c_char) -> RmdpStatus {
    guard(|| {
        check_ptr!(instance, "instance");
        check_ptr!(out, "out");
        let bytes = write_instance(&(*instance).inner);
        *out = CString::new(bytes).expect("JSON has no NUL bytes").into_raw();
        RmdpStatus::Ok
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rmdp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solves `min d(p, nominal) s.t. cost'p <= threshold, p in simplex`.
///
/// # Safety
/// `nominal` and `cost` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rmdp_project(
    divergence: RmdpDivergence,
    nominal: *const f64,
    cost: *const f64,
    len: usize,
    threshold: f64,
    delta: f64,
    out: *mut RmdpProjection,
) -> RmdpStatus {
    guard(|| {
        check_ptr!(out, "out");
        let (Some(p), Some(b)) = (slice(nominal, len), slice(cost, len)) else {
            return fail(RmdpStatus::NullPointer, "nominal or cost is NULL");
        };
        let query = match ProjectionQuery::new(p.to_vec(), b.to_vec(), threshold, delta) {
            Ok(q) => q,
            Err(e) => return from_error(e),
        };
        match project(divergence.into(), &query) {
            Ok(r) => {
                *out = RmdpProjection {
                    lower: r.lower,
                    upper: r.upper,
                    alpha: r.alpha.unwrap_or(f64::NAN),
                    zeta: r.zeta.unwrap_or(f64::NAN),
                    status: match r.status {
                        ProjectionStatus::Solved => RmdpProjectionStatus::Solved,
                        ProjectionStatus::Trivial => RmdpProjectionStatus::Trivial,
                        ProjectionStatus::Infeasible => RmdpProjectionStatus::Infeasible,
                    },
                    iterations: r.iterations(),
                };
                RmdpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

unsafe fn values_in<'a>(instance: &MdpInstance, v: *const f64, len: usize) -> Result<&'a [f64], RmdpStatus> {
    if len != instance.states() {
        return Err(fail(
            RmdpStatus::InvalidArgument,
            format!("value vector has {len} entries, instance has {} states", instance.states()),
        ));
    }
    slice(v, len).ok_or_else(|| fail(RmdpStatus::NullPointer, "value vector is NULL"))
}

/// One ε-accurate robust Bellman update; writes `states` doubles.
///
/// # Safety
/// `v` must point to `len` doubles and `out_values` to `states` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn rmdp_robust_bellman(
    instance: *const RmdpInstance,
    v: *const f64,
    len: usize,
    epsilon: f64,
    out_values: *mut f64,
) -> RmdpStatus {
    guard(|| {
        check_ptr!(instance, "instance");
        check_ptr!(out_values, "out_values");
        let inst = &(*instance).inner;
        let v = match values_in(inst, v, len) {
            Ok(v) => ValueVector(v.to_vec()),
            Err(s) => return s,
        };
        match robust_bellman(inst, &v, epsilon) {
            Ok((values, _)) => {
                ptr::copy_nonoverlapping(values.as_ptr(), out_values, values.len());
                RmdpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Robust value iteration to accuracy `epsilon`. Writes `states` doubles to
/// `out_values`; `out_iterations` and `out_residual` may be NULL. Returns
/// `NotConverged` (with outputs filled) when `max_iters` is reached.
///
/// # Safety
/// `out_values` must point to `states` writable doubles; the optional
/// outputs must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn rmdp_value_iteration(
    instance: *const RmdpInstance,
    epsilon: f64,
    max_iters: usize,
    out_values: *mut f64,
    out_iterations: *mut usize,
    out_residual: *mut f64,
) -> RmdpStatus {
    guard(|| {
        check_ptr!(instance, "instance");
        check_ptr!(out_values, "out_values");
        match robust_value_iteration(&(*instance).inner, epsilon, max_iters) {
            Ok(report) => {
                ptr::copy_nonoverlapping(report.values.as_ptr(), out_values, report.values.len());
                if let Some(it) = out_iterations.as_mut() {
                    *it = report.iterations;
                }
                if let Some(r) = out_residual.as_mut() {
                    *r = report.residual;
                }
                if report.converged {
                    RmdpStatus::Ok
                } else {
                    fail(RmdpStatus::NotConverged, format!("no convergence within {max_iters} sweeps"))
                }
            }
            Err(e) => from_error(e),
        }
    })
}

/// Policy extracted at `v`, written row-major as `states * actions` doubles.
///
/// # Safety
/// `v` must point to `len` doubles and `out_probabilities` to
/// `states * actions` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rmdp_extract_policy(
    instance: *const RmdpInstance,
    v: *const f64,
    len: usize,
    epsilon: f64,
    out_probabilities: *mut f64,
) -> RmdpStatus {
    guard(|| {
        check_ptr!(instance, "instance");
        check_ptr!(out_probabilities, "out_probabilities");
        let inst = &(*instance).inner;
        let v = match values_in(inst, v, len) {
            Ok(v) => ValueVector(v.to_vec()),
            Err(s) => return s,
        };
        match extract_policy(inst, &v, epsilon) {
            Ok(pi) => {
                ptr::copy_nonoverlapping(pi.probabilities.as_ptr(), out_probabilities, pi.probabilities.len());
                RmdpStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn rmdp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn rmdp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
