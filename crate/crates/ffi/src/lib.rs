//! C ABI for `dirrep`.
//!
//! Every entry point returns a [`DrStatus`] and writes results through out
//! pointers. Queries and adaptive results are opaque handles created by a
//! `*_new` function and released with the matching `*_free`. On failure a
//! description of the last error on the calling thread is available from
//! [`dr_last_error_message`].
//!
//! Enum-valued inputs are passed as plain integers and validated, so a bad
//! value from C yields `DR_STATUS_INVALID_ARGUMENT` rather than undefined
//! behavior. Effect vectors for the error-analysis calls may contain
//! `INFINITY` and `-INFINITY`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dirrep::error_analysis::{
    c_concordant, c_discordant, c_exact_disjoint, g_fn, mc_type1, mc_type3, sup_boundary,
    threshold_t, McEstimate, ThetaPoint,
};
use dirrep::{
    adaptive_r, directional_test, min_rule_is_valid, AdaptiveResult, CombinerKind, Error,
    ReplicabilityQuery, Rule, RuleApplied, Sign, StudyVector,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    Regime = 4,
    OutOfRange = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrCombiner {
    Bonferroni = 0,
    Sidak = 1,
    Simes = 2,
    Fisher = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrRule {
    Auto = 0,
    Min = 1,
    Double = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrSign {
    None = 0,
    Positive = 1,
    Negative = -1,
}

/// Opaque, validated test configuration.
pub struct DrQuery {
    inner: ReplicabilityQuery,
}

/// Opaque outcome of the sequential choice of `r`.
pub struct DrAdaptive {
    inner: AdaptiveResult,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrDirectionalResult {
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_final: f64,
    /// `DR_RULE_MIN` or `DR_RULE_DOUBLE`.
    pub rule_applied: DrRule,
    pub reject: bool,
    pub sign: DrSign,
    pub unproven_validity: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrAdaptiveStep {
    pub r: usize,
    pub p_final: f64,
    pub reject: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrMcEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub reps: u64,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: DrStatus, msg: impl Into<String>) -> DrStatus {
    set_last_error(msg);
    status
}

fn from_error(e: Error) -> DrStatus {
    let status = match e {
        Error::Domain(_) => DrStatus::InvalidArgument,
        Error::LengthMismatch { .. } => DrStatus::LengthMismatch,
        Error::Regime(_) => DrStatus::Regime,
    };
    fail(status, e.to_string())
}

/// Run `f`, converting panics into `DR_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> DrStatus) -> DrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == DrStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            status
        }
        Err(_) => fail(DrStatus::Panic, "internal panic"),
    }
}

fn combiner_from(raw: u32) -> Result<CombinerKind, DrStatus> {
    match raw {
        0 => Ok(CombinerKind::Bonferroni),
        1 => Ok(CombinerKind::Sidak),
        2 => Ok(CombinerKind::Simes),
        3 => Ok(CombinerKind::Fisher),
        _ => Err(fail(DrStatus::InvalidArgument, format!("unknown combiner {raw}"))),
    }
}

fn rule_from(raw: u32) -> Result<Rule, DrStatus> {
    match raw {
        0 => Ok(Rule::Auto),
        1 => Ok(Rule::Min),
        2 => Ok(Rule::Double),
        _ => Err(fail(DrStatus::InvalidArgument, format!("unknown rule {raw}"))),
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize) -> Result<&'a [f64], DrStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(fail(DrStatus::NullPointer, "data pointer is null"));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! try_core {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return from_error(e),
        }
    };
}

macro_rules! out_ptr {
    ($p:expr) => {
        if $p.is_null() {
            return fail(DrStatus::NullPointer, "output pointer is null");
        }
    };
}

/// Static description of a `DrStatus` value. Never null.
#[no_mangle]
pub extern "C" fn dr_status_message(status: i32) -> *const c_char {
    let s: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer\0",
        2 => b"invalid argument\0",
        3 => b"length mismatch\0",
        4 => b"(n, r) outside the regime of this formula\0",
        5 => b"index out of range\0",
        6 => b"internal panic\0",
        _ => b"unknown status\0",
    };
    s.as_ptr().cast()
}

/// Detail for the most recent failure on this thread, or null after a
/// success. The pointer stays valid until the next `dr_*` call on the
/// same thread.
#[no_mangle]
pub extern "C" fn dr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Create a query for `H_{r/n}`. `combiner` is a `DrCombiner`, `rule` a `DrRule`.
#[no_mangle]
pub unsafe extern "C" fn dr_query_new(
    n: usize,
    r: usize,
    alpha: f64,
    combiner: u32,
    rule: u32,
    out: *mut *mut DrQuery,
) -> DrStatus {
    guard(|| {
        out_ptr!(out);
        let combiner = try_status!(combiner_from(combiner));
        let rule = try_status!(rule_from(rule));
        let inner = try_core!(ReplicabilityQuery::new(n, r, alpha, combiner, rule));
        *out = Box::into_raw(Box::new(DrQuery { inner }));
        DrStatus::Ok
    })
}

/// Release a query. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dr_query_free(query: *mut DrQuery) {
    if !query.is_null() {
        drop(Box::from_raw(query));
    }
}

#[no_mangle]
pub unsafe extern "C" fn dr_min_rule_is_valid(
    n: usize,
    r: usize,
    combiner: u32,
    out: *mut bool,
) -> DrStatus {
    guard(|| {
        out_ptr!(out);
        let combiner = try_status!(combiner_from(combiner));
        if r < 2 || r > n {
            return fail(DrStatus::InvalidArgument, format!("r = {r} must lie in 2..={n}"));
        }
        *out = min_rule_is_valid(n, r, combiner);
        DrStatus::Ok
    })
}

/// Run the directional test on `len` z-scores.
#[no_mangle]
pub unsafe extern "C" fn dr_directional_test(
    query: *const DrQuery,
    z: *const f64,
    len: usize,
    out: *mut DrDirectionalResult,
) -> DrStatus {
    guard(|| {
        out_ptr!(out);
        if query.is_null() {
            return fail(DrStatus::NullPointer, "query is null");
        }
        let q = &(*query).inner;
        let z = try_status!(slice(z, len));
        let s = try_core!(StudyVector::new(z.to_vec()));
        let res = try_core!(directional_test(&s, q));
        *out = DrDirectionalResult {
            p_plus: res.p_plus,
            p_minus: res.p_minus,
            p_final: res.p_final,
            rule_applied: match res.rule_applied {
                RuleApplied::Min => DrRule::Min,
                RuleApplied::Double => DrRule::Double,
            },
            reject: res.reject,
            sign: match res.sign {
                Sign::Positive => DrSign::Positive,
                Sign::Negative => DrSign::Negative,
                Sign::None => DrSign::None,
            },
            unproven_validity: res.unproven_validity,
        };
        DrStatus::Ok
    })
}

/// Sequential choice of `r`; release the handle with `dr_adaptive_free`.
#[no_mangle]
pub unsafe extern "C" fn dr_adaptive_new(
    z: *const f64,
    len: usize,
    alpha: f64,
    combiner: u32,
    out: *mut *mut DrAdaptive,
) -> DrStatus {
    guard(|| {
        out_ptr!(out);
        let combiner = try_status!(combiner_from(combiner));
        let z = try_status!(slice(z, len));
        let s = try_core!(StudyVector::new(z.to_vec()));
        let inner = try_core!(adaptive_r(&s, alpha, combiner));
        *out = Box::into_raw(Box::new(DrAdaptive { inner }));
        DrStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn dr_adaptive_free(result: *mut DrAdaptive) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// First tested `r`. Returns 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dr_adaptive_k(result: *const DrAdaptive) -> usize {
    result.as_ref().map_or(0, |a| a.inner.k)
}

/// Lower confidence bound `l`. Returns 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dr_adaptive_l(result: *const DrAdaptive) -> usize {
    result.as_ref().map_or(0, |a| a.inner.l)
}

/// Number of tested hypotheses. Returns 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn dr_adaptive_step_count(result: *const DrAdaptive) -> usize {
    result.as_ref().map_or(0, |a| a.inner.steps.len())
}

#[no_mangle]
pub unsafe extern "C" fn dr_adaptive_step(
    result: *const DrAdaptive,
    index: usize,
    out: *mut DrAdaptiveStep,
) -> DrStatus {
    guard(|| {
        out_ptr!(out);
        let Some(a) = result.as_ref() else {
            return fail(DrStatus::NullPointer, "adaptive result is null");
        };
        let Some(step) = a.inner.steps.get(index) else {
            return fail(
                DrStatus::OutOfRange,
                format!("step {index} of {}", a.inner.steps.len()),
            );
        };
        *out = DrAdaptiveStep {
            r: step.r,
            p_final: step.p_final,
            reject: step.reject,
        };
        DrStatus::Ok
    })
}

unsafe fn write_f64(out: *mut f64, value: Result<f64, Error>) -> DrStatus {
    out_ptr!(out);
    *out = try_core!(value);
    DrStatus::Ok
}

/// `t = Φ⁻¹(1 − α/(n − r + 1))`.
#[no_mangle]
pub unsafe extern "C" fn dr_threshold_t(n: usize, r: usize, alpha: f64, out: *mut f64) -> DrStatus {
    guard(|| write_f64(out, threshold_t(n, r, alpha)))
}

/// `1 − (1 − α/m)^m`, `m = n − r + 1`; needs `2r > n + 1`.
#[no_mangle]
pub unsafe extern "C" fn dr_sup_boundary(n: usize, r: usize, alpha: f64, out: *mut f64) -> DrStatus {
    guard(|| write_f64(out, sup_boundary(n, r, alpha)))
}

/// Type I error with `r − 1` infinite positive effects; needs `2r <= n + 1`.
#[no_mangle]
pub unsafe extern "C" fn dr_c_concordant(n: usize, r: usize, alpha: f64, out: *mut f64) -> DrStatus {
    guard(|| write_f64(out, c_concordant(n, r, alpha)))
}

/// Type I error with `r − 1` infinite effects of each sign; needs `2r <= n + 1`.
#[no_mangle]
pub unsafe extern "C" fn dr_c_discordant(n: usize, r: usize, alpha: f64, out: *mut f64) -> DrStatus {
    guard(|| write_f64(out, c_discordant(n, r, alpha)))
}

unsafe fn theta_point(theta: *const f64, len: usize) -> Result<ThetaPoint, DrStatus> {
    let values = slice(theta, len)?;
    ThetaPoint::from_f64(values).map_err(from_error)
}

/// Exact rejection probability at `theta` (length `n`) when `2r > n + 1`.
#[no_mangle]
pub unsafe extern "C" fn dr_c_exact_disjoint(
    theta: *const f64,
    len: usize,
    r: usize,
    alpha: f64,
    out: *mut f64,
) -> DrStatus {
    guard(|| {
        let th = try_status!(theta_point(theta, len));
        write_f64(out, c_exact_disjoint(&th, r, alpha))
    })
}

/// `g(g(θ₁))` for three studies and `r = 2`.
#[no_mangle]
pub unsafe extern "C" fn dr_gg(theta1: f64, alpha: f64, out: *mut f64) -> DrStatus {
    guard(|| {
        let t = threshold_t(3, 2, alpha);
        write_f64(out, t.map(|t| g_fn(g_fn(theta1, t), t)))
    })
}

fn estimate(e: McEstimate) -> DrMcEstimate {
    DrMcEstimate {
        estimate: e.estimate,
        std_error: e.std_error,
        reps: e.reps,
        seed: e.seed,
    }
}

type McFn = fn(&ThetaPoint, &ReplicabilityQuery, u64, u64) -> Result<McEstimate, Error>;

unsafe fn run_mc(
    f: McFn,
    query: *const DrQuery,
    theta: *const f64,
    len: usize,
    reps: u64,
    seed: u64,
    out: *mut DrMcEstimate,
) -> DrStatus {
    out_ptr!(out);
    if query.is_null() {
        return fail(DrStatus::NullPointer, "query is null");
    }
    let th = try_status!(theta_point(theta, len));
    *out = estimate(try_core!(f(&th, &(*query).inner, reps, seed)));
    DrStatus::Ok
}

/// Monte Carlo rejection probability; reproducible from `(reps, seed)`.
#[no_mangle]
pub unsafe extern "C" fn dr_mc_type1(
    query: *const DrQuery,
    theta: *const f64,
    len: usize,
    reps: u64,
    seed: u64,
    out: *mut DrMcEstimate,
) -> DrStatus {
    guard(|| run_mc(mc_type1, query, theta, len, reps, seed, out))
}

/// Monte Carlo probability of rejecting toward the wrong sign.
#[no_mangle]
pub unsafe extern "C" fn dr_mc_type3(
    query: *const DrQuery,
    theta: *const f64,
    len: usize,
    reps: u64,
    seed: u64,
    out: *mut DrMcEstimate,
) -> DrStatus {
    guard(|| run_mc(mc_type3, query, theta, len, reps, seed, out))
}
