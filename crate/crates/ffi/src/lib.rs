//! C ABI over banditlab. Every call returns a [`BlStatus`]; on failure the
//! message is kept per thread and read back with [`bl_last_error`].
//! Handles are opaque and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use banditlab::al_abstain::{epoch_al_run, AlInstance};
use banditlab::benchmark::{chow_excess, AlPool};
use banditlab::harness::{reflection_class, run_experiment, ExperimentConfig};
use banditlab::pe_select::{adaptive_fb_run, adaptive_fc_run, hard_instance, rho_star, FcConfig, FcMode};
use banditlab::spanner::{barycentric_spanner, Exhaustive};
use banditlab::{seeded, Error, Instance, Noise};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Singular = 4,
    Unsupported = 5,
    Infeasible = 6,
    Parse = 7,
    Numerical = 8,
    Io = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Linear bandit instance.
pub struct BlInstance(Instance);

/// Seeded random stream.
pub struct BlRng(banditlab::Rng);

/// Active learning pool with its regression class.
pub struct BlAlPool(AlInstance);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BlStatus {
    match e {
        Error::InvalidArgument(_) => BlStatus::InvalidArgument,
        Error::OutOfRange { .. } => BlStatus::OutOfRange,
        Error::Singular(_) => BlStatus::Singular,
        Error::Unsupported(_) => BlStatus::Unsupported,
        Error::Infeasible { .. } => BlStatus::Infeasible,
        Error::Parse { .. } => BlStatus::Parse,
        Error::Numerical(_) => BlStatus::Numerical,
        Error::Io(_) => BlStatus::Io,
    }
}

fn fail(status: BlStatus, msg: &str) -> BlStatus {
    set_error(msg);
    status
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), BlStatus>) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BlStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(BlStatus::Panic, "panic inside banditlab"),
    }
}

fn lift<T>(r: banditlab::Result<T>) -> Result<T, BlStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, BlStatus> {
    if p.is_null() {
        return Err(fail(BlStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(BlStatus::InvalidArgument, "string is not UTF-8"))
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, BlStatus> {
    p.as_ref().ok_or_else(|| fail(BlStatus::NullPointer, "null handle"))
}

unsafe fn get_mut<'a, T>(p: *mut T) -> Result<&'a mut T, BlStatus> {
    p.as_mut().ok_or_else(|| fail(BlStatus::NullPointer, "null handle"))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), BlStatus> {
    if out.is_null() {
        return Err(fail(BlStatus::NullPointer, "null output pointer"));
    }
    out.write(v);
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bl_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_rng_new(seed: u64, out: *mut *mut BlRng) -> BlStatus {
    guard(|| put(out, Box::into_raw(Box::new(BlRng(seeded(seed))))))
}

/// # Safety
/// `rng` must come from [`bl_rng_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_rng_free(rng: *mut BlRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// Parses the instance text format.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_instance_parse(src: *const c_char, out: *mut *mut BlInstance) -> BlStatus {
    guard(|| {
        let inst = lift(Instance::parse(text(src)?))?;
        put(out, Box::into_raw(Box::new(BlInstance(inst))))
    })
}

/// Hard pure-exploration instance in dimension `dstar + 1`; `sigma` is the
/// Gaussian noise level.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_instance_hard(dstar: usize, epsilon: f64, sigma: f64, out: *mut *mut BlInstance) -> BlStatus {
    guard(|| {
        let inst = lift(hard_instance(dstar, epsilon, Noise::Gaussian { sigma }))?;
        put(out, Box::into_raw(Box::new(BlInstance(inst))))
    })
}

/// # Safety
/// `inst` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_instance_free(inst: *mut BlInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Dimension, action count and best target index.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_instance_shape(
    inst: *const BlInstance,
    dim: *mut usize,
    num_actions: *mut usize,
    best_target: *mut usize,
) -> BlStatus {
    guard(|| {
        let i = &get(inst)?.0;
        put(dim, i.dim())?;
        put(num_actions, i.num_actions())?;
        put(best_target, i.best_target())
    })
}

/// Pure-exploration complexity of the instance truncated to `d` coordinates.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_rho_star(inst: *const BlInstance, d: usize, epsilon: f64, out: *mut f64) -> BlStatus {
    guard(|| {
        let v = lift(rho_star(&get(inst)?.0, d, epsilon))?;
        put(out, v)
    })
}

/// Barycentric spanner of the actions. Writes up to `cap` member indices to
/// `members` and the spanner size to `len`; fails with `BufferTooSmall` if
/// `cap` is below the size.
///
/// # Safety
/// `members` must be valid for `cap` writes; the other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_spanner(
    inst: *const BlInstance,
    c: f64,
    members: *mut usize,
    cap: usize,
    len: *mut usize,
) -> BlStatus {
    guard(|| {
        let i = &get(inst)?.0;
        let s = lift(barycentric_spanner(&Exhaustive::new(i.actions()), c))?;
        put(len, s.members.len())?;
        if s.members.len() > cap {
            return Err(fail(BlStatus::BufferTooSmall, "member buffer too small"));
        }
        if members.is_null() {
            return Err(fail(BlStatus::NullPointer, "null member buffer"));
        }
        ptr::copy_nonoverlapping(s.members.as_ptr(), members, s.members.len());
        Ok(())
    })
}

/// Fixed-confidence identification with unknown intrinsic dimension. Writes the
/// final recommendation and the samples used; `tau` receives the samples after
/// which the recommendation stayed at the best target, or `UINT64_MAX`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_adaptive_fc(
    inst: *const BlInstance,
    delta: f64,
    robust: bool,
    cap: u64,
    rng: *mut BlRng,
    arm: *mut usize,
    samples: *mut u64,
    tau: *mut u64,
) -> BlStatus {
    guard(|| {
        let i = &get(inst)?.0;
        let r = &mut get_mut(rng)?.0;
        let mut cfg = FcConfig::new(delta, if robust { FcMode::Robust } else { FcMode::Exact });
        cfg.cap = cap;
        let t = lift(adaptive_fc_run(i, &cfg, r))?;
        put(arm, t.current().unwrap_or(usize::MAX))?;
        put(samples, t.samples)?;
        put(tau, t.tau(i.best_target()).unwrap_or(u64::MAX))
    })
}

/// Fixed-budget identification with `total` samples.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_adaptive_fb(inst: *const BlInstance, total: u64, rng: *mut BlRng, arm: *mut usize) -> BlStatus {
    guard(|| {
        let i = &get(inst)?.0;
        let t = lift(adaptive_fb_run(i, total, &mut get_mut(rng)?.0))?;
        put(arm, t.arm)
    })
}

/// Parses a pool of `weight eta` lines; the class is η and its single-point reflections.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_al_pool_parse(src: *const c_char, out: *mut *mut BlAlPool) -> BlStatus {
    guard(|| {
        let pool = lift(AlPool::parse(text(src)?))?;
        let inst = lift(reflection_class(&pool))?;
        put(out, Box::into_raw(Box::new(BlAlPool(inst))))
    })
}

/// # Safety
/// `pool` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_al_pool_free(pool: *mut BlAlPool) {
    if !pool.is_null() {
        drop(Box::from_raw(pool));
    }
}

/// Epoch active learner with abstention; writes the label count and the
/// exact Chow excess of the returned classifier.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_epoch_al(
    pool: *const BlAlPool,
    epsilon: f64,
    gamma: f64,
    delta: f64,
    rng: *mut BlRng,
    labels: *mut u64,
    excess: *mut f64,
) -> BlStatus {
    guard(|| {
        let p = &get(pool)?.0;
        let o = lift(epoch_al_run(p, epsilon, gamma, delta, &mut get_mut(rng)?.0))?;
        put(labels, o.labels)?;
        put(excess, lift(chow_excess(&o.classifier, &p.pool, gamma))?)
    })
}

/// Runs an experiment from `key = value` config text and returns the CSV.
/// Release the string with [`bl_string_free`].
///
/// # Safety
/// `config` must be a NUL-terminated string and `csv` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_run_experiment(config: *const c_char, csv: *mut *mut c_char) -> BlStatus {
    guard(|| {
        let cfg = lift(ExperimentConfig::parse(text(config)?))?;
        let out = lift(lift(run_experiment(&cfg))?.to_csv())?;
        let c = CString::new(out).map_err(|_| fail(BlStatus::InvalidArgument, "NUL in output"))?;
        put(csv, c.into_raw())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
