//! C ABI over `gavc-core`.
//!
//! Every function returns a [`GavcStatus`] and writes results through out
//! pointers. On failure the message is kept per thread and read back with
//! [`gavc_last_error`]. Panics never cross the boundary; they surface as
//! `GAVC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gavc_core::channel::{Codebook, RotationKeySet, ScalarAvcSpec};
use gavc_core::dpc_opt::{optimize_dpc, DpcStatus};
use gavc_core::mimo::{maxmin_solver_general, MimoSpec};
use gavc_core::rates::{deterministic_capacity, randomized_capacity, DpcSpec};
use gavc_core::sim::{adversarial_direction, run_trials, seeded_code, JammerStrategy, MessageSelection, TrialConfig};
use gavc_core::GavcError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GavcStatus {
    Ok = 0,
    InvalidParameter = 1,
    Infeasible = 2,
    Degenerate = 3,
    Numeric = 4,
    InvalidSchedule = 5,
    DimensionMismatch = 6,
    NullPointer = 7,
    Panic = 8,
}

impl From<&GavcError> for GavcStatus {
    fn from(e: &GavcError) -> Self {
        match e {
            GavcError::InvalidParameter { .. } => GavcStatus::InvalidParameter,
            GavcError::Infeasible(_) => GavcStatus::Infeasible,
            GavcError::Degenerate(_) => GavcStatus::Degenerate,
            GavcError::Numeric(_) => GavcStatus::Numeric,
            GavcError::InvalidSchedule(_) => GavcStatus::InvalidSchedule,
            GavcError::DimensionMismatch { .. } => GavcStatus::DimensionMismatch,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GavcJammer {
    None = 0,
    Gaussian = 1,
    Sphere = 2,
    Symmetrize = 3,
    Orthogonal = 4,
    /// Full-power push of the target message toward its nearest neighbour.
    Fixed = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GavcDpcResult {
    /// 1 if some design point clears the jammer.
    pub feasible: i32,
    pub rate_bits: f64,
    pub alpha: f64,
    pub rho: f64,
    pub margin: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GavcTrialResult {
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Opaque randomized code: a seeded codebook and its rotation keys.
pub struct GavcSimulator {
    codebook: Codebook,
    keys: RotationKeySet,
    gamma: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Core(GavcError),
}

impl From<GavcError> for Failure {
    fn from(e: GavcError) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GavcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GavcStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            GavcStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            GavcStatus::from(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            GavcStatus::Panic
        }
    }
}

fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or(Failure::Null(name))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn gavc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gavc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Randomized-code capacity in bits per symbol.
///
/// # Safety
/// `out_bits` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn gavc_randomized_capacity(
    gamma: f64,
    lambda: f64,
    sigma_w2: f64,
    out_bits: *mut f64,
) -> GavcStatus {
    guard(|| {
        let o = out(out_bits, "out_bits")?;
        *o = randomized_capacity(&ScalarAvcSpec::new(gamma, lambda, sigma_w2)?)?;
        Ok(())
    })
}

/// Deterministic-code capacity in bits per symbol.
///
/// # Safety
/// `out_bits` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn gavc_deterministic_capacity(
    gamma: f64,
    lambda: f64,
    sigma_w2: f64,
    out_bits: *mut f64,
) -> GavcStatus {
    guard(|| {
        let o = out(out_bits, "out_bits")?;
        *o = deterministic_capacity(&ScalarAvcSpec::new(gamma, lambda, sigma_w2)?)?;
        Ok(())
    })
}

/// Best dirty-paper rate over `(alpha, rho)`. An infeasible instance is not
/// an error: `feasible` is 0 and the rate is 0.
///
/// # Safety
/// `out_result` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn gavc_dpc_optimize(
    gamma: f64,
    lambda: f64,
    sigma_w2: f64,
    sigma_t2: f64,
    grid_step: f64,
    refine_tol: f64,
    out_result: *mut GavcDpcResult,
) -> GavcStatus {
    guard(|| {
        let o = out(out_result, "out_result")?;
        let spec = DpcSpec::new(gamma, lambda, sigma_w2, sigma_t2)?;
        let r = optimize_dpc(&spec, grid_step, refine_tol)?;
        let (alpha, rho) = r.best_params.map_or((f64::NAN, f64::NAN), |p| (p.alpha, p.rho));
        *o = GavcDpcResult {
            feasible: i32::from(r.status == DpcStatus::Feasible),
            rate_bits: r.best_rate,
            alpha,
            rho,
            margin: r.feasibility_margin,
        };
        Ok(())
    })
}

/// Max-min MIMO rate for diagonal noise `nu[0..m]`. The transmitter's power
/// split is written to `out_powers[0..m]` when that pointer is non-null.
///
/// # Safety
/// `nu` must point to `m` readable doubles, `out_powers` to `m` writable
/// doubles or be null.
#[no_mangle]
pub unsafe extern "C" fn gavc_mimo_maxmin(
    nu: *const f64,
    m: usize,
    gamma: f64,
    lambda: f64,
    tol: f64,
    out_rate_bits: *mut f64,
    out_powers: *mut f64,
) -> GavcStatus {
    guard(|| {
        if nu.is_null() {
            return Err(Failure::Null("nu"));
        }
        let o = out(out_rate_bits, "out_rate_bits")?;
        // SAFETY: checked non-null; the caller guarantees `m` elements.
        let nu = unsafe { std::slice::from_raw_parts(nu, m) }.to_vec();
        let sol = maxmin_solver_general(&MimoSpec::new(nu, gamma, lambda)?, tol)?;
        if !sol.converged {
            return Err(GavcError::Numeric("max-min solver did not converge".into()).into());
        }
        *o = sol.rate;
        if !out_powers.is_null() {
            // SAFETY: non-null; the caller guarantees `m` writable elements.
            unsafe { std::slice::from_raw_parts_mut(out_powers, m) }.copy_from_slice(&sol.allocation.powers);
        }
        Ok(())
    })
}

/// Draws a codebook of `codewords` points on the `sqrt(n gamma)` sphere and
/// `keys` rotations, all from `seed`. Free with `gavc_simulator_free`.
///
/// # Safety
/// `out_sim` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn gavc_simulator_new(
    n: usize,
    codewords: usize,
    keys: usize,
    gamma: f64,
    seed: u64,
    out_sim: *mut *mut GavcSimulator,
) -> GavcStatus {
    guard(|| {
        let o = out(out_sim, "out_sim")?;
        let (codebook, keys) = seeded_code(n, codewords, keys, gamma, seed)?;
        *o = Box::into_raw(Box::new(GavcSimulator { codebook, keys, gamma }));
        Ok(())
    })
}

/// Runs `trials` transmissions of uniformly drawn messages, or of message
/// `target` only when the jammer is `GAVC_JAMMER_FIXED`.
///
/// # Safety
/// `sim` must come from `gavc_simulator_new` and not be freed;
/// `out_result` must be null or point to writable memory.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn gavc_simulator_run(
    sim: *const GavcSimulator,
    jammer: GavcJammer,
    lambda: f64,
    sigma_w2: f64,
    target: usize,
    trials: u64,
    seed: u64,
    out_result: *mut GavcTrialResult,
) -> GavcStatus {
    guard(|| {
        // SAFETY: the caller passes null or a live handle.
        let sim = unsafe { sim.as_ref() }.ok_or(Failure::Null("sim"))?;
        let o = out(out_result, "out_result")?;
        let spec = ScalarAvcSpec::new(sim.gamma, lambda, sigma_w2)?;
        let mut cfg = TrialConfig::new(trials, seed);
        let strategy = match jammer {
            GavcJammer::None => JammerStrategy::None,
            GavcJammer::Gaussian => JammerStrategy::GaussianNoise { lambda },
            GavcJammer::Sphere => JammerStrategy::SphereUniform { lambda },
            GavcJammer::Symmetrize => JammerStrategy::SymmetrizeCodeword { lambda },
            GavcJammer::Orthogonal => JammerStrategy::OrthogonalNoise { lambda },
            GavcJammer::Fixed => {
                cfg = cfg.messages(MessageSelection::Explicit(vec![target]));
                JammerStrategy::FixedVector {
                    s: adversarial_direction(&sim.codebook, target, lambda)?,
                }
            }
        };
        let r = run_trials(&sim.codebook, &sim.keys, &spec, &strategy, &cfg)?;
        *o = GavcTrialResult {
            trials: r.average.trials,
            errors: r.average.errors,
            error_rate: r.average.rate_hat,
            ci_low: r.average.ci95.0,
            ci_high: r.average.ci95.1,
        };
        Ok(())
    })
}

/// Number of codewords in the simulator's codebook; 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gavc_simulator_codebook_size(sim: *const GavcSimulator) -> usize {
    // SAFETY: the caller passes null or a live handle.
    unsafe { sim.as_ref() }.map_or(0, |s| s.codebook.len())
}

/// Releases a simulator. Null is a no-op.
///
/// # Safety
/// `sim` must be null or a handle from `gavc_simulator_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gavc_simulator_free(sim: *mut GavcSimulator) {
    if !sim.is_null() {
        // SAFETY: the handle was produced by Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(sim) });
    }
}
