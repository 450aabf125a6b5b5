//! C ABI over `lefrac`.
//!
//! Every function returns a [`LefracStatus`]; results go through out
//! pointers. On failure a message is available from [`lefrac_last_error`]
//! on the same thread. Strings returned to the caller are released with
//! [`lefrac_string_free`]; simulations with [`lefrac_sim_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lefrac::io::{analyze, RunConfig};
use lefrac::solver::Simulation;
use lefrac::stability::{critical_order, turing_band};
use lefrac::{
    caputo_l1, equilibrium, gamma, jacobian_summary, l1_weights, Error, FractionalOrder, ScalarHistory, SystemParams,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LefracStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside the domain of the operation, or a usage error.
    InvalidArgument = 2,
    /// Malformed or invalid configuration JSON.
    InvalidConfig = 3,
    NonFinite = 4,
    SolverDiverged = 5,
    BufferTooSmall = 6,
    /// A panic or failed self-check inside the library.
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LefracParams {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub d1: f64,
    pub d2: f64,
    /// Fractional order in (0, 1].
    pub delta: f64,
}

/// Jacobian `[[f0, f1], [sigma*g0, sigma*g1]]` at the equilibrium.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LefracJacobian {
    pub f0: f64,
    pub f1: f64,
    pub g0: f64,
    pub g1: f64,
    pub trace: f64,
    pub det: f64,
}

/// Opaque simulation handle.
pub struct LefracSim {
    inner: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LefracStatus {
    match e {
        Error::Domain(_) | Error::Usage(_) => LefracStatus::InvalidArgument,
        Error::Config { .. } | Error::Json(_) | Error::Io { .. } => LefracStatus::InvalidConfig,
        Error::NonFinite { .. } => LefracStatus::NonFinite,
        Error::SolverDiverged { .. } => LefracStatus::SolverDiverged,
        _ => LefracStatus::Internal,
    }
}

enum Failure {
    Lib(Error),
    Status(LefracStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null() -> Failure {
    Failure::Status(LefracStatus::NullPointer, "null pointer argument".into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LefracStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LefracStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_last_error(msg);
            s
        }
        Err(_) => {
            set_last_error("internal panic".into());
            LefracStatus::Internal
        }
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn params(p: *const LefracParams) -> Result<SystemParams, Failure> {
    let p = p.as_ref().ok_or_else(null)?;
    SystemParams::new(p.a, p.b, p.sigma, p.d1, p.d2, p.delta)
        .map_err(|e| Failure::Status(LefracStatus::InvalidArgument, e.to_string()))
}

unsafe fn json_arg(s: *const c_char) -> Result<RunConfig, Failure> {
    if s.is_null() {
        return Err(null());
    }
    let text = CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure::Status(LefracStatus::InvalidConfig, "config is not valid UTF-8".into()))?;
    Ok(RunConfig::from_json(text)?)
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn lefrac_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lefrac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lefrac_gamma(x: f64, result: *mut f64) -> LefracStatus {
    guard(|| {
        *out(result)? = gamma(x)?;
        Ok(())
    })
}

/// L1 approximation of the Caputo derivative of order `delta` at the last of
/// `n` samples spaced `dt` apart.
///
/// # Safety
/// `samples` must point to `n` readable values; `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lefrac_caputo_l1(
    samples: *const f64,
    n: usize,
    dt: f64,
    delta: f64,
    result: *mut f64,
) -> LefracStatus {
    guard(|| {
        if samples.is_null() {
            return Err(null());
        }
        let values = std::slice::from_raw_parts(samples, n).to_vec();
        let h = ScalarHistory::new(values, dt)?;
        let w = l1_weights(FractionalOrder::new(delta)?, dt, n)?;
        *out(result)? = caputo_l1(&h, &w)?;
        Ok(())
    })
}

/// # Safety
/// `p` must be readable; `u` and `v` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lefrac_equilibrium(p: *const LefracParams, u: *mut f64, v: *mut f64) -> LefracStatus {
    guard(|| {
        let eq = equilibrium(&params(p)?);
        *out(u)? = eq.u_star;
        *out(v)? = eq.v_star;
        Ok(())
    })
}

/// # Safety
/// `p` must be readable; `result` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lefrac_jacobian(p: *const LefracParams, result: *mut LefracJacobian) -> LefracStatus {
    guard(|| {
        let j = jacobian_summary(&params(p)?);
        *out(result)? = LefracJacobian {
            f0: j.F0,
            f1: j.F1,
            g0: j.G0,
            g1: j.G1,
            trace: j.trace,
            det: j.det,
        };
        Ok(())
    })
}

/// Order at which the kinetic equilibrium changes stability. `*exists` is
/// false when it is stable for every order, and `*order` is then untouched.
///
/// # Safety
/// `p` must be readable; `order` and `exists` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lefrac_critical_order(
    p: *const LefracParams,
    order: *mut f64,
    exists: *mut bool,
) -> LefracStatus {
    guard(|| {
        let c = critical_order(&params(p)?);
        *out(exists)? = c.is_some();
        if let Some(c) = c {
            *out(order)? = c;
        }
        Ok(())
    })
}

/// Laplacian eigenvalue interval on which diffusion destabilizes the
/// equilibrium. `*exists` is false when there is none.
///
/// # Safety
/// `p` must be readable; `lo`, `hi` and `exists` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lefrac_turing_band(
    p: *const LefracParams,
    lo: *mut f64,
    hi: *mut f64,
    exists: *mut bool,
) -> LefracStatus {
    guard(|| {
        let band = turing_band(&params(p)?);
        *out(exists)? = band.is_some();
        if let Some((l, h)) = band {
            *out(lo)? = l;
            *out(hi)? = h;
        }
        Ok(())
    })
}

/// Stability report for a JSON run configuration, as a JSON string that the
/// caller frees with `lefrac_string_free`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `report_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lefrac_analyze_json(
    config_json: *const c_char,
    report_json: *mut *mut c_char,
) -> LefracStatus {
    guard(|| {
        let cfg = json_arg(config_json)?;
        let slot = out(report_json)?;
        let text = serde_json::to_string(&analyze(&cfg)?).map_err(Error::from)?;
        *slot = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Builds a simulation from a JSON run configuration. `seed` overrides the
/// configured seed when not NULL.
///
/// # Safety
/// `config_json` must be a NUL-terminated string, `seed` NULL or readable,
/// `sim` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lefrac_sim_new(
    config_json: *const c_char,
    seed: *const u64,
    sim: *mut *mut LefracSim,
) -> LefracStatus {
    guard(|| {
        let cfg = json_arg(config_json)?;
        let slot = out(sim)?;
        let sc = cfg.sim_config(seed.as_ref().copied())?;
        let inner = Simulation::from_config(&sc)?;
        *slot = Box::into_raw(Box::new(LefracSim { inner }));
        Ok(())
    })
}

/// Advances `steps` time steps.
///
/// # Safety
/// `sim` must come from `lefrac_sim_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lefrac_sim_step(sim: *mut LefracSim, steps: usize) -> LefracStatus {
    guard(|| {
        let s = out(sim)?;
        for _ in 0..steps {
            s.inner.advance()?;
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle; `t`, `steps` and `nodes` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lefrac_sim_info(
    sim: *const LefracSim,
    t: *mut f64,
    steps: *mut usize,
    nodes: *mut usize,
) -> LefracStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(null)?;
        *out(t)? = s.inner.state().t;
        *out(steps)? = s.inner.steps_completed();
        *out(nodes)? = s.inner.grid().node_count();
        Ok(())
    })
}

/// Copies the current fields (row-major, x fastest) into `u` and `v`, each of
/// capacity `len`.
///
/// # Safety
/// `sim` must be a live handle; `u` and `v` must each have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn lefrac_sim_copy_fields(
    sim: *const LefracSim,
    u: *mut f64,
    v: *mut f64,
    len: usize,
) -> LefracStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(null)?;
        if u.is_null() || v.is_null() {
            return Err(null());
        }
        let state = s.inner.state();
        let n = state.u.len();
        if len < n {
            return Err(Failure::Status(
                LefracStatus::BufferTooSmall,
                format!("need {n} values, buffer holds {len}"),
            ));
        }
        ptr::copy_nonoverlapping(state.u.as_ptr(), u, n);
        ptr::copy_nonoverlapping(state.v.as_ptr(), v, n);
        Ok(())
    })
}

/// Releases a simulation. NULL is ignored.
///
/// # Safety
/// `sim` must come from `lefrac_sim_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lefrac_sim_free(sim: *mut LefracSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
