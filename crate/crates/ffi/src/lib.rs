//! C interface to the cavity-shortcut simulator.
//!
//! Scenarios and trajectories are opaque handles released with their
//! `_free` function. Every fallible call returns a `CsStatus`; on failure the
//! message is kept per thread and read with `cs_last_error`. Enumerations are
//! passed as `uint32_t` holding one of the `CsTask`, `CsMode` or `CsMethod`
//! values, so an out-of-range value is reported instead of being undefined.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cavity_shortcut::dynamics::{Method, Trajectory, TRACKED_STATES};
use cavity_shortcut::experiments::{
    check_closure, run_scenario, sweep_decoherence, sweep_duration, HamiltonianMode, ScenarioConfig, SweepResult,
};
use cavity_shortcut::hamiltonians::DecoherenceParams;
use cavity_shortcut::pulses::{DetuningParams, Task};
use cavity_shortcut::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The detuning ordering cannot realize the counter-diabatic coupling.
    SignMismatch = 3,
    StepFailure = 4,
    /// Norm, trace or positivity check failed after propagation.
    InvariantViolation = 5,
    NumericalFailure = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsTask {
    /// |φ₁⟩ → |φ₅⟩ with sin⁴ pulses.
    Transfer = 0,
    /// Bell state with Gaussian pulses.
    Entangle = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsMode {
    Adiabatic = 0,
    Cdd = 1,
    Aux = 2,
    AuxOnly = 3,
    Effective = 4,
    EffectiveOnly = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsMethod {
    /// Adaptive Dormand–Prince 5(4).
    Dopri = 0,
    /// Fixed-step RK4 at the step ceiling.
    Rk4 = 1,
}

/// Number of population columns in a trajectory, in the order
/// φ₁ φ₂ φ₃ φ₄ φ₅ |ef00⟩ |ff01⟩ |fe00⟩ |ff00⟩.
pub const CS_TRACKED_STATES: usize = 9;

/// Buffer size for `cs_scenario_hash`: 64 hex digits and a NUL.
pub const CS_HASH_LEN: usize = 65;

/// Opaque scenario: task, pulses, detunings, rates, truncation, integrator.
pub struct CsScenario {
    cfg: ScenarioConfig,
}

/// Opaque result of `cs_run`.
pub struct CsTrajectory {
    trajectory: Trajectory,
    fidelity: f64,
    dim: usize,
}

struct Failure {
    status: CsStatus,
    message: String,
}

impl Failure {
    fn new(status: CsStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::SignMismatch { .. } => CsStatus::SignMismatch,
            Error::StepFailure { .. } => CsStatus::StepFailure,
            Error::InvariantViolation { .. } | Error::PositivityLoss { .. } => CsStatus::InvariantViolation,
            Error::NotHermitian { .. } | Error::GaugeBreak { .. } | Error::DegenerateInput(_) => {
                CsStatus::NumericalFailure
            }
            _ => CsStatus::InvalidArgument,
        };
        Failure::new(status, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Run `f`, record any failure or panic, and turn it into a status code.
fn guard(f: impl FnOnce() -> Outcome) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("unknown panic");
            set_last_error(&format!("internal panic: {msg}"));
            CsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::new(CsStatus::NullPointer, format!("`{what}` is NULL"))
}

unsafe fn handle<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn shared<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < need {
        return Err(Failure::new(
            CsStatus::BufferTooSmall,
            format!("`{what}` holds {len} elements, {need} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

fn task_from(code: u32) -> Result<Task, Failure> {
    match code {
        c if c == CsTask::Transfer as u32 => Ok(Task::Transfer),
        c if c == CsTask::Entangle as u32 => Ok(Task::Entangle),
        _ => Err(Failure::new(CsStatus::InvalidArgument, format!("unknown task code {code}"))),
    }
}

fn mode_from(code: u32) -> Result<HamiltonianMode, Failure> {
    Ok(match code {
        c if c == CsMode::Adiabatic as u32 => HamiltonianMode::Adiabatic,
        c if c == CsMode::Cdd as u32 => HamiltonianMode::Cdd,
        c if c == CsMode::Aux as u32 => HamiltonianMode::Aux,
        c if c == CsMode::AuxOnly as u32 => HamiltonianMode::AuxOnly,
        c if c == CsMode::Effective as u32 => HamiltonianMode::Effective,
        c if c == CsMode::EffectiveOnly as u32 => HamiltonianMode::EffectiveOnly,
        _ => return Err(Failure::new(CsStatus::InvalidArgument, format!("unknown mode code {code}"))),
    })
}

/// NUL-terminated message of the last failure on this thread, or NULL.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New scenario with the defaults for `task` (a `CsTask` value): mode aux,
/// no decoherence, detunings (6, 7). Returns NULL for an unknown task.
#[no_mangle]
pub extern "C" fn cs_scenario_new(task: u32) -> *mut CsScenario {
    let mut out = ptr::null_mut();
    guard(|| {
        let cfg = ScenarioConfig::for_task(task_from(task)?);
        out = Box::into_raw(Box::new(CsScenario { cfg }));
        Ok(())
    });
    out
}

/// # Safety
/// `s` must be NULL or a handle from `cs_scenario_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_free(s: *mut CsScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_set_mode(s: *mut CsScenario, mode: u32) -> CsStatus {
    guard(|| {
        handle(s, "scenario")?.cfg.mode = mode_from(mode)?;
        Ok(())
    })
}

/// Peak drive Ω₀ (Ω₀′ for entanglement) and operation time T, in units of g.
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_set_pulses(s: *mut CsScenario, omega0: f64, big_t: f64) -> CsStatus {
    guard(|| {
        let sc = handle(s, "scenario")?;
        let cfg = ScenarioConfig {
            omega0,
            big_t,
            ..sc.cfg.clone()
        };
        cfg.pulses()?;
        sc.cfg = cfg;
        Ok(())
    })
}

/// Pulse delay as a fraction of T (transfer only).
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_set_tau_frac(s: *mut CsScenario, tau_frac: f64) -> CsStatus {
    guard(|| {
        let sc = handle(s, "scenario")?;
        let cfg = ScenarioConfig {
            tau_frac,
            ..sc.cfg.clone()
        };
        cfg.pulses()?;
        sc.cfg = cfg;
        Ok(())
    })
}

/// Gaussian centre offset θ and width w, as fractions of T (entanglement only).
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_set_gaussian(s: *mut CsScenario, theta: f64, w: f64) -> CsStatus {
    guard(|| {
        let sc = handle(s, "scenario")?;
        let cfg = ScenarioConfig {
            theta,
            w,
            ..sc.cfg.clone()
        };
        cfg.pulses()?;
        sc.cfg = cfg;
        Ok(())
    })
}

/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_set_detunings(s: *mut CsScenario, delta1: f64, delta2: f64) -> CsStatus {
    guard(|| {
        handle(s, "scenario")?.cfg.detuning = DetuningParams::new(delta1, delta2)?;
        Ok(())
    })
}

/// Atomic decay Γ and cavity loss κ; both zero selects unitary evolution.
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_set_decoherence(s: *mut CsScenario, gamma: f64, kappa: f64) -> CsStatus {
    guard(|| {
        handle(s, "scenario")?.cfg.decoherence = DecoherenceParams::new(kappa, gamma)?;
        Ok(())
    })
}

/// Photon cutoffs of modes a and b.
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_set_truncation(s: *mut CsScenario, n_max_a: usize, n_max_b: usize) -> CsStatus {
    guard(|| {
        let sc = handle(s, "scenario")?;
        if n_max_a == 0 || n_max_a > 8 || n_max_b > 8 {
            return Err(Failure::new(
                CsStatus::InvalidArgument,
                format!("truncation ({n_max_a}, {n_max_b}) outside 1..=8 for a, 0..=8 for b"),
            ));
        }
        sc.cfg.n_max_a = n_max_a;
        sc.cfg.n_max_b = n_max_b;
        Ok(())
    })
}

/// Integrator (`CsMethod` value), output samples (rows = samples + 1) and
/// tolerance.
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_set_integrator(
    s: *mut CsScenario,
    method: u32,
    samples: usize,
    tol: f64,
) -> CsStatus {
    guard(|| {
        let sc = handle(s, "scenario")?;
        let mut integ = sc.cfg.integrator;
        integ.method = match method {
            c if c == CsMethod::Dopri as u32 => Method::DormandPrince,
            c if c == CsMethod::Rk4 as u32 => Method::Rk4,
            _ => return Err(Failure::new(CsStatus::InvalidArgument, format!("unknown method code {method}"))),
        };
        integ.samples = samples;
        integ.tol = tol;
        integ.validate()?;
        sc.cfg.integrator = integ;
        Ok(())
    })
}

/// Check the whole configuration without running it.
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_validate(s: *const CsScenario) -> CsStatus {
    guard(|| {
        shared(s, "scenario")?.cfg.validate()?;
        Ok(())
    })
}

/// SHA-256 of the resolved configuration as 64 hex digits plus NUL.
///
/// # Safety
/// `s` must be a live scenario handle; `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_hash(s: *const CsScenario, buf: *mut c_char, len: usize) -> CsStatus {
    guard(|| {
        let hash = shared(s, "scenario")?.cfg.hash();
        let out = output(buf.cast::<u8>(), len, CS_HASH_LEN, "buf")?;
        out[..64].copy_from_slice(hash.as_bytes());
        out[64] = 0;
        Ok(())
    })
}

/// Propagate the scenario from |φ₁⟩. Writes the final fidelity to
/// `fidelity` (may be NULL) and, if `trajectory` is non-NULL, a new
/// trajectory handle that the caller frees with `cs_trajectory_free`.
///
/// # Safety
/// `s` must be a live scenario handle; `fidelity` and `trajectory` must be
/// NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cs_run(s: *const CsScenario, fidelity: *mut f64, trajectory: *mut *mut CsTrajectory) -> CsStatus {
    if !trajectory.is_null() {
        *trajectory = ptr::null_mut();
    }
    guard(|| {
        let sc = shared(s, "scenario")?;
        let r = run_scenario(&sc.cfg)?;
        if !fidelity.is_null() {
            *fidelity = r.final_fidelity;
        }
        if !trajectory.is_null() {
            *trajectory = Box::into_raw(Box::new(CsTrajectory {
                trajectory: r.trajectory,
                fidelity: r.final_fidelity,
                dim: r.dim,
            }));
        }
        Ok(())
    })
}

/// # Safety
/// `t` must be NULL or a handle from `cs_run` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_free(t: *mut CsTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of samples (rows); 0 for NULL.
///
/// # Safety
/// `t` must be NULL or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_len(t: *const CsTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.trajectory.len())
}

/// Dimension of the space that was integrated; 0 for NULL.
///
/// # Safety
/// `t` must be NULL or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_dim(t: *const CsTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.dim)
}

/// Final fidelity; NaN for NULL.
///
/// # Safety
/// `t` must be NULL or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_fidelity(t: *const CsTrajectory) -> f64 {
    t.as_ref().map_or(f64::NAN, |t| t.fidelity)
}

/// Copy the sample times into `buf` (at least `cs_trajectory_len` elements).
///
/// # Safety
/// `t` must be a live trajectory handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_times(t: *const CsTrajectory, buf: *mut f64, len: usize) -> CsStatus {
    guard(|| {
        let t = shared(t, "trajectory")?;
        output(buf, len, t.trajectory.len(), "buf")?.copy_from_slice(&t.trajectory.times);
        Ok(())
    })
}

/// Copy the population of tracked state `state` (0 ≤ state < 9, see
/// `CS_TRACKED_STATES`) at every sample into `buf`.
///
/// # Safety
/// `t` must be a live trajectory handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_population(
    t: *const CsTrajectory,
    state: usize,
    buf: *mut f64,
    len: usize,
) -> CsStatus {
    guard(|| {
        let t = shared(t, "trajectory")?;
        if state >= TRACKED_STATES.len() {
            return Err(Failure::new(
                CsStatus::InvalidArgument,
                format!("state index {state} must be below {}", TRACKED_STATES.len()),
            ));
        }
        let out = output(buf, len, t.trajectory.len(), "buf")?;
        for (o, p) in out.iter_mut().zip(&t.trajectory.populations) {
            *o = p[state];
        }
        Ok(())
    })
}

/// Copy the norm (unitary runs) or trace (open runs) at every sample.
///
/// # Safety
/// `t` must be a live trajectory handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cs_trajectory_trace(t: *const CsTrajectory, buf: *mut f64, len: usize) -> CsStatus {
    guard(|| {
        let t = shared(t, "trajectory")?;
        output(buf, len, t.trajectory.len(), "buf")?.copy_from_slice(&t.trajectory.norm);
        Ok(())
    })
}

fn fill_sweep(s: &SweepResult, out: &mut [f64], failures: *mut usize) {
    let mut failed = 0;
    for (o, f) in out.iter_mut().zip(&s.fidelity) {
        *o = match f {
            Ok(v) => *v,
            Err(e) => {
                set_last_error(e);
                failed += 1;
                f64::NAN
            }
        };
    }
    if !failures.is_null() {
        // SAFETY: caller guarantees a non-NULL `failures` is writable.
        unsafe { *failures = failed };
    }
}

/// Final fidelity for every (mode, T) pair, mode-major: `out[m * n_t + k]`.
/// `modes` holds `CsMode` values. Failed points are NaN and counted in
/// `failures` (may be NULL); the message of the last one is kept.
///
/// # Safety
/// `s` must be a live scenario handle; the arrays must hold the stated
/// number of elements; `failures` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_sweep_duration(
    s: *const CsScenario,
    modes: *const u32,
    n_modes: usize,
    t_values: *const f64,
    n_t: usize,
    jobs: usize,
    out: *mut f64,
    out_len: usize,
    failures: *mut usize,
) -> CsStatus {
    guard(|| {
        let sc = shared(s, "scenario")?;
        let modes = input(modes, n_modes, "modes")?
            .iter()
            .map(|&m| mode_from(m))
            .collect::<Result<Vec<_>, _>>()?;
        let t_values = input(t_values, n_t, "t_values")?;
        let out = output(out, out_len, n_modes * n_t, "out")?;
        let r = sweep_duration(&sc.cfg, &modes, t_values, jobs)?;
        fill_sweep(&r, out, failures);
        Ok(())
    })
}

/// Final fidelity on the Γ × κ grid, Γ-major: `out[i * n_kappa + j]`.
/// Failed points are NaN and counted in `failures` (may be NULL).
///
/// # Safety
/// `s` must be a live scenario handle; the arrays must hold the stated
/// number of elements; `failures` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_sweep_decoherence(
    s: *const CsScenario,
    gammas: *const f64,
    n_gamma: usize,
    kappas: *const f64,
    n_kappa: usize,
    jobs: usize,
    out: *mut f64,
    out_len: usize,
    failures: *mut usize,
) -> CsStatus {
    guard(|| {
        let sc = shared(s, "scenario")?;
        let gammas = input(gammas, n_gamma, "gammas")?;
        let kappas = input(kappas, n_kappa, "kappas")?;
        let out = output(out, out_len, n_gamma * n_kappa, "out")?;
        let r = sweep_decoherence(&sc.cfg, gammas, kappas, jobs)?;
        fill_sweep(&r, out, failures);
        Ok(())
    })
}

/// Sizes of the sets reachable from |φ₁⟩ under H₀, H₀ + H̃, and with the
/// jump operators added, written to `sizes[0..3]`.
///
/// # Safety
/// `s` must be a live scenario handle; `sizes` must hold 3 elements.
#[no_mangle]
pub unsafe extern "C" fn cs_check_closure(s: *const CsScenario, sizes: *mut usize) -> CsStatus {
    guard(|| {
        let sc = shared(s, "scenario")?;
        let out = output(sizes, 3, 3, "sizes")?;
        let (a, b, c) = check_closure(&sc.cfg)?.sizes();
        out.copy_from_slice(&[a, b, c]);
        Ok(())
    })
}
