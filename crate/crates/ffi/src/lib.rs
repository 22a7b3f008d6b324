//! C ABI for the `pitune` library.
//!
//! Plants and step responses cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns a [`PituneStatus`] and writes its result through an out-pointer;
//! a human-readable description of the most recent failure on the calling
//! thread is available from [`pitune_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pitune::freqdomain::robustness_report;
use pitune::loop_analysis::{analyze_closed_loop, closed_loop};
use pitune::timedomain::{analytic_step_tuned, default_horizon, settling_constant, simulate_step, step_metrics};
use pitune::{damping_params, tune_pi, Error, PiController, Plant, StepResponse};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PituneStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A numeric argument was out of range (non-positive, non-finite, bad range).
    InvalidArgument = 2,
    /// The controller integral time does not cancel the slow plant pole.
    CancellationRequired = 3,
    /// The step response did not settle within the simulated horizon.
    NotSettled = 4,
    /// The closed loop is unstable.
    Unstable = 5,
    /// A caller-supplied buffer is too small; the required length was written.
    BufferTooSmall = 6,
    /// Any other numerical failure (root finding, crossover search, ...).
    Numerical = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

/// PI controller `C(s) = k (1 + 1/(ti s))`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PituneController {
    pub k: f64,
    pub ti: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PituneComplex {
    pub re: f64,
    pub im: f64,
}

/// Closed-loop poles (descending real part) and cancellation diagnostics.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PituneLoopReport {
    pub poles: [PituneComplex; 3],
    pub cancellation_detected: bool,
    pub vieta_residuals: [f64; 3],
}

/// Frequency-domain robustness: peak sensitivities, phase margin in degrees
/// and gain crossover frequency in rad/s.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PituneFreqMetrics {
    pub ms: f64,
    pub mt: f64,
    pub pm_deg: f64,
    pub wgc: f64,
}

/// Settling time in seconds, percent overshoot and monotonicity flag.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PituneStepMetrics {
    pub ts: f64,
    pub po: f64,
    pub monotonic: bool,
}

/// Opaque plant handle.
pub struct PitunePlant(Plant);

/// Opaque sampled step response handle.
pub struct PituneStepResponse(StepResponse);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message).unwrap_or_else(|_| c"error message contained NUL".into());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> PituneStatus {
    match err {
        Error::InvalidParameter { .. } | Error::InvalidRange { .. } | Error::InvalidGrid => {
            PituneStatus::InvalidArgument
        }
        Error::CancellationRequired { .. } => PituneStatus::CancellationRequired,
        Error::NotSettled { .. } => PituneStatus::NotSettled,
        Error::UnstableSystem(_) => PituneStatus::Unstable,
        _ => PituneStatus::Numerical,
    }
}

struct Failure(PituneStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure(status_of(&err), err.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(PituneStatus::NullPointer, format!("{name} must not be null"))
}

/// Runs `f`, records its error message and converts panics into a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> PituneStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PituneStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic in pitune".to_owned());
            PituneStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for reads of `T`.
unsafe fn borrow<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    unsafe { ptr.as_ref() }.ok_or_else(|| null(name))
}

/// # Safety
/// `ptr` must be null or valid for writes of `T`.
unsafe fn write<T>(ptr: *mut T, name: &str, value: T) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(null(name));
    }
    unsafe { ptr.write(value) };
    Ok(())
}

fn controller(c: PituneController) -> Result<PiController, Failure> {
    Ok(PiController::new(c.k, c.ti)?)
}

fn complex(z: pitune::ComplexValue) -> PituneComplex {
    PituneComplex { re: z.re, im: z.im }
}

/// Returns a static description of `status`. Never null.
#[no_mangle]
pub extern "C" fn pitune_status_message(status: PituneStatus) -> *const c_char {
    let text = match status {
        PituneStatus::Ok => c"ok",
        PituneStatus::NullPointer => c"null pointer argument",
        PituneStatus::InvalidArgument => c"invalid argument",
        PituneStatus::CancellationRequired => c"controller integral time must equal the slow plant time constant",
        PituneStatus::NotSettled => c"step response did not settle",
        PituneStatus::Unstable => c"closed loop is unstable",
        PituneStatus::BufferTooSmall => c"buffer too small",
        PituneStatus::Numerical => c"numerical failure",
        PituneStatus::Panic => c"internal panic",
    };
    text.as_ptr()
}

/// Detailed message for the last failing call on this thread, or null if the
/// last call succeeded. Valid until the next pitune call on the same thread.
#[no_mangle]
pub extern "C" fn pitune_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Creates the plant `kp / ((t1 s + 1)(t2 s + 1))`. The time constants are
/// reordered so that `t1 >= t2`.
///
/// # Safety
/// `out` must be valid for writes. On success `*out` owns a handle that must
/// be released with [`pitune_plant_free`].
#[no_mangle]
pub unsafe extern "C" fn pitune_plant_new(kp: f64, t1: f64, t2: f64, out: *mut *mut PitunePlant) -> PituneStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let plant = Plant::new(kp, t1, t2)?;
        unsafe { out.write(Box::into_raw(Box::new(PitunePlant(plant)))) };
        Ok(())
    })
}

/// Releases a plant handle. Null is a no-op.
///
/// # Safety
/// `plant` must be null or a handle from [`pitune_plant_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pitune_plant_free(plant: *mut PitunePlant) {
    if !plant.is_null() {
        drop(unsafe { Box::from_raw(plant) });
    }
}

/// Reads back the (ordered) plant parameters.
///
/// # Safety
/// `plant` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pitune_plant_params(
    plant: *const PitunePlant,
    kp: *mut f64,
    t1: *mut f64,
    t2: *mut f64,
) -> PituneStatus {
    guard(|| {
        let p = &unsafe { borrow(plant, "plant") }?.0;
        unsafe {
            write(kp, "kp", p.kp())?;
            write(t1, "t1", p.t1())?;
            write(t2, "t2", p.t2())
        }
    })
}

/// Critically damped PI tuning: `k = t1 / (4 kp t2)`, `ti = t1`.
///
/// # Safety
/// `plant` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pitune_tune(plant: *const PitunePlant, out: *mut PituneController) -> PituneStatus {
    guard(|| {
        let ctrl = tune_pi(&unsafe { borrow(plant, "plant") }?.0);
        unsafe { write(out, "out", PituneController { k: ctrl.k(), ti: ctrl.ti() }) }
    })
}

/// Damping ratio and natural frequency of the reduced loop. Requires
/// `ctrl.ti` to equal the plant's `t1`.
///
/// # Safety
/// `plant` must be a live handle; `zeta` and `wn` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pitune_damping(
    plant: *const PitunePlant,
    ctrl: PituneController,
    zeta: *mut f64,
    wn: *mut f64,
) -> PituneStatus {
    guard(|| {
        let params = damping_params(&unsafe { borrow(plant, "plant") }?.0, &controller(ctrl)?)?;
        unsafe {
            write(zeta, "zeta", params.zeta)?;
            write(wn, "wn", params.wn)
        }
    })
}

/// Closed-loop poles and pole-zero cancellation check.
///
/// # Safety
/// `plant` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pitune_analyze(
    plant: *const PitunePlant,
    ctrl: PituneController,
    out: *mut PituneLoopReport,
) -> PituneStatus {
    guard(|| {
        let report = analyze_closed_loop(&unsafe { borrow(plant, "plant") }?.0, &controller(ctrl)?)?;
        let mut poles = [PituneComplex::default(); 3];
        for (slot, &z) in poles.iter_mut().zip(&report.poles) {
            *slot = complex(z);
        }
        let value = PituneLoopReport {
            poles,
            cancellation_detected: report.cancellation_detected,
            vieta_residuals: report.vieta_residuals,
        };
        unsafe { write(out, "out", value) }
    })
}

/// Peak sensitivities, phase margin and gain crossover of the loop.
///
/// # Safety
/// `plant` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pitune_robustness(
    plant: *const PitunePlant,
    ctrl: PituneController,
    out: *mut PituneFreqMetrics,
) -> PituneStatus {
    guard(|| {
        let m = robustness_report(&unsafe { borrow(plant, "plant") }?.0, &controller(ctrl)?)?;
        unsafe { write(out, "out", PituneFreqMetrics { ms: m.ms, mt: m.mt, pm_deg: m.pm_deg, wgc: m.wgc }) }
    })
}

/// Simulates the closed-loop unit step response with RK4. A non-positive
/// `horizon` selects the default horizon for the plant.
///
/// # Safety
/// `plant` must be a live handle; `out` must be valid for writes. On success
/// `*out` owns a handle that must be released with
/// [`pitune_step_response_free`].
#[no_mangle]
pub unsafe extern "C" fn pitune_simulate(
    plant: *const PitunePlant,
    ctrl: PituneController,
    dt: f64,
    horizon: f64,
    out: *mut *mut PituneStepResponse,
) -> PituneStatus {
    guard(|| {
        let plant = &unsafe { borrow(plant, "plant") }?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let horizon = if horizon > 0.0 { horizon } else { default_horizon(plant) };
        let r = simulate_step(&closed_loop(plant, &controller(ctrl)?), dt, horizon)?;
        unsafe { out.write(Box::into_raw(Box::new(PituneStepResponse(r)))) };
        Ok(())
    })
}

/// Releases a step response handle. Null is a no-op.
///
/// # Safety
/// `resp` must be null or a handle from [`pitune_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pitune_step_response_free(resp: *mut PituneStepResponse) {
    if !resp.is_null() {
        drop(unsafe { Box::from_raw(resp) });
    }
}

/// Number of samples in the response (0 for a null handle).
///
/// # Safety
/// `resp` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pitune_step_response_len(resp: *const PituneStepResponse) -> usize {
    unsafe { resp.as_ref() }.map_or(0, |r| r.0.samples().len())
}

/// Sample spacing in seconds (NaN for a null handle).
///
/// # Safety
/// `resp` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pitune_step_response_dt(resp: *const PituneStepResponse) -> f64 {
    unsafe { resp.as_ref() }.map_or(f64::NAN, |r| r.0.dt())
}

/// Copies the samples into `buf`. `*written` receives the number of samples;
/// if `capacity` is smaller than that, nothing is copied and
/// `PITUNE_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `resp` must be a live handle; `buf` must be valid for `capacity` writes
/// (it may be null when `capacity` is 0); `written` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pitune_step_response_samples(
    resp: *const PituneStepResponse,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> PituneStatus {
    guard(|| {
        let samples = unsafe { borrow(resp, "resp") }?.0.samples();
        unsafe { write(written, "written", samples.len()) }?;
        if capacity < samples.len() {
            return Err(Failure(
                PituneStatus::BufferTooSmall,
                format!("buffer holds {capacity} samples, {} required", samples.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        unsafe { ptr::copy_nonoverlapping(samples.as_ptr(), buf, samples.len()) };
        Ok(())
    })
}

/// Settling time into `band`, percent overshoot and monotonicity.
///
/// # Safety
/// `resp` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pitune_step_metrics(
    resp: *const PituneStepResponse,
    band: f64,
    out: *mut PituneStepMetrics,
) -> PituneStatus {
    guard(|| {
        let m = step_metrics(&unsafe { borrow(resp, "resp") }?.0, band)?;
        unsafe { write(out, "out", PituneStepMetrics { ts: m.ts, po: m.po, monotonic: m.monotonic }) }
    })
}

/// Dimensionless settling constant: the tuned loop settles into `band` at
/// `2 t2` times this value.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pitune_settling_constant(band: f64, out: *mut f64) -> PituneStatus {
    guard(|| {
        let tau = settling_constant(band)?;
        unsafe { write(out, "out", tau) }
    })
}

/// Exact step response of the tuned loop, `1 - (1 + t/(2 t2)) exp(-t/(2 t2))`.
#[no_mangle]
pub extern "C" fn pitune_analytic_step(t2: f64, t: f64) -> f64 {
    analytic_step_tuned(t2, t)
}
