//! C interface to `tumordde`.
//!
//! Models and trajectories are opaque heap handles released with their
//! `_free` function. Every fallible call returns a [`TdStatus`]; on failure
//! a description is available from [`td_last_error_message`] on the same
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tumordde::chareq::{self, CharError, CrossingOptions, HopfPoint};
use tumordde::integrate::{self, HistorySpec, IntegrateError, SimOptions, Trajectory};
use tumordde::model::{self, ChainForm, ModelError, ModelParams};
use tumordde::normalform::{self, Direction, NormalFormError, OrbitStability, PeriodTrend};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Inadmissible = 3,
    NoCrossing = 4,
    Numeric = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque model handle.
pub struct TdModel {
    params: ModelParams,
}

/// Opaque trajectory handle.
pub struct TdTrajectory {
    inner: Trajectory,
}

/// A certified crossing.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TdHopfPoint {
    pub omega: f64,
    pub tau_crit: f64,
    /// Real and imaginary parts of d lambda / d tau1.
    pub d_re: f64,
    pub d_im: f64,
    /// |Delta(i omega, tau_crit)|.
    pub residual: f64,
    pub branch: u32,
}

/// Normal-form quantities at the first crossing. The sign fields are
/// +1, -1 or 0 (degenerate): `direction` is +1 when supercritical,
/// `stability` +1 when orbitally stable, `period_trend` +1 when the period
/// increases.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TdNormalForm {
    pub omega: f64,
    pub tau_crit: f64,
    pub g20_re: f64,
    pub g20_im: f64,
    pub g11_re: f64,
    pub g11_im: f64,
    pub g02_re: f64,
    pub g02_im: f64,
    pub g21_re: f64,
    pub g21_im: f64,
    pub c1_re: f64,
    pub c1_im: f64,
    pub mu2: f64,
    pub beta2: f64,
    pub t2: f64,
    pub direction: i32,
    pub stability: i32,
    pub period_trend: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: TdStatus, msg: impl AsRef<str>) -> TdStatus {
    set_error(msg.as_ref());
    status
}

fn model_status(e: &ModelError) -> TdStatus {
    match e {
        ModelError::Inadmissible(_) | ModelError::DegenerateEquilibrium => TdStatus::Inadmissible,
        _ => TdStatus::InvalidArgument,
    }
}

fn char_status(e: &CharError) -> TdStatus {
    match e {
        CharError::Model(m) => model_status(m),
        CharError::InvalidArgument(_) => TdStatus::InvalidArgument,
        CharError::NoCrossing(_) => TdStatus::NoCrossing,
        CharError::Pole | CharError::Degenerate { .. } => TdStatus::Numeric,
    }
}

fn nf_status(e: &NormalFormError) -> TdStatus {
    match e {
        NormalFormError::Char(c) => char_status(c),
        NormalFormError::Model(m) => model_status(m),
        NormalFormError::WrongCase { .. } => TdStatus::InvalidArgument,
        _ => TdStatus::Numeric,
    }
}

fn int_status(e: &IntegrateError) -> TdStatus {
    match e {
        IntegrateError::Model(m) => model_status(m),
        IntegrateError::InsufficientData(_) => TdStatus::Numeric,
        _ => TdStatus::InvalidArgument,
    }
}

/// Runs `f`, converting panics into [`TdStatus::Panic`] and clearing the
/// error message on success.
fn guarded(f: impl FnOnce() -> TdStatus) -> TdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(TdStatus::Ok) => {
            set_error("");
            TdStatus::Ok
        }
        Ok(s) => s,
        Err(_) => fail(TdStatus::Panic, "internal panic"),
    }
}

unsafe fn model_ref<'a>(m: *const TdModel) -> Option<&'a TdModel> {
    // SAFETY: callers pass a handle from td_model_new or null
    unsafe { m.as_ref() }
}

/// Creates a model. Parameters must be positive and satisfy
/// `b2/b1 < b4/b3 < a1/a2`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn td_model_new(a1: f64, a2: f64, b1: f64, b2: f64, b3: f64, b4: f64, out: *mut *mut TdModel) -> TdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(TdStatus::NullPointer, "out is null");
        }
        let params = ModelParams::new(a1, a2, b1, b2, b3, b4);
        if let Err(e) = params.require_admissible() {
            return fail(model_status(&e), e.to_string());
        }
        let handle = Box::into_raw(Box::new(TdModel { params }));
        // SAFETY: checked non-null above
        unsafe { *out = handle };
        TdStatus::Ok
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from [`td_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn td_model_free(m: *mut TdModel) {
    if !m.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Interior equilibrium.
///
/// # Safety
/// `m` must be a live handle; `x0` and `y0` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn td_equilibrium_l0(m: *const TdModel, x0: *mut f64, y0: *mut f64) -> TdStatus {
    guarded(|| {
        let Some(m) = (unsafe { model_ref(m) }) else { return fail(TdStatus::NullPointer, "model is null") };
        if x0.is_null() || y0.is_null() {
            return fail(TdStatus::NullPointer, "output pointer is null");
        }
        match model::equilibria(&m.params) {
            Ok((l0, _)) => {
                // SAFETY: checked non-null above
                unsafe {
                    *x0 = l0.x;
                    *y0 = l0.y;
                }
                TdStatus::Ok
            }
            Err(e) => fail(model_status(&e), e.to_string()),
        }
    })
}

fn write_hopf(hp: &HopfPoint, out: *mut TdHopfPoint) {
    let v = TdHopfPoint { omega: hp.omega, tau_crit: hp.tau_crit, d_re: hp.d_re, d_im: hp.d_im, residual: hp.residual, branch: hp.branch };
    // SAFETY: callers check out for null
    unsafe { *out = v };
}

/// The `branch`-th (1-based) crossing for point lags, `tau2` fixed.
///
/// # Safety
/// `m` must be a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn td_hopf_dd(m: *const TdModel, tau2: f64, branch: u32, out: *mut TdHopfPoint) -> TdStatus {
    guarded(|| {
        let Some(m) = (unsafe { model_ref(m) }) else { return fail(TdStatus::NullPointer, "model is null") };
        if out.is_null() {
            return fail(TdStatus::NullPointer, "out is null");
        }
        match chareq::hopf_point_dd(&m.params, tau2, branch, &CrossingOptions::default()) {
            Ok(hp) => {
                write_hopf(&hp, out);
                TdStatus::Ok
            }
            Err(e) => fail(char_status(&e), e.to_string()),
        }
    })
}

/// First crossing for a point lag on x and weak kernel rate `q2` on y.
///
/// # Safety
/// `m` must be a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn td_hopf_dw(m: *const TdModel, q2: f64, out: *mut TdHopfPoint) -> TdStatus {
    guarded(|| {
        let Some(m) = (unsafe { model_ref(m) }) else { return fail(TdStatus::NullPointer, "model is null") };
        if out.is_null() {
            return fail(TdStatus::NullPointer, "out is null");
        }
        match chareq::hopf_point_dw(&m.params, q2, &CrossingOptions::default()) {
            Ok(hp) => {
                write_hopf(&hp, out);
                TdStatus::Ok
            }
            Err(e) => fail(char_status(&e), e.to_string()),
        }
    })
}

fn sign3<T: PartialEq>(v: T, pos: T, neg: T) -> i32 {
    if v == pos {
        1
    } else if v == neg {
        -1
    } else {
        0
    }
}

fn normal_form_at(p: &ModelParams, hp: Result<HopfPoint, CharError>, out: *mut TdNormalForm) -> TdStatus {
    let hp = match hp {
        Ok(hp) => hp,
        Err(e) => return fail(char_status(&e), e.to_string()),
    };
    let r = match normalform::normal_form(p, &hp, false) {
        Ok(r) => r.result,
        Err(e) => return fail(nf_status(&e), e.to_string()),
    };
    let v = TdNormalForm {
        omega: r.omega,
        tau_crit: hp.tau_crit,
        g20_re: r.g20.re,
        g20_im: r.g20.im,
        g11_re: r.g11.re,
        g11_im: r.g11.im,
        g02_re: r.g02.re,
        g02_im: r.g02.im,
        g21_re: r.g21.re,
        g21_im: r.g21.im,
        c1_re: r.c1.re,
        c1_im: r.c1.im,
        mu2: r.mu2,
        beta2: r.beta2,
        t2: r.t2,
        direction: sign3(r.direction, Direction::Supercritical, Direction::Subcritical),
        stability: sign3(r.stability, OrbitStability::OrbitallyStable, OrbitStability::OrbitallyUnstable),
        period_trend: sign3(r.period_trend, PeriodTrend::Increases, PeriodTrend::Decreases),
    };
    // SAFETY: callers check out for null
    unsafe { *out = v };
    TdStatus::Ok
}

/// Normal form at the first point-lag crossing.
///
/// # Safety
/// `m` must be a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn td_normal_form_dd(m: *const TdModel, tau2: f64, out: *mut TdNormalForm) -> TdStatus {
    guarded(|| {
        let Some(m) = (unsafe { model_ref(m) }) else { return fail(TdStatus::NullPointer, "model is null") };
        if out.is_null() {
            return fail(TdStatus::NullPointer, "out is null");
        }
        normal_form_at(&m.params, chareq::hopf_point_dd(&m.params, tau2, 1, &CrossingOptions::default()), out)
    })
}

/// Normal form at the first weak-kernel crossing.
///
/// # Safety
/// `m` must be a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn td_normal_form_dw(m: *const TdModel, q2: f64, out: *mut TdNormalForm) -> TdStatus {
    guarded(|| {
        let Some(m) = (unsafe { model_ref(m) }) else { return fail(TdStatus::NullPointer, "model is null") };
        if out.is_null() {
            return fail(TdStatus::NullPointer, "out is null");
        }
        normal_form_at(&m.params, chareq::hopf_point_dw(&m.params, q2, &CrossingOptions::default()), out)
    })
}

fn finish_sim(r: Result<Trajectory, IntegrateError>, out: *mut *mut TdTrajectory) -> TdStatus {
    match r {
        Ok(inner) => {
            let handle = Box::into_raw(Box::new(TdTrajectory { inner }));
            // SAFETY: callers check out for null
            unsafe { *out = handle };
            TdStatus::Ok
        }
        Err(e) => fail(int_status(&e), e.to_string()),
    }
}

/// Point-lag simulation from the history `L0 + (delta, delta)`.
///
/// # Safety
/// `m` must be a live handle; `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn td_simulate_dd(
    m: *const TdModel,
    tau1: f64,
    tau2: f64,
    delta: f64,
    t_end: f64,
    dt: f64,
    out: *mut *mut TdTrajectory,
) -> TdStatus {
    guarded(|| {
        let Some(m) = (unsafe { model_ref(m) }) else { return fail(TdStatus::NullPointer, "model is null") };
        if out.is_null() {
            return fail(TdStatus::NullPointer, "out is null");
        }
        let h = HistorySpec::PerturbedEquilibrium { delta };
        finish_sim(integrate::simulate_dd(&m.params, tau1, tau2, &h, &SimOptions { t_end, dt }), out)
    })
}

/// Weak-kernel simulation through the three-variable chain system.
///
/// # Safety
/// `m` must be a live handle; `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn td_simulate_chain(
    m: *const TdModel,
    tau1: f64,
    q2: f64,
    delta: f64,
    t_end: f64,
    dt: f64,
    out: *mut *mut TdTrajectory,
) -> TdStatus {
    guarded(|| {
        let Some(m) = (unsafe { model_ref(m) }) else { return fail(TdStatus::NullPointer, "model is null") };
        if out.is_null() {
            return fail(TdStatus::NullPointer, "out is null");
        }
        let h = HistorySpec::PerturbedEquilibrium { delta };
        let opts = SimOptions { t_end, dt };
        finish_sim(integrate::simulate_chain(&m.params, tau1, q2, ChainForm::Corrected, &h, &opts), out)
    })
}

/// Number of stored samples; 0 for null.
///
/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn td_trajectory_len(t: *const TdTrajectory) -> usize {
    // SAFETY: see function contract
    unsafe { t.as_ref() }.map_or(0, |t| t.inner.len())
}

/// Components per sample (2 or 3); 0 for null.
///
/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn td_trajectory_dim(t: *const TdTrajectory) -> usize {
    // SAFETY: see function contract
    unsafe { t.as_ref() }.map_or(0, |t| t.inner.dim)
}

/// 1 if the run was truncated by blow-up, 0 otherwise or for null.
///
/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn td_trajectory_blew_up(t: *const TdTrajectory) -> i32 {
    // SAFETY: see function contract
    unsafe { t.as_ref() }.map_or(0, |t| i32::from(t.inner.blew_up))
}

/// Copies sample times (`capacity` entries) and states in original
/// coordinates (`capacity * dim` entries, row-major). Either buffer may be
/// null to skip it.
///
/// # Safety
/// `t` must be a live handle; non-null buffers must hold the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn td_trajectory_copy(t: *const TdTrajectory, times: *mut f64, states: *mut f64, capacity: usize) -> TdStatus {
    guarded(|| {
        // SAFETY: see function contract
        let Some(t) = (unsafe { t.as_ref() }) else { return fail(TdStatus::NullPointer, "trajectory is null") };
        let t = &t.inner;
        let n = t.len();
        if capacity < n {
            return fail(TdStatus::BufferTooSmall, format!("capacity {capacity} < {n} samples"));
        }
        if !times.is_null() {
            // SAFETY: caller guarantees capacity >= n entries
            unsafe { ptr::copy_nonoverlapping(t.times.as_ptr(), times, n) };
        }
        if !states.is_null() {
            for k in 0..n {
                for (i, v) in t.physical(k).into_iter().enumerate() {
                    // SAFETY: caller guarantees capacity * dim entries
                    unsafe { *states.add(k * t.dim + i) = v };
                }
            }
        }
        TdStatus::Ok
    })
}

/// Releases a trajectory. Null is ignored.
///
/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn td_trajectory_free(t: *mut TdTrajectory) {
    if !t.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(t) });
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn td_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn td_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
