//! C ABI over `bioassay-core`.
//!
//! Every fallible function returns a [`BioassayStatus`]; on failure the
//! message is available from [`bioassay_last_error_message`] on the same
//! thread. Handles are opaque and owned by the caller, who releases them with
//! the matching `_free` function. No function panics across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bioassay_core::efficiency::{efficiency, CorrelationPair};
use bioassay_core::error::Error;
use bioassay_core::estimation::{weibull_mle, FitResult};
use bioassay_core::fisher::{total_info, WeibullSample};
use bioassay_core::lowdose::{percentile, PercentileQuery, RiskType};
use bioassay_core::models::{Input, ModelDef};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BioassayStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownModel = 3,
    Arity = 4,
    Domain = 5,
    NotDifferentiable = 6,
    Unattainable = 7,
    NonFinite = 8,
    Singular = 9,
    NonConvergence = 10,
    BufferTooSmall = 11,
    Internal = 12,
}

/// Risk scale for [`bioassay_percentile`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BioassayRisk {
    /// Extra risk when `F(0) > 0`, total risk otherwise.
    Default = 0,
    Total = 1,
    Extra = 2,
}

/// Opaque handle to a registry model.
pub struct BioassayModel {
    def: &'static ModelDef,
}

/// Opaque handle to a fit result.
pub struct BioassayFit {
    fit: FitResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn status_of(e: &Error) -> BioassayStatus {
    match e {
        Error::UnknownModel { .. } => BioassayStatus::UnknownModel,
        Error::Arity { .. } | Error::Dimension(_) => BioassayStatus::Arity,
        Error::ParamDomain { .. } | Error::InputDomain { .. } => BioassayStatus::Domain,
        Error::NotDifferentiable(_) => BioassayStatus::NotDifferentiable,
        Error::Unattainable { .. } => BioassayStatus::Unattainable,
        Error::NonFinite(_) => BioassayStatus::NonFinite,
        Error::Singular(_) | Error::Separation(_) => BioassayStatus::Singular,
        Error::NonConvergence { .. } => BioassayStatus::NonConvergence,
        _ => BioassayStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (BioassayStatus, String)>) -> BioassayStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BioassayStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BioassayStatus::Internal
        }
    }
}

fn core_err(e: Error) -> (BioassayStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(what: &str) -> (BioassayStatus, String) {
    (BioassayStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or point to `n` readable values.
unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], (BioassayStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null_err(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

fn input(def: &ModelDef, u: f64, u2: f64) -> Input {
    if def.input_dim == 2 {
        Input::pair(u, u2)
    } else {
        Input::scalar(u)
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bioassay_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after success.
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn bioassay_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Looks up a model by id.
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bioassay_model_new(
    id: *const c_char,
    out: *mut *mut BioassayModel,
) -> BioassayStatus {
    guard(|| {
        if id.is_null() {
            return Err(null_err("id"));
        }
        if out.is_null() {
            return Err(null_err("out"));
        }
        let id = CStr::from_ptr(id)
            .to_str()
            .map_err(|_| (BioassayStatus::InvalidArgument, "id is not UTF-8".to_string()))?;
        let def = ModelDef::lookup(id).map_err(core_err)?;
        *out = Box::into_raw(Box::new(BioassayModel { def }));
        Ok(())
    })
}

/// Releases a model handle; null is ignored.
///
/// # Safety
/// `model` must come from [`bioassay_model_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bioassay_model_free(model: *mut BioassayModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Minimum number of parameters (the exact count for fixed-arity models).
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bioassay_model_arity(
    model: *const BioassayModel,
    out: *mut usize,
) -> BioassayStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null_err("model"))?;
        let out = out.as_mut().ok_or_else(|| null_err("out"))?;
        *out = m.def.arity.min();
        Ok(())
    })
}

/// `f(u, θ)`. `u2` is read only by two-input models.
///
/// # Safety
/// `theta` must hold `n_theta` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bioassay_model_evaluate(
    model: *const BioassayModel,
    u: f64,
    u2: f64,
    theta: *const f64,
    n_theta: usize,
    out: *mut f64,
) -> BioassayStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null_err("model"))?;
        let theta = slice(theta, n_theta, "theta")?;
        let out = out.as_mut().ok_or_else(|| null_err("out"))?;
        *out = m.def.evaluate(input(m.def, u, u2), theta).map_err(core_err)?;
        Ok(())
    })
}

/// `∇_θ f(u, θ)` written to `out[0..n_theta]`.
///
/// # Safety
/// `theta` must hold `n_theta` values and `out` have room for `out_len`.
#[no_mangle]
pub unsafe extern "C" fn bioassay_model_gradient(
    model: *const BioassayModel,
    u: f64,
    u2: f64,
    theta: *const f64,
    n_theta: usize,
    out: *mut f64,
    out_len: usize,
) -> BioassayStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null_err("model"))?;
        let theta = slice(theta, n_theta, "theta")?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        if out_len < n_theta {
            return Err((
                BioassayStatus::BufferTooSmall,
                format!("gradient needs {n_theta} slots, buffer has {out_len}"),
            ));
        }
        let g = m.def.gradient(input(m.def, u, u2), theta).map_err(core_err)?;
        std::slice::from_raw_parts_mut(out, g.len()).copy_from_slice(&g);
        Ok(())
    })
}

/// Total Fisher information `Σ ∇f∇fᵀ / σ²` over a design, row-major into
/// `out[0..n_theta²]`. `design_u2` may be null for scalar-input models.
///
/// # Safety
/// Arrays must hold the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn bioassay_total_info(
    model: *const BioassayModel,
    design_u: *const f64,
    design_u2: *const f64,
    n_design: usize,
    theta: *const f64,
    n_theta: usize,
    sigma2: f64,
    out: *mut f64,
    out_len: usize,
) -> BioassayStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null_err("model"))?;
        let us = slice(design_u, n_design, "design_u")?;
        let u2s = if design_u2.is_null() {
            None
        } else {
            Some(slice(design_u2, n_design, "design_u2")?)
        };
        let theta = slice(theta, n_theta, "theta")?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        if out_len < n_theta * n_theta {
            return Err((
                BioassayStatus::BufferTooSmall,
                format!("information needs {} slots, buffer has {out_len}", n_theta * n_theta),
            ));
        }
        let design: Vec<Input> = us
            .iter()
            .enumerate()
            .map(|(i, &u)| match u2s {
                Some(v) => Input::pair(u, v[i]),
                None => Input::scalar(u),
            })
            .collect();
        let info = total_info(m.def, &design, theta, sigma2).map_err(core_err)?;
        let dst = std::slice::from_raw_parts_mut(out, n_theta * n_theta);
        for (i, row) in info.to_rows().iter().enumerate() {
            dst[i * n_theta..(i + 1) * n_theta].copy_from_slice(row);
        }
        Ok(())
    })
}

/// Dose `L_p` at which a dose-response CDF reaches risk `p`.
///
/// # Safety
/// `theta` must hold `n_theta` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bioassay_percentile(
    model: *const BioassayModel,
    theta: *const f64,
    n_theta: usize,
    p: f64,
    risk: BioassayRisk,
    out: *mut f64,
) -> BioassayStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null_err("model"))?;
        let theta = slice(theta, n_theta, "theta")?;
        let out = out.as_mut().ok_or_else(|| null_err("out"))?;
        let risk = match risk {
            BioassayRisk::Default => None,
            BioassayRisk::Total => Some(RiskType::Total),
            BioassayRisk::Extra => Some(RiskType::Extra),
        };
        let q = PercentileQuery::new(m.def, theta.to_vec(), p, risk).map_err(core_err)?;
        *out = percentile(&q).map_err(core_err)?;
        Ok(())
    })
}

/// Relative efficiency `(1 − ρ₁₂²)/(1 − ρ²_{Y2.1})`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bioassay_efficiency(rho12: f64, rho_y2_1: f64, out: *mut f64) -> BioassayStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null_err("out"))?;
        *out = efficiency(CorrelationPair::new(rho12, rho_y2_1).map_err(core_err)?);
        Ok(())
    })
}

/// Censored Weibull MLE. `events[i]` is nonzero for an observed event.
///
/// # Safety
/// `times` and `events` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bioassay_weibull_mle(
    times: *const f64,
    events: *const u8,
    n: usize,
    out: *mut *mut BioassayFit,
) -> BioassayStatus {
    guard(|| {
        let times = slice(times, n, "times")?;
        let events = slice(events, n, "events")?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let sample = WeibullSample::new(times.to_vec(), events.iter().map(|&e| e != 0).collect())
            .map_err(core_err)?;
        let fit = weibull_mle(&sample).map_err(core_err)?;
        *out = Box::into_raw(Box::new(BioassayFit { fit }));
        Ok(())
    })
}

/// Releases a fit handle; null is ignored.
///
/// # Safety
/// `fit` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bioassay_fit_free(fit: *mut BioassayFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of estimated parameters, or 0 for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bioassay_fit_param_count(fit: *const BioassayFit) -> usize {
    fit.as_ref().map_or(0, |f| f.fit.theta_hat.0.len())
}

/// Copies the estimates into `out[0..len]`.
///
/// # Safety
/// `out` must have room for `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn bioassay_fit_params(
    fit: *const BioassayFit,
    out: *mut f64,
    out_len: usize,
) -> BioassayStatus {
    guard(|| {
        let f = fit.as_ref().ok_or_else(|| null_err("fit"))?;
        let k = f.fit.theta_hat.0.len();
        if out.is_null() {
            return Err(null_err("out"));
        }
        if out_len < k {
            return Err((
                BioassayStatus::BufferTooSmall,
                format!("fit has {k} parameters, buffer has {out_len}"),
            ));
        }
        std::slice::from_raw_parts_mut(out, k).copy_from_slice(&f.fit.theta_hat.0);
        Ok(())
    })
}

/// 1 if the fit converged, 0 if not, -1 for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bioassay_fit_converged(fit: *const BioassayFit) -> c_int {
    fit.as_ref().map_or(-1, |f| c_int::from(f.fit.converged))
}

/// Objective at the estimate (log-likelihood or SSE); NaN for null.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bioassay_fit_objective(fit: *const BioassayFit) -> f64 {
    fit.as_ref().map_or(f64::NAN, |f| f.fit.objective)
}
