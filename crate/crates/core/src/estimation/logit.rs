//! Binary logistic regression on one or two covariates by Newton's method.

use nalgebra::{DMatrix, DVector};

use super::{BinaryDataset, FitResult, FitStatus, ObjectiveKind};
use crate::error::{Error, Result};
use crate::fisher::InfoMatrix;
use crate::models::ParamVector;

const MAX_ITER: usize = 100;
const SCORE_TOL: f64 = 1e-8;
/// Coefficients beyond this magnitude with a still-rising likelihood signal
/// complete or quasi-complete separation.
const SEPARATION_BOUND: f64 = 30.0;

/// Logistic fit plus standard errors from the inverse information.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LogitFit {
    #[serde(flatten)]
    pub fit: FitResult,
    pub standard_errors: Vec<f64>,
}

impl LogitFit {
    pub fn beta(&self) -> &[f64] {
        &self.fit.theta_hat
    }
}

/// `ln(1 + eᶻ)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn log_likelihood(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter()
        .zip(y.iter())
        .map(|(e, yi)| yi * e - softplus(*e))
        .sum()
}

/// Score `Xᵀ(y − p)` and information `XᵀWX`.
fn score_info(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let eta = x * beta;
    let p = eta.map(crate::models::sigmoid);
    let w = p.map(|pi| pi * (1.0 - pi));
    let score = x.transpose() * (y - &p);
    let mut xw = x.clone();
    for (mut row, wi) in xw.row_iter_mut().zip(w.iter()) {
        row *= *wi;
    }
    (score, x.transpose() * xw)
}

/// Fits `logit P = β₀ + β₁x₁ (+ β₂x₂)`.
///
/// With `include_x2` the full model is fitted, otherwise the restricted one
/// that drops x₂. A constant x₂ makes the full model unidentifiable and is
/// rejected.
pub fn fit_logit(data: &BinaryDataset, include_x2: bool) -> Result<LogitFit> {
    let rows = data.rows();
    let events = rows.iter().filter(|r| r.y).count();
    if events == 0 || events == rows.len() {
        return Err(Error::invalid("both outcome classes must be present"));
    }
    if include_x2 {
        if !data.has_x2() {
            return Err(Error::invalid("include_x2 requested but the data has no x2"));
        }
        let first = rows[0].x2.unwrap_or_default();
        if rows.iter().all(|r| r.x2 == Some(first)) {
            return Err(Error::invalid(
                "x2 is constant: the full model is not identifiable",
            ));
        }
    }
    let p = if include_x2 { 3 } else { 2 };
    let x = DMatrix::from_fn(rows.len(), p, |i, j| match j {
        0 => 1.0,
        1 => rows[i].x1,
        _ => rows[i].x2.unwrap_or_default(),
    });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| f64::from(u8::from(r.y))));

    let mut beta = DVector::zeros(p);
    let mut ll = log_likelihood(&x, &y, &beta);
    let mut iterations = 0;
    let (mut score, mut info) = score_info(&x, &y, &beta);
    let mut status = FitStatus::IterationLimit;
    while iterations < MAX_ITER {
        let step = match info.clone().cholesky() {
            Some(c) => c.solve(&score),
            None => {
                if beta.amax() > SEPARATION_BOUND / 2.0 {
                    return Err(Error::Separation(
                        "information collapsed while coefficients diverge".into(),
                    ));
                }
                return Err(Error::Singular(
                    "covariates are collinear; information matrix is singular".into(),
                ));
            }
        };
        // A small score alone is not enough: under separation the score
        // vanishes while Newton steps stay of order one.
        if score.norm() < SCORE_TOL && step.norm() < 1e-6 * (1.0 + beta.norm()) {
            status = FitStatus::Converged;
            break;
        }
        iterations += 1;
        let mut scale = 1.0;
        let mut next = None;
        for _ in 0..50 {
            let trial = &beta + scale * &step;
            let tll = log_likelihood(&x, &y, &trial);
            if tll >= ll - 1e-12 * ll.abs() {
                next = Some((trial, tll));
                break;
            }
            scale *= 0.5;
        }
        let Some((trial, tll)) = next else {
            status = FitStatus::Stalled;
            break;
        };
        let rising = tll > ll;
        beta = trial;
        ll = tll;
        if beta.amax() > SEPARATION_BOUND && rising {
            return Err(Error::Separation(format!(
                "coefficients exceed {SEPARATION_BOUND} in magnitude while the likelihood keeps rising"
            )));
        }
        (score, info) = score_info(&x, &y, &beta);
    }
    if status != FitStatus::Converged && beta.amax() > SEPARATION_BOUND / 2.0 {
        return Err(Error::Separation("coefficients failed to settle".into()));
    }

    let info = InfoMatrix {
        entries: info,
        sigma2: 1.0,
    };
    let inv = info.inverse()?;
    let standard_errors = (0..p).map(|i| inv[(i, i)].sqrt()).collect();
    let gradient_norm = score.norm();
    Ok(LogitFit {
        fit: FitResult {
            model: if include_x2 { "logit-full" } else { "logit-restricted" }.into(),
            theta_hat: ParamVector(beta.iter().copied().collect()),
            objective: ll,
            objective_kind: ObjectiveKind::LogLikelihood,
            s2: None,
            info: Some(info),
            converged: status == FitStatus::Converged,
            iterations,
            status,
            gradient_norm,
        },
        standard_errors,
    })
}
