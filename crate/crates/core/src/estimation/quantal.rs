//! Binomial maximum likelihood for the quantal dose-response CDFs.

use nalgebra::{DMatrix, DVector};

use super::{FitResult, FitStatus, ObjectiveKind, QuantalDataset};
use crate::error::{Error, Result};
use crate::fisher::InfoMatrix;
use crate::models::{Constraint, Family, ModelDef, ModelId, ParamVector};
use crate::special::normal_quantile;

const MAX_ITER: usize = 200;
const SCORE_TOL: f64 = 1e-8;
/// Fitted probabilities are kept this far from 0 and 1 in the likelihood.
const P_FLOOR: f64 = 1e-300;

fn log_likelihood(model: &ModelDef, data: &QuantalDataset, theta: &[f64]) -> Option<f64> {
    let mut ll = 0.0;
    for g in &data.groups {
        let f = model.evaluate(g.dose, theta).ok()?;
        let (r, m) = (g.events as f64, (g.n - g.events) as f64);
        if r > 0.0 {
            ll += r * f.max(P_FLOOR).ln();
        }
        if m > 0.0 {
            ll += m * (1.0 - f).max(P_FLOOR).ln();
        }
    }
    ll.is_finite().then_some(ll)
}

/// Score and expected information over the free parameters.
fn score_info(
    model: &ModelDef,
    data: &QuantalDataset,
    theta: &[f64],
    free: &[usize],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let k = free.len();
    let mut score = DVector::zeros(k);
    let mut info = DMatrix::zeros(k, k);
    for g in &data.groups {
        let f = model.evaluate(g.dose, theta)?;
        let grad = model.gradient(g.dose, theta)?;
        let v = (f * (1.0 - f)).max(P_FLOOR);
        let resid = g.events as f64 - g.n as f64 * f;
        let gf = DVector::from_iterator(k, free.iter().map(|&j| grad[j]));
        score += &gf * (resid / v);
        info += &gf * gf.transpose() * (g.n as f64 / v);
    }
    Ok((score, info))
}

/// Projects onto the parameter constraints where that is a clamp; returns
/// `None` when a strict constraint is violated.
fn project(model: &ModelDef, theta: &mut [f64]) -> Option<()> {
    for (i, v) in theta.iter_mut().enumerate() {
        match model.param_spec(i).constraint {
            Constraint::NonNegative if *v < 0.0 => *v = 0.0,
            c if !c.admits(*v) => return None,
            _ => {}
        }
    }
    Some(())
}

/// A crude starting point from the observed proportions.
///
/// For multi-hit the leading entry is the fixed integer `k`, taken as 1.
pub fn default_start(model: &ModelDef, data: &QuantalDataset, arity: usize) -> Result<ParamVector> {
    if model.family != Family::DoseResponseCdf {
        return Err(Error::invalid(format!(
            "`{}` is not a dose-response CDF",
            model.id_str
        )));
    }
    // Cumulative hazard −ln(1 − p̂) per unit dose, pooled over dosed groups.
    let (mut h, mut dose) = (0.0, 0.0);
    for g in data.groups.iter().filter(|g| g.dose > 0.0 && g.n > 0) {
        let p = (g.events as f64 + 0.5) / (g.n as f64 + 1.0);
        h += -(1.0 - p).ln();
        dose += g.dose;
    }
    let rate = if dose > 0.0 { h / dose } else { 1.0 };
    let theta = match model.id {
        ModelId::OneHit => vec![rate],
        ModelId::MultiHit => vec![1.0, rate],
        ModelId::WeibullCdf => vec![rate, 1.0],
        ModelId::Multistage => {
            let mut t = vec![0.0; arity.max(2)];
            t[1] = rate;
            t
        }
        ModelId::LogitCdf | ModelId::ProbitCdf => {
            // Least-squares line through link-transformed proportions.
            let link = |p: f64| match model.id {
                ModelId::LogitCdf => (p / (1.0 - p)).ln(),
                _ => normal_quantile(p),
            };
            let pts: Vec<(f64, f64)> = data
                .groups
                .iter()
                .filter(|g| g.n > 0)
                .map(|g| {
                    let p = (g.events as f64 + 0.5) / (g.n as f64 + 1.0);
                    (g.dose, link(p))
                })
                .collect();
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            let b = if b > 0.0 { b } else { 1.0 / mx.max(1.0) };
            vec![my - b * mx, b]
        }
        _ => unreachable!("family checked above"),
    };
    Ok(ParamVector(theta))
}

/// Fits a dose-response CDF to grouped binary outcomes by Fisher scoring
/// with step halving.
pub fn fit_quantal(model: &ModelDef, data: &QuantalDataset, theta0: &[f64]) -> Result<FitResult> {
    if model.family != Family::DoseResponseCdf {
        return Err(Error::invalid(format!(
            "`{}` is not a dose-response CDF",
            model.id_str
        )));
    }
    model.check_theta(theta0)?;
    let free = model.free_params(theta0.len());
    if data.groups.len() < free.len() {
        return Err(Error::invalid(format!(
            "{} dose groups cannot identify {} parameters",
            data.groups.len(),
            free.len()
        )));
    }

    let mut theta = theta0.to_vec();
    let mut ll = log_likelihood(model, data, &theta)
        .ok_or_else(|| Error::NonFinite("log-likelihood at the starting point".into()))?;
    let mut iterations = 0;
    let mut status = FitStatus::IterationLimit;
    let (mut score, mut info) = score_info(model, data, &theta, &free)?;
    while iterations < MAX_ITER {
        let Some(chol) = info.clone().cholesky() else {
            return Err(Error::Singular("expected information is singular".into()));
        };
        let step = chol.solve(&score);
        // Newton decrement sᵀI⁻¹s: invariant to the scale of the data.
        if score.dot(&step).sqrt() < SCORE_TOL {
            status = FitStatus::Converged;
            break;
        }
        iterations += 1;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial = theta.clone();
            for (k, &j) in free.iter().enumerate() {
                trial[j] += scale * step[k];
            }
            if project(model, &mut trial).is_some() {
                if let Some(tll) = log_likelihood(model, data, &trial) {
                    if tll >= ll {
                        accepted = Some((trial, tll));
                        break;
                    }
                }
            }
            scale *= 0.5;
        }
        let Some((trial, tll)) = accepted else {
            status = FitStatus::Stalled;
            break;
        };
        let moved = trial
            .iter()
            .zip(&theta)
            .any(|(a, b)| (a - b).abs() > 1e-15 * b.abs().max(1e-300));
        theta = trial;
        ll = tll;
        (score, info) = score_info(model, data, &theta, &free)?;
        if !moved {
            let small = info
                .clone()
                .cholesky()
                .is_some_and(|c| score.dot(&c.solve(&score)).sqrt() < SCORE_TOL);
            status = if small { FitStatus::Converged } else { FitStatus::Boundary };
            break;
        }
    }
    let gradient_norm = score.norm();
    // Expected information over all parameters; fixed entries stay zero.
    let p = theta.len();
    let mut full = DMatrix::zeros(p, p);
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            full[(i, j)] = info[(a, b)];
        }
    }
    Ok(FitResult {
        model: model.id_str.to_string(),
        theta_hat: ParamVector(theta),
        objective: ll,
        objective_kind: ObjectiveKind::LogLikelihood,
        s2: None,
        info: Some(InfoMatrix {
            entries: full,
            sigma2: 1.0,
        }),
        converged: status == FitStatus::Converged,
        iterations,
        status,
        gradient_norm,
    })
}
