//! Censored Weibull maximum likelihood via the closed-form profile in θ.

use super::{FitResult, FitStatus, ObjectiveKind};
use crate::error::{Error, Result};
use crate::fisher::{weibull_observed_info, WeibullSample};
use crate::models::ParamVector;

/// Search range for the shape parameter.
pub const PROFILE_S_RANGE: (f64, f64) = (0.05, 50.0);

const MAX_ITER: usize = 200;
const SCORE_TOL: f64 = 1e-8;

/// `ln Σ tᵢˢ` together with the softmax weights' first two moments of `ln t`.
struct PowerMoments {
    log_sum: f64,
    mean_ln: f64,
    var_ln: f64,
}

fn power_moments(sample: &WeibullSample, s: f64) -> PowerMoments {
    let logs: Vec<f64> = sample.times().iter().map(|t| t.ln()).collect();
    let m = logs
        .iter()
        .map(|l| s * l)
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for l in &logs {
        let w = (s * l - m).exp();
        z += w;
        m1 += w * l;
        m2 += w * l * l;
    }
    let mean_ln = m1 / z;
    PowerMoments {
        log_sum: m + z.ln(),
        mean_ln,
        var_ln: (m2 / z - mean_ln * mean_ln).max(0.0),
    }
}

/// `θ*(s) = (d / Σ tᵢˢ)^{1/s}`, the root of `∂l/∂θ = 0` at fixed shape.
pub fn weibull_theta_star(sample: &WeibullSample, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::ParamDomain {
            name: "s".into(),
            value: s,
            constraint: "> 0".into(),
        });
    }
    let d = sample.d();
    if d == 0 {
        return Err(Error::invalid(
            "no events: the MLE of theta lies on the boundary",
        ));
    }
    let pm = power_moments(sample, s);
    Ok((((d as f64).ln() - pm.log_sum) / s).exp())
}

/// Profile log-likelihood `l(θ*(s), s)`.
pub fn weibull_profile_loglik(sample: &WeibullSample, s: f64) -> f64 {
    let d = sample.d() as f64;
    let pm = power_moments(sample, s);
    d * s.ln() + d * d.ln() - d * pm.log_sum + (s - 1.0) * sample.event_log_sum() - d
}

fn profile_derivatives(sample: &WeibullSample, s: f64) -> (f64, f64) {
    let d = sample.d() as f64;
    let pm = power_moments(sample, s);
    let first = d / s - d * pm.mean_ln + sample.event_log_sum();
    let second = -d / (s * s) - d * pm.var_ln;
    (first, second)
}

/// Joint MLE of `(θ, s)`: golden-section search of the profile likelihood in
/// `ln s`, then Newton polishing on the profile score.
pub fn weibull_mle(sample: &WeibullSample) -> Result<FitResult> {
    if sample.d() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 events to estimate (theta, s), got {}",
            sample.d()
        )));
    }
    let (lo, hi) = PROFILE_S_RANGE;
    let prof = |ls: f64| weibull_profile_loglik(sample, ls.exp());

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (prof(c), prof(d));
    let mut iterations = 0;
    while (b - a) > 1e-6 && iterations < MAX_ITER {
        iterations += 1;
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = prof(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = prof(d);
        }
    }

    // Newton on the profile score, kept inside the golden bracket.
    let mut s = (0.5 * (a + b)).exp();
    let (s_lo, s_hi) = (lo, hi);
    let mut status = FitStatus::IterationLimit;
    while iterations < MAX_ITER {
        iterations += 1;
        let (g, h) = profile_derivatives(sample, s);
        if g.abs() < SCORE_TOL * 1e-2 {
            status = FitStatus::Converged;
            break;
        }
        let mut next = s - g / h;
        if !(next > s_lo && next < s_hi) {
            next = next.clamp(s_lo, s_hi);
        }
        if (next - s).abs() <= 4.0 * f64::EPSILON * s {
            s = next;
            status = FitStatus::Converged;
            break;
        }
        s = next;
    }

    let theta = weibull_theta_star(sample, s)?;
    let (u_theta, u_s) = sample.score(theta, s);
    let gradient_norm = u_theta.hypot(u_s);
    let at_edge = (s - s_lo).abs() < 1e-9 * s_lo || (s - s_hi).abs() < 1e-9 * s_hi;
    if at_edge && profile_derivatives(sample, s).0.abs() > SCORE_TOL {
        status = FitStatus::Boundary;
    } else if status == FitStatus::Converged && gradient_norm >= SCORE_TOL {
        status = FitStatus::IterationLimit;
    }
    let info = weibull_observed_info(sample, theta, s)?.observed_information();
    Ok(FitResult {
        model: "weibull-cdf".into(),
        theta_hat: ParamVector(vec![theta, s]),
        objective: sample.log_likelihood(theta, s),
        objective_kind: ObjectiveKind::LogLikelihood,
        s2: None,
        info: Some(info),
        converged: status == FitStatus::Converged,
        iterations,
        status,
        gradient_norm,
    })
}
