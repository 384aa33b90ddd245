//! Quantal dose-response CDFs: one-hit, multi-hit, Weibull, multistage and
//! the logit/probit tolerance models.

use super::growth::sigmoid;
use super::ModelId;
use crate::special::{gamma_pq, ln_gamma, normal_cdf, normal_pdf};

/// Gamma(k, 1) density at `y`, with the `y = 0` limits spelled out.
fn gamma_density(k: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return if k == 1.0 { 1.0 } else { 0.0 };
    }
    ((k - 1.0) * y.ln() - y - ln_gamma(k)).exp()
}

pub(super) fn cdf(id: ModelId, x: f64, t: &[f64]) -> f64 {
    match id {
        ModelId::OneHit => -(-t[0] * x).exp_m1(),
        ModelId::MultiHit => gamma_pq(t[0], t[1] * x).0,
        ModelId::WeibullCdf => -(-(t[0] * x).powf(t[1])).exp_m1(),
        ModelId::Multistage => -(-poly(x, t)).exp_m1(),
        ModelId::LogitCdf => sigmoid(t[0] + t[1] * x),
        ModelId::ProbitCdf => normal_cdf(t[0] + t[1] * x),
        _ => unreachable!("not a dose-response CDF"),
    }
}

fn poly(x: f64, t: &[f64]) -> f64 {
    t.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub(super) fn cdf_grad(id: ModelId, x: f64, t: &[f64]) -> Vec<f64> {
    match id {
        ModelId::OneHit => vec![x * (-t[0] * x).exp()],
        // k is structural; only the dose scale is differentiated
        ModelId::MultiHit => vec![0.0, x * gamma_density(t[0], t[1] * x)],
        ModelId::WeibullCdf => {
            if x == 0.0 {
                return vec![0.0, 0.0];
            }
            let w = (t[0] * x).powf(t[1]);
            let surv = (-w).exp();
            vec![surv * t[1] * w / t[0], surv * w * (t[0] * x).ln()]
        }
        ModelId::Multistage => {
            let surv = (-poly(x, t)).exp();
            let mut pw = 1.0;
            t.iter()
                .map(|_| {
                    let g = pw * surv;
                    pw *= x;
                    g
                })
                .collect()
        }
        ModelId::LogitCdf => {
            let s = sigmoid(t[0] + t[1] * x);
            let w = s * (1.0 - s);
            vec![w, x * w]
        }
        ModelId::ProbitCdf => {
            let phi = normal_pdf(t[0] + t[1] * x);
            vec![phi, x * phi]
        }
        _ => unreachable!("not a dose-response CDF"),
    }
}

/// `dF/dx`.
pub(super) fn density(id: ModelId, x: f64, t: &[f64]) -> f64 {
    match id {
        ModelId::OneHit => t[0] * (-t[0] * x).exp(),
        ModelId::MultiHit => t[1] * gamma_density(t[0], t[1] * x),
        ModelId::WeibullCdf => {
            if x == 0.0 {
                return match t[1] {
                    s if s < 1.0 => f64::INFINITY,
                    s if s == 1.0 => t[0],
                    _ => 0.0,
                };
            }
            let w = (t[0] * x).powf(t[1]);
            (-w).exp() * t[1] * w / x
        }
        ModelId::Multistage => {
            let surv = (-poly(x, t)).exp();
            let slope = t
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, &c)| acc * x + i as f64 * c);
            surv * slope
        }
        ModelId::LogitCdf => {
            let s = sigmoid(t[0] + t[1] * x);
            t[1] * s * (1.0 - s)
        }
        ModelId::ProbitCdf => t[1] * normal_pdf(t[0] + t[1] * x),
        _ => unreachable!("not a dose-response CDF"),
    }
}
