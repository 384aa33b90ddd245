//! Nonlinear growth curves and their gradients.

use std::f64::consts::PI;

/// Logistic sigmoid `1 / (1 + e^{-z})` without overflow.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(super) fn gompertz(u: f64, t: &[f64]) -> f64 {
    t[0] * (t[1] * (t[2] * u).exp()).exp()
}

pub(super) fn gompertz_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let e = (t[2] * u).exp();
    let g = (t[1] * e).exp();
    vec![g, t[0] * g * e, t[0] * g * t[1] * e * u]
}

pub(super) fn janoschek(u: f64, t: &[f64]) -> f64 {
    t[0] + t[1] * (t[2] * u.powf(t[3])).exp()
}

pub(super) fn janoschek_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let pw = u.powf(t[3]);
    let x = (t[2] * pw).exp();
    vec![1.0, x, t[1] * x * pw, t[1] * x * t[2] * pw * u.ln()]
}

pub(super) fn logistic(u: f64, t: &[f64]) -> f64 {
    t[0] / (1.0 + t[1] * (t[2] * u).exp())
}

pub(super) fn logistic_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let e = (t[2] * u).exp();
    let d = 1.0 + t[1] * e;
    let d2 = d * d;
    vec![1.0 / d, -t[0] * e / d2, -t[0] * t[1] * e * u / d2]
}

pub(super) fn bertalanffy(u: f64, t: &[f64]) -> f64 {
    (t[0] + t[1] * (t[2] * u).exp()).powi(3)
}

pub(super) fn bertalanffy_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let e = (t[2] * u).exp();
    let b2 = 3.0 * (t[0] + t[1] * e).powi(2);
    vec![b2, b2 * e, b2 * t[1] * e * u]
}

pub(super) fn tanh(u: f64, t: &[f64]) -> f64 {
    t[0] + t[1] * (t[2] * (u - t[3])).tanh()
}

// θ₀ enters additively; the remaining slots never read it.
pub(super) fn tanh_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let th = (t[2] * (u - t[3])).tanh();
    let sech2 = 1.0 - th * th;
    vec![1.0, th, t[1] * sech2 * (u - t[3]), -t[1] * sech2 * t[2]]
}

/// Printed with arctan, not tanh.
pub(super) fn tanh3(u: f64, t: &[f64]) -> f64 {
    0.5 * t[0] * (1.0 + 2.0 / PI * (t[1] * (u - t[2])).atan())
}

pub(super) fn tanh3_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let z = t[1] * (u - t[2]);
    let w = 1.0 / (1.0 + z * z);
    vec![
        0.5 * (1.0 + 2.0 / PI * z.atan()),
        t[0] / PI * (u - t[2]) * w,
        -t[0] / PI * t[1] * w,
    ]
}

pub(super) fn tanh4(u: f64, t: &[f64]) -> f64 {
    t[0] + 2.0 / PI * t[1] * (t[2] * (u - t[3])).atan()
}

pub(super) fn tanh4_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let z = t[2] * (u - t[3]);
    let w = 1.0 / (1.0 + z * z);
    vec![
        1.0,
        2.0 / PI * z.atan(),
        2.0 / PI * t[1] * (u - t[3]) * w,
        -2.0 / PI * t[1] * t[2] * w,
    ]
}

pub(super) fn exp_time_power(u: f64, t: &[f64]) -> f64 {
    t[0] * u.powf(t[1])
}

pub(super) fn exp_time_power_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let pw = u.powf(t[1]);
    vec![pw, t[0] * pw * u.ln()]
}

/// `θ₀ − θ₁ e^{−θ₂ ln u}`.
pub(super) fn exp_time_power_repar(u: f64, t: &[f64]) -> f64 {
    t[0] - t[1] * (-t[2] * u.ln()).exp()
}

pub(super) fn exp_time_power_repar_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let ln_u = u.ln();
    let e = (-t[2] * ln_u).exp();
    vec![1.0, -e, t[1] * ln_u * e]
}

pub(super) fn weibull_reconstructed(u: f64, t: &[f64]) -> f64 {
    t[0] - (t[0] - t[1]) * (-(t[2] * u).powf(t[3])).exp()
}

pub(super) fn weibull_reconstructed_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let w = (t[2] * u).powf(t[3]);
    let x = (-w).exp();
    let span = t[0] - t[1];
    vec![
        1.0 - x,
        x,
        span * x * t[3] * w / t[2],
        span * x * w * (t[2] * u).ln(),
    ]
}

fn cubic_exponent(u: f64, t: &[f64]) -> f64 {
    t[1] + u * (t[2] + u * (t[3] + u * t[4]))
}

pub(super) fn gen_logistic_i(u: f64, t: &[f64]) -> f64 {
    t[0] * sigmoid(-cubic_exponent(u, t))
}

pub(super) fn gen_logistic_i_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let eta = cubic_exponent(u, t);
    let s = sigmoid(eta);
    // e^η / (1 + e^η)² = s(1 − s)
    let w = -t[0] * s * (1.0 - s);
    vec![1.0 - s, w, w * u, w * u * u, w * u * u * u]
}

fn box_cox(u: f64, lambda: f64) -> f64 {
    (u.powf(lambda) - 1.0) / lambda
}

pub(super) fn gen_logistic_ii(u: f64, t: &[f64]) -> f64 {
    t[0] * sigmoid(-(t[1] + t[2] * box_cox(u, t[3])))
}

pub(super) fn gen_logistic_ii_grad(u: f64, t: &[f64]) -> Vec<f64> {
    let g = box_cox(u, t[3]);
    let s = sigmoid(t[1] + t[2] * g);
    let w = -t[0] * s * (1.0 - s);
    let pw = u.powf(t[3]);
    let dg = (t[3] * pw * u.ln() - pw + 1.0) / (t[3] * t[3]);
    vec![1.0 - s, w, w * g, w * t[2] * dg]
}
