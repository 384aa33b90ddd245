//! Test-side oracles shared by the integration tests. Nothing here calls
//! into the library's numerics except `ModelDef::evaluate`.
#![allow(dead_code)]

use bioassay_core::models::{Arity, Constraint, Input, InputDomain, ModelDef};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let m = rng.gen_range(lo..hi);
    if rng.gen::<bool>() {
        m
    } else {
        -m
    }
}

/// Number of parameters used for a model in sampled tests.
pub fn test_arity(m: &ModelDef) -> usize {
    match m.arity {
        Arity::Exact(k) => k,
        Arity::AtLeast(k) => k + 1,
    }
}

/// A random interior point of the parameter space. Magnitudes stay in
/// `[0.1, 1.5]` so every registry model is finite on the sampled inputs.
pub fn sample_theta(m: &ModelDef, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..test_arity(m))
        .map(|i| match m.param_spec(i).constraint {
            Constraint::Any | Constraint::NonZero => signed(rng, 0.1, 1.5),
            Constraint::Positive => rng.gen_range(0.2..2.0),
            Constraint::NonNegative => rng.gen_range(0.05..1.5),
            Constraint::PositiveInteger => f64::from(rng.gen_range(1u32..=4)),
        })
        .collect()
}

/// A random admissible input strictly inside the model's domain.
pub fn sample_input(m: &ModelDef, rng: &mut ChaCha8Rng) -> Input {
    let one = |rng: &mut ChaCha8Rng| match m.input_domain {
        InputDomain::AllReals => signed(rng, 0.05, 2.0),
        InputDomain::NonNegative | InputDomain::Positive => rng.gen_range(0.1..3.0),
    };
    let u = one(rng);
    if m.input_dim == 2 {
        Input::pair(u, one(rng))
    } else {
        Input::scalar(u)
    }
}

/// Ridders' extrapolated central difference: returns the derivative and an
/// error estimate. The step shrinks geometrically from `h0`, so functions
/// that vary on a scale much finer than `h0` are still resolved.
pub fn ridders(f: impl Fn(f64) -> f64, x: f64, h0: f64) -> (f64, f64) {
    const CON: f64 = 1.4;
    const NTAB: usize = 12;
    let con2 = CON * CON;
    let mut a = [[0.0f64; NTAB]; NTAB];
    let mut h = h0;
    a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
    let mut err = f64::INFINITY;
    let mut ans = a[0][0];
    for i in 1..NTAB {
        h /= CON;
        a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
        let mut fac = con2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= con2;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                ans = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    (ans, err)
}

/// Finite-difference partial of `f(u, ·)` in coordinate `i`: the Ridders
/// estimate with the smallest error over three starting steps, all inside
/// the parameter's domain.
pub fn fd_partial(m: &ModelDef, x: Input, theta: &[f64], i: usize) -> f64 {
    let mut h0 = 0.1 * theta[i].abs().max(1.0);
    if matches!(m.param_spec(i).constraint, Constraint::Positive | Constraint::NonNegative) {
        h0 = h0.min(0.5 * theta[i]);
    }
    let at = |v: f64| {
        let mut t = theta.to_vec();
        t[i] = v;
        m.evaluate(x, &t).expect("finite-difference probe is admissible")
    };
    [1.0, 1e-2, 1e-4]
        .iter()
        .map(|k| ridders(&at, theta[i], h0 * k))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three probes")
        .0
}

/// Finite-difference gradient; integer-valued parameters get 0.
pub fn fd_gradient(m: &ModelDef, x: Input, theta: &[f64]) -> Vec<f64> {
    (0..theta.len())
        .map(|i| {
            if m.param_spec(i).constraint == Constraint::PositiveInteger {
                0.0
            } else {
                fd_partial(m, x, theta, i)
            }
        })
        .collect()
}

/// Largest componentwise relative error of `g` against the oracle `fd`.
/// The denominator is floored at `1e-4 · max(|f|, ‖fd‖∞)`, the scale below
/// which the oracle's own rounding dominates.
pub fn gradient_rel_error(g: &[f64], fd: &[f64], f: f64) -> f64 {
    let scale = fd.iter().fold(f.abs(), |a, v| a.max(v.abs()));
    let floor = 1e-4 * scale.max(f64::MIN_POSITIVE);
    g.iter()
        .zip(fd)
        .map(|(a, b)| (a - b).abs() / b.abs().max(floor))
        .fold(0.0, f64::max)
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// Censored Weibull log-likelihood with survival `exp(−(θt)^s)`.
pub fn weibull_loglik(times: &[f64], events: &[bool], theta: f64, s: f64) -> f64 {
    let mut l = 0.0;
    for (&t, &e) in times.iter().zip(events) {
        if e {
            l += s.ln() + s * theta.ln() + (s - 1.0) * t.ln();
        }
        l -= (theta * t).powf(s);
    }
    l
}

/// `∂l/∂θ = s d/θ − s θ^{s−1} Σ tᵢˢ` and its two terms.
pub fn weibull_score_theta(times: &[f64], events: &[bool], theta: f64, s: f64) -> (f64, f64, f64) {
    let d = events.iter().filter(|e| **e).count() as f64;
    let a = s * d / theta;
    let b = s * theta.powf(s - 1.0) * times.iter().map(|t| t.powf(s)).sum::<f64>();
    (a - b, a, b)
}

/// Golden-section maximizer of a unimodal `f` on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol * (1.0 + lo.abs() + hi.abs()) {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}

/// Draws a Weibull time with survival `exp(−(θt)^s)` by inversion.
pub fn weibull_draw(rng: &mut ChaCha8Rng, theta: f64, s: f64) -> f64 {
    let u: f64 = rng.gen();
    (-(1.0 - u).ln()).powf(1.0 / s) / theta
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
}
