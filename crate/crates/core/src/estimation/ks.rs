//! One-sample Kolmogorov-Smirnov statistic against a fitted CDF.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{Family, ModelDef};
use crate::special::kolmogorov_sf;

/// The asymptotic p-value is flagged as reliable from this sample size on.
pub const KS_ASYMPTOTIC_MIN_N: usize = 35;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub n: usize,
    /// `sup |Fₙ − F|`.
    pub d: f64,
    /// `Q(√n D)` from the limiting Kolmogorov distribution.
    pub p_approx: f64,
    /// `n >= 35`.
    pub valid: bool,
}

/// Exact `D` over the order statistics, with an asymptotic p-value.
pub fn ks_test(sample: &[f64], model: &ModelDef, theta: &[f64]) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::invalid("KS test needs a nonempty sample"));
    }
    if model.family != Family::DoseResponseCdf {
        return Err(Error::invalid(format!(
            "`{}` is not a dose-response CDF",
            model.id_str
        )));
    }
    model.check_theta(theta)?;
    let mut xs = sample.to_vec();
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("sample contains NaN"));
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        // Doses below zero have F = 0.
        let f = if x <= 0.0 {
            0.0
        } else {
            model.evaluate(x, theta)?
        };
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    Ok(KsResult {
        n,
        d,
        p_approx: kolmogorov_sf(nf.sqrt() * d),
        valid: n >= KS_ASYMPTOTIC_MIN_N,
    })
}

/// `D` above which the asymptotic test rejects at level `alpha`.
pub fn ks_critical_value(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    // Q is decreasing in λ; bisect Q(λ) = α.
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) / (n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelId;

    #[test]
    fn single_point_at_median() {
        let m = ModelId::OneHit.def();
        let r = ks_test(&[2f64.ln()], m, &[1.0]).unwrap();
        assert!((r.d - 0.5).abs() < 1e-15);
        assert!(!r.valid);
    }

    #[test]
    fn mid_step_quantiles() {
        let m = ModelId::OneHit.def();
        let n = 40;
        let xs: Vec<f64> = (0..n)
            .map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln())
            .collect();
        let r = ks_test(&xs, m, &[1.0]).unwrap();
        assert!((r.d - 0.5 / n as f64).abs() < 1e-12);
        assert!(r.valid);
    }

    #[test]
    fn critical_value_matches_tables() {
        let c = ks_critical_value(100, 0.05).unwrap();
        assert!((c - 0.135_809_9).abs() < 1e-6);
    }

    #[test]
    fn empty_rejected() {
        assert!(ks_test(&[], ModelId::OneHit.def(), &[1.0]).is_err());
    }
}
