//! Low-dose extrapolation: the dose `L_p` at which a dose-response CDF
//! reaches risk `p`, and a delta-method lower confidence bound on it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::FitResult;
use crate::models::{Family, ModelDef, ModelId, ParamVector};
use crate::special::normal_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskType {
    /// `F(L) = p`.
    Total,
    /// `(F(L) − F(0)) / (1 − F(0)) = p`.
    Extra,
}

impl std::str::FromStr for RiskType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(RiskType::Total),
            "extra" => Ok(RiskType::Extra),
            other => Err(Error::invalid(format!(
                "risk type `{other}` is not one of: total, extra"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercentileQuery {
    pub model: &'static ModelDef,
    pub theta: ParamVector,
    pub p: f64,
    pub risk_type: RiskType,
}

impl PercentileQuery {
    /// Validates the query. Without an explicit risk type, extra risk is used
    /// when the background `F(0)` is positive and total risk otherwise.
    pub fn new(
        model: &'static ModelDef,
        theta: impl Into<ParamVector>,
        p: f64,
        risk_type: Option<RiskType>,
    ) -> Result<Self> {
        if model.family != Family::DoseResponseCdf {
            return Err(Error::invalid(format!(
                "`{}` is not a dose-response CDF",
                model.id_str
            )));
        }
        let theta = theta.into();
        model.check_theta(&theta)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!("p = {p} must lie in (0, 1)")));
        }
        let f0 = model.evaluate(0.0, &theta)?;
        let risk_type = risk_type.unwrap_or(if f0 > 0.0 {
            RiskType::Extra
        } else {
            RiskType::Total
        });
        if risk_type == RiskType::Extra && f0 >= 1.0 {
            return Err(Error::invalid("extra risk needs F(0) < 1"));
        }
        Ok(PercentileQuery {
            model,
            theta,
            p,
            risk_type,
        })
    }

    /// The background response `F(0)`.
    pub fn background(&self) -> f64 {
        self.model.evaluate(0.0, &self.theta).unwrap_or(0.0)
    }

    /// The target on the total-risk scale.
    pub fn total_target(&self) -> f64 {
        match self.risk_type {
            RiskType::Total => self.p,
            RiskType::Extra => {
                let f0 = self.background();
                f0 + self.p * (1.0 - f0)
            }
        }
    }
}

const MAX_DOUBLINGS: usize = 60;

/// `L_p` by closed form where one exists, by bisection otherwise.
pub fn percentile(q: &PercentileQuery) -> Result<f64> {
    let target = q.total_target();
    let f0 = q.background();
    if target <= f0 {
        return Err(Error::Unattainable {
            p: q.p,
            lo: f0,
            hi: 1.0,
        });
    }
    let t = &q.theta;
    let closed = match q.model.id {
        ModelId::OneHit => Some(-(-target).ln_1p() / t[0]),
        ModelId::WeibullCdf => Some((-(-target).ln_1p()).powf(1.0 / t[1]) / t[0]),
        ModelId::LogitCdf => Some(((target / (1.0 - target)).ln() - t[0]) / t[1]),
        ModelId::ProbitCdf => Some((normal_quantile(target) - t[0]) / t[1]),
        _ => None,
    };
    match closed {
        Some(x) if x.is_finite() => Ok(x.max(0.0)),
        Some(_) => Err(Error::NonFinite(format!(
            "closed-form percentile for p = {}",
            q.p
        ))),
        None => percentile_bisect(q),
    }
}

/// `L_p` by monotone bisection on `[0, x_hi]`, `x_hi` doubled from 1.
pub fn percentile_bisect(q: &PercentileQuery) -> Result<f64> {
    let target = q.total_target();
    let f = |x: f64| q.model.evaluate(x, &q.theta);
    let f0 = f(0.0)?;
    if target <= f0 {
        return Err(Error::Unattainable {
            p: q.p,
            lo: f0,
            hi: 1.0,
        });
    }
    let mut hi = 1.0;
    let mut f_hi = f(hi)?;
    let mut doublings = 0;
    while f_hi < target {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::Unattainable {
                p: q.p,
                lo: f0,
                hi: f_hi,
            });
        }
        hi *= 2.0;
        f_hi = f(hi)?;
        doublings += 1;
    }
    let mut lo = 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if (fm - target).abs() <= 1e-15 {
            return Ok(mid);
        }
        if fm < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `∂L_p/∂θ` by implicit differentiation of `F(L_p; θ) = q(θ)`.
pub fn percentile_gradient(q: &PercentileQuery, lp: f64) -> Result<Vec<f64>> {
    let m = q.model;
    let density = m.dose_derivative(lp, &q.theta)?;
    if !(density > 0.0) {
        return Err(Error::NonFinite(format!(
            "dose-response slope vanishes at L_p = {lp}"
        )));
    }
    let g_lp = m.gradient(lp, &q.theta)?;
    let g_0 = match q.risk_type {
        RiskType::Total => vec![0.0; g_lp.len()],
        RiskType::Extra => m.gradient(0.0, &q.theta)?,
    };
    Ok(g_lp
        .iter()
        .zip(&g_0)
        .map(|(a, b)| ((1.0 - q.p) * b - a) / density)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VsdResult {
    pub lp: f64,
    /// Lower confidence bound on `L_p`, never negative.
    pub vsd: f64,
    pub se: f64,
    pub z: f64,
    pub confidence: f64,
    /// The raw bound `L_p − z·SE` was negative and got clamped to 0.
    pub clamped: bool,
    pub method: &'static str,
}

/// Delta-method bound `L_p − z·SE(L̂_p)` using the fit's information.
///
/// The percentile is evaluated at `q.theta`; integer-valued parameters are
/// held fixed. `confidence = 0.5` gives `z = 0` and returns `L_p` itself.
pub fn vsd_upper_limit(q: &PercentileQuery, fit: &FitResult, confidence: f64) -> Result<VsdResult> {
    if !(0.5..1.0).contains(&confidence) {
        return Err(Error::invalid(format!(
            "confidence = {confidence} must lie in [0.5, 1)"
        )));
    }
    let info = fit
        .info
        .as_ref()
        .ok_or_else(|| Error::Singular("fit carries no information matrix".into()))?;
    if info.dim() != q.theta.len() {
        return Err(Error::Dimension(format!(
            "information is {0}x{0}, theta has {1} entries",
            info.dim(),
            q.theta.len()
        )));
    }
    let free = q.model.free_params(q.theta.len());
    let cov = info.submatrix(&free).inverse()?;
    let lp = percentile(q)?;
    let g = percentile_gradient(q, lp)?;
    let gf = nalgebra::DVector::from_iterator(free.len(), free.iter().map(|&i| g[i]));
    let var = (gf.transpose() * &cov * &gf)[(0, 0)];
    let se = var.max(0.0).sqrt();
    let z = if confidence == 0.5 {
        0.0
    } else {
        normal_quantile(confidence)
    };
    let raw = lp - z * se;
    Ok(VsdResult {
        lp,
        vsd: raw.max(0.0),
        se,
        z,
        confidence,
        clamped: raw < 0.0,
        method: "delta",
    })
}
