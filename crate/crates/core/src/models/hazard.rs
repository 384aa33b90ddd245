//! Hazard functions: Armitage-Doll power hazard and the proportional-hazards
//! form. These sit outside the gradient / information machinery.

use crate::error::{Error, Result};

pub struct HazardSpec {
    /// Rate scale, `c > 0`.
    pub c: f64,
    /// Number of stages, `k >= 1`.
    pub k: u32,
    /// Tumour-growth lag.
    pub t0: f64,
    pub baseline: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub beta: Vec<f64>,
}

impl HazardSpec {
    pub fn armitage_doll(c: f64, k: u32, t0: f64) -> Self {
        HazardSpec {
            c,
            k,
            t0,
            baseline: Box::new(|_| 1.0),
            beta: Vec::new(),
        }
    }

    pub fn proportional(
        baseline: impl Fn(f64) -> f64 + Send + Sync + 'static,
        beta: Vec<f64>,
    ) -> Self {
        HazardSpec {
            c: 1.0,
            k: 1,
            t0: 0.0,
            baseline: Box::new(baseline),
            beta,
        }
    }
}

impl std::fmt::Debug for HazardSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HazardSpec")
            .field("c", &self.c)
            .field("k", &self.k)
            .field("t0", &self.t0)
            .field("beta", &self.beta)
            .finish_non_exhaustive()
    }
}

/// `λ(t) = c (t − t₀)^{k−1}`, defined for `t > t₀`.
pub fn hazard_ad(t: f64, spec: &HazardSpec) -> Result<f64> {
    if !(spec.c > 0.0 && spec.c.is_finite()) {
        return Err(Error::ParamDomain {
            name: "c".into(),
            value: spec.c,
            constraint: "> 0".into(),
        });
    }
    if spec.k < 1 {
        return Err(Error::invalid("number of stages k must be >= 1"));
    }
    if !(spec.t0 >= 0.0) {
        return Err(Error::ParamDomain {
            name: "t0".into(),
            value: spec.t0,
            constraint: ">= 0".into(),
        });
    }
    if !(t > spec.t0) {
        return Err(Error::InputDomain {
            name: "t".into(),
            value: t,
            constraint: format!("> t0 = {}", spec.t0),
        });
    }
    Ok(spec.c * (t - spec.t0).powi(spec.k as i32 - 1))
}

/// `λ(t) = λ₀(t) · exp(βᵀW)`.
pub fn hazard_cox(t: f64, w: &[f64], spec: &HazardSpec) -> Result<f64> {
    if w.len() != spec.beta.len() {
        return Err(Error::Dimension(format!(
            "beta has {} entries, covariates have {}",
            spec.beta.len(),
            w.len()
        )));
    }
    let base = (spec.baseline)(t);
    if !(base > 0.0 && base.is_finite()) {
        return Err(Error::InputDomain {
            name: "baseline(t)".into(),
            value: base,
            constraint: "> 0".into(),
        });
    }
    let score: f64 = spec.beta.iter().zip(w).map(|(b, x)| b * x).sum();
    Ok(base * score.exp())
}
