//! Relative efficiency of the exposure coefficient when a second covariate
//! is left out of the model, and a logistic omission experiment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{fit_logit, BinaryDataset, BinaryRow};
use crate::models::sigmoid;

/// `ρ₁₂ = corr(x₁, x₂)` and `ρ_{Y2.1}`, the partial correlation of Y and x₂
/// given x₁. Both lie strictly inside (−1, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationPair {
    pub rho12: f64,
    #[serde(rename = "rhoY2_1")]
    pub rho_y2_1: f64,
}

impl CorrelationPair {
    pub fn new(rho12: f64, rho_y2_1: f64) -> Result<Self> {
        for (name, v) in [("rho12", rho12), ("rhoY2_1", rho_y2_1)] {
            if !(v > -1.0 && v < 1.0) {
                return Err(Error::ParamDomain {
                    name: name.into(),
                    value: v,
                    constraint: "strictly inside (-1, 1)".into(),
                });
            }
        }
        Ok(CorrelationPair { rho12, rho_y2_1 })
    }
}

/// `Var(β̂₁*) / Var(β̂₁) = (1 − ρ₁₂²) / (1 − ρ²_{Y2.1})`, where β̂₁* comes
/// from the model without x₂.
pub fn efficiency(pair: CorrelationPair) -> f64 {
    (1.0 - pair.rho12 * pair.rho12) / (1.0 - pair.rho_y2_1 * pair.rho_y2_1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EfficiencyClass {
    Unity,
    Below,
    Above,
}

impl std::fmt::Display for EfficiencyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EfficiencyClass::Unity => "unity",
            EfficiencyClass::Below => "below",
            EfficiencyClass::Above => "above",
        })
    }
}

/// Compares `|ρ₁₂|` with `|ρ_{Y2.1}|`; agrees with the sign of
/// `efficiency − 1`.
pub fn classify(pair: CorrelationPair) -> EfficiencyClass {
    let (a, b) = (pair.rho12.abs(), pair.rho_y2_1.abs());
    if a == b {
        EfficiencyClass::Unity
    } else if a > b {
        EfficiencyClass::Below
    } else {
        EfficiencyClass::Above
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmissionResult {
    pub beta1_full: f64,
    pub beta1_restricted: f64,
    pub se_full: f64,
    pub se_restricted: f64,
    /// Estimated `Var(β̂₁*) / Var(β̂₁)`.
    pub var_ratio: f64,
    /// Datasets redrawn because of separation.
    pub resamples: u32,
}

const MAX_RESAMPLES: u32 = 100;

/// Draws `n` rows with standard normal `(x₁, x₂)` of correlation `rho12` and
/// `Y ~ Bernoulli(σ(β₀ + β₁x₁ + β₂x₂))`, then fits the logit model with and
/// without x₂. A separated draw is replaced by one from sub-seed `seed + k`.
pub fn omission_experiment(
    n: usize,
    beta: [f64; 3],
    rho12: f64,
    seed: u64,
) -> Result<OmissionResult> {
    if n < 50 {
        return Err(Error::invalid(format!("n = {n} must be at least 50")));
    }
    CorrelationPair::new(rho12, 0.0)?;
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::invalid("beta must be finite"));
    }
    let resid = (1.0 - rho12 * rho12).sqrt();
    for k in 0..=MAX_RESAMPLES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(u64::from(k)));
        let rows: Vec<BinaryRow> = (0..n)
            .map(|_| {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let x1 = z1;
                let x2 = rho12 * z1 + resid * z2;
                let pr = sigmoid(beta[0] + beta[1] * x1 + beta[2] * x2);
                BinaryRow {
                    x1,
                    x2: Some(x2),
                    y: rng.gen::<f64>() < pr,
                }
            })
            .collect();
        let data = BinaryDataset::new(rows)?;
        let fits = fit_logit(&data, true).and_then(|f| Ok((f, fit_logit(&data, false)?)));
        match fits {
            Ok((full, restricted)) => {
                let (se_f, se_r) = (full.standard_errors[1], restricted.standard_errors[1]);
                return Ok(OmissionResult {
                    beta1_full: full.beta()[1],
                    beta1_restricted: restricted.beta()[1],
                    se_full: se_f,
                    se_restricted: se_r,
                    var_ratio: (se_r * se_r) / (se_f * se_f),
                    resamples: k,
                });
            }
            Err(Error::Separation(_)) | Err(Error::InvalidArgument(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_RESAMPLES as usize,
        reason: "every resampled dataset was separated".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: f64, b: f64) -> CorrelationPair {
        CorrelationPair::new(a, b).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(efficiency(pair(0.0, 0.0)), 1.0);
        assert_eq!(efficiency(pair(0.3, -0.3)), 1.0);
        assert!((efficiency(pair(0.0, 0.6)) - 1.5625).abs() < 1e-15);
        assert_eq!(classify(pair(0.3, 0.3)), EfficiencyClass::Unity);
        assert_eq!(classify(pair(0.5, 0.1)), EfficiencyClass::Below);
        assert_eq!(classify(pair(0.1, 0.5)), EfficiencyClass::Above);
    }

    #[test]
    fn rejects_unit_correlation() {
        assert!(CorrelationPair::new(1.0, 0.0).is_err());
        assert!(CorrelationPair::new(0.0, -1.0).is_err());
        assert!(CorrelationPair::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn experiment_is_deterministic() {
        let a = omission_experiment(200, [0.0, 1.0, 1.0], 0.2, 9).unwrap();
        let b = omission_experiment(200, [0.0, 1.0, 1.0], 0.2, 9).unwrap();
        assert_eq!(a, b);
        assert!(omission_experiment(10, [0.0, 1.0, 1.0], 0.0, 1).is_err());
    }
}
