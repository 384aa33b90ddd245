//! Model fitting: censored Weibull MLE, Gauss-Newton least squares, quantal
//! binomial MLE for dose-response CDFs, logistic regression for the covariate
//! models, and the Kolmogorov-Smirnov goodness-of-fit statistic.

mod ks;
mod least_squares;
mod logit;
mod quantal;
mod weibull;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fisher::InfoMatrix;
use crate::models::{Input, ParamVector};

pub use ks::{ks_critical_value, ks_test, KsResult};
pub use least_squares::{fit_least_squares, LsOptions};
pub use logit::{fit_logit, LogitFit};
pub use quantal::{default_start, fit_quantal};
pub use weibull::{weibull_mle, weibull_profile_loglik, weibull_theta_star, PROFILE_S_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    LogLikelihood,
    Sse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    Converged,
    IterationLimit,
    /// Optimum sits on the edge of the search range.
    Boundary,
    /// No damped step reduced the objective.
    Stalled,
}

/// Outcome of any fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub model: String,
    pub theta_hat: ParamVector,
    pub objective: f64,
    pub objective_kind: ObjectiveKind,
    /// Residual variance estimate; absent when undefined (e.g. n = p).
    pub s2: Option<f64>,
    pub info: Option<InfoMatrix>,
    pub converged: bool,
    pub iterations: usize,
    pub status: FitStatus,
    pub gradient_norm: f64,
}

impl FitResult {
    /// Standard errors from the inverse information, one per parameter.
    /// Parameters outside `free` (integer-valued ones) get `None`.
    pub fn standard_errors(&self, free: &[usize]) -> Result<Vec<Option<f64>>> {
        let info = self
            .info
            .as_ref()
            .ok_or_else(|| Error::Singular("fit carries no information matrix".into()))?;
        let inv = info.submatrix(free).inverse()?;
        let mut out = vec![None; self.theta_hat.len()];
        for (k, &i) in free.iter().enumerate() {
            out[i] = Some(inv[(k, k)].sqrt());
        }
        Ok(out)
    }
}

/// Pairs `(u, y)` for least-squares fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    pub points: Vec<(Input, f64)>,
}

impl RegressionDataset {
    pub fn new(points: Vec<(Input, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("regression dataset is empty"));
        }
        Ok(RegressionDataset { points })
    }

    pub fn from_scalar(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::new(points.into_iter().map(|(u, y)| (Input::scalar(u), y)).collect())
    }

    pub fn inputs(&self) -> Vec<Input> {
        self.points.iter().map(|p| p.0).collect()
    }
}

/// Grouped binary outcomes at each dose.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantalDataset {
    pub groups: Vec<QuantalGroup>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantalGroup {
    pub dose: f64,
    pub n: u64,
    pub events: u64,
}

impl QuantalDataset {
    pub fn new(groups: Vec<QuantalGroup>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::invalid("quantal dataset is empty"));
        }
        for g in &groups {
            if g.events > g.n {
                return Err(Error::invalid(format!(
                    "dose {}: events {} exceed group size {}",
                    g.dose, g.events, g.n
                )));
            }
            if !(g.dose.is_finite() && g.dose >= 0.0) {
                return Err(Error::InputDomain {
                    name: "dose".into(),
                    value: g.dose,
                    constraint: ">= 0".into(),
                });
            }
        }
        Ok(QuantalDataset { groups })
    }
}

/// Rows `(x₁, x₂?, y)` with binary `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDataset {
    rows: Vec<BinaryRow>,
    has_x2: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryRow {
    pub x1: f64,
    pub x2: Option<f64>,
    pub y: bool,
}

impl BinaryDataset {
    pub fn new(rows: Vec<BinaryRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("binary dataset is empty"));
        }
        let has_x2 = rows[0].x2.is_some();
        if rows.iter().any(|r| r.x2.is_some() != has_x2) {
            return Err(Error::invalid("x2 must be present for all rows or none"));
        }
        Ok(BinaryDataset { rows, has_x2 })
    }

    pub fn rows(&self) -> &[BinaryRow] {
        &self.rows
    }

    pub fn has_x2(&self) -> bool {
        self.has_x2
    }
}

/// Relative risk for a unit change of the exposure, `e^{β₁}`.
pub fn relative_risk(beta1: f64) -> f64 {
    beta1.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_risk_examples() {
        assert_eq!(relative_risk(0.0), 1.0);
        assert!((relative_risk(2f64.ln()) - 2.0).abs() < 1e-15);
        assert!((relative_risk(-1.0) - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn dataset_validation() {
        assert!(RegressionDataset::new(vec![]).is_err());
        assert!(QuantalDataset::new(vec![QuantalGroup { dose: 1.0, n: 3, events: 4 }]).is_err());
        let mixed = vec![
            BinaryRow { x1: 0.0, x2: Some(1.0), y: true },
            BinaryRow { x1: 0.0, x2: None, y: false },
        ];
        assert!(BinaryDataset::new(mixed).is_err());
    }
}
