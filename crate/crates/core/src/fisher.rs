//! Fisher information for mean-response models and the observed information
//! of the censored Weibull likelihood.
//!
//! For a model `y = f(u, θ) + ε`, `ε ~ N(0, σ²)`, one observation carries
//! `i(θ) = ∇f ∇fᵀ / σ²`; a design carries the sum over its points.

use nalgebra::{DMatrix, Matrix2};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::models::{Input, ModelDef};

/// Symmetric information matrix together with the variance it was scaled by.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix {
    pub entries: DMatrix<f64>,
    pub sigma2: f64,
}

fn rows<S: Serializer>(m: &DMatrix<f64>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = ser.serialize_seq(Some(m.nrows()))?;
    for r in 0..m.nrows() {
        let row: Vec<f64> = m.row(r).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl Serialize for InfoMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            #[serde(serialize_with = "rows")]
            entries: &'a DMatrix<f64>,
            sigma2: f64,
        }
        Repr {
            entries: &self.entries,
            sigma2: self.sigma2,
        }
        .serialize(ser)
    }
}

impl InfoMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|r| self.entries.row(r).iter().copied().collect())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Largest absolute asymmetry `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.entries - self.entries.transpose()).amax()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let sym = (&self.entries + self.entries.transpose()) * 0.5;
        let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Number of eigenvalues above `rel_tol · trace`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.trace().abs();
        self.eigenvalues().iter().filter(|&&e| e > cut).count()
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> InfoMatrix {
        let n = idx.len();
        InfoMatrix {
            entries: DMatrix::from_fn(n, n, |r, c| self.entries[(idx[r], idx[c])]),
            sigma2: self.sigma2,
        }
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let scale = self.entries.amax();
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::Singular("information matrix is zero".into()));
        }
        let chol = nalgebra::Cholesky::new(self.entries.clone())
            .ok_or_else(|| Error::Singular("information matrix not positive definite".into()))?;
        let d = chol.l_dirty().diagonal();
        let (lo, hi) = d
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        if lo <= 1e-8 * hi {
            return Err(Error::Singular(
                "information matrix numerically singular".into(),
            ));
        }
        Ok(chol.inverse())
    }
}

fn outer(g: &[f64], sigma2: f64) -> DMatrix<f64> {
    let n = g.len();
    DMatrix::from_fn(n, n, |r, c| g[r] * g[c] / sigma2)
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::ParamDomain {
            name: "sigma2".into(),
            value: sigma2,
            constraint: "> 0".into(),
        })
    }
}

/// Information carried by one observation at `x`.
pub fn per_obs_info(
    model: &ModelDef,
    x: impl Into<Input>,
    theta: &[f64],
    sigma2: f64,
) -> Result<InfoMatrix> {
    check_sigma2(sigma2)?;
    let g = model.gradient(x, theta)?;
    Ok(InfoMatrix {
        entries: outer(&g, sigma2),
        sigma2,
    })
}

/// Additive information of a design.
pub fn total_info(
    model: &ModelDef,
    design: &[Input],
    theta: &[f64],
    sigma2: f64,
) -> Result<InfoMatrix> {
    check_sigma2(sigma2)?;
    if design.is_empty() {
        return Err(Error::invalid("design must contain at least one point"));
    }
    let p = theta.len();
    let mut acc = DMatrix::zeros(p, p);
    for &x in design {
        let g = model.gradient(x, theta)?;
        acc += outer(&g, sigma2);
    }
    Ok(InfoMatrix {
        entries: acc,
        sigma2,
    })
}

/// Estimated information `Σ ∇f∇fᵀ / s²` at `θ̂`.
pub fn info_at_estimate(
    model: &ModelDef,
    design: &[Input],
    theta_hat: &[f64],
    s2: f64,
) -> Result<InfoMatrix> {
    total_info(model, design, theta_hat, s2)
}

/// Right-censored survival times for the Weibull likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct WeibullSample {
    times: Vec<f64>,
    events: Vec<bool>,
}

impl WeibullSample {
    pub fn new(times: Vec<f64>, events: Vec<bool>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("empty survival sample"));
        }
        if times.len() != events.len() {
            return Err(Error::Dimension(format!(
                "{} times but {} event flags",
                times.len(),
                events.len()
            )));
        }
        if let Some(&t) = times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InputDomain {
                name: "time".into(),
                value: t,
                constraint: "> 0".into(),
            });
        }
        if !events.iter().any(|e| *e) {
            return Err(Error::invalid("survival sample has no events"));
        }
        Ok(WeibullSample { times, events })
    }

    /// All observations are events.
    pub fn uncensored(times: Vec<f64>) -> Result<Self> {
        let n = times.len();
        Self::new(times, vec![true; n])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of events `d`.
    pub fn d(&self) -> usize {
        self.events.iter().filter(|&&e| e).count()
    }

    /// `Σ tᵢˢ` over all observations.
    pub fn power_sum(&self, s: f64) -> f64 {
        self.times.iter().map(|t| t.powf(s)).sum()
    }

    /// `Σ ln tᵢ` over events.
    pub fn event_log_sum(&self) -> f64 {
        self.times
            .iter()
            .zip(&self.events)
            .filter(|(_, &e)| e)
            .map(|(t, _)| t.ln())
            .sum()
    }

    /// `l(θ, s) = Σ_events [ln s + s ln θ + (s − 1) ln tᵢ] − θˢ Σ_all tᵢˢ`.
    pub fn log_likelihood(&self, theta: f64, s: f64) -> f64 {
        let d = self.d() as f64;
        d * s.ln() + s * d * theta.ln() + (s - 1.0) * self.event_log_sum()
            - theta.powf(s) * self.power_sum(s)
    }

    /// Score `(∂l/∂θ, ∂l/∂s)`.
    pub fn score(&self, theta: f64, s: f64) -> (f64, f64) {
        let d = self.d() as f64;
        let ts = theta.powf(s);
        let (mut sum_s, mut sum_s_ln) = (0.0, 0.0);
        for &t in &self.times {
            let p = t.powf(s);
            sum_s += p;
            sum_s_ln += p * (theta * t).ln();
        }
        let u_theta = s * d / theta - s * theta.powf(s - 1.0) * sum_s;
        let u_s = d / s + d * theta.ln() + self.event_log_sum() - ts * sum_s_ln;
        (u_theta, u_s)
    }
}

/// Second derivatives of the Weibull log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullHessian {
    pub i_theta_theta: f64,
    pub i_theta_s: f64,
    pub i_s_s: f64,
}

impl WeibullHessian {
    /// The second-derivative matrix, ordered `(θ, s)`.
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(
            self.i_theta_theta,
            self.i_theta_s,
            self.i_theta_s,
            self.i_s_s,
        )
    }

    /// Observed information, i.e. the negated Hessian.
    pub fn observed_information(&self) -> InfoMatrix {
        let m = -self.matrix();
        InfoMatrix {
            entries: DMatrix::from_fn(2, 2, |r, c| m[(r, c)]),
            sigma2: 1.0,
        }
    }
}

/// `I_θθ = −sd/θ² − s(s−1)θ^{s−2}Σtˢ`,
/// `I_θs = d/θ − θ^{s−1}(1 + s ln θ)Σtˢ − sθ^{s−1}Σtˢ ln t`,
/// `I_ss = −d/s² − θˢ Σtˢ [ln(θt)]²`.
///
/// Returned as second derivatives (negative definite near the maximum);
/// use [`WeibullHessian::observed_information`] for the negated form.
pub fn weibull_observed_info(sample: &WeibullSample, theta: f64, s: f64) -> Result<WeibullHessian> {
    if sample.is_empty() {
        return Err(Error::invalid("empty survival sample"));
    }
    for (name, v) in [("theta", theta), ("s", s)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::ParamDomain {
                name: name.into(),
                value: v,
                constraint: "> 0".into(),
            });
        }
    }
    let d = sample.d() as f64;
    let (mut sum_s, mut sum_s_ln, mut sum_s_ln2) = (0.0, 0.0, 0.0);
    for &t in sample.times() {
        let p = t.powf(s);
        let lt = (theta * t).ln();
        sum_s += p;
        sum_s_ln += p * t.ln();
        sum_s_ln2 += p * lt * lt;
    }
    let i_theta_theta = -s * d / (theta * theta) - s * (s - 1.0) * theta.powf(s - 2.0) * sum_s;
    let i_theta_s = d / theta
        - theta.powf(s - 1.0) * (1.0 + s * theta.ln()) * sum_s
        - s * theta.powf(s - 1.0) * sum_s_ln;
    let i_s_s = -d / (s * s) - theta.powf(s) * sum_s_ln2;
    Ok(WeibullHessian {
        i_theta_theta,
        i_theta_s,
        i_s_s,
    })
}
