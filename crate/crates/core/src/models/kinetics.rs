//! Michaelis-Menten kinetics and its relatives.

use crate::error::{Error, Result};

/// Elementary rate constants of `E + S ⇌ ES → E + P` plus the total enzyme
/// concentration. `k4` only appears in the series scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub e0: f64,
}

/// Michaelis-Menten constants, optionally backed by the rate constants they
/// were derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticConstants {
    pub vmax: f64,
    pub k_m: f64,
    pub rates: Option<RateConstants>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::ParamDomain {
            name: name.into(),
            value: v,
            constraint: "> 0".into(),
        })
    }
}

impl KineticConstants {
    pub fn michaelis(vmax: f64, k_m: f64) -> Result<Self> {
        positive("Vmax", vmax)?;
        positive("K", k_m)?;
        Ok(KineticConstants {
            vmax,
            k_m,
            rates: None,
        })
    }

    /// `Vmax = k₃E₀`, `K = (k₂ + k₃)/k₁`.
    pub fn from_rates(k1: f64, k2: f64, k3: f64, k4: f64, e0: f64) -> Result<Self> {
        for (n, v) in [("k1", k1), ("k2", k2), ("k3", k3), ("k4", k4), ("E0", e0)] {
            positive(n, v)?;
        }
        Ok(KineticConstants {
            vmax: k3 * e0,
            k_m: (k2 + k3) / k1,
            rates: Some(RateConstants { k1, k2, k3, k4, e0 }),
        })
    }

    pub fn validate(&self) -> Result<()> {
        positive("Vmax", self.vmax)?;
        positive("K", self.k_m)?;
        if let Some(r) = self.rates {
            let derived = KineticConstants::from_rates(r.k1, r.k2, r.k3, r.k4, r.e0)?;
            let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
            if !rel(derived.vmax, self.vmax) || !rel(derived.k_m, self.k_m) {
                return Err(Error::invalid(
                    "Vmax/K inconsistent with the rate constants (Vmax = k3·E0, K = (k2+k3)/k1)",
                ));
            }
        }
        Ok(())
    }

    /// Velocity `Vmax·S/(K + S)`.
    pub fn velocity(&self, s: f64) -> f64 {
        self.vmax * s / (self.k_m + s)
    }

    pub fn derivatives(&self, x: f64) -> MmDerivatives {
        let d = self.k_m + x;
        MmDerivatives {
            first: self.vmax * self.k_m / (d * d),
            second: -2.0 * self.vmax * self.k_m / (d * d * d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmDerivatives {
    pub first: f64,
    pub second: f64,
}

/// Steady-state concentration of the enzyme-substrate complex,
/// `[ES] = k₁[S]E₀ / (k₁[S] + k₂ + k₃)`.
pub fn steady_state_complex(c: &KineticConstants, s: f64) -> Result<f64> {
    c.validate()?;
    let r = c
        .rates
        .ok_or_else(|| Error::invalid("steady-state complex needs the rate constants"))?;
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::InputDomain {
            name: "S".into(),
            value: s,
            constraint: ">= 0".into(),
        });
    }
    Ok(r.k1 * s * r.e0 / (r.k1 * s + r.k2 + r.k3))
}

/// `dν/d[S]` at `[S] = 0`, i.e. `Vmax/K`.
pub fn mm_slope_at_origin(c: &KineticConstants) -> Result<f64> {
    c.validate()?;
    Ok(c.vmax / c.k_m)
}

/// Slope at zero and asymptote of two Michaelis-Menten processes running in
/// parallel: `(V₁/K₁ + V₂/K₂, V₁ + V₂)`.
pub fn mm_parallel_summary(v1: f64, k1: f64, v2: f64, k2: f64) -> Result<(f64, f64)> {
    for (n, v) in [("V1", v1), ("K1", k1), ("V2", v2), ("K2", k2)] {
        positive(n, v)?;
    }
    Ok((v1 / k1 + v2 / k2, v1 + v2))
}

pub(super) fn mm(s: f64, t: &[f64]) -> f64 {
    t[0] * s / (t[1] + s)
}

pub(super) fn mm_grad(s: f64, t: &[f64]) -> Vec<f64> {
    let d = t[1] + s;
    vec![s / d, -t[0] * s / (d * d)]
}

/// `k·x₁x₂ / (1 + C₁x₁ + C₂x₂ + C₃x₁x₂)`.
pub(super) fn two_substrate(x1: f64, x2: f64, t: &[f64]) -> f64 {
    t[0] * x1 * x2 / (1.0 + t[1] * x1 + t[2] * x2 + t[3] * x1 * x2)
}

pub(super) fn two_substrate_grad(x1: f64, x2: f64, t: &[f64]) -> Vec<f64> {
    let d = 1.0 + t[1] * x1 + t[2] * x2 + t[3] * x1 * x2;
    let f = t[0] * x1 * x2 / d;
    vec![x1 * x2 / d, -f * x1 / d, -f * x2 / d, -f * x1 * x2 / d]
}

fn hill_ratio(x: f64, t: &[f64]) -> f64 {
    (x / t[1]).powf(t[2])
}

pub(super) fn hill(x: f64, t: &[f64]) -> f64 {
    let r = hill_ratio(x, t);
    t[0] * r / (1.0 + r)
}

pub(super) fn hill_grad(x: f64, t: &[f64]) -> Vec<f64> {
    let r = hill_ratio(x, t);
    let q = t[0] * r / ((1.0 + r) * (1.0 + r));
    vec![r / (1.0 + r), -q * t[2] / t[1], q * (x / t[1]).ln()]
}

pub(super) fn hill_decreasing(x: f64, t: &[f64]) -> f64 {
    t[0] / (1.0 + hill_ratio(x, t))
}

pub(super) fn hill_decreasing_grad(x: f64, t: &[f64]) -> Vec<f64> {
    let r = hill_ratio(x, t);
    let q = t[0] * r / ((1.0 + r) * (1.0 + r));
    vec![1.0 / (1.0 + r), q * t[2] / t[1], -q * (x / t[1]).ln()]
}

/// `(θ₀x^θ₁ + θ₂θ₃) / (x^θ₁ + θ₃)`.
pub(super) fn mmf(x: f64, t: &[f64]) -> f64 {
    let pw = x.powf(t[1]);
    (t[0] * pw + t[2] * t[3]) / (pw + t[3])
}

pub(super) fn mmf_grad(x: f64, t: &[f64]) -> Vec<f64> {
    let pw = x.powf(t[1]);
    let d = pw + t[3];
    let d2 = d * d;
    vec![
        pw / d,
        t[3] * (t[0] - t[2]) * pw * x.ln() / d2,
        t[3] / d,
        pw * (t[2] - t[0]) / d2,
    ]
}

pub(super) fn mm_parallel(s: f64, t: &[f64]) -> f64 {
    t[0] * s / (t[1] + s) + t[2] * s / (t[3] + s)
}

pub(super) fn mm_parallel_grad(s: f64, t: &[f64]) -> Vec<f64> {
    let d1 = t[1] + s;
    let d2 = t[3] + s;
    vec![s / d1, -t[0] * s / (d1 * d1), s / d2, -t[2] * s / (d2 * d2)]
}

/// `E₀(k₁k₃[S] − k₂k₄[I]) / (k₂ + k₃ + k₁[S] + k₄[I])`, θ = (E₀, k₁, k₂, k₃, k₄).
pub(super) fn mm_series(s: f64, i: f64, t: &[f64]) -> f64 {
    let (e0, k1, k2, k3, k4) = (t[0], t[1], t[2], t[3], t[4]);
    e0 * (k1 * k3 * s - k2 * k4 * i) / (k2 + k3 + k1 * s + k4 * i)
}

pub(super) fn mm_series_grad(s: f64, i: f64, t: &[f64]) -> Vec<f64> {
    let (e0, k1, k2, k3, k4) = (t[0], t[1], t[2], t[3], t[4]);
    let d = k2 + k3 + k1 * s + k4 * i;
    let num = k1 * k3 * s - k2 * k4 * i;
    let f = e0 * num / d;
    vec![
        num / d,
        (e0 * k3 * s - f * s) / d,
        (-e0 * k4 * i - f) / d,
        (e0 * k1 * s - f) / d,
        (-e0 * k2 * i - f * i) / d,
    ]
}

/// `P₀u/(P₀ + u)` with `u = ηC`.
pub(super) fn photo_pmax(c: f64, t: &[f64]) -> f64 {
    let u = t[1] * c;
    t[0] * u / (t[0] + u)
}

pub(super) fn photo_pmax_grad(c: f64, t: &[f64]) -> Vec<f64> {
    let u = t[1] * c;
    let d = t[0] + u;
    vec![u * u / (d * d), c * t[0] * t[0] / (d * d)]
}

/// `aI·Pmax/(aI + Pmax) − Rd`.
pub(super) fn leaf_response(i: f64, t: &[f64]) -> f64 {
    let q = t[0] * i;
    q * t[1] / (q + t[1]) - t[2]
}

pub(super) fn leaf_response_grad(i: f64, t: &[f64]) -> Vec<f64> {
    let q = t[0] * i;
    let d = q + t[1];
    vec![i * t[1] * t[1] / (d * d), q * q / (d * d), -1.0]
}
