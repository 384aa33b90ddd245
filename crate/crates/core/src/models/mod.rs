//! Registry of mean-response, dose-response and kinetic models.
//!
//! Every entry pairs a stable string id with its mean function, a
//! hand-derived analytic gradient, the parameter constraints and the input
//! domain. The registry is a `static` table; lookups hand out `&'static`
//! references so it can be shared freely across threads.

mod dose;
mod growth;
pub mod hazard;
pub mod kinetics;

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use growth::sigmoid;
pub use hazard::{hazard_ad, hazard_cox, HazardSpec};
pub use kinetics::{
    mm_parallel_summary, mm_slope_at_origin, steady_state_complex, KineticConstants, MmDerivatives,
};

/// Ordered model parameters `θ = (θ₀, …, θ_{p-1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn ones(n: usize) -> Self {
        ParamVector(vec![1.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

impl From<&[f64]> for ParamVector {
    fn from(v: &[f64]) -> Self {
        ParamVector(v.to_vec())
    }
}

/// A model input. Most models take a scalar `u`; the two-substrate and
/// series kinetics take a second concentration in `u2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Input {
    pub u: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2: Option<f64>,
}

impl Input {
    pub fn scalar(u: f64) -> Self {
        Input { u, u2: None }
    }

    pub fn pair(u: f64, u2: f64) -> Self {
        Input { u, u2: Some(u2) }
    }
}

impl From<f64> for Input {
    fn from(u: f64) -> Self {
        Input::scalar(u)
    }
}

impl From<(f64, f64)> for Input {
    fn from((u, u2): (f64, f64)) -> Self {
        Input::pair(u, u2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Growth,
    DoseResponseCdf,
    Kinetics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Any,
    Positive,
    NonNegative,
    NonZero,
    /// Held fixed by gradient-based machinery; its gradient slot is zero.
    PositiveInteger,
}

impl Constraint {
    pub fn admits(self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match self {
            Constraint::Any => true,
            Constraint::Positive => v > 0.0,
            Constraint::NonNegative => v >= 0.0,
            Constraint::NonZero => v != 0.0,
            Constraint::PositiveInteger => v >= 1.0 && v.fract() == 0.0,
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Constraint::Any => "finite",
            Constraint::Positive => "> 0",
            Constraint::NonNegative => ">= 0",
            Constraint::NonZero => "!= 0",
            Constraint::PositiveInteger => "positive integer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputDomain {
    AllReals,
    NonNegative,
    Positive,
}

impl InputDomain {
    pub fn admits(self, u: f64) -> bool {
        u.is_finite()
            && match self {
                InputDomain::AllReals => true,
                InputDomain::NonNegative => u >= 0.0,
                InputDomain::Positive => u > 0.0,
            }
    }

    fn describe(self) -> &'static str {
        match self {
            InputDomain::AllReals => "finite",
            InputDomain::NonNegative => ">= 0",
            InputDomain::Positive => "> 0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exact(usize),
    /// Polynomial-degree models such as the multistage CDF.
    AtLeast(usize),
}

impl Arity {
    pub fn admits(self, n: usize) -> bool {
        match self {
            Arity::Exact(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }

    pub fn min(self) -> usize {
        match self {
            Arity::Exact(k) | Arity::AtLeast(k) => k,
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Exact(k) => write!(f, "{k}"),
            Arity::AtLeast(k) => write!(f, "at least {k}"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub constraint: Constraint,
}

const fn p(name: &'static str, constraint: Constraint) -> ParamSpec {
    ParamSpec { name, constraint }
}

use Constraint::{Any, NonNegative, NonZero, Positive, PositiveInteger};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    Gompertz,
    Janoschek,
    Logistic,
    Bertalanffy,
    Tanh,
    Tanh3,
    Tanh4,
    ExpTimePower,
    ExpTimePowerRepar,
    WeibullReconstructed,
    GenLogisticI,
    GenLogisticIi,
    OneHit,
    MultiHit,
    WeibullCdf,
    Multistage,
    LogitCdf,
    ProbitCdf,
    Mm,
    MmTwoSubstrate,
    Hill,
    HillDecreasing,
    Mmf,
    MmParallel,
    MmSeries,
    PhotoPmax,
    LeafResponse,
}

impl ModelId {
    pub fn as_str(self) -> &'static str {
        self.def().id_str
    }

    pub fn def(self) -> &'static ModelDef {
        REGISTRY
            .iter()
            .find(|m| m.id == self)
            .expect("every ModelId has a registry entry")
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelDef::lookup(s).map(|m| m.id)
    }
}

/// A registry entry.
#[derive(Debug)]
pub struct ModelDef {
    pub id: ModelId,
    pub id_str: &'static str,
    pub name: &'static str,
    pub family: Family,
    pub arity: Arity,
    pub params: &'static [ParamSpec],
    pub input_domain: InputDomain,
    /// 1 for scalar inputs, 2 for two-concentration kinetics.
    pub input_dim: usize,
    /// Gradient needs `u > 0` even where `evaluate` admits `u = 0`.
    pub gradient_needs_positive_input: bool,
}

impl PartialEq for ModelDef {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

macro_rules! entry {
    ($id:ident, $s:literal, $name:literal, $fam:ident, $arity:expr, [$($p:expr),* $(,)?], $dom:ident, $dim:literal, $gpos:literal) => {
        ModelDef {
            id: ModelId::$id,
            id_str: $s,
            name: $name,
            family: Family::$fam,
            arity: $arity,
            params: &[$($p),*],
            input_domain: InputDomain::$dom,
            input_dim: $dim,
            gradient_needs_positive_input: $gpos,
        }
    };
}

static REGISTRY: [ModelDef; 27] = [
    entry!(Gompertz, "gompertz", "Gompertz", Growth, Arity::Exact(3),
        [p("theta0", Any), p("theta1", Any), p("theta2", Any)], AllReals, 1, false),
    entry!(Janoschek, "janoschek", "Janoschek", Growth, Arity::Exact(4),
        [p("theta0", Any), p("theta1", Any), p("theta2", Any), p("theta3", Any)], Positive, 1, false),
    entry!(Logistic, "logistic", "Logistic", Growth, Arity::Exact(3),
        [p("theta0", Any), p("theta1", NonNegative), p("theta2", Any)], AllReals, 1, false),
    entry!(Bertalanffy, "bertalanffy", "Bertalanffy", Growth, Arity::Exact(3),
        [p("theta0", Any), p("theta1", Any), p("theta2", Any)], AllReals, 1, false),
    entry!(Tanh, "tanh", "tanh", Growth, Arity::Exact(4),
        [p("theta0", Any), p("theta1", Any), p("theta2", Any), p("theta3", Any)], AllReals, 1, false),
    entry!(Tanh3, "tanh3", "3-tanh", Growth, Arity::Exact(3),
        [p("theta0", Any), p("theta1", Any), p("theta2", Any)], AllReals, 1, false),
    entry!(Tanh4, "tanh4", "4-tanh", Growth, Arity::Exact(4),
        [p("theta0", Any), p("theta1", Any), p("theta2", Any), p("theta3", Any)], AllReals, 1, false),
    entry!(ExpTimePower, "exp-time-power", "exponential time-power", Growth, Arity::Exact(2),
        [p("theta0", Any), p("theta1", Any)], Positive, 1, false),
    entry!(ExpTimePowerRepar, "exp-time-power-repar", "reparametrized exponential time-power", Growth, Arity::Exact(3),
        [p("theta0", Any), p("theta1", Any), p("theta2", Any)], Positive, 1, false),
    entry!(WeibullReconstructed, "weibull-reconstructed", "reconstructed Weibull", Growth, Arity::Exact(4),
        [p("theta0", Any), p("theta1", Any), p("theta2", Positive), p("theta3", Any)], Positive, 1, false),
    entry!(GenLogisticI, "gen-logistic-i", "generalized logistic (cubic)", Growth, Arity::Exact(5),
        [p("theta0", Any), p("theta1", Any), p("theta2", Any), p("theta3", Any), p("theta4", Any)], AllReals, 1, false),
    entry!(GenLogisticIi, "gen-logistic-ii", "generalized logistic (Box-Cox)", Growth, Arity::Exact(4),
        [p("theta0", Any), p("theta1", Any), p("theta2", Any), p("theta3", NonZero)], Positive, 1, false),
    entry!(OneHit, "one-hit", "one-hit", DoseResponseCdf, Arity::Exact(1),
        [p("theta", Positive)], NonNegative, 1, false),
    entry!(MultiHit, "multi-hit", "multi-hit", DoseResponseCdf, Arity::Exact(2),
        [p("k", PositiveInteger), p("lambda", Positive)], NonNegative, 1, false),
    entry!(WeibullCdf, "weibull-cdf", "Weibull dose-response", DoseResponseCdf, Arity::Exact(2),
        [p("theta", Positive), p("s", Positive)], NonNegative, 1, false),
    entry!(Multistage, "multistage", "Armitage-Doll multistage", DoseResponseCdf, Arity::AtLeast(2),
        [p("theta", NonNegative)], NonNegative, 1, false),
    entry!(LogitCdf, "logit-cdf", "logit tolerance", DoseResponseCdf, Arity::Exact(2),
        [p("theta0", Any), p("theta1", Positive)], NonNegative, 1, false),
    entry!(ProbitCdf, "probit-cdf", "probit tolerance", DoseResponseCdf, Arity::Exact(2),
        [p("theta0", Any), p("theta1", Positive)], NonNegative, 1, false),
    entry!(Mm, "mm", "Michaelis-Menten", Kinetics, Arity::Exact(2),
        [p("Vmax", Positive), p("K", Positive)], NonNegative, 1, false),
    entry!(MmTwoSubstrate, "mm-two-substrate", "two-substrate rectangular hyperbola", Kinetics, Arity::Exact(4),
        [p("k", Positive), p("C1", NonNegative), p("C2", NonNegative), p("C3", NonNegative)], NonNegative, 2, false),
    entry!(Hill, "hill", "Hill", Kinetics, Arity::Exact(3),
        [p("V", Positive), p("Kc", Positive), p("n", Positive)], NonNegative, 1, true),
    entry!(HillDecreasing, "hill-decreasing", "decreasing Hill", Kinetics, Arity::Exact(3),
        [p("V", Positive), p("Kc", Positive), p("n", Positive)], NonNegative, 1, true),
    entry!(Mmf, "mmf", "Morgan-Mercer-Flodin", Kinetics, Arity::Exact(4),
        [p("theta0", Any), p("theta1", Any), p("theta2", Any), p("theta3", Positive)], Positive, 1, false),
    entry!(MmParallel, "mm-parallel", "parallel Michaelis-Menten", Kinetics, Arity::Exact(4),
        [p("V1", Positive), p("K1", Positive), p("V2", Positive), p("K2", Positive)], NonNegative, 1, false),
    entry!(MmSeries, "mm-series", "Michaelis-Menten in series", Kinetics, Arity::Exact(5),
        [p("E0", Positive), p("k1", Positive), p("k2", Positive), p("k3", Positive), p("k4", Positive)], NonNegative, 2, false),
    entry!(PhotoPmax, "photo-pmax", "photosynthetic response to light and CO2", Kinetics, Arity::Exact(2),
        [p("P0", Positive), p("eta", Positive)], NonNegative, 1, false),
    entry!(LeafResponse, "leaf-response", "leaf response to light flux", Kinetics, Arity::Exact(3),
        [p("a", Positive), p("Pmax", Positive), p("Rd", NonNegative)], NonNegative, 1, false),
];

/// All registry entries in a stable order.
pub fn registry() -> &'static [ModelDef] {
    &REGISTRY
}

impl ModelDef {
    pub fn lookup(id: &str) -> Result<&'static ModelDef> {
        REGISTRY
            .iter()
            .find(|m| m.id_str == id)
            .ok_or_else(|| Error::UnknownModel {
                id: id.to_string(),
                known: REGISTRY.iter().map(|m| m.id_str).collect::<Vec<_>>().join(", "),
            })
    }

    /// Parameter spec at position `i` (variable-arity models repeat the last one).
    pub fn param_spec(&self, i: usize) -> ParamSpec {
        self.params[i.min(self.params.len() - 1)]
    }

    pub fn param_name(&self, i: usize) -> String {
        match self.arity {
            Arity::AtLeast(_) => format!("{}{}", self.param_spec(i).name, i),
            Arity::Exact(_) => self.params[i].name.to_string(),
        }
    }

    /// Indices of parameters that gradient-based machinery may move
    /// (everything except integer-valued structural parameters).
    pub fn free_params(&self, n: usize) -> Vec<usize> {
        (0..n)
            .filter(|&i| self.param_spec(i).constraint != PositiveInteger)
            .collect()
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if !self.arity.admits(theta.len()) {
            return Err(Error::Arity {
                model: self.id_str.to_string(),
                expected: self.arity.to_string(),
                got: theta.len(),
            });
        }
        for (i, &v) in theta.iter().enumerate() {
            let spec = self.param_spec(i);
            if !spec.constraint.admits(v) {
                return Err(Error::ParamDomain {
                    name: self.param_name(i),
                    value: v,
                    constraint: spec.constraint.describe().to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn check_input(&self, x: Input) -> Result<()> {
        let dom = self.input_domain;
        if !dom.admits(x.u) {
            return Err(Error::InputDomain {
                name: "u".into(),
                value: x.u,
                constraint: dom.describe().into(),
            });
        }
        match (self.input_dim, x.u2) {
            (2, None) => Err(Error::invalid(format!(
                "model `{}` takes two inputs (u, u2)",
                self.id_str
            ))),
            (2, Some(u2)) if !dom.admits(u2) => Err(Error::InputDomain {
                name: "u2".into(),
                value: u2,
                constraint: dom.describe().into(),
            }),
            _ => Ok(()),
        }
    }

    /// Mean response `f(u, θ)`.
    pub fn evaluate(&self, x: impl Into<Input>, theta: &[f64]) -> Result<f64> {
        let x = x.into();
        self.check_theta(theta)?;
        self.check_input(x)?;
        let v = self.eval_unchecked(x, theta);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!(
                "{} at u = {} evaluates to {v}",
                self.id_str, x.u
            )))
        }
    }

    /// Analytic gradient `∂f/∂θ`, one slot per parameter. Slots of
    /// integer-valued parameters are zero.
    pub fn gradient(&self, x: impl Into<Input>, theta: &[f64]) -> Result<Vec<f64>> {
        let x = x.into();
        self.check_theta(theta)?;
        self.check_input(x)?;
        if self.gradient_needs_positive_input && x.u <= 0.0 {
            return Err(Error::NotDifferentiable(format!(
                "{} needs u > 0 for ln(u) terms, got {}",
                self.id_str, x.u
            )));
        }
        if self.id == ModelId::WeibullReconstructed && theta[2] * x.u <= 0.0 {
            return Err(Error::NotDifferentiable("theta2 * u must be > 0".into()));
        }
        let g = self.grad_unchecked(x, theta);
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(Error::NonFinite(format!(
                "gradient of {} at u = {}",
                self.id_str, x.u
            )))
        }
    }

    /// Derivative of a dose-response CDF with respect to dose.
    pub fn dose_derivative(&self, x: f64, theta: &[f64]) -> Result<f64> {
        if self.family != Family::DoseResponseCdf {
            return Err(Error::invalid(format!(
                "{} is not a dose-response CDF",
                self.id_str
            )));
        }
        self.check_theta(theta)?;
        self.check_input(Input::scalar(x))?;
        Ok(dose::density(self.id, x, theta))
    }

    pub(crate) fn eval_unchecked(&self, x: Input, t: &[f64]) -> f64 {
        use ModelId::*;
        let u = x.u;
        match self.id {
            Gompertz => growth::gompertz(u, t),
            Janoschek => growth::janoschek(u, t),
            Logistic => growth::logistic(u, t),
            Bertalanffy => growth::bertalanffy(u, t),
            Tanh => growth::tanh(u, t),
            Tanh3 => growth::tanh3(u, t),
            Tanh4 => growth::tanh4(u, t),
            ExpTimePower => growth::exp_time_power(u, t),
            ExpTimePowerRepar => growth::exp_time_power_repar(u, t),
            WeibullReconstructed => growth::weibull_reconstructed(u, t),
            GenLogisticI => growth::gen_logistic_i(u, t),
            GenLogisticIi => growth::gen_logistic_ii(u, t),
            OneHit | MultiHit | WeibullCdf | Multistage | LogitCdf | ProbitCdf => {
                dose::cdf(self.id, u, t)
            }
            Mm => kinetics::mm(u, t),
            MmTwoSubstrate => kinetics::two_substrate(u, x.u2.unwrap_or(f64::NAN), t),
            Hill => kinetics::hill(u, t),
            HillDecreasing => kinetics::hill_decreasing(u, t),
            Mmf => kinetics::mmf(u, t),
            MmParallel => kinetics::mm_parallel(u, t),
            MmSeries => kinetics::mm_series(u, x.u2.unwrap_or(f64::NAN), t),
            PhotoPmax => kinetics::photo_pmax(u, t),
            LeafResponse => kinetics::leaf_response(u, t),
        }
    }

    pub(crate) fn grad_unchecked(&self, x: Input, t: &[f64]) -> Vec<f64> {
        use ModelId::*;
        let u = x.u;
        match self.id {
            Gompertz => growth::gompertz_grad(u, t),
            Janoschek => growth::janoschek_grad(u, t),
            Logistic => growth::logistic_grad(u, t),
            Bertalanffy => growth::bertalanffy_grad(u, t),
            Tanh => growth::tanh_grad(u, t),
            Tanh3 => growth::tanh3_grad(u, t),
            Tanh4 => growth::tanh4_grad(u, t),
            ExpTimePower => growth::exp_time_power_grad(u, t),
            ExpTimePowerRepar => growth::exp_time_power_repar_grad(u, t),
            WeibullReconstructed => growth::weibull_reconstructed_grad(u, t),
            GenLogisticI => growth::gen_logistic_i_grad(u, t),
            GenLogisticIi => growth::gen_logistic_ii_grad(u, t),
            OneHit | MultiHit | WeibullCdf | Multistage | LogitCdf | ProbitCdf => {
                dose::cdf_grad(self.id, u, t)
            }
            Mm => kinetics::mm_grad(u, t),
            MmTwoSubstrate => kinetics::two_substrate_grad(u, x.u2.unwrap_or(f64::NAN), t),
            Hill => kinetics::hill_grad(u, t),
            HillDecreasing => kinetics::hill_decreasing_grad(u, t),
            Mmf => kinetics::mmf_grad(u, t),
            MmParallel => kinetics::mm_parallel_grad(u, t),
            MmSeries => kinetics::mm_series_grad(u, x.u2.unwrap_or(f64::NAN), t),
            PhotoPmax => kinetics::photo_pmax_grad(u, t),
            LeafResponse => kinetics::leaf_response_grad(u, t),
        }
    }
}
