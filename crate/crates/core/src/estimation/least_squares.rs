//! Gauss-Newton least squares with step halving and a Levenberg fallback.

use nalgebra::{DMatrix, DVector};

use super::{FitResult, FitStatus, ObjectiveKind, RegressionDataset};
use crate::error::{Error, Result};
use crate::fisher::info_at_estimate;
use crate::models::{ModelDef, ParamVector};

#[derive(Debug, Clone, Copy)]
pub struct LsOptions {
    pub max_iter: usize,
    pub rel_sse_tol: f64,
    pub grad_tol: f64,
    pub max_halvings: usize,
    pub lambda0: f64,
    pub lambda_max: f64,
}

impl Default for LsOptions {
    fn default() -> Self {
        LsOptions {
            max_iter: 500,
            rel_sse_tol: 1e-10,
            grad_tol: 1e-8,
            max_halvings: 40,
            lambda0: 1e-3,
            lambda_max: 1e12,
        }
    }
}

struct Linearization {
    residuals: DVector<f64>,
    jacobian: DMatrix<f64>,
    sse: f64,
}

fn sse(model: &ModelDef, data: &RegressionDataset, theta: &[f64]) -> Option<f64> {
    let mut acc = 0.0;
    for &(x, y) in &data.points {
        let r = y - model.evaluate(x, theta).ok()?;
        acc += r * r;
    }
    acc.is_finite().then_some(acc)
}

fn linearize(
    model: &ModelDef,
    data: &RegressionDataset,
    theta: &[f64],
    free: &[usize],
) -> Result<Linearization> {
    let n = data.points.len();
    let mut residuals = DVector::zeros(n);
    let mut jacobian = DMatrix::zeros(n, free.len());
    for (i, &(x, y)) in data.points.iter().enumerate() {
        residuals[i] = y - model.evaluate(x, theta)?;
        let g = model.gradient(x, theta)?;
        for (k, &j) in free.iter().enumerate() {
            jacobian[(i, k)] = g[j];
        }
    }
    let sse = residuals.norm_squared();
    Ok(Linearization {
        residuals,
        jacobian,
        sse,
    })
}

fn solve_normal(jtj: &DMatrix<f64>, rhs: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let mut a = jtj.clone();
    if lambda > 0.0 {
        let scale = (jtj.trace() / jtj.nrows() as f64).max(1e-12);
        for i in 0..a.nrows() {
            a[(i, i)] += lambda * scale;
        }
    }
    let chol = nalgebra::Cholesky::new(a)?;
    let d = chol.l_dirty().diagonal();
    let (lo, hi) = d
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    if !(lo > 1e-10 * hi) {
        return None;
    }
    let step = chol.solve(rhs);
    step.iter().all(|v| v.is_finite()).then_some(step)
}

fn apply(theta: &[f64], free: &[usize], step: &DVector<f64>, scale: f64) -> Vec<f64> {
    let mut out = theta.to_vec();
    for (k, &j) in free.iter().enumerate() {
        out[j] += scale * step[k];
    }
    out
}

/// Fits `y ≈ f(u, θ)` by Gauss-Newton from `theta0`.
///
/// Every accepted step lowers (or keeps) the residual sum of squares. When
/// the normal equations are singular, or no halved Gauss-Newton step helps,
/// Levenberg damping takes over with `λ` multiplied by 10 per failure.
pub fn fit_least_squares(
    model: &ModelDef,
    data: &RegressionDataset,
    theta0: &[f64],
    opts: LsOptions,
) -> Result<FitResult> {
    model.check_theta(theta0)?;
    let free = model.free_params(theta0.len());
    if data.points.len() < free.len() {
        return Err(Error::invalid(format!(
            "{} observations cannot identify {} parameters",
            data.points.len(),
            free.len()
        )));
    }
    for &(x, _) in &data.points {
        model.check_input(x)?;
    }

    let mut theta = theta0.to_vec();
    let mut lin = linearize(model, data, &theta, &free)?;
    let mut iterations = 0;
    let mut status = FitStatus::IterationLimit;
    let mut grad_norm;
    loop {
        let jt = lin.jacobian.transpose();
        let grad = &jt * &lin.residuals;
        grad_norm = grad.norm();
        if grad_norm < opts.grad_tol {
            status = FitStatus::Converged;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;
        let jtj = &jt * &lin.jacobian;

        let mut accepted: Option<(Vec<f64>, f64)> = None;
        if let Some(step) = solve_normal(&jtj, &grad, 0.0) {
            let mut scale = 1.0;
            for _ in 0..=opts.max_halvings {
                let trial = apply(&theta, &free, &step, scale);
                if let Some(s) = sse(model, data, &trial) {
                    if s <= lin.sse && model.check_theta(&trial).is_ok() {
                        accepted = Some((trial, s));
                        break;
                    }
                }
                scale *= 0.5;
            }
        }
        if accepted.is_none() {
            let mut lambda = opts.lambda0;
            while lambda <= opts.lambda_max {
                if let Some(step) = solve_normal(&jtj, &grad, lambda) {
                    let trial = apply(&theta, &free, &step, 1.0);
                    if let Some(s) = sse(model, data, &trial) {
                        if s <= lin.sse && model.check_theta(&trial).is_ok() {
                            accepted = Some((trial, s));
                            break;
                        }
                    }
                }
                lambda *= 10.0;
            }
        }
        let Some((next, next_sse)) = accepted else {
            status = FitStatus::Stalled;
            break;
        };
        let rel = if lin.sse > 0.0 {
            (lin.sse - next_sse) / lin.sse
        } else {
            0.0
        };
        theta = next;
        lin = linearize(model, data, &theta, &free)?;
        // A stalled SSE only ends the run once the gradient agrees, or when
        // the step made no progress at all.
        if rel < opts.rel_sse_tol {
            grad_norm = (lin.jacobian.transpose() * &lin.residuals).norm();
            let scale = lin.jacobian.norm() * lin.residuals.norm();
            if grad_norm <= opts.grad_tol * scale.max(1.0) {
                status = FitStatus::Converged;
                break;
            }
            if rel <= 0.0 {
                status = FitStatus::Stalled;
                break;
            }
        }
    }

    // Gradient small relative to the scale of J and r.
    let scale = lin.jacobian.norm() * lin.residuals.norm();
    let converged =
        status == FitStatus::Converged && grad_norm <= opts.grad_tol * scale.max(1.0);
    if status == FitStatus::Converged && !converged {
        status = FitStatus::Stalled;
    }

    let n = data.points.len();
    let p = free.len();
    let s2 = (n > p).then(|| lin.sse / (n - p) as f64);
    let info = match s2 {
        Some(v) if v > 0.0 => Some(info_at_estimate(model, &data.inputs(), &theta, v)?),
        _ => None,
    };
    Ok(FitResult {
        model: model.id_str.to_string(),
        theta_hat: ParamVector(theta),
        objective: lin.sse,
        objective_kind: ObjectiveKind::Sse,
        s2,
        info,
        converged,
        iterations,
        status,
        gradient_norm: grad_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelId;

    #[test]
    fn recovers_noiseless_logistic() {
        let m = ModelId::Logistic.def();
        let truth = [3.0, 2.0, -0.8];
        let data = RegressionDataset::from_scalar(
            (0..20).map(|i| {
                let u = i as f64 * 0.5;
                (u, m.evaluate(u, &truth).unwrap())
            }),
        )
        .unwrap();
        let fit = fit_least_squares(m, &data, &[2.5, 1.5, -0.5], LsOptions::default()).unwrap();
        assert!(fit.converged, "{fit:?}");
        for (a, b) in fit.theta_hat.iter().zip(truth) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn recovers_noiseless_mm() {
        let m = ModelId::Mm.def();
        let data = RegressionDataset::from_scalar(
            [0.5, 1.0, 2.0, 4.0, 8.0].map(|s| (s, 2.0 * s / (1.0 + s))),
        )
        .unwrap();
        let fit = fit_least_squares(m, &data, &[1.0, 0.5], LsOptions::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.theta_hat[0] - 2.0).abs() < 1e-6);
        assert!((fit.theta_hat[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sse_never_increases() {
        // Start far away so halving and damping both get exercised.
        let m = ModelId::Gompertz.def();
        let truth = [2.0, -1.5, -0.7];
        let data = RegressionDataset::from_scalar((0..15).map(|i| {
            let u = i as f64 * 0.4;
            (u, m.evaluate(u, &truth).unwrap() + 0.01 * ((i * 7 % 5) as f64 - 2.0))
        }))
        .unwrap();
        let mut prev = f64::INFINITY;
        for max_iter in 0..30 {
            let opts = LsOptions {
                max_iter,
                ..LsOptions::default()
            };
            let fit = fit_least_squares(m, &data, &[1.0, -0.5, -0.2], opts).unwrap();
            assert!(fit.objective <= prev + 1e-15, "iteration {max_iter}");
            prev = fit.objective;
        }
    }

    #[test]
    fn exact_fit_has_no_residual_variance() {
        let m = ModelId::Mm.def();
        let data = RegressionDataset::from_scalar([(1.0, 1.0), (3.0, 1.5)]).unwrap();
        let fit = fit_least_squares(m, &data, &[1.5, 0.8], LsOptions::default()).unwrap();
        assert!(fit.s2.is_none());
        assert!(fit.info.is_none());
    }

    #[test]
    fn too_few_points_rejected() {
        let m = ModelId::Gompertz.def();
        let data = RegressionDataset::from_scalar([(1.0, 1.0)]).unwrap();
        assert!(fit_least_squares(m, &data, &[1.0, 1.0, 1.0], LsOptions::default()).is_err());
    }
}
