mod common;

use bioassay_core::efficiency::{classify, efficiency, omission_experiment, CorrelationPair, EfficiencyClass};
use bioassay_core::Error;
use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

fn pair(a: f64, b: f64) -> CorrelationPair {
    CorrelationPair::new(a, b).unwrap()
}

#[test]
fn efficiency_examples() {
    assert_eq!(efficiency(pair(0.0, 0.0)), 1.0);
    for (a, b) in [(0.3, 0.3), (-0.3, 0.3), (0.3, -0.3)] {
        assert!((efficiency(pair(a, b)) - 1.0).abs() < 1e-15);
        assert_eq!(classify(pair(a, b)), EfficiencyClass::Unity);
    }
    assert!((efficiency(pair(0.0, 0.6)) - 1.5625).abs() < 1e-15);
}

#[test]
fn classification_examples() {
    assert_eq!(classify(pair(0.5, 0.1)), EfficiencyClass::Below);
    assert_eq!(classify(pair(0.1, 0.5)), EfficiencyClass::Above);
    assert_eq!(EfficiencyClass::Below.to_string(), "below");
}

#[test]
fn degenerate_correlations_are_rejected() {
    for (a, b) in [(1.0, 0.0), (0.0, -1.0), (1.5, 0.2), (f64::NAN, 0.0)] {
        assert!(matches!(CorrelationPair::new(a, b), Err(Error::ParamDomain { .. })), "({a}, {b})");
    }
}

#[test]
fn classify_agrees_with_efficiency_on_a_grid() {
    let levels: Vec<f64> = (-95..=95).map(|i| f64::from(i) / 100.0).collect();
    for &a in &levels {
        for &b in &levels {
            let p = pair(a, b);
            let e = efficiency(p);
            let expected = if e == 1.0 {
                EfficiencyClass::Unity
            } else if e < 1.0 {
                EfficiencyClass::Below
            } else {
                EfficiencyClass::Above
            };
            assert_eq!(classify(p), expected, "({a}, {b}) eff {e}");
        }
    }
}

proptest! {
    #[test]
    fn efficiency_depends_only_on_squares(a in -0.99f64..0.99, b in -0.99f64..0.99) {
        let e = efficiency(pair(a, b));
        prop_assert_eq!(e, efficiency(pair(-a, b)));
        prop_assert_eq!(e, efficiency(pair(a, -b)));
        prop_assert!(e > 0.0);
    }

    #[test]
    fn randomized_treatment_never_loses_efficiency(b in -0.99f64..0.99) {
        prop_assert!(efficiency(pair(0.0, b)) >= 1.0);
    }
}

/// `(XᵀX)⁻¹[1,1]·s²` for an OLS fit of `y` on the columns of `x`.
fn ols_slope_variance(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let xtx = x.transpose() * x;
    let inv = xtx.clone().try_inverse().unwrap();
    let beta = &inv * (x.transpose() * y);
    let resid = y - x * beta;
    let s2 = resid.norm_squared() / (x.nrows() - x.ncols()) as f64;
    inv[(1, 1)] * s2
}

#[test]
fn linear_model_variance_ratio_matches_the_formula() {
    let n = 5000;
    let mut r = rng(55);
    for (rho12, rho_y) in [(0.0f64, 0.6f64), (0.5, 0.1), (0.3, 0.3), (-0.4, 0.7)] {
        // Unit noise and x₁-orthogonal part of x₂ with variance 1 − ρ₁₂²
        // give Y–x₂ partial correlation ρ_y for this β₂.
        let beta2 = rho_y / ((1.0 - rho_y * rho_y) * (1.0 - rho12 * rho12)).sqrt();
        let mut full = DMatrix::zeros(n, 3);
        let mut restricted = DMatrix::zeros(n, 2);
        let mut y = DVector::zeros(n);
        for i in 0..n {
            let z1: f64 = StandardNormal.sample(&mut r);
            let z2: f64 = StandardNormal.sample(&mut r);
            let e: f64 = StandardNormal.sample(&mut r);
            let x2 = rho12 * z1 + (1.0 - rho12 * rho12).sqrt() * z2;
            y[i] = 0.5 + z1 + beta2 * x2 + e;
            full.set_row(i, &nalgebra::RowDVector::from_row_slice(&[1.0, z1, x2]));
            restricted.set_row(i, &nalgebra::RowDVector::from_row_slice(&[1.0, z1]));
        }
        let ratio = ols_slope_variance(&restricted, &y) / ols_slope_variance(&full, &y);
        let eff = efficiency(pair(rho12, rho_y));
        assert!(rel_diff(ratio, eff) < 0.05, "({rho12}, {rho_y}): {ratio} vs {eff}");
    }
}

#[test]
fn omission_experiment_is_deterministic() {
    let a = omission_experiment(400, [0.0, 1.0, 1.0], 0.2, 3).unwrap();
    let b = omission_experiment(400, [0.0, 1.0, 1.0], 0.2, 3).unwrap();
    assert_eq!(a, b);
    assert!(a.var_ratio > 0.0);
}

#[test]
fn inert_covariate_leaves_the_slope_unchanged() {
    for seed in 0..10 {
        let res = omission_experiment(2000, [0.2, 0.7, 0.0], 0.0, seed).unwrap();
        let gap = (res.beta1_full - res.beta1_restricted).abs();
        assert!(gap < 3.0 * res.se_full, "seed {seed}: gap {gap}");
    }
}

#[test]
fn omitting_a_strong_covariate_attenuates_the_slope() {
    let (mut full, mut restricted) = (0.0, 0.0);
    for seed in 0..40 {
        let res = omission_experiment(1000, [0.0, 1.0, 2.0], 0.0, seed * 7919).unwrap();
        full += res.beta1_full.abs();
        restricted += res.beta1_restricted.abs();
    }
    assert!(restricted < full);
}

#[test]
fn omission_experiment_validates_inputs() {
    assert!(omission_experiment(49, [0.0, 1.0, 1.0], 0.0, 1).is_err());
    assert!(omission_experiment(100, [0.0, 1.0, 1.0], 1.0, 1).is_err());
    assert!(omission_experiment(100, [0.0, f64::INFINITY, 1.0], 0.0, 1).is_err());
}
