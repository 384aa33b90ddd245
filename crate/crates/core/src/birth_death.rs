//! Linear birth-death clone simulation, binned hazard estimates, and the
//! power-hazard fit they are compared against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Population size at which a run is abandoned.
pub const EXPLOSION_GUARD: u64 = 100_000_000;
/// Default clone size that counts as onset.
pub const DEFAULT_ONSET_THRESHOLD: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BirthDeathSpec {
    /// Per-cell birth rate.
    pub b: f64,
    /// Per-cell death rate.
    pub d: f64,
    pub i0: u64,
    pub t_end: f64,
    pub seed: u64,
}

impl BirthDeathSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("b", self.b), ("d", self.d)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::ParamDomain {
                    name: name.into(),
                    value: v,
                    constraint: ">= 0".into(),
                });
            }
        }
        if self.b == 0.0 && self.d == 0.0 {
            return Err(Error::invalid("birth and death rates cannot both be zero"));
        }
        if self.i0 < 1 {
            return Err(Error::invalid("initial population must be at least 1"));
        }
        if self.i0 > EXPLOSION_GUARD {
            return Err(Error::invalid(format!(
                "initial population exceeds the {EXPLOSION_GUARD} guard"
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::ParamDomain {
                name: "t_end".into(),
                value: self.t_end,
                constraint: "> 0".into(),
            });
        }
        Ok(())
    }

    /// Generator for replicate `index`: seeded by `seed`, stream `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Extinct,
    /// Population reached the onset threshold.
    Threshold,
    /// Horizon reached first.
    Censored,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Extinct => "extinct",
            Outcome::Threshold => "threshold",
            Outcome::Censored => "censored",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// `(time, population)` starting at `(0, i0)`, one entry per event.
    pub points: Vec<(f64, u64)>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub replicate: u64,
    pub outcome: Outcome,
    /// Extinction or threshold time, `t_end` when censored.
    pub time: f64,
}

/// Event-driven run. At size `i` the next event comes after an `Exp(i(b+d))`
/// wait and is a birth with probability `b/(b+d)`.
fn run(
    spec: &BirthDeathSpec,
    rng: &mut ChaCha8Rng,
    threshold: Option<u64>,
    mut record: Option<&mut Vec<(f64, u64)>>,
) -> Result<(Outcome, f64)> {
    let rate = spec.b + spec.d;
    let p_birth = spec.b / rate;
    let mut t = 0.0;
    let mut i = spec.i0;
    if let Some(r) = record.as_deref_mut() {
        r.push((0.0, i));
    }
    if threshold.is_some_and(|th| i >= th) {
        return Ok((Outcome::Threshold, 0.0));
    }
    loop {
        // 1 − U lies in (0, 1], so the log is finite.
        let u: f64 = rng.gen();
        let wait = -(1.0 - u).ln() / (i as f64 * rate);
        if t + wait > spec.t_end {
            return Ok((Outcome::Censored, spec.t_end));
        }
        t += wait;
        if rng.gen::<f64>() < p_birth {
            i += 1;
        } else {
            i -= 1;
        }
        if let Some(r) = record.as_deref_mut() {
            r.push((t, i));
        }
        if i == 0 {
            return Ok((Outcome::Extinct, t));
        }
        if threshold.is_some_and(|th| i >= th) {
            return Ok((Outcome::Threshold, t));
        }
        if i > EXPLOSION_GUARD {
            return Err(Error::NonConvergence {
                iterations: 0,
                reason: format!("population exceeded {EXPLOSION_GUARD} at t = {t}; run truncated"),
            });
        }
    }
}

/// Full trajectory of replicate 0.
pub fn simulate_bd(spec: &BirthDeathSpec) -> Result<Trajectory> {
    spec.validate()?;
    let mut points = Vec::new();
    let (outcome, _) = run(spec, &mut spec.rng(0), None, Some(&mut points))?;
    Ok(Trajectory { points, outcome })
}

/// First time replicate `index` goes extinct or, with a threshold, reaches
/// it. The trajectory is not stored.
pub fn first_passage(
    spec: &BirthDeathSpec,
    index: u64,
    threshold: Option<u64>,
) -> Result<ReplicateOutcome> {
    spec.validate()?;
    let (outcome, time) = run(spec, &mut spec.rng(index), threshold, None)?;
    Ok(ReplicateOutcome {
        replicate: index,
        outcome,
        time,
    })
}

/// Replicates `0..n`.
pub fn simulate_replicates(
    spec: &BirthDeathSpec,
    n: u64,
    threshold: Option<u64>,
) -> Result<Vec<ReplicateOutcome>> {
    (0..n).map(|i| first_passage(spec, i, threshold)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HazardBin {
    pub t_lo: f64,
    pub t_hi: f64,
    pub t_mid: f64,
    pub events: u64,
    pub exposure: f64,
    pub hazard: f64,
}

/// Occurrence/exposure hazard on `bins` equal-width bins over
/// `[0, horizon]`: events in the bin divided by the time at risk spent in
/// it. Observations are `(time, event)`; `event = false` marks censoring.
/// `horizon` defaults to the largest time.
pub fn empirical_hazard(
    observations: &[(f64, bool)],
    bins: usize,
    horizon: Option<f64>,
) -> Result<Vec<HazardBin>> {
    if observations.is_empty() {
        return Err(Error::invalid("no observations"));
    }
    if bins == 0 {
        return Err(Error::invalid("need at least one bin"));
    }
    if let Some(&(t, _)) = observations.iter().find(|(t, _)| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InputDomain {
            name: "time".into(),
            value: t,
            constraint: ">= 0".into(),
        });
    }
    if !observations.iter().any(|o| o.1) {
        return Err(Error::invalid("all times are censored"));
    }
    let t_max = observations.iter().map(|o| o.0).fold(0.0, f64::max);
    let horizon = horizon.unwrap_or(t_max);
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("hazard horizon must be positive"));
    }
    let width = horizon / bins as f64;
    let mut out: Vec<HazardBin> = (0..bins)
        .map(|k| {
            let t_lo = k as f64 * width;
            let t_hi = if k + 1 == bins { horizon } else { t_lo + width };
            HazardBin {
                t_lo,
                t_hi,
                t_mid: 0.5 * (t_lo + t_hi),
                events: 0,
                exposure: 0.0,
                hazard: 0.0,
            }
        })
        .collect();
    for &(t, event) in observations {
        for b in out.iter_mut() {
            if t <= b.t_lo {
                break;
            }
            b.exposure += t.min(b.t_hi) - b.t_lo;
        }
        if event && t <= horizon {
            let k = ((t / width) as usize).min(bins - 1);
            // Events exactly on a bin's left edge belong to the previous bin.
            let k = if k > 0 && t <= out[k].t_lo { k - 1 } else { k };
            out[k].events += 1;
        }
    }
    for b in &mut out {
        b.hazard = if b.exposure > 0.0 {
            b.events as f64 / b.exposure
        } else {
            0.0
        };
    }
    Ok(out)
}

/// Maximum-likelihood `c` for `λ(t) = c (t − t₀)^{k−1}` with `k`, `t₀`
/// fixed: `c = n k / Σ (tᵢ − t₀)^k`.
pub fn ad_hazard_fit(times: &[f64], k: u32, t0: f64) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::invalid("no event times"));
    }
    if k < 1 {
        return Err(Error::invalid("number of stages k must be >= 1"));
    }
    if let Some(&t) = times.iter().find(|t| !(**t > t0 && t.is_finite())) {
        return Err(Error::InputDomain {
            name: "t".into(),
            value: t,
            constraint: format!("> t0 = {t0}"),
        });
    }
    let s: f64 = times.iter().map(|t| (t - t0).powi(k as i32)).sum();
    Ok(times.len() as f64 * f64::from(k) / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(b: f64, d: f64, seed: u64) -> BirthDeathSpec {
        BirthDeathSpec {
            b,
            d,
            i0: 1,
            t_end: 1.0,
            seed,
        }
    }

    #[test]
    fn pure_death_is_a_single_event() {
        let tr = simulate_bd(&BirthDeathSpec { t_end: 1e9, ..spec(0.0, 1.0, 3) }).unwrap();
        assert_eq!(tr.points.len(), 2);
        assert_eq!(tr.points[1].1, 0);
        assert_eq!(tr.outcome, Outcome::Extinct);
    }

    #[test]
    fn trajectories_step_by_one() {
        let s = BirthDeathSpec {
            i0: 5,
            t_end: 3.0,
            ..spec(1.2, 1.0, 11)
        };
        let tr = simulate_bd(&s).unwrap();
        for w in tr.points.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert_eq!(w[0].1.abs_diff(w[1].1), 1);
        }
        assert_eq!(simulate_bd(&s).unwrap(), tr);
    }

    #[test]
    fn validation() {
        assert!(simulate_bd(&spec(0.0, 0.0, 1)).is_err());
        assert!(simulate_bd(&spec(-1.0, 1.0, 1)).is_err());
        assert!(simulate_bd(&BirthDeathSpec { t_end: 0.0, ..spec(1.0, 1.0, 1) }).is_err());
    }

    #[test]
    fn threshold_outcome() {
        let s = BirthDeathSpec {
            t_end: 100.0,
            ..spec(2.0, 0.0, 5)
        };
        let r = first_passage(&s, 0, Some(10)).unwrap();
        assert_eq!(r.outcome, Outcome::Threshold);
        assert!(r.time > 0.0 && r.time < 100.0);
    }

    #[test]
    fn ad_fit_examples() {
        assert_eq!(ad_hazard_fit(&[1.0, 1.0], 1, 0.0).unwrap(), 1.0);
        let ts = [0.5, 1.5, 2.0, 4.0];
        assert!((ad_hazard_fit(&ts, 1, 0.0).unwrap() - 4.0 / 8.0).abs() < 1e-15);
        assert!(ad_hazard_fit(&[], 1, 0.0).is_err());
        assert!(ad_hazard_fit(&[1.0], 2, 1.0).is_err());
    }

    #[test]
    fn single_bin_is_occurrence_over_exposure() {
        let obs = [(1.0, true), (2.0, false), (3.0, true)];
        let h = empirical_hazard(&obs, 1, None).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].events, 2);
        assert!((h[0].hazard - 2.0 / 6.0).abs() < 1e-15);
        assert!(empirical_hazard(&[(1.0, false)], 2, None).is_err());
    }
}
