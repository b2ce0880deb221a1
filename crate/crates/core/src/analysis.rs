//! Closed-form minimum distortion under the peak input constraint, predicted
//! outcome-class statistics, and peak-cost checks on observed hit rates.

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use crate::channel::RngSeed;
use crate::domain::{BlockConfig, DistortionValue};
use crate::error::Result;
use crate::oracle::evaluate_policy;
use crate::policy::{compute_schedule, optimal_policy, Mode, OutcomeClass, ProbeSchedule};

/// Minimum distortion with its per-use breakdown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistortionFormulaReport {
    pub cfg: BlockConfig,
    /// `Σ_j 2 [c_j - 2^{L-j}]⁺ / M + 2 [M - Σ_j c_j - 1]⁺ / M` with the exact schedule.
    pub d_min: DistortionValue,
    pub schedule: ProbeSchedule,
    /// `2 [c_j - 2^{L-j}]⁺ / M` for `j = 1..L`.
    pub terms: Vec<DistortionValue>,
    /// `2 [M - Σ_j c_j - 1]⁺ / M`, the all-zero class.
    pub residual: DistortionValue,
    pub zero_distortion: bool,
    /// Smallest block length that can resolve `M` directions with unlimited
    /// peak weight, `ceil(log2 M)`.
    pub resolving_length: u32,
    /// Exact distortion of the implemented (integer-schedule) optimal policy.
    pub feasible_value: DistortionValue,
}

impl DistortionFormulaReport {
    /// True when the formula value equals what the implemented policy achieves.
    pub fn feasible_matches(&self) -> bool {
        self.d_min == self.feasible_value
    }
}

fn positive_part(x: BigRational) -> BigRational {
    if x < BigRational::zero() {
        BigRational::zero()
    } else {
        x
    }
}

fn int(x: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(x.into())
}

/// Evaluates the minimum distortion for `cfg`.
pub fn min_distortion(cfg: &BlockConfig) -> Result<DistortionFormulaReport> {
    let schedule = compute_schedule(cfg);
    let m = int(cfg.m());
    let two = int(2);
    let l = cfg.l() as usize;

    let terms: Vec<DistortionValue> = schedule
        .exact
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let branch = int(BigInt::from(2).pow((l - 1 - j) as u32));
            DistortionValue::from_rational(&two * positive_part(c - branch) / &m)
        })
        .collect();
    let residual = DistortionValue::from_rational(
        &two * positive_part(&m - schedule.exact_total() - BigRational::one()) / &m,
    );
    let d_min: DistortionValue = terms.iter().cloned().sum::<DistortionValue>() + residual.clone();
    let zero_distortion = terms.iter().all(DistortionValue::is_zero) && residual.is_zero();

    let policy = optimal_policy(cfg, schedule.clone(), Mode::Canonical)?;
    let feasible_value = evaluate_policy(cfg, &policy, &mut RngSeed(0).rng())?;

    Ok(DistortionFormulaReport {
        cfg: *cfg,
        d_min,
        schedule,
        terms,
        residual,
        zero_distortion,
        resolving_length: (cfg.m() - 1).ilog2() + 1,
        feasible_value,
    })
}

/// Predicted probability and final ambiguity size of one outcome class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictedClass {
    pub class: OutcomeClass,
    pub probability: BigRational,
    pub ambiguity_size: BigRational,
    /// False when the predicted size is not an integer, which flags a
    /// schedule the integer policy cannot follow exactly.
    pub integral: bool,
}

/// First hit at `k` has probability `c_k / M` and leaves `c_k / 2^{L-k}`
/// candidates; the all-zero class has probability `1 - Σ c_k / M` and leaves
/// `M - Σ c_k`.
pub fn predicted_class_stats(cfg: &BlockConfig, schedule: &ProbeSchedule) -> Vec<PredictedClass> {
    let m = int(cfg.m());
    let l = cfg.l() as usize;
    let mut out: Vec<PredictedClass> = schedule
        .exact
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let size = c / int(BigInt::from(2).pow((l - 1 - j) as u32));
            PredictedClass {
                class: OutcomeClass::FirstHit(j as u32 + 1),
                probability: c / &m,
                integral: size.is_integer(),
                ambiguity_size: size,
            }
        })
        .collect();
    let total = schedule.exact_total();
    let size = &m - &total;
    out.push(PredictedClass {
        class: OutcomeClass::AllZero,
        probability: BigRational::one() - total / &m,
        integral: size.is_integer(),
        ambiguity_size: size,
    });
    out
}

/// Every exact schedule entry respects `c_k <= B_peak`.
pub fn schedule_within_peak(cfg: &BlockConfig, schedule: &ProbeSchedule) -> bool {
    let cap = int(cfg.b_peak());
    schedule.exact.iter().all(|c| *c <= cap) && schedule.feasible.iter().all(|&c| c <= cfg.b_peak())
}

/// Observed first-hit counts per channel use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstHitCounts {
    pub trials: u64,
    /// `first_hits[k - 1]` counts blocks whose first 1 came at use `k`.
    pub first_hits: Vec<u64>,
}

/// Checks `M · P(first hit at k) <= B_peak` for every `k`, allowing three
/// binomial standard errors of slack.
pub fn peak_probability_bound_check(counts: &FirstHitCounts, cfg: &BlockConfig) -> bool {
    if counts.trials == 0 {
        return false;
    }
    let n = counts.trials as f64;
    let m = cfg.m() as f64;
    counts.first_hits.iter().all(|&hits| {
        let p = hits as f64 / n;
        let slack = 3.0 * m * (p * (1.0 - p) / n).sqrt();
        m * p <= cfg.b_peak() as f64 + slack + 1e-12
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_config;

    fn report(m: u32, l: u32, b: u32) -> DistortionFormulaReport {
        min_distortion(&validate_config(m, l, b).unwrap()).unwrap()
    }

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn formula_examples() {
        let r = report(4, 2, 2);
        assert!(r.d_min.is_zero());
        assert!(r.zero_distortion);
        assert_eq!(r.schedule.feasible, vec![2, 1]);

        let r = report(4, 1, 2);
        assert_eq!(r.d_min, DistortionValue::from_ratio(1, 1));
        assert_eq!(r.terms, vec![DistortionValue::from_ratio(2, 4)]);
        assert_eq!(r.residual, DistortionValue::from_ratio(2, 4));

        let r = report(8, 2, 2);
        assert_eq!(r.d_min, DistortionValue::from_ratio(1, 1));
        assert_eq!(r.terms, vec![DistortionValue::zero(), DistortionValue::from_ratio(2, 8)]);
        assert_eq!(r.residual, DistortionValue::from_ratio(6, 8));

        let r = report(8, 2, 1);
        assert_eq!(r.d_min, DistortionValue::from_ratio(10, 8));
        assert!(!r.zero_distortion);
    }

    #[test]
    fn feasible_value_tracks_formula_on_dyadic_configs() {
        for (m, l, b) in [(16, 4, 8), (16, 3, 2), (8, 2, 1), (32, 6, 4)] {
            let r = report(m, l, b);
            assert!(r.feasible_matches(), "M={m} L={l} B={b}");
        }
    }

    #[test]
    fn resolving_length() {
        assert_eq!(report(16, 1, 1).resolving_length, 4);
        assert_eq!(report(17, 1, 1).resolving_length, 5);
        assert_eq!(report(2, 1, 1).resolving_length, 1);
    }

    #[test]
    fn class_predictions() {
        let cfg = validate_config(16, 4, 16).unwrap();
        let stats = predicted_class_stats(&cfg, &compute_schedule(&cfg));
        let probs: Vec<_> = stats.iter().map(|c| c.probability.clone()).collect();
        assert_eq!(probs, vec![q(1, 2), q(1, 4), q(1, 8), q(1, 16), q(1, 16)]);
        assert!(stats.iter().all(|c| c.ambiguity_size == q(1, 1) && c.integral));

        let cfg = validate_config(8, 2, 1).unwrap();
        let stats = predicted_class_stats(&cfg, &compute_schedule(&cfg));
        assert_eq!(stats[0].probability, q(1, 8));
        assert_eq!(stats[0].ambiguity_size, q(1, 2));
        assert!(!stats[0].integral);
        assert_eq!((stats[1].probability.clone(), stats[1].ambiguity_size.clone()), (q(1, 8), q(1, 1)));
        assert_eq!((stats[2].probability.clone(), stats[2].ambiguity_size.clone()), (q(6, 8), q(6, 1)));

        let cfg = validate_config(2, 1, 1).unwrap();
        let stats = predicted_class_stats(&cfg, &compute_schedule(&cfg));
        assert_eq!(stats.len(), 2);
        assert!(stats.iter().all(|c| c.probability == q(1, 2) && c.ambiguity_size == q(1, 1)));
    }

    #[test]
    fn peak_checks() {
        let cfg = validate_config(16, 4, 4).unwrap();
        assert!(schedule_within_peak(&cfg, &compute_schedule(&cfg)));
        let honest = FirstHitCounts { trials: 1000, first_hits: vec![250, 250, 250, 125] };
        assert!(peak_probability_bound_check(&honest, &cfg));
        let overweight = FirstHitCounts { trials: 100_000, first_hits: vec![50_000, 0, 0, 0] };
        assert!(!peak_probability_bound_check(&overweight, &cfg));
    }
}
