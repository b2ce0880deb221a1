//! Monte Carlo harness: independent blocks, Bayes estimate at block end,
//! empirical average distortion and outcome-class histogram.
//!
//! Trial `i` draws everything from its own generator seeded with
//! [`RngSeed::for_trial`], and all aggregates are integer counts, so results
//! are identical however the trials are scheduled.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::analysis::{min_distortion, DistortionFormulaReport, FirstHitCounts};
use crate::channel::{run_block, sample_state, RngSeed};
use crate::domain::{BlockConfig, hamming_distortion};
use crate::error::{Error, Result};
use crate::policy::{Mode, OutcomeClass, Policy};

/// Confidence level of the exact binomial interval.
pub const INTERVAL_LEVEL: f64 = 0.95;

/// Error counts at or below this distance from 0 or `blocks` get an exact
/// interval in addition to the normal-approximation standard error.
const BOUNDARY_COUNT: u64 = 10;

/// What one simulated block leaves behind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub class: OutcomeClass,
    pub final_size: usize,
    /// Estimate differed from the state (distortion 2).
    pub error: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStat {
    pub class: OutcomeClass,
    pub count: u64,
    pub probability: f64,
    pub mean_size: f64,
    pub min_size: u64,
    pub max_size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub cfg: BlockConfig,
    pub policy: String,
    pub mode: Mode,
    pub blocks: u64,
    pub seed: RngSeed,
    pub errors: u64,
    pub mean_distortion: f64,
    pub std_error: f64,
    /// Exact (Clopper-Pearson) interval for the mean distortion, present
    /// when the error count is near 0 or `blocks`.
    pub exact_interval: Option<[f64; 2]>,
    pub class_histogram: Vec<ClassStat>,
    pub theoretical: DistortionFormulaReport,
}

impl SimulationReport {
    pub fn first_hit_counts(&self) -> FirstHitCounts {
        FirstHitCounts {
            trials: self.blocks,
            first_hits: self
                .class_histogram
                .iter()
                .filter(|c| matches!(c.class, OutcomeClass::FirstHit(_)))
                .map(|c| c.count)
                .collect(),
        }
    }

    pub fn class(&self, class: OutcomeClass) -> Option<&ClassStat> {
        self.class_histogram.iter().find(|c| c.class == class)
    }

    /// `|empirical - theoretical| <= sigmas * std_error`.
    pub fn agrees_with_theory(&self, sigmas: f64) -> bool {
        (self.mean_distortion - self.theoretical.d_min.to_f64()).abs() <= sigmas * self.std_error
    }
}

/// Simulates `blocks` independent blocks and returns one record each, in
/// trial order.
pub fn run_trials(cfg: &BlockConfig, policy: &dyn Policy, blocks: u64, seed: RngSeed) -> Result<Vec<TrialRecord>> {
    (0..blocks)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seed.trial_rng(trial);
            let state = sample_state(cfg, &mut rng);
            let trajectory = run_block(cfg, policy, state, &mut rng)?;
            let estimate = trajectory.ambiguity.estimate();
            Ok(TrialRecord {
                class: trajectory.outcome_class(),
                final_size: trajectory.ambiguity.len(),
                error: !hamming_distortion(state, estimate.s_hat).is_zero(),
            })
        })
        .collect()
}

/// Empirical class probabilities and final ambiguity sizes, one entry per
/// class in `k = 1..L`, all-zero order. Classes never observed report zeros.
pub fn summarize_classes(records: &[TrialRecord], l: u32) -> Vec<ClassStat> {
    let n = records.len() as f64;
    OutcomeClass::all(l)
        .map(|class| {
            let sizes: Vec<u64> = records.iter().filter(|r| r.class == class).map(|r| r.final_size as u64).collect();
            let count = sizes.len() as u64;
            ClassStat {
                class,
                count,
                probability: if n > 0.0 { count as f64 / n } else { 0.0 },
                mean_size: if count > 0 { sizes.iter().sum::<u64>() as f64 / count as f64 } else { 0.0 },
                min_size: sizes.iter().copied().min().unwrap_or(0),
                max_size: sizes.iter().copied().max().unwrap_or(0),
            }
        })
        .collect()
}

/// Mean and standard error of per-block distortions in `{0, 2}`.
fn moments(errors: u64, blocks: u64) -> (f64, f64) {
    let n = blocks as f64;
    let e = errors as f64;
    let mean = 2.0 * e / n;
    if blocks < 2 {
        return (mean, 0.0);
    }
    let var = (e * (2.0 - mean).powi(2) + (n - e) * mean.powi(2)) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Clopper-Pearson interval on the error rate, scaled to distortion units.
pub fn exact_interval(errors: u64, blocks: u64, level: f64) -> [f64; 2] {
    let alpha = 1.0 - level;
    let (x, n) = (errors as f64, blocks as f64);
    let lower = if errors == 0 {
        0.0
    } else {
        Beta::new(x, n - x + 1.0).map(|b| b.inverse_cdf(alpha / 2.0)).unwrap_or(0.0)
    };
    let upper = if errors == blocks {
        1.0
    } else {
        Beta::new(x + 1.0, n - x).map(|b| b.inverse_cdf(1.0 - alpha / 2.0)).unwrap_or(1.0)
    };
    [2.0 * lower, 2.0 * upper]
}

pub fn run_experiment(cfg: &BlockConfig, policy: &dyn Policy, blocks: u64, seed: RngSeed) -> Result<SimulationReport> {
    if blocks == 0 {
        return Err(Error::NoBlocks);
    }
    let records = run_trials(cfg, policy, blocks, seed)?;
    let errors = records.iter().filter(|r| r.error).count() as u64;
    let (mean_distortion, std_error) = moments(errors, blocks);
    let near_boundary = errors <= BOUNDARY_COUNT || blocks - errors <= BOUNDARY_COUNT;
    Ok(SimulationReport {
        cfg: *cfg,
        policy: policy.name(),
        mode: policy.mode(),
        blocks,
        seed,
        errors,
        mean_distortion,
        std_error,
        exact_interval: near_boundary.then(|| exact_interval(errors, blocks, INTERVAL_LEVEL)),
        class_histogram: summarize_classes(&records, cfg.l()),
        theoretical: min_distortion(cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_config;
    use crate::policy::{compute_schedule, optimal_policy, IdlePolicy};

    #[test]
    fn moments_match_direct_computation() {
        let values: Vec<f64> = [0.0, 2.0, 2.0, 0.0, 0.0].to_vec();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let (m, se) = moments(2, 5);
        assert!((m - mean).abs() < 1e-12);
        assert!((se - (var / n).sqrt()).abs() < 1e-12);
        assert_eq!(moments(0, 10), (0.0, 0.0));
    }

    #[test]
    fn exact_interval_at_zero_errors() {
        // closed form for x = 0: upper = 1 - (alpha/2)^(1/n)
        let [lo, hi] = exact_interval(0, 1000, 0.95);
        assert_eq!(lo, 0.0);
        let expected = 2.0 * (1.0 - 0.025f64.powf(1.0 / 1000.0));
        assert!((hi - expected).abs() < 1e-6, "{hi} vs {expected}");
    }

    #[test]
    fn zero_weight_policy_never_hits() {
        let cfg = validate_config(8, 3, 2).unwrap();
        let report = run_experiment(&cfg, &IdlePolicy, 2000, RngSeed(3)).unwrap();
        let all_zero = report.class(OutcomeClass::AllZero).unwrap();
        assert_eq!(all_zero.count, 2000);
        assert_eq!(all_zero.probability, 1.0);
        assert_eq!(all_zero.min_size, 8);
    }

    #[test]
    fn two_direction_classes_split_evenly() {
        let cfg = validate_config(2, 1, 1).unwrap();
        let policy = optimal_policy(&cfg, compute_schedule(&cfg), Mode::Canonical).unwrap();
        let report = run_experiment(&cfg, &policy, 20_000, RngSeed(11)).unwrap();
        for class in OutcomeClass::all(1) {
            let stat = report.class(class).unwrap();
            let sigma = (0.25f64 / 20_000.0).sqrt();
            assert!((stat.probability - 0.5).abs() <= 3.0 * sigma);
            assert_eq!((stat.min_size, stat.max_size), (1, 1));
        }
        assert_eq!(report.mean_distortion, 0.0);
        assert!(report.exact_interval.is_some());
    }

    #[test]
    fn zero_blocks_rejected() {
        let cfg = validate_config(2, 1, 1).unwrap();
        assert_eq!(run_experiment(&cfg, &IdlePolicy, 0, RngSeed(0)).unwrap_err(), Error::NoBlocks);
    }
}
