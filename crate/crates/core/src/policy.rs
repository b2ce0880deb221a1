//! Adaptive probing strategies.
//!
//! A policy maps the feedback seen so far in a block to the next probe. The
//! optimal strategy probes `c̃_j` fresh directions per use until the first hit,
//! then halves the surviving set on every remaining use. Sweep, random and
//! idle policies serve as baselines.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, Zero};
use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::domain::{BeamIndex, BlockConfig, InputMask};
use crate::error::{Error, Result};
use crate::estimator::AmbiguitySet;

/// Fresh-probe sizes per channel use before the first hit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeSchedule {
    /// Real-valued recursion `c_j = min((M - Σ_{k<j} c_k) / 2, B_peak)`, kept exact.
    #[serde(with = "crate::domain::rational_strings")]
    pub exact: Vec<BigRational>,
    /// Integer sizes used by the policy: same recursion with a floor.
    pub feasible: Vec<u32>,
}

impl ProbeSchedule {
    /// True when every exact entry is the integer the policy actually uses.
    pub fn is_integral(&self) -> bool {
        self.exact
            .iter()
            .zip(&self.feasible)
            .all(|(c, &f)| *c == BigRational::from_integer(BigInt::from(f)))
    }

    pub fn exact_total(&self) -> BigRational {
        self.exact.iter().fold(BigRational::zero(), |acc, c| acc + c)
    }
}

pub fn compute_schedule(cfg: &BlockConfig) -> ProbeSchedule {
    let m = BigRational::from_integer(BigInt::from(cfg.m()));
    let cap = BigRational::from_integer(BigInt::from(cfg.b_peak()));
    let two = BigRational::from_integer(BigInt::from(2));

    let mut exact = Vec::with_capacity(cfg.l() as usize);
    let mut used = BigRational::zero();
    let mut feasible = Vec::with_capacity(cfg.l() as usize);
    let mut used_int = 0u32;
    for _ in 0..cfg.l() {
        let c = ((&m - &used) / &two).min(cap.clone());
        used += &c;
        exact.push(c);

        let c_int = ((cfg.m() - used_int) / 2).min(cfg.b_peak());
        used_int += c_int;
        feasible.push(c_int);
    }
    ProbeSchedule { exact, feasible }
}

/// Index of the first use whose output was 1, or the all-zero class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeClass {
    FirstHit(u32),
    AllZero,
}

impl OutcomeClass {
    pub fn of(outputs: &[bool]) -> Self {
        match outputs.iter().position(|&y| y) {
            Some(k) => OutcomeClass::FirstHit(k as u32 + 1),
            None => OutcomeClass::AllZero,
        }
    }

    /// All classes for block length `l`, hits first.
    pub fn all(l: u32) -> impl Iterator<Item = OutcomeClass> {
        (1..=l).map(OutcomeClass::FirstHit).chain(std::iter::once(OutcomeClass::AllZero))
    }
}

impl fmt::Display for OutcomeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeClass::FirstHit(k) => write!(f, "k={k}"),
            OutcomeClass::AllZero => f.write_str("all-zero"),
        }
    }
}

/// How a policy breaks ties among equally useful directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Lowest-indexed candidates first; no randomness consumed.
    Canonical,
    /// Uniform selection without replacement.
    Random,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Canonical => "canonical",
            Mode::Random => "random",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(Mode::Canonical),
            "random" => Ok(Mode::Random),
            other => Err(Error::InvalidPolicy(format!("unknown mode {other:?}"))),
        }
    }
}

/// What a policy may look at when choosing the probe for use `use_index`.
#[derive(Debug, Clone, Copy)]
pub struct ProbeContext<'a> {
    pub cfg: &'a BlockConfig,
    /// 1-based channel use within the block.
    pub use_index: u32,
    /// Outputs of uses `1..use_index`.
    pub feedback: &'a [bool],
    pub ambiguity: &'a AmbiguitySet,
}

/// A causal probing strategy. Implementations hold no per-block state; one
/// value can drive many trajectories at once.
pub trait Policy: Send + Sync {
    fn name(&self) -> String;

    fn mode(&self) -> Mode;

    fn next_probe(&self, ctx: &ProbeContext<'_>, rng: &mut dyn RngCore) -> Result<InputMask>;
}

fn pick(cfg: &BlockConfig, candidates: &AmbiguitySet, count: usize, mode: Mode, rng: &mut dyn RngCore) -> Result<InputMask> {
    let members: Vec<BeamIndex> = candidates.members().collect();
    let chosen: Vec<u32> = match mode {
        Mode::Canonical => members.iter().take(count).map(|b| b.get()).collect(),
        Mode::Random => members.choose_multiple(rng, count).map(|b| b.get()).collect(),
    };
    InputMask::new(cfg, chosen)
}

/// Fresh-probe schedule until the first hit, balanced halving afterwards.
#[derive(Debug, Clone)]
pub struct OptimalPolicy {
    schedule: ProbeSchedule,
    mode: Mode,
}

impl OptimalPolicy {
    pub fn schedule(&self) -> &ProbeSchedule {
        &self.schedule
    }
}

pub fn optimal_policy(cfg: &BlockConfig, schedule: ProbeSchedule, mode: Mode) -> Result<OptimalPolicy> {
    if schedule.feasible.len() != cfg.l() as usize {
        return Err(Error::InvalidPolicy(format!(
            "schedule has {} entries for a block of {}",
            schedule.feasible.len(),
            cfg.l()
        )));
    }
    if let Some(&c) = schedule.feasible.iter().find(|&&c| c > cfg.b_peak()) {
        return Err(Error::WeightExceeded { weight: c as usize, b_peak: cfg.b_peak() });
    }
    Ok(OptimalPolicy { schedule, mode })
}

impl Policy for OptimalPolicy {
    fn name(&self) -> String {
        "optimal".into()
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn next_probe(&self, ctx: &ProbeContext<'_>, rng: &mut dyn RngCore) -> Result<InputMask> {
        let count = if ctx.feedback.contains(&true) {
            // ceil(b/2) <= b <= B_peak, since the set is the support of an earlier probe
            ctx.ambiguity.len().div_ceil(2)
        } else {
            // before a hit the set is exactly the never-probed directions
            self.schedule.feasible[ctx.use_index as usize - 1] as usize
        };
        pick(ctx.cfg, ctx.ambiguity, count, self.mode, rng)
    }
}

/// Probes direction `j` alone at use `j` until a hit, then nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct SweepPolicy;

pub fn sweep_policy(_cfg: &BlockConfig) -> SweepPolicy {
    SweepPolicy
}

impl Policy for SweepPolicy {
    fn name(&self) -> String {
        "sweep".into()
    }

    fn mode(&self) -> Mode {
        Mode::Canonical
    }

    fn next_probe(&self, ctx: &ProbeContext<'_>, _rng: &mut dyn RngCore) -> Result<InputMask> {
        if ctx.feedback.contains(&true) || ctx.use_index > ctx.cfg.m() {
            Ok(InputMask::empty(ctx.cfg))
        } else {
            InputMask::new(ctx.cfg, [ctx.use_index])
        }
    }
}

/// Non-adaptive control: a fresh uniform mask of fixed weight every use.
#[derive(Debug, Clone, Copy)]
pub struct RandomPolicy {
    weight: u32,
}

pub fn random_policy(cfg: &BlockConfig, weight: u32) -> Result<RandomPolicy> {
    if weight < 1 || weight > cfg.b_peak() {
        return Err(Error::InvalidPolicy(format!(
            "random weight {weight} outside [1..{}]",
            cfg.b_peak()
        )));
    }
    Ok(RandomPolicy { weight })
}

impl Policy for RandomPolicy {
    fn name(&self) -> String {
        format!("random:{}", self.weight)
    }

    fn mode(&self) -> Mode {
        Mode::Random
    }

    fn next_probe(&self, ctx: &ProbeContext<'_>, rng: &mut dyn RngCore) -> Result<InputMask> {
        let all: Vec<u32> = (1..=ctx.cfg.m()).collect();
        let chosen = all.choose_multiple(rng, self.weight as usize).copied();
        InputMask::new(ctx.cfg, chosen)
    }
}

/// Never probes anything; every block ends with the full set.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdlePolicy;

impl Policy for IdlePolicy {
    fn name(&self) -> String {
        "idle".into()
    }

    fn mode(&self) -> Mode {
        Mode::Canonical
    }

    fn next_probe(&self, ctx: &ProbeContext<'_>, _rng: &mut dyn RngCore) -> Result<InputMask> {
        Ok(InputMask::empty(ctx.cfg))
    }
}

/// Policy selector as written on the command line: `optimal`, `sweep`,
/// `random:<w>` or `idle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicySpec {
    Optimal,
    Sweep,
    Random(u32),
    Idle,
}

impl PolicySpec {
    /// Builds the policy for `cfg`. `mode` only affects the optimal policy.
    pub fn build(&self, cfg: &BlockConfig, mode: Mode) -> Result<Box<dyn Policy>> {
        Ok(match *self {
            PolicySpec::Optimal => Box::new(optimal_policy(cfg, compute_schedule(cfg), mode)?),
            PolicySpec::Sweep => Box::new(sweep_policy(cfg)),
            PolicySpec::Random(w) => Box::new(random_policy(cfg, w)?),
            PolicySpec::Idle => Box::new(IdlePolicy),
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Optimal => f.write_str("optimal"),
            PolicySpec::Sweep => f.write_str("sweep"),
            PolicySpec::Random(w) => write!(f, "random:{w}"),
            PolicySpec::Idle => f.write_str("idle"),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(PolicySpec::Optimal),
            "sweep" => Ok(PolicySpec::Sweep),
            "idle" => Ok(PolicySpec::Idle),
            _ => match s.strip_prefix("random:") {
                Some(w) => w
                    .parse()
                    .map(PolicySpec::Random)
                    .map_err(|_| Error::InvalidPolicy(format!("bad random weight in {s:?}"))),
                None => Err(Error::InvalidPolicy(format!("unknown policy {s:?}"))),
            },
        }
    }
}
