//! Ambiguity-set tracking and the end-of-block Bayes estimator.
//!
//! With a uniform prior and noiseless feedback the posterior over directions
//! is uniform on the set of directions consistent with every `(probe, output)`
//! pair seen so far. That set is all the estimator needs.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use num::{BigInt, BigRational};

use crate::domain::{BeamIndex, BlockConfig, DistortionValue, InputMask};
use crate::error::{Error, Result};

/// Directions consistent with the block's trajectory so far. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AmbiguitySet {
    members: FixedBitSet,
}

impl AmbiguitySet {
    pub fn from_members<I>(cfg: &BlockConfig, members: I) -> Result<Self>
    where
        I: IntoIterator<Item = u32>,
    {
        let mut bits = FixedBitSet::with_capacity(cfg.m() as usize);
        for index in members {
            bits.insert(BeamIndex::new(index, cfg)?.slot());
        }
        if bits.is_clear() {
            return Err(Error::InconsistentTrajectory);
        }
        Ok(AmbiguitySet { members: bits })
    }

    /// Refines the set with one observation: intersect with the probe on a
    /// hit, remove the probe on a miss.
    pub fn update(&self, probe: &InputMask, y: bool) -> Result<AmbiguitySet> {
        if probe.bits().len() != self.members.len() {
            return Err(Error::DimensionMismatch {
                expected: self.members.len() as u32,
                got: probe.bits().len() as u32,
            });
        }
        let mut next = self.members.clone();
        if y {
            next.intersect_with(probe.bits());
        } else {
            next.difference_with(probe.bits());
        }
        if next.is_clear() {
            return Err(Error::InconsistentTrajectory);
        }
        Ok(AmbiguitySet { members: next })
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_resolved(&self) -> bool {
        self.len() == 1
    }

    pub fn contains(&self, beam: BeamIndex) -> bool {
        self.members.contains(beam.slot())
    }

    pub fn members(&self) -> impl Iterator<Item = BeamIndex> + '_ {
        self.members.ones().map(BeamIndex::from_slot)
    }

    /// Number of directions in the underlying configuration.
    pub fn dimension(&self) -> u32 {
        self.members.len() as u32
    }

    /// Uniform posterior over the members.
    pub fn posterior(&self) -> BTreeMap<BeamIndex, BigRational> {
        posterior(self)
    }

    pub fn estimate(&self) -> Estimate {
        estimate(self)
    }
}

impl fmt::Display for AmbiguitySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, beam) in self.members().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{beam}")?;
        }
        f.write_str("}")
    }
}

/// The full set `[1..M]`, before any channel use.
pub fn init_ambiguity(cfg: &BlockConfig) -> AmbiguitySet {
    let mut members = FixedBitSet::with_capacity(cfg.m() as usize);
    members.insert_range(..);
    AmbiguitySet { members }
}

pub fn update_ambiguity(current: &AmbiguitySet, probe: &InputMask, y: bool) -> Result<AmbiguitySet> {
    current.update(probe, y)
}

/// Replays a `(probe, output)` log from the full set.
pub fn replay_log(cfg: &BlockConfig, inputs: &[InputMask], outputs: &[bool]) -> Result<AmbiguitySet> {
    inputs
        .iter()
        .zip(outputs)
        .try_fold(init_ambiguity(cfg), |set, (probe, &y)| set.update(probe, y))
}

pub fn posterior(current: &AmbiguitySet) -> BTreeMap<BeamIndex, BigRational> {
    let share = BigRational::new(BigInt::from(1), BigInt::from(current.len()));
    current.members().map(|beam| (beam, share.clone())).collect()
}

/// Bayes-optimal point estimate at the end of a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Estimate {
    pub s_hat: BeamIndex,
    pub posterior_support: AmbiguitySet,
    /// Expected distortion given the trajectory: `2 (b - 1) / b` for a set of size `b`.
    pub conditional_distortion: DistortionValue,
}

/// Picks the smallest member. Every member has the same Bayes risk under the
/// uniform posterior, so the choice only fixes determinism.
pub fn estimate(current: &AmbiguitySet) -> Estimate {
    let size = current.len() as i64;
    let s_hat = current.members().next().expect("ambiguity sets are nonempty");
    Estimate {
        s_hat,
        posterior_support: current.clone(),
        conditional_distortion: DistortionValue::from_ratio(2 * (size - 1), size),
    }
}
