//! Binary beam-pointing channel with in-block memory.
//!
//! One state is drawn per block. Each use outputs 1 exactly when the probed
//! support contains the state, and that output is handed back to the policy
//! before the next use.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{BeamIndex, BlockConfig, InputMask};
use crate::error::Result;
use crate::estimator::{init_ambiguity, AmbiguitySet};
use crate::policy::{OutcomeClass, Policy, ProbeContext};

/// Master seed of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Seed for trial `trial`: splitmix64 finalizer applied to
    /// `master + (trial + 1) * 0x9E3779B97F4A7C15`.
    pub fn for_trial(self, trial: u64) -> u64 {
        let mut z = self.0.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    pub fn trial_rng(self, trial: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.for_trial(trial))
    }
}

/// Uniform draw from `[1..M]`.
pub fn sample_state<R: Rng + ?Sized>(cfg: &BlockConfig, rng: &mut R) -> BeamIndex {
    BeamIndex::new(rng.gen_range(1..=cfg.m()), cfg).expect("draw lies in [1..M]")
}

pub fn channel_output(state: BeamIndex, input: &InputMask) -> bool {
    input.contains(state)
}

/// One block: the state, the probes and the outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockTrajectory {
    pub state: BeamIndex,
    pub inputs: Vec<InputMask>,
    pub outputs: Vec<bool>,
    /// Tracked set after the last use.
    pub ambiguity: AmbiguitySet,
}

impl BlockTrajectory {
    pub fn outcome_class(&self) -> OutcomeClass {
        OutcomeClass::of(&self.outputs)
    }
}

/// Runs one block of `L` uses. The policy at use `j` sees only the first
/// `j - 1` outputs. A mask that breaks the peak constraint aborts the block.
pub fn run_block(
    cfg: &BlockConfig,
    policy: &dyn Policy,
    state: BeamIndex,
    rng: &mut dyn RngCore,
) -> Result<BlockTrajectory> {
    let len = cfg.l() as usize;
    let mut inputs = Vec::with_capacity(len);
    let mut outputs = Vec::with_capacity(len);
    let mut ambiguity = init_ambiguity(cfg);
    for j in 1..=cfg.l() {
        let ctx = ProbeContext { cfg, use_index: j, feedback: &outputs, ambiguity: &ambiguity };
        let probe = policy.next_probe(&ctx, rng)?;
        probe.check(cfg)?;
        let y = channel_output(state, &probe);
        ambiguity = ambiguity.update(&probe, y)?;
        inputs.push(probe);
        outputs.push(y);
    }
    Ok(BlockTrajectory { state, inputs, outputs, ambiguity })
}
