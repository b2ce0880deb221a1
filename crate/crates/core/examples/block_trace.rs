//! Walks one block of the optimal policy use by use, showing the probe, the
//! channel output and the shrinking ambiguity set.
//!
//! cargo run --example block_trace -- 32 5 8 21

use beam_pointing::channel::{run_block, RngSeed};
use beam_pointing::estimator::init_ambiguity;
use beam_pointing::policy::{compute_schedule, optimal_policy, Mode};
use beam_pointing::{validate_config, BeamIndex};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<u32> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let [m, l, b, s] = args[..] else {
        return block(32, 5, 8, 21);
    };
    block(m, l, b, s)
}

fn block(m: u32, l: u32, b: u32, s: u32) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = validate_config(m, l, b)?;
    let policy = optimal_policy(&cfg, compute_schedule(&cfg), Mode::Canonical)?;
    let state = BeamIndex::new(s, &cfg)?;
    let trajectory = run_block(&cfg, &policy, state, &mut RngSeed(0).rng())?;

    println!("{cfg}, true direction {state}");
    let mut set = init_ambiguity(&cfg);
    for (j, (x, &y)) in trajectory.inputs.iter().zip(&trajectory.outputs).enumerate() {
        set = set.update(x, y)?;
        println!("use {}: probe {x:<22} y = {}  -> {} candidates {set}", j + 1, u8::from(y), set.len());
    }
    let estimate = set.estimate();
    println!(
        "class {}, estimate {}, conditional distortion {}",
        trajectory.outcome_class(),
        estimate.s_hat,
        estimate.conditional_distortion
    );
    Ok(())
}
