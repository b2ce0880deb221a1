//! Exact expected distortion of the optimal, sweep, random and idle policies.

use beam_pointing::channel::RngSeed;
use beam_pointing::oracle::{evaluate_nonadaptive_uniform, evaluate_policy};
use beam_pointing::policy::{Mode, PolicySpec};
use beam_pointing::simulate::run_experiment;
use beam_pointing::validate_config;

fn main() -> beam_pointing::Result<()> {
    for (m, l, b) in [(8, 2, 2), (8, 3, 4), (16, 4, 8)] {
        let cfg = validate_config(m, l, b)?;
        println!("{cfg}");
        for spec in [PolicySpec::Optimal, PolicySpec::Sweep, PolicySpec::Idle] {
            let policy = spec.build(&cfg, Mode::Canonical)?;
            let d = evaluate_policy(&cfg, policy.as_ref(), &mut RngSeed(0).rng())?;
            println!("    {:<10} {d} ({:.4})", spec.to_string(), d.to_f64());
        }
        // a randomized policy has no single tree; enumerate when small, simulate otherwise
        let spec = PolicySpec::Random(b);
        match evaluate_nonadaptive_uniform(&cfg, b) {
            Ok(d) => println!("    {:<10} {d} ({:.4})", spec.to_string(), d.to_f64()),
            Err(_) => {
                let policy = spec.build(&cfg, Mode::Random)?;
                let r = run_experiment(&cfg, policy.as_ref(), 50_000, RngSeed(1))?;
                println!("    {:<10} ~{:.4} +/- {:.4}", spec.to_string(), r.mean_distortion, r.std_error);
            }
        }
    }
    Ok(())
}
