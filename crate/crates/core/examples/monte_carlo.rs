//! Simulates the optimal policy across block lengths and compares with the
//! closed form.
//!
//! cargo run --release --example monte_carlo

use beam_pointing::channel::RngSeed;
use beam_pointing::policy::{compute_schedule, optimal_policy, Mode};
use beam_pointing::simulate::run_experiment;
use beam_pointing::validate_config;

fn main() -> beam_pointing::Result<()> {
    let blocks = 100_000;
    println!("M = 16, B_peak = 4, {blocks} blocks per row");
    println!("{:>2} {:>10} {:>10} {:>9} {:>6}", "L", "empirical", "formula", "std err", "z");
    for l in 1..=6 {
        let cfg = validate_config(16, l, 4)?;
        let policy = optimal_policy(&cfg, compute_schedule(&cfg), Mode::Random)?;
        let r = run_experiment(&cfg, &policy, blocks, RngSeed(17))?;
        let theory = r.theoretical.d_min.to_f64();
        let z = if r.std_error > 0.0 { (r.mean_distortion - theory) / r.std_error } else { 0.0 };
        print!("{l:>2} {:>10.5} {theory:>10.5} {:>9.5} {z:>6.2}", r.mean_distortion, r.std_error);
        match r.exact_interval {
            Some([lo, hi]) => println!("  95% exact [{lo:.5}, {hi:.5}]"),
            None => println!(),
        }
    }
    Ok(())
}
