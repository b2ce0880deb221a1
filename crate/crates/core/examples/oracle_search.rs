//! Exhaustive search over adaptive policies on small instances, compared with
//! the closed form, and the budget guard on a large one.

use beam_pointing::analysis::min_distortion;
use beam_pointing::oracle::{minimize_over_policies, reduced_tree_count, DEFAULT_BUDGET};
use beam_pointing::validate_config;

fn main() -> beam_pointing::Result<()> {
    for (m, l, b) in [(4, 2, 2), (4, 1, 1), (6, 2, 2), (8, 3, 2), (5, 3, 1)] {
        let cfg = validate_config(m, l, b)?;
        let result = minimize_over_policies(&cfg, DEFAULT_BUDGET)?;
        let formula = min_distortion(&cfg)?.d_min;
        println!(
            "{cfg}: search {} formula {} over {} trees",
            result.min_distortion, formula, result.policies_evaluated
        );
        println!("    argmin {}", result.argmin_tree.render());
    }

    let big = validate_config(32, 5, 16)?;
    println!("{big}: {} reduced trees", reduced_tree_count(&big));
    if let Err(e) = minimize_over_policies(&big, DEFAULT_BUDGET) {
        println!("    {e}");
    }
    Ok(())
}
