//! Minimum distortion and probe schedule for a few configurations, plus the
//! distortion-vs-peak curve at M = 16, L = 4.
//!
//! cargo run --example closed_form

use beam_pointing::analysis::{min_distortion, predicted_class_stats};
use beam_pointing::validate_config;

fn main() -> beam_pointing::Result<()> {
    for (m, l, b) in [(16, 4, 8), (16, 3, 8), (8, 2, 1), (12, 3, 5)] {
        let cfg = validate_config(m, l, b)?;
        let report = min_distortion(&cfg)?;
        let schedule: Vec<String> = report.schedule.feasible.iter().map(u32::to_string).collect();
        println!(
            "{cfg}: D = {} ({:.4}), schedule [{}], integer policy achieves {}",
            report.d_min,
            report.d_min.to_f64(),
            schedule.join(" "),
            report.feasible_value
        );
        for class in predicted_class_stats(&cfg, &report.schedule) {
            println!("    {:<8} p = {:<6} |B| = {}", class.class.to_string(), class.probability, class.ambiguity_size);
        }
    }

    println!("\nM = 16, L = 4");
    for b in 1..=16 {
        let d = min_distortion(&validate_config(16, 4, b)?)?.d_min;
        println!("  B_peak = {b:>2}  D = {:.4}  {}", d.to_f64(), "#".repeat((d.to_f64() * 20.0).round() as usize));
    }
    Ok(())
}
