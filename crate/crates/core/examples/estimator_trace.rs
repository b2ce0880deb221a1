//! Feeds a hand-written probe log to the estimator and prints the posterior
//! after every observation.

use beam_pointing::estimator::init_ambiguity;
use beam_pointing::{validate_config, InputMask};

fn main() -> beam_pointing::Result<()> {
    let cfg = validate_config(10, 4, 4)?;
    let log: [(&[u32], bool); 4] = [(&[1, 2, 3, 4], false), (&[5, 6, 7], false), (&[8, 9], true), (&[9], false)];

    let mut set = init_ambiguity(&cfg);
    for (probe, y) in log {
        let x = InputMask::new(&cfg, probe.iter().copied())?;
        set = set.update(&x, y)?;
        let posterior: Vec<String> = set.posterior().iter().map(|(s, p)| format!("{s}:{p}")).collect();
        println!("probe {x} y={} -> {}", u8::from(y), posterior.join(" "));
    }
    let e = set.estimate();
    println!("estimate {} with expected distortion {}", e.s_hat, e.conditional_distortion);

    // an observation that contradicts the log is rejected
    let stray = InputMask::new(&cfg, [1])?;
    println!("hit on {stray}: {:?}", set.update(&stray, true).unwrap_err());
    Ok(())
}
