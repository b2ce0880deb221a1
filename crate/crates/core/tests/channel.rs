use beam_pointing::channel::{channel_output, run_block, sample_state, RngSeed};
use beam_pointing::policy::{IdlePolicy, OutcomeClass};
use beam_pointing::simulate::run_experiment;
use beam_pointing::{validate_config, BeamIndex, InputMask};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn state_draws_are_uniform() {
    let cfg = validate_config(16, 1, 1).unwrap();
    let n = 100_000u64;
    let mut counts = [0u64; 16];
    let mut rng = RngSeed(2024).rng();
    for _ in 0..n {
        counts[sample_state(&cfg, &mut rng).get() as usize - 1] += 1;
    }
    let expected = n as f64 / 16.0;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new(15.0).unwrap().inverse_cdf(0.999);
    assert!((critical - 37.697).abs() < 1e-2);
    assert!(stat < critical, "chi-square {stat}");
}

#[test]
fn two_directions_split_evenly() {
    let cfg = validate_config(2, 1, 1).unwrap();
    let n = 100_000;
    let mut rng = RngSeed(7).rng();
    let ones = (0..n).filter(|_| sample_state(&cfg, &mut rng).get() == 1).count() as f64;
    let p = ones / n as f64;
    assert!((p - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt(), "{p}");
}

#[test]
fn output_is_membership() {
    let cfg = validate_config(8, 1, 3).unwrap();
    let mask = InputMask::new(&cfg, [2, 5, 8]).unwrap();
    for s in 1..=8 {
        let beam = BeamIndex::new(s, &cfg).unwrap();
        assert_eq!(channel_output(beam, &mask), [2, 5, 8].contains(&s));
        assert!(!channel_output(beam, &InputMask::empty(&cfg)));
    }
}

#[test]
fn idle_blocks_are_all_zero() {
    let cfg = validate_config(16, 4, 8).unwrap();
    let t = run_block(&cfg, &IdlePolicy, BeamIndex::new(9, &cfg).unwrap(), &mut RngSeed(0).rng()).unwrap();
    assert_eq!(t.outputs, vec![false; 4]);
    assert_eq!(t.outcome_class(), OutcomeClass::AllZero);
    assert_eq!(t.ambiguity.len(), 16);

    let report = run_experiment(&cfg, &IdlePolicy, 10_000, RngSeed(4)).unwrap();
    assert_eq!(report.class(OutcomeClass::AllZero).unwrap().probability, 1.0);
    // guessing direction 1 blind is wrong 15 times out of 16
    assert!((report.mean_distortion - 30.0 / 16.0).abs() <= 3.0 * report.std_error);
}

#[test]
fn trial_seeds_differ() {
    let seeds: std::collections::HashSet<u64> = (0..1000).map(|t| RngSeed(1).for_trial(t)).collect();
    assert_eq!(seeds.len(), 1000);
    assert_eq!(RngSeed(1).for_trial(5), RngSeed(1).for_trial(5));
}
