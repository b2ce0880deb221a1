//! Sensing over the binary beam-pointing channel with in-block memory.
//!
//! A transmitter probes subsets of `M` quantized directions for `L` channel
//! uses per block, under a peak input weight `B_peak`, and learns after each
//! use whether the probe contained the hidden direction. This crate
//! simulates that channel, implements the distortion-optimal probing policy
//! and the Bayes estimator, evaluates the closed-form minimum distortion, and
//! verifies it by exhaustive search over policies on small instances.
//!
//! ```
//! use beam_pointing::{analysis, domain::validate_config};
//!
//! let cfg = validate_config(16, 4, 8).unwrap();
//! let report = analysis::min_distortion(&cfg).unwrap();
//! assert!(report.zero_distortion);
//! assert_eq!(report.schedule.feasible, vec![8, 4, 2, 1]);
//! ```

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod domain;
pub mod error;
pub mod estimator;
pub mod oracle;
pub mod policy;
pub mod simulate;

pub use domain::{validate_config, BeamIndex, BlockConfig, DistortionValue, InputMask};
pub use error::{Error, Result};
