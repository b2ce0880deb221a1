//! Configuration, channel state and input types, and the one-hot Hamming
//! distortion shared by every other module.
//!
//! States and estimates are stored as 1-based direction indices. The one-hot
//! vector form is recovered with [`BeamIndex::one_hot`] when needed.

use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Number of directions `M`, block length `L` and peak input weight `B_peak`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct BlockConfig {
    m: u32,
    l: u32,
    b_peak: u32,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    m: u32,
    l: u32,
    b_peak: u32,
}

impl TryFrom<RawConfig> for BlockConfig {
    type Error = Error;
    fn try_from(raw: RawConfig) -> Result<Self> {
        BlockConfig::new(raw.m, raw.l, raw.b_peak)
    }
}

impl From<BlockConfig> for RawConfig {
    fn from(cfg: BlockConfig) -> Self {
        RawConfig { m: cfg.m, l: cfg.l, b_peak: cfg.b_peak }
    }
}

impl BlockConfig {
    pub fn new(m: u32, l: u32, b_peak: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewDirections(m));
        }
        if l < 1 {
            return Err(Error::EmptyBlock(l));
        }
        if b_peak < 1 {
            return Err(Error::ZeroPeak(b_peak));
        }
        if b_peak > m {
            return Err(Error::PeakExceedsDirections { b_peak, m });
        }
        Ok(BlockConfig { m, l, b_peak })
    }

    /// Number of quantized directions.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Channel uses per block.
    pub fn l(&self) -> u32 {
        self.l
    }

    /// Largest admissible input weight.
    pub fn b_peak(&self) -> u32 {
        self.b_peak
    }

    pub fn directions(&self) -> impl Iterator<Item = BeamIndex> {
        (1..=self.m).map(BeamIndex)
    }
}

impl fmt::Display for BlockConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(M={}, L={}, B_peak={})", self.m, self.l, self.b_peak)
    }
}

/// Validates `(m, l, b_peak)` and returns the configuration.
pub fn validate_config(m: u32, l: u32, b_peak: u32) -> Result<BlockConfig> {
    BlockConfig::new(m, l, b_peak)
}

/// Position of the single one in the one-hot channel state, in `[1..M]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BeamIndex(u32);

impl BeamIndex {
    pub fn new(index: u32, cfg: &BlockConfig) -> Result<Self> {
        if index == 0 || index > cfg.m {
            return Err(Error::IndexOutOfRange { index, m: cfg.m });
        }
        Ok(BeamIndex(index))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub(crate) fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub(crate) fn from_slot(slot: usize) -> Self {
        BeamIndex(slot as u32 + 1)
    }

    pub fn one_hot(self, m: u32) -> Vec<u8> {
        (1..=m).map(|i| u8::from(i == self.0)).collect()
    }
}

impl fmt::Display for BeamIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Support of a binary channel input: the directions probed in one channel use.
///
/// Construction checks the support against `[1..M]` and the peak weight, so a
/// mask built from a configuration is always admissible for it. The empty mask
/// is legal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InputMask {
    bits: FixedBitSet,
}

impl InputMask {
    pub fn empty(cfg: &BlockConfig) -> Self {
        InputMask { bits: FixedBitSet::with_capacity(cfg.m as usize) }
    }

    pub fn new<I>(cfg: &BlockConfig, support: I) -> Result<Self>
    where
        I: IntoIterator<Item = u32>,
    {
        let mut bits = FixedBitSet::with_capacity(cfg.m as usize);
        for index in support {
            let beam = BeamIndex::new(index, cfg)?;
            bits.insert(beam.slot());
        }
        let mask = InputMask { bits };
        mask.check(cfg)?;
        Ok(mask)
    }

    /// Re-checks dimension and peak weight against `cfg`.
    pub fn check(&self, cfg: &BlockConfig) -> Result<()> {
        if self.bits.len() != cfg.m as usize {
            return Err(Error::DimensionMismatch { expected: cfg.m, got: self.bits.len() as u32 });
        }
        let weight = self.weight();
        if weight > cfg.b_peak as usize {
            return Err(Error::WeightExceeded { weight, b_peak: cfg.b_peak });
        }
        Ok(())
    }

    /// Hamming weight (input cost).
    pub fn weight(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, beam: BeamIndex) -> bool {
        self.bits.contains(beam.slot())
    }

    pub fn support(&self) -> impl Iterator<Item = BeamIndex> + '_ {
        self.bits.ones().map(BeamIndex::from_slot)
    }

    pub(crate) fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    /// The binary input vector.
    pub fn to_vector(&self) -> Vec<u8> {
        (0..self.bits.len()).map(|i| u8::from(self.bits.contains(i))).collect()
    }
}

impl fmt::Display for InputMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, beam) in self.support().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{beam}")?;
        }
        f.write_str("}")
    }
}

/// Exact rational distortion value.
///
/// Renders as `p/q` (or a bare integer) and parses back from the same form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DistortionValue(BigRational);

impl DistortionValue {
    pub fn zero() -> Self {
        DistortionValue(BigRational::zero())
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        DistortionValue(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_rational(value: BigRational) -> Self {
        DistortionValue(value)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// True when the value lies in `[0, 2]`.
    pub fn in_range(&self) -> bool {
        let two = BigRational::from_integer(BigInt::from(2));
        self.0 >= BigRational::zero() && self.0 <= two
    }
}

impl Add for DistortionValue {
    type Output = DistortionValue;
    fn add(self, rhs: Self) -> Self {
        DistortionValue(self.0 + rhs.0)
    }
}

impl Sum for DistortionValue {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(DistortionValue::zero(), Add::add)
    }
}

impl fmt::Display for DistortionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for DistortionValue {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<BigInt>().map_err(|e| format!("bad rational {s:?}: {e}"));
        match s.split_once('/') {
            Some((p, q)) => {
                let q = parse(q)?;
                if q.is_zero() {
                    return Err(format!("bad rational {s:?}: zero denominator"));
                }
                Ok(DistortionValue(BigRational::new(parse(p)?, q)))
            }
            None => Ok(DistortionValue(BigRational::from_integer(parse(s)?))),
        }
    }
}

impl Serialize for DistortionValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DistortionValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing rationals as `p/q` strings.
pub(crate) mod rational_strings {
    use num::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    use super::DistortionValue;

    pub fn serialize<S: Serializer>(values: &[BigRational], serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(values.iter().map(|v| DistortionValue::from_rational(v.clone()).to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(deserializer)?
            .iter()
            .map(|s| s.parse::<DistortionValue>().map(|d| d.as_rational().clone()))
            .collect::<Result<_, _>>()
            .map_err(serde::de::Error::custom)
    }
}

/// Hamming distortion between one-hot vectors: 0 on a match, 2 otherwise.
pub fn hamming_distortion(s: BeamIndex, s_hat: BeamIndex) -> DistortionValue {
    if s == s_hat {
        DistortionValue::zero()
    } else {
        DistortionValue::from_ratio(2, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn config_bounds() {
        let cfg = validate_config(16, 4, 8).unwrap();
        assert_eq!((cfg.m(), cfg.l(), cfg.b_peak()), (16, 4, 8));
        assert_eq!(validate_config(4, 2, 5), Err(Error::PeakExceedsDirections { b_peak: 5, m: 4 }));
        assert_eq!(validate_config(1, 1, 1), Err(Error::TooFewDirections(1)));
        assert_eq!(validate_config(4, 0, 1), Err(Error::EmptyBlock(0)));
        assert_eq!(validate_config(4, 1, 0), Err(Error::ZeroPeak(0)));
        assert!(validate_config(1, 1, 1).unwrap_err().to_string().contains("M must be >= 2"));
        assert!(validate_config(4, 2, 5).unwrap_err().to_string().contains("b_peak exceeds M"));
    }

    #[test]
    fn hamming_cases() {
        let cfg = validate_config(8, 1, 1).unwrap();
        let b = |i| BeamIndex::new(i, &cfg).unwrap();
        assert!(hamming_distortion(b(3), b(3)).is_zero());
        assert_eq!(hamming_distortion(b(3), b(5)), DistortionValue::from_ratio(2, 1));
        assert!(hamming_distortion(b(1), b(1)).is_zero());
    }

    #[test]
    fn mask_rejects_overweight_and_out_of_range() {
        let cfg = validate_config(4, 1, 2).unwrap();
        assert!(InputMask::new(&cfg, [1, 2]).is_ok());
        assert_eq!(
            InputMask::new(&cfg, [1, 2, 3]),
            Err(Error::WeightExceeded { weight: 3, b_peak: 2 })
        );
        assert_eq!(InputMask::new(&cfg, [5]), Err(Error::IndexOutOfRange { index: 5, m: 4 }));
        assert_eq!(InputMask::empty(&cfg).weight(), 0);
        assert_eq!(InputMask::new(&cfg, [3, 1]).unwrap().to_string(), "{1,3}");
        assert_eq!(InputMask::new(&cfg, [2]).unwrap().to_vector(), vec![0, 1, 0, 0]);
    }

    #[test]
    fn one_hot_round_trip() {
        let cfg = validate_config(5, 1, 1).unwrap();
        let s = BeamIndex::new(4, &cfg).unwrap();
        assert_eq!(s.one_hot(5), vec![0, 0, 0, 1, 0]);
    }

    #[test]
    fn distortion_text_form() {
        let d = DistortionValue::from_ratio(10, 8);
        assert_eq!(d.to_string(), "5/4");
        assert_eq!("5/4".parse::<DistortionValue>().unwrap(), d);
        assert_eq!("0".parse::<DistortionValue>().unwrap(), DistortionValue::zero());
        assert!("1/0".parse::<DistortionValue>().is_err());
        assert!(DistortionValue::from_ratio(3, 2).in_range());
        assert!(!DistortionValue::from_ratio(5, 2).in_range());
    }

    proptest! {
        #[test]
        fn hamming_is_a_symmetric_metric(m in 2u32..64, a in 1u32..64, b in 1u32..64) {
            let cfg = validate_config(m, 1, 1).unwrap();
            let (a, b) = ((a - 1) % m + 1, (b - 1) % m + 1);
            let (sa, sb) = (BeamIndex::new(a, &cfg).unwrap(), BeamIndex::new(b, &cfg).unwrap());
            prop_assert_eq!(hamming_distortion(sa, sb), hamming_distortion(sb, sa));
            prop_assert_eq!(hamming_distortion(sa, sb).is_zero(), a == b);
        }
    }
}
