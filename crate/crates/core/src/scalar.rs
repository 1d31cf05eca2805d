//! Scalar types for measures and interval estimates.
//!
//! Exact measures use [`Ratio`]; floating estimates use `f32`/`f64`.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num};

/// A number a finite measure can be reported in.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync {
    /// `num / den`; `den` must be non-zero.
    fn from_ratio(num: u64, den: u64) -> Self;

    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_ratio(num: u64, den: u64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for Ratio<u64> {
    fn from_ratio(num: u64, den: u64) -> Self {
        Ratio::new(num, den)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Scalar for Ratio<u128> {
    fn from_ratio(num: u64, den: u64) -> Self {
        Ratio::new(num as u128, den as u128)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Two-sided 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials` at 95% confidence.
pub fn wilson_interval<F: Float + FromPrimitive>(successes: u64, trials: u64) -> (F, F) {
    let n = F::from_u64(trials).expect("trial count is representable");
    let p = F::from_u64(successes).expect("success count is representable") / n;
    let z = F::from_f64(Z_95).expect("quantile is representable");
    let one = F::one();
    let two = one + one;
    let four = two + two;
    let z2 = z * z;
    let denom = one + z2 / n;
    let center = (p + z2 / (two * n)) / denom;
    let half = z / denom * (p * (one - p) / n + z2 / (four * n * n)).sqrt();
    let lo = (center - half).max(F::zero());
    let hi = (center + half).min(one);
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ratios_reduce() {
        let r: Ratio<u64> = Scalar::from_ratio(4, 16);
        assert_eq!(r, Ratio::new(1, 4));
        assert_eq!(r.to_f64(), 0.25);
        let f: f32 = Scalar::from_ratio(3, 8);
        assert_eq!(f, 0.375);
    }

    #[test]
    fn wilson_matches_closed_form() {
        // 0 of n: upper bound z²/(n+z²)
        let (lo, hi): (f64, f64) = wilson_interval(0, 100_000);
        assert_eq!(lo, 0.0);
        let z2 = Z_95 * Z_95;
        assert!((hi - z2 / (100_000.0 + z2)).abs() < 1e-15);
        // symmetric around 1/2 at p = 1/2
        let (lo, hi): (f64, f64) = wilson_interval(50, 100);
        assert!((lo + hi - 1.0).abs() < 1e-12);
        assert!((lo - 0.403_831).abs() < 1e-5);
        let (lo32, hi32): (f32, f32) = wilson_interval(50, 100);
        assert!((lo32 as f64 - lo).abs() < 1e-5 && (hi32 as f64 - hi).abs() < 1e-5);
    }
}
