//! Scalar abstractions.
//!
//! The deterministic machinery (orderings, sticky dynamics, stability
//! analysis) only needs a signed, ordered, division-closed number type, so it
//! is generic over [`Scalar`]: `f64`, `f32`, and the `num-rational` types all
//! qualify. Exact types report a zero [`Scalar::tolerance`], which turns every
//! coincidence test (equal positions, simultaneous collision times, stability
//! slack) into an exact comparison.
//!
//! The stochastic engines additionally need square roots and Gaussian
//! sampling and are bounded by [`FloatScalar`].

use std::fmt::{Debug, Display};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, Signed, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

/// Arithmetic required by the deterministic dynamics and analyzers.
pub trait Scalar: Num + Signed + FromPrimitive + PartialOrd + Clone + Debug + Display {
    /// Intrinsic comparison slack of the type, used (scaled) when deciding
    /// whether two positions or event times coincide and as the slack of the
    /// stability conditions. Zero for exact types.
    fn tolerance() -> Self;

    /// Conversion from a cardinality (cluster mass, grid size, ...).
    fn from_count(k: usize) -> Self {
        Self::from_usize(k).expect("count not representable in scalar type")
    }
}

impl Scalar for f64 {
    fn tolerance() -> f64 {
        1e-12
    }
}

impl Scalar for f32 {
    fn tolerance() -> f32 {
        1e-6
    }
}

impl<T> Scalar for Ratio<T>
where
    T: Clone + Integer + Signed + Debug + Display,
    Ratio<T>: FromPrimitive,
{
    fn tolerance() -> Self {
        Self::zero()
    }
}

/// Floating-point scalar usable by the Monte Carlo engines.
pub trait FloatScalar: Scalar + Float {
    /// One standard normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl FloatScalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl FloatScalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

/// `|a - b| <= tolerance * (1 + |a| + |b|)`; exact equality for exact types.
pub(crate) fn close<S: Scalar>(a: &S, b: &S) -> bool {
    let diff = (a.clone() - b.clone()).abs();
    diff <= S::tolerance() * (S::one() + a.abs() + b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::{BigRational, Rational64};

    #[test]
    fn rational_tolerance_is_exactly_zero() {
        assert!(Rational64::tolerance().is_zero());
        assert!(BigRational::tolerance().is_zero());
    }

    #[test]
    fn close_is_exact_for_rationals() {
        let a = Rational64::new(1, 3);
        let b = Rational64::new(1, 3);
        let c = Rational64::new(1, 3) + Rational64::new(1, 1_000_000_000);
        assert!(close(&a, &b));
        assert!(!close(&a, &c));
    }

    #[test]
    fn close_absorbs_rounding_noise_for_floats() {
        assert!(close(&(0.1f64 + 0.2), &0.3));
        assert!(!close(&1.0f64, &(1.0 + 1e-9)));
    }
}
