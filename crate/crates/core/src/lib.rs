//! Toolkit for systems of Brownian particles on the real line whose drift
//! depends only on the *ordering* of the coordinates:
//!
//! ```text
//! dX_i(t) = b_i(Σ X(t)) dt + sqrt(2 ε) dW_i(t),
//! ```
//!
//! where `Σ x` is the permutation sorting `x`. The crate provides
//!
//! * [`ordering`] — permutation words, the sorting map with deterministic
//!   tie-breaking, tie-set enumeration and the centering projection;
//! * [`drift`] — order-dependent drift specifications (general tables and
//!   rank-based families), stability analysis of the prefix-mean conditions,
//!   and the two-particle sign classification;
//! * [`sticky`] — the exact zero-noise limit: event-driven sticky-particle
//!   dynamics with cluster bookkeeping, the reflection/local-time
//!   decomposition, and semigroup / L¹-contraction checks;
//! * [`sde`] — Euler–Maruyama simulation of the diffusion and of the
//!   two-particle reduced difference process, with reproducible per-path
//!   random streams and occupation-time statistics;
//! * [`analytics`] — closed-form small-noise limits for two particles
//!   (selection weights, cluster velocity, limiting paths, exit
//!   probabilities, hitting-time transforms, transport-equation limits);
//! * [`ergodic`] — long-run statistics of the centered unit-noise system:
//!   empirical cone measures, velocity estimates, and the diffusive
//!   rescaling consistency check.
//!
//! Deterministic combinatorial/geometric code is generic over [`scalar::Scalar`]
//! (double precision, single precision, or exact rationals); the stochastic
//! engines require [`scalar::FloatScalar`].

// Validation guards are written as `!(x > 0)` rather than `x <= 0` so that a
// NaN input fails the guard instead of slipping past it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod drift;
pub mod ergodic;
pub mod error;
pub mod ordering;
pub mod quad;
pub mod scalar;
pub mod sde;
pub mod sticky;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::{FloatScalar, Scalar};

/// Exact rational scalar used by the exact-arithmetic test oracles.
pub type Rational = num_rational::BigRational;

/// Double-precision drift specification.
pub type DriftSpec64 = drift::DriftSpec<f64>;
/// Double-precision stability report.
pub type StabilityReport64 = drift::StabilityReport<f64>;
/// Double-precision sticky-particle state.
pub type StickyState64 = sticky::StickyState<f64>;
/// Double-precision sticky-particle path.
pub type StickyPath64 = sticky::StickyPath<f64>;
/// Double-precision trajectory on a uniform grid.
pub type Trajectory64 = trajectory::Trajectory<f64>;
/// Double-precision simulation configuration.
pub type SimConfig64 = sde::SimConfig<f64>;
/// Double-precision ordering occupation statistics.
pub type OccupationStats64 = sde::OccupationStats<f64>;
/// Double-precision empirical cone measure.
pub type ConeMeasure64 = ergodic::EmpiricalConeMeasure<f64>;
