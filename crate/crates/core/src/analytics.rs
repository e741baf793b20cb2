//! Closed-form laws, small-noise limits, error bounds, and statistical
//! helpers for the two-particle difference process and its n-particle
//! generalizations.
//!
//! Throughout, a two-particle system is summarized by the drift gaps of the
//! difference `Z = X₁ − X₂`: `b⁻` applies while `Z <= 0` and `b⁺` while
//! `Z > 0`. The configuration with `Z <= 0` converges iff `b⁻ >= 0`; the
//! one with `Z > 0` converges iff `b⁺ <= 0`.

use crate::drift::{classify_two_particle, Config2Class, DriftSpec};
use crate::error::{Error, Result};
use crate::ordering::sigma_of;
use crate::quad::{integrate, log_integral_exp};
use crate::scalar::{FloatScalar, Scalar};

/// Probability that a doubly diverging pair (`b⁻ < 0 < b⁺`) started at
/// `Z = 0` escapes downward, i.e. settles into the ascending `Z <= 0`
/// configuration, in the small-noise limit: `-b⁻ / (b⁺ - b⁻)`.
///
/// The complementary event (settling into `Z > 0`) has probability
/// `b⁺ / (b⁺ - b⁻)`; the branch with the stronger outward drift is the more
/// likely one. This matches the scale-function computation for the piecewise
/// constant drift `ℓ(z) = b⁻·1{z<=0} + b⁺·1{z>0}`: the exit masses through
/// `∓∞` are proportional to `1/|b⁻|` and `1/b⁺` respectively.
pub fn selection_probability<S: Scalar>(b_minus: &S, b_plus: &S) -> Result<S> {
    if !(*b_minus < S::zero() && *b_plus > S::zero()) {
        return Err(Error::domain(
            "branch selection needs b- < 0 < b+ (both configurations diverging)",
        ));
    }
    Ok(-b_minus.clone() / (b_plus.clone() - b_minus.clone()))
}

/// Common limiting velocity of a doubly converging pair (`b⁻ >= 0 >= b⁺`,
/// not both zero). The cluster spends a `-b⁺/(b⁻ - b⁺)` fraction of time in
/// the ascending configuration, giving
/// `v = (b₂(21)·b₁(12) − b₂(12)·b₁(21)) / (b₁(12) − b₂(12) − b₁(21) + b₂(21))`.
pub fn cluster_velocity<S: Scalar>(spec: &DriftSpec<S>) -> Result<S> {
    let class = classify_two_particle(spec)?;
    if class.class != Config2Class::ConvConv {
        return Err(Error::domain(
            "a common velocity requires both configurations converging",
        ));
    }
    let asc = spec.drift_vector(&crate::ordering::Permutation::identity(2));
    let desc = spec.drift_vector(&crate::ordering::Permutation::new(vec![1, 0]).unwrap());
    let num = desc[1].clone() * asc[0].clone() - asc[1].clone() * desc[0].clone();
    let den = class.b_minus - class.b_plus;
    Ok(num / den)
}

/// Zero-noise limit of the difference process from `z0 != 0`: linear motion
/// at the gap drift of the current sign, absorbed or transmitted at zero
/// according to the receiving side's sign. `z0 = 0` is rejected — when both
/// sides diverge the limit from zero is random, not a single path.
pub fn limit_path_z<S: Scalar>(z0: &S, b_minus: &S, b_plus: &S, t: &S) -> Result<S> {
    if *t < S::zero() {
        return Err(Error::domain("limit path is defined for t >= 0"));
    }
    if *z0 == S::zero() {
        return Err(Error::domain(
            "limit path from z0 = 0 is not unique; start away from zero",
        ));
    }
    let zero = S::zero();
    if *z0 > zero {
        // Descending toward zero only if b⁺ < 0.
        if *b_plus >= zero {
            return Ok(z0.clone() + b_plus.clone() * t.clone());
        }
        let t_star = z0.clone() / (-b_plus.clone());
        if *t <= t_star {
            return Ok(z0.clone() + b_plus.clone() * t.clone());
        }
        if *b_minus >= zero {
            Ok(zero) // the far side converges too: stuck at the origin
        } else {
            Ok(b_minus.clone() * (t.clone() - t_star))
        }
    } else {
        if *b_minus <= zero {
            return Ok(z0.clone() + b_minus.clone() * t.clone());
        }
        let t_star = -z0.clone() / b_minus.clone();
        if *t <= t_star {
            return Ok(z0.clone() + b_minus.clone() * t.clone());
        }
        if *b_plus <= zero {
            Ok(zero)
        } else {
            Ok(b_plus.clone() * (t.clone() - t_star))
        }
    }
}

/// Exhaustive description of the small-noise limit of a coincident pair:
/// the sign class, the two extremal paths, the selection or time-sharing
/// weight, and the common velocity when the pair clusters.
#[derive(Clone, Debug)]
pub struct TwoParticleLimit<S> {
    pub class: Config2Class,
    /// Drift vector in the ascending configuration (`X₁ <= X₂`).
    pub b_asc: [S; 2],
    /// Drift vector in the descending configuration (`X₁ > X₂`).
    pub b_desc: [S; 2],
    pub b_minus: S,
    pub b_plus: S,
    /// Weight of the ascending extremal path `x⁻` in the limit law:
    /// the Bernoulli parameter `-b⁻/(b⁺-b⁻)` when both sides diverge, `1` or
    /// `0` when exactly one side diverges, the time-share `-b⁺/(b⁻-b⁺)` when
    /// the pair clusters, and `1/2` in the driftless case (where the
    /// occupation fraction is arcsine-distributed with mean one half).
    pub ascending_weight: S,
    /// Common limit velocity of the clustered pair (both sides converging).
    pub velocity: Option<S>,
}

impl<S: Scalar> TwoParticleLimit<S> {
    /// Extremal path that stays in the ascending configuration:
    /// `x⁻(t) = x0 + b(12)·t`.
    pub fn x_minus(&self, x0: &[S; 2], t: &S) -> [S; 2] {
        [
            x0[0].clone() + self.b_asc[0].clone() * t.clone(),
            x0[1].clone() + self.b_asc[1].clone() * t.clone(),
        ]
    }

    /// Extremal path that stays in the descending configuration:
    /// `x⁺(t) = x0 + b(21)·t`.
    pub fn x_plus(&self, x0: &[S; 2], t: &S) -> [S; 2] {
        [
            x0[0].clone() + self.b_desc[0].clone() * t.clone(),
            x0[1].clone() + self.b_desc[1].clone() * t.clone(),
        ]
    }
}

/// Computes the [`TwoParticleLimit`] of a two-particle specification.
pub fn two_particle_limit<S: Scalar>(spec: &DriftSpec<S>) -> Result<TwoParticleLimit<S>> {
    let class = classify_two_particle(spec)?;
    let asc = spec.drift_vector(&crate::ordering::Permutation::identity(2));
    let desc = spec.drift_vector(&crate::ordering::Permutation::new(vec![1, 0]).unwrap());
    let (b_minus, b_plus) = (class.b_minus.clone(), class.b_plus.clone());
    let two = S::from_count(2);
    let ascending_weight = match class.class {
        Config2Class::DivDiv => selection_probability(&b_minus, &b_plus)?,
        Config2Class::ConvDiv => S::zero(),
        Config2Class::DivConv => S::one(),
        Config2Class::ConvConv => -b_plus.clone() / (b_minus.clone() - b_plus.clone()),
        Config2Class::DegenerateZero => S::one() / two,
    };
    let velocity = if class.class == Config2Class::ConvConv {
        Some(cluster_velocity(spec)?)
    } else {
        None
    };
    Ok(TwoParticleLimit {
        class: class.class,
        b_asc: [asc[0].clone(), asc[1].clone()],
        b_desc: [desc[0].clone(), desc[1].clone()],
        b_minus,
        b_plus,
        ascending_weight,
        velocity,
    })
}

/// Small-noise limit `u(t, z) = lim E[u₀(Z(t)) | Z(0) = z]` of the
/// one-dimensional difference process, i.e. the limiting viscosity solution
/// of the associated Cauchy problem. Defined for the doubly diverging, the
/// doubly converging, and the driftless-degenerate sign patterns; the mixed
/// patterns have no displayed formula and are rejected.
///
/// Doubly diverging: transport along each branch away from zero, with the
/// zero-start value interpolating the branches by their selection weights,
/// `(b⁺·u₀(b⁺t) − b⁻·u₀(b⁻t)) / (b⁺ − b⁻)`. Doubly converging: transport
/// toward the origin, with the value frozen at `u₀(0)` on the backward cone
/// `-b⁻t <= z <= -b⁺t` of points that have already been absorbed.
pub fn pde_limit_u<S: Scalar>(
    u0: impl Fn(&S) -> S,
    t: &S,
    z: &S,
    b_minus: &S,
    b_plus: &S,
) -> Result<S> {
    if *t < S::zero() {
        return Err(Error::domain("the PDE limit is defined for t >= 0"));
    }
    let zero = S::zero();
    let diverging = *b_minus < zero && *b_plus > zero;
    let converging = *b_minus >= zero && *b_plus <= zero;
    if !diverging && !converging {
        return Err(Error::domain(
            "PDE limit is displayed only for doubly diverging or doubly converging drift gaps",
        ));
    }
    if diverging {
        if *z > zero {
            Ok(u0(&(z.clone() + b_plus.clone() * t.clone())))
        } else if *z < zero {
            Ok(u0(&(z.clone() + b_minus.clone() * t.clone())))
        } else {
            let up = u0(&(b_plus.clone() * t.clone()));
            let down = u0(&(b_minus.clone() * t.clone()));
            Ok((b_plus.clone() * up - b_minus.clone() * down)
                / (b_plus.clone() - b_minus.clone()))
        }
    } else {
        // Doubly converging: characteristics move toward the origin and pile
        // up; the cone of absorbed starting points is [-b⁻t, -b⁺t].
        let lower = -b_minus.clone() * t.clone();
        let upper = -b_plus.clone() * t.clone();
        if *z > upper {
            Ok(u0(&(z.clone() + b_plus.clone() * t.clone())))
        } else if *z < lower {
            Ok(u0(&(z.clone() + b_minus.clone() * t.clone())))
        } else {
            Ok(u0(&zero))
        }
    }
}

/// Bound on `E sup_{s<=t} |Z(s)|²` for a doubly converging pair started at
/// `Z = 0`: `(8√2 + 4)·ε·t`.
pub fn two_particle_gap_bound<S: FloatScalar>(eps: S, t: S) -> S {
    let c = S::from_f64(8.0).unwrap() * S::from_f64(2.0).unwrap().sqrt()
        + S::from_f64(4.0).unwrap();
    c * eps * t
}

/// Bound on `E sup_{s<=t} max_i |sort(X(s))_i − Y_i(s)|²` between the sorted
/// diffusion and the sticky path from the same data, for stable rank
/// velocities: `(4√(2n) + 2n)·ε·t`.
pub fn sorted_vs_sticky_bound<S: FloatScalar>(n: usize, eps: S, t: S) -> S {
    let nf = S::from_count(n);
    let c = S::from_f64(4.0).unwrap() * (S::from_f64(2.0).unwrap() * nf).sqrt()
        + S::from_f64(2.0).unwrap() * nf;
    c * eps * t
}

/// The same comparison after centering (projecting out the mean):
/// `(4√2 + 2)·(n − 1)·ε·t`.
pub fn projected_gap_bound<S: FloatScalar>(n: usize, eps: S, t: S) -> S {
    let c = S::from_f64(4.0).unwrap() * S::from_f64(2.0).unwrap().sqrt()
        + S::from_f64(2.0).unwrap();
    c * S::from_count(n - 1) * eps * t
}

/// CDF of the arcsine law on `[0, 1]`: `F(x) = (2/π)·asin(√x)`. This is the
/// limiting law of the fraction of time a driftless diffusion difference
/// spends positive.
pub fn arcsine_cdf<S: FloatScalar>(x: S) -> S {
    if x <= S::zero() {
        return S::zero();
    }
    if x >= S::one() {
        return S::one();
    }
    let pi = S::from_f64(std::f64::consts::PI).unwrap();
    S::from_count(2) / pi * x.sqrt().asin()
}

/// Kolmogorov–Smirnov statistic `sup_x |F_n(x) − F(x)|` of `samples` against
/// the CDF `cdf`. Sorts the samples in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty(), "KS statistic needs samples");
    samples.sort_by(|a, b| a.partial_cmp(b).expect("comparable samples"));
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in samples.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Probability that the difference process started at `Z = 0` exits
/// `[-δ, δ]` through `+δ`, for gap drifts given as functions of position:
/// `a⁺` on `(0, δ]`, `a⁻` on `[-δ, 0)`. Computed by quadrature of the scale
/// function in log space, so extreme `δ/ε` ratios neither overflow nor
/// degrade; `rel_tol` controls the quadrature (`1e-11` is a good default).
pub fn exit_probability<S: FloatScalar>(
    a_plus: impl Fn(S) -> S,
    a_minus: impl Fn(S) -> S,
    delta: S,
    eps: S,
    rel_tol: S,
) -> Result<S> {
    if !(delta > S::zero()) || !(eps > S::zero()) {
        return Err(Error::domain("exit probability needs delta > 0 and eps > 0"));
    }
    let two_eps = S::from_count(2) * eps;
    let inner_tol = rel_tol * two_eps;
    let log_n = log_integral_exp(
        |y| -integrate(&a_plus, S::zero(), y, inner_tol).expect("inner quadrature") / two_eps,
        S::zero(),
        delta,
        rel_tol,
    )?;
    let log_d = log_integral_exp(
        |y| integrate(&a_minus, y, S::zero(), inner_tol).expect("inner quadrature") / two_eps,
        -delta,
        S::zero(),
        rel_tol,
    )?;
    Ok(sigmoid(log_d - log_n))
}

/// Closed form of [`exit_probability`] for constant gap drifts `c⁺`, `c⁻`.
pub fn exit_probability_constant<S: FloatScalar>(
    c_plus: S,
    c_minus: S,
    delta: S,
    eps: S,
) -> Result<S> {
    if !(delta > S::zero()) || !(eps > S::zero()) {
        return Err(Error::domain("exit probability needs delta > 0 and eps > 0"));
    }
    let two_eps = S::from_count(2) * eps;
    // log ∫₀^δ exp(-c·y / 2ε) dy, stable in every sign regime of c.
    let log_side = |c: S| -> S {
        if c == S::zero() {
            return delta.ln();
        }
        let x = c.abs() * delta / two_eps;
        let base = (two_eps / c.abs()).ln() + (-(-x).exp_m1()).ln();
        if c > S::zero() {
            base
        } else {
            base + x
        }
    };
    let log_n = log_side(c_plus);
    let log_d = log_side(-c_minus);
    Ok(sigmoid(log_d - log_n))
}

/// Small-noise limit of the upward exit probability: `a⁺(0)/(a⁺(0) − a⁻(0))`
/// for a doubly diverging pair (`a⁻(0) < 0 < a⁺(0)`).
pub fn exit_probability_limit<S: Scalar>(a_plus0: &S, a_minus0: &S) -> Result<S> {
    if !(*a_minus0 < S::zero() && *a_plus0 > S::zero()) {
        return Err(Error::domain(
            "the small-noise exit limit needs a-(0) < 0 < a+(0)",
        ));
    }
    Ok(a_plus0.clone() / (a_plus0.clone() - a_minus0.clone()))
}

/// Laplace transform `E[e^{-α τ}]` of the first time the difference process
/// started at `z0 > 0` reaches zero, with constant gap drift `drift` above
/// zero and noise `dZ = drift·dt + 2√ε·dW`:
/// `exp(-z0·(drift + √(drift² + 8αε)) / (4ε))`.
/// At `α = 0` this is the probability of ever reaching zero.
pub fn exit_time_laplace<S: FloatScalar>(z0: S, drift: S, eps: S, alpha: S) -> Result<S> {
    if !(z0 > S::zero()) || !(eps > S::zero()) || alpha < S::zero() {
        return Err(Error::domain(
            "Laplace transform needs z0 > 0, eps > 0, alpha >= 0",
        ));
    }
    let four_eps = S::from_count(4) * eps;
    let root = (drift * drift + S::from_count(2) * alpha * four_eps).sqrt();
    Ok((-(z0 * (drift + root)) / four_eps).exp())
}

/// Alignment `Σ_i z_i · b_i(σ(z))` between a configuration and its drift.
/// For centered `z` and a strictly stable specification this is at most
/// `-b̄ · max_i |z_i|`, which makes `max |z|` a Lyapunov function of the
/// zero-noise centered dynamics.
pub fn lyapunov_dissipation<S: Scalar>(spec: &DriftSpec<S>, z: &[S]) -> Result<S> {
    if z.len() != spec.n() {
        return Err(Error::invalid("configuration dimension mismatch"));
    }
    let sigma = sigma_of(z);
    let d = spec.drift_vector(&sigma);
    Ok(z.iter()
        .zip(&d)
        .fold(S::zero(), |acc, (zi, di)| acc + zi.clone() * di.clone()))
}

fn sigmoid<S: FloatScalar>(s: S) -> S {
    if s >= S::zero() {
        S::one() / (S::one() + (-s).exp())
    } else {
        let e = s.exp();
        e / (S::one() + e)
    }
}

// ---------------------------------------------------------------------------
// Aggregation helpers
// ---------------------------------------------------------------------------

/// Compensated (Kahan) summation; the workhorse for averaging Monte Carlo
/// outputs deterministically and accurately in a fixed order.
#[derive(Clone, Debug, Default)]
pub struct KahanSum<S> {
    sum: S,
    carry: S,
}

impl<S: FloatScalar> KahanSum<S> {
    pub fn new() -> Self {
        KahanSum {
            sum: S::zero(),
            carry: S::zero(),
        }
    }

    pub fn add(&mut self, v: S) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> S {
        self.sum
    }
}

impl<S: FloatScalar> Extend<S> for KahanSum<S> {
    fn extend<I: IntoIterator<Item = S>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

/// Sample mean and standard error of the mean (`s/√n`), computed with
/// compensated sums. The standard error is `NaN` for fewer than two samples.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty(), "mean of an empty sample");
    let mut sum = KahanSum::new();
    sum.extend(xs.iter().copied());
    let mean = sum.value() / xs.len() as f64;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let mut sq = KahanSum::new();
    sq.extend(xs.iter().map(|x| (x - mean) * (x - mean)));
    let var = sq.value() / (xs.len() - 1) as f64;
    (mean, (var / xs.len() as f64).sqrt())
}
