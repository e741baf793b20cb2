//! Long-horizon observables: empirical velocities with batch-means errors,
//! occupation of orderings and of the coincidence set, the stationary
//! cone-occupancy measure of the centered (projected) dynamics, the velocity
//! functional it induces, and a consistency check of the space–time rescaling
//! that links the unit-noise process to every other noise level.

use std::collections::BTreeMap;

use rand::Rng;

use crate::drift::{analyze_stability, DriftSpec};
use crate::error::{Error, Result};
use crate::ordering::{factorial, in_coincidence_set, lehmer_rank_of, Permutation};
use crate::scalar::FloatScalar;
use crate::sde::{monte_carlo, simulate, DriftEval, SimConfig};
use crate::trajectory::Trajectory;

/// Long-run velocity estimate, either from one path
/// ([`long_run_velocity`]) or through the stationary cone measure
/// ([`estimate_velocity`]).
#[derive(Clone, Debug)]
pub struct VelocityEstimate<S> {
    /// Velocity estimate per particle: `(X_i(T) − X_i(0)) / T` for the
    /// path estimator, `Σ_σ b_i(σ)·w(σ)` for the measure estimator.
    pub per_particle: Vec<S>,
    /// Velocity of the center of mass (the mean of `per_particle`).
    pub mean: S,
    /// `max_i − min_i` of the per-particle estimates. Under strict
    /// stability all particles travel together, so this must be small; it
    /// is always reported, never folded into `mean`.
    pub spread: S,
    /// Standard error of `mean` from non-overlapping batch means; zero when
    /// fewer than two batches are available.
    pub batch_se: S,
}

/// Estimates long-run velocities over `[0, t_final]`, splitting the window
/// into `batches >= 2` equal batches for the standard error.
pub fn long_run_velocity<S, R>(
    spec: &DriftSpec<S>,
    x0: &[S],
    cfg: &SimConfig<S>,
    batches: usize,
    rng: &mut R,
) -> Result<VelocityEstimate<S>>
where
    S: FloatScalar,
    R: Rng + ?Sized,
{
    if batches < 2 {
        return Err(Error::invalid("batch means need at least 2 batches"));
    }
    let steps = cfg.num_steps();
    if steps < batches {
        return Err(Error::invalid(format!(
            "{batches} batches need at least that many steps, got {steps}"
        )));
    }
    if !(cfg.t_final > S::zero()) {
        return Err(Error::invalid("velocity estimation needs t_final > 0"));
    }
    let n = spec.n();
    let nf = S::from_count(n);
    // Center-of-mass samples at batch boundaries (step indices j·steps/batches).
    let mut boundaries: Vec<(S, S)> = Vec::with_capacity(batches + 1);
    let mut marks: Vec<usize> = (0..=batches).map(|j| j * steps / batches).collect();
    marks.dedup();
    let mut x0_copy: Vec<S> = Vec::new();
    let mut x_final: Vec<S> = Vec::new();
    simulate(spec, x0, cfg, rng, |k, t, x| {
        if marks.binary_search(&k).is_ok() {
            let com = x.iter().fold(S::zero(), |a, v| a + *v) / nf;
            boundaries.push((t, com));
        }
        if k == 0 {
            x0_copy = x.to_vec();
        }
        if k == steps {
            x_final = x.to_vec();
        }
    })?;
    let per_particle: Vec<S> = x_final
        .iter()
        .zip(&x0_copy)
        .map(|(xf, xi)| (*xf - *xi) / cfg.t_final)
        .collect();
    let (first, last) = (boundaries[0], boundaries[boundaries.len() - 1]);
    let mean = (last.1 - first.1) / (last.0 - first.0);
    let mut lo = per_particle[0];
    let mut hi = per_particle[0];
    for v in &per_particle {
        if *v < lo {
            lo = *v;
        }
        if *v > hi {
            hi = *v;
        }
    }
    // Batch velocities and their dispersion.
    let m = boundaries.len() - 1;
    let batch_v: Vec<S> = boundaries
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let bmean = batch_v.iter().fold(S::zero(), |a, v| a + *v) / S::from_count(m);
    let var = batch_v
        .iter()
        .fold(S::zero(), |a, v| a + (*v - bmean) * (*v - bmean))
        / S::from_count(m - 1);
    let batch_se = (var / S::from_count(m)).sqrt();
    Ok(VelocityEstimate {
        per_particle,
        mean,
        spread: hi - lo,
        batch_se,
    })
}

/// Time spent in each ordering, counted at step left endpoints.
#[derive(Clone, Debug)]
pub struct OrderingOccupation {
    /// Step counts indexed by the ordering's lexicographic position.
    pub counts: Vec<u64>,
    pub steps: u64,
}

impl OrderingOccupation {
    pub fn fraction_of(&self, sigma: &Permutation) -> f64 {
        self.counts[sigma.lehmer_rank()] as f64 / self.steps as f64
    }

    pub fn fractions(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|c| *c as f64 / self.steps as f64)
            .collect()
    }
}

/// Fraction of time the path spends in each ordering (left-endpoint rule).
pub fn ordering_occupation<S, R>(
    spec: &DriftSpec<S>,
    x0: &[S],
    cfg: &SimConfig<S>,
    rng: &mut R,
) -> Result<OrderingOccupation>
where
    S: FloatScalar,
    R: Rng + ?Sized,
{
    let n = spec.n();
    if n > 8 {
        return Err(Error::invalid(
            "ordering occupation tabulates n! cells; n <= 8 required",
        ));
    }
    let steps = cfg.num_steps();
    if steps == 0 {
        return Err(Error::invalid("occupation needs at least one step"));
    }
    let mut counts = vec![0u64; factorial(n)];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    simulate(spec, x0, cfg, rng, |k, _, x| {
        if k < steps {
            order.clear();
            order.extend(0..n);
            order.sort_unstable_by(|&i, &j| {
                x[i].partial_cmp(&x[j]).expect("comparable").then(i.cmp(&j))
            });
            counts[lehmer_rank_of(&order)] += 1;
        }
    })?;
    Ok(OrderingOccupation {
        counts,
        steps: steps as u64,
    })
}

/// Fraction of time (left-endpoint rule) with some pair of particles closer
/// than `tol`.
pub fn coincidence_occupation<S, R>(
    spec: &DriftSpec<S>,
    x0: &[S],
    cfg: &SimConfig<S>,
    tol: &S,
    rng: &mut R,
) -> Result<S>
where
    S: FloatScalar,
    R: Rng + ?Sized,
{
    let steps = cfg.num_steps();
    if steps == 0 {
        return Err(Error::invalid("occupation needs at least one step"));
    }
    let mut hits = 0u64;
    simulate(spec, x0, cfg, rng, |k, _, x| {
        if k < steps && in_coincidence_set(x, tol) {
            hits += 1;
        }
    })?;
    Ok(S::from_f64(hits as f64 / steps as f64).unwrap())
}

/// Ordering of the final state of one simulated path.
pub fn final_ordering<S, R>(
    spec: &DriftSpec<S>,
    x0: &[S],
    cfg: &SimConfig<S>,
    rng: &mut R,
) -> Result<Permutation>
where
    S: FloatScalar,
    R: Rng + ?Sized,
{
    let x = simulate(spec, x0, cfg, rng, |_, _, _| {})?;
    Ok(crate::ordering::sigma_of(&x))
}

// ---------------------------------------------------------------------------
// Cone-occupancy measure of the centered dynamics
// ---------------------------------------------------------------------------

/// Empirical estimate of the stationary measure of the centered dynamics,
/// reduced to its ordering-cone marginals `w(σ)` — exactly the part the
/// velocity functional consumes, since the drift is constant on each cone.
#[derive(Clone, Debug)]
pub struct EmpiricalConeMeasure<S> {
    /// Fraction of (post burn-in) time spent in each ordering cone.
    /// Complete over all `n!` orderings; unvisited cones carry weight zero.
    pub weights: BTreeMap<Permutation, S>,
    /// Length of the averaging window (horizon minus burn-in).
    pub horizon: S,
    /// Length of the discarded prefix.
    pub burn_in: S,
    /// The same weights recomputed on non-overlapping sub-windows of the
    /// averaging window; the dispersion across batches feeds standard
    /// errors. Empty when batching was not requested or not affordable.
    pub batch_weights: Vec<BTreeMap<Permutation, S>>,
}

impl<S: FloatScalar> EmpiricalConeMeasure<S> {
    /// Builds a measure from explicit weights, validating nonnegativity and
    /// unit total mass (within `1e-9`). The map must be complete over all
    /// `n!` orderings of its dimension.
    pub fn from_weights(weights: BTreeMap<Permutation, S>) -> Result<Self> {
        let n = match weights.keys().next() {
            Some(p) => p.n(),
            None => return Err(Error::invalid("cone measure must be nonempty")),
        };
        if weights.len() != factorial(n) || weights.keys().any(|p| p.n() != n) {
            return Err(Error::invalid(format!(
                "cone measure needs all {}! orderings of {} particles",
                n, n
            )));
        }
        let mut sum = S::zero();
        for w in weights.values() {
            if !(*w >= S::zero()) {
                return Err(Error::invalid("cone weights must be nonnegative"));
            }
            sum = sum + *w;
        }
        if (sum - S::one()).abs() > S::from_f64(1e-9).unwrap() {
            return Err(Error::invalid(format!(
                "cone weights sum to {sum}, expected 1"
            )));
        }
        Ok(EmpiricalConeMeasure {
            weights,
            horizon: S::zero(),
            burn_in: S::zero(),
            batch_weights: Vec::new(),
        })
    }

    /// The uniform measure over the `n!` ordering cones.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 || n > 8 {
            return Err(Error::invalid("uniform cone measure needs 1 <= n <= 8"));
        }
        let w = S::one() / S::from_count(factorial(n));
        Self::from_weights(Permutation::all(n).map(|p| (p, w)).collect())
    }

    /// Number of particles.
    pub fn n(&self) -> usize {
        self.weights.keys().next().map_or(0, |p| p.n())
    }

    /// Weight of one cone (zero if absent).
    pub fn weight_of(&self, sigma: &Permutation) -> S {
        self.weights.get(sigma).copied().unwrap_or_else(S::zero)
    }

    /// Batch-means standard error of `weight_of(sigma)`; `None` with fewer
    /// than two batches.
    pub fn standard_error(&self, sigma: &Permutation) -> Option<S> {
        if self.batch_weights.len() < 2 {
            return None;
        }
        let ws: Vec<S> = self
            .batch_weights
            .iter()
            .map(|b| b.get(sigma).copied().unwrap_or_else(S::zero))
            .collect();
        Some(mean_se(&ws).1)
    }

    /// CSV rendering with header `sigma,weight` and `\n` endings.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("sigma,weight\n");
        for (sigma, w) in &self.weights {
            let _ = writeln!(out, "{sigma},{w}");
        }
        out
    }
}

/// Mean and batch standard error of a sample (zero SE for singletons).
fn mean_se<S: FloatScalar>(xs: &[S]) -> (S, S) {
    let m = S::from_count(xs.len());
    let mean = xs.iter().fold(S::zero(), |a, v| a + *v) / m;
    if xs.len() < 2 {
        return (mean, S::zero());
    }
    let var = xs
        .iter()
        .fold(S::zero(), |a, v| a + (*v - mean) * (*v - mean))
        / S::from_count(xs.len() - 1);
    (mean, (var / m).sqrt())
}

/// Simulates the centered dynamics on the zero-mean hyperplane:
/// drift `b^Π(σ(x)) = b(σ(x)) − mean(b(σ(x)))·𝟙` and the same Gaussian
/// noise as [`simulate`], with every state re-centered after each step so
/// floating-point asymmetry cannot accumulate along the `𝟙` direction
/// (which also projects the noise). The canonical centered process runs at
/// `eps = 1`; other levels are available for rescaling experiments.
///
/// Without strict stability no stationary measure is guaranteed; such specs
/// are simulated anyway (useful for exploration) with a warning logged.
pub fn simulate_projected<S, R, F>(
    spec: &DriftSpec<S>,
    x0: &[S],
    cfg: &SimConfig<S>,
    rng: &mut R,
    mut observe: F,
) -> Result<Vec<S>>
where
    S: FloatScalar,
    R: Rng + ?Sized,
    F: FnMut(usize, S, &[S]),
{
    cfg.validate()?;
    let n = spec.n();
    if x0.len() != n {
        return Err(Error::invalid(format!(
            "{} initial positions for {} particles",
            x0.len(),
            n
        )));
    }
    if let Ok(report) = analyze_stability(spec) {
        if !report.satisfies_ssc {
            log::warn!(
                "centered simulation without strict stability (margin {}): \
                 no stationary measure is guaranteed",
                report.b_bar
            );
        }
    }
    let projected = spec.projected();
    let eval = DriftEval::new(&projected);
    let steps = cfg.num_steps();
    let nf = S::from_count(n);
    let mut x = crate::ordering::project_centered(x0);
    let mut drift = vec![S::zero(); n];
    let mut order = Vec::with_capacity(n);
    observe(0, S::zero(), &x);
    for k in 0..steps {
        let t = cfg.dt * S::from_count(k);
        let (h, t_next) = if k + 1 == steps {
            (cfg.t_final - t, cfg.t_final)
        } else {
            (cfg.dt, cfg.dt * S::from_count(k + 1))
        };
        eval.eval_into(&x, &mut order, &mut drift);
        let noise = (S::from_count(2) * cfg.eps * h).sqrt();
        let mut mean = S::zero();
        for i in 0..n {
            x[i] = x[i] + drift[i] * h + noise * S::standard_normal(rng);
            mean = mean + x[i];
        }
        mean = mean / nf;
        for v in &mut x {
            *v = *v - mean;
        }
        observe(k + 1, t_next, &x);
    }
    Ok(x)
}

/// Streaming accumulator for cone occupation with burn-in and batching.
struct ConeAccumulator<S> {
    n: usize,
    cutoff: S,
    batch_len: S,
    batches: usize,
    total: Vec<S>,
    per_batch: Vec<Vec<S>>,
    kept: S,
    burned: S,
    order: Vec<usize>,
}

impl<S: FloatScalar> ConeAccumulator<S> {
    fn new(n: usize, cutoff: S, t_final: S, batches: usize) -> Result<Self> {
        if n == 0 || n > 8 {
            return Err(Error::invalid(
                "cone occupation tabulates n! cells; n <= 8 required",
            ));
        }
        if !(cutoff < t_final) {
            return Err(Error::invalid(
                "burn-in must leave a nonempty averaging window",
            ));
        }
        let cells = factorial(n);
        let batch_len = if batches > 0 {
            (t_final - cutoff) / S::from_count(batches)
        } else {
            S::zero()
        };
        Ok(ConeAccumulator {
            n,
            cutoff,
            batch_len,
            batches,
            total: vec![S::zero(); cells],
            per_batch: vec![vec![S::zero(); cells]; batches],
            kept: S::zero(),
            burned: S::zero(),
            order: Vec::with_capacity(n),
        })
    }

    /// Adds the interval `[t_left, t_right)` attributed to `state`
    /// (left-endpoint rule).
    fn add(&mut self, t_left: S, t_right: S, state: &[S]) {
        let h = t_right - t_left;
        if t_left < self.cutoff {
            self.burned = self.burned + h;
            return;
        }
        self.order.clear();
        self.order.extend(0..self.n);
        let order = &mut self.order;
        order.sort_unstable_by(|&i, &j| {
            state[i]
                .partial_cmp(&state[j])
                .expect("comparable positions")
                .then(i.cmp(&j))
        });
        let cell = lehmer_rank_of(order);
        self.total[cell] = self.total[cell] + h;
        self.kept = self.kept + h;
        if self.batches > 0 {
            let idx = ((t_left - self.cutoff) / self.batch_len).floor();
            let idx = (num_traits::cast::<S, f64>(idx).unwrap_or(0.0) as usize)
                .min(self.batches - 1);
            self.per_batch[idx][cell] = self.per_batch[idx][cell] + h;
        }
    }

    fn finish(self) -> Result<EmpiricalConeMeasure<S>> {
        if !(self.kept > S::zero()) {
            return Err(Error::invalid("no time left after burn-in"));
        }
        let normalize = |cells: &[S], mass: S| -> BTreeMap<Permutation, S> {
            Permutation::all(self.n)
                .zip(cells)
                .map(|(p, c)| (p, *c / mass))
                .collect()
        };
        let weights = normalize(&self.total, self.kept);
        let batch_weights = self
            .per_batch
            .iter()
            .filter_map(|cells| {
                let mass = cells.iter().fold(S::zero(), |a, v| a + *v);
                if mass > S::zero() {
                    Some(normalize(cells, mass))
                } else {
                    None
                }
            })
            .collect();
        Ok(EmpiricalConeMeasure {
            weights,
            horizon: self.kept,
            burn_in: self.burned,
            batch_weights,
        })
    }
}

/// Number of batches [`estimate_cone_measure`] uses when the window is long
/// enough to make batch means meaningful.
const DEFAULT_CONE_BATCHES: usize = 10;

/// Cone-occupancy fractions of a recorded path after discarding the first
/// `burn_in_fraction` of its time span (the default guidance is `0.1`: the
/// long-run average needs no burn-in asymptotically, but finite horizons
/// carry bias from the start near the origin). Batch weights are computed
/// on ten sub-windows when the grid affords at least two intervals each.
pub fn estimate_cone_measure<S: FloatScalar>(
    traj: &Trajectory<S>,
    burn_in_fraction: S,
) -> Result<EmpiricalConeMeasure<S>> {
    if !(burn_in_fraction >= S::zero() && burn_in_fraction < S::one()) {
        return Err(Error::invalid("burn-in fraction must lie in [0, 1)"));
    }
    if traj.len() < 2 {
        return Err(Error::invalid("cone estimation needs at least one step"));
    }
    let times = traj.times();
    let (t0, t1) = (times[0], times[traj.len() - 1]);
    if !(t1 > t0) {
        return Err(Error::invalid("trajectory spans no time"));
    }
    let cutoff = t0 + burn_in_fraction * (t1 - t0);
    let batches = if traj.len() > 2 * DEFAULT_CONE_BATCHES {
        DEFAULT_CONE_BATCHES
    } else {
        0
    };
    let mut acc = ConeAccumulator::new(traj.n(), cutoff, t1, batches)?;
    for k in 0..traj.len() - 1 {
        acc.add(times[k], times[k + 1], traj.state(k));
    }
    acc.finish()
}

/// Runs the centered dynamics and accumulates its cone measure without
/// storing the path, so horizons of millions of steps stay cheap in memory.
/// `batches > 0` splits the averaging window for standard errors.
pub fn cone_measure_streamed<S, R>(
    spec: &DriftSpec<S>,
    x0: &[S],
    cfg: &SimConfig<S>,
    burn_in_fraction: S,
    batches: usize,
    rng: &mut R,
) -> Result<EmpiricalConeMeasure<S>>
where
    S: FloatScalar,
    R: Rng + ?Sized,
{
    if !(burn_in_fraction >= S::zero() && burn_in_fraction < S::one()) {
        return Err(Error::invalid("burn-in fraction must lie in [0, 1)"));
    }
    let cutoff = burn_in_fraction * cfg.t_final;
    let mut acc = ConeAccumulator::new(spec.n(), cutoff, cfg.t_final, batches)?;
    let mut prev_t = S::zero();
    let mut prev_state: Vec<S> = Vec::new();
    simulate_projected(spec, x0, cfg, rng, |k, t, x| {
        if k > 0 {
            acc.add(prev_t, t, &prev_state);
        }
        prev_t = t;
        prev_state.clear();
        prev_state.extend_from_slice(x);
    })?;
    acc.finish()
}

/// The velocity functional of a cone measure:
/// `v_i = Σ_σ b_i(σ)·w(σ)` per particle. Under strict stability the result
/// must not depend on `i`, so the spread across particles is the key
/// diagnostic. The standard error comes from re-evaluating the functional
/// on the measure's batch weights.
pub fn estimate_velocity<S: FloatScalar>(
    spec: &DriftSpec<S>,
    mu: &EmpiricalConeMeasure<S>,
) -> Result<VelocityEstimate<S>> {
    let n = spec.n();
    if mu.n() != n {
        return Err(Error::invalid(format!(
            "measure over {} particles, spec over {}",
            mu.n(),
            n
        )));
    }
    if mu.weights.len() != factorial(n) {
        return Err(Error::invalid("cone measure must cover all orderings"));
    }
    let functional = |weights: &BTreeMap<Permutation, S>| -> Vec<S> {
        let mut v = vec![S::zero(); n];
        for (sigma, w) in weights {
            let b = spec.drift_vector(sigma);
            for i in 0..n {
                v[i] = v[i] + b[i] * *w;
            }
        }
        v
    };
    let per_particle = functional(&mu.weights);
    let nf = S::from_count(n);
    let mean = per_particle.iter().fold(S::zero(), |a, v| a + *v) / nf;
    let (mut lo, mut hi) = (per_particle[0], per_particle[0]);
    for v in &per_particle {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let batch_means: Vec<S> = mu
        .batch_weights
        .iter()
        .map(|w| functional(w).iter().fold(S::zero(), |a, v| a + *v) / nf)
        .collect();
    let batch_se = if batch_means.len() >= 2 {
        mean_se(&batch_means).1
    } else {
        S::zero()
    };
    Ok(VelocityEstimate {
        per_particle,
        mean,
        spread: hi - lo,
        batch_se,
    })
}

// ---------------------------------------------------------------------------
// Space–time rescaling consistency
// ---------------------------------------------------------------------------

/// One statistic compared by [`scale_change_check`].
#[derive(Clone, Debug)]
pub struct ScaleChangeStat<S> {
    pub name: &'static str,
    pub direct_mean: S,
    pub direct_se: S,
    pub rescaled_mean: S,
    pub rescaled_se: S,
    /// `(direct − rescaled) / √(se² + se²)`; zero when both the difference
    /// and the errors vanish.
    pub z: S,
}

/// Outcome of [`scale_change_check`].
#[derive(Clone, Debug)]
pub struct ScaleChangeReport<S> {
    pub stats: Vec<ScaleChangeStat<S>>,
    pub max_abs_z: S,
    /// Some statistic exceeded `|z| > 4`.
    pub flagged: bool,
}

/// Verifies the space–time scaling identity in distribution: running the
/// unit-noise process over the stretched horizon `T/ε` with step `dt/ε` and
/// shrinking space by `ε` must reproduce the law of the direct `ε`-level
/// run. Both ensembles use `seeds` paths from independent noise streams
/// (streams `0..seeds` direct, `seeds..2·seeds` rescaled), and three
/// summary statistics are compared by two-sample z-scores: the center of
/// mass at `T`, the mean squared dispersion about it, and the fraction of
/// time spent in the ascending-order cone. Sharing streams would make the
/// comparison vacuous — the two Euler recursions are conjugate path by
/// path — so independence is what makes the z-scores informative.
pub fn scale_change_check<S: FloatScalar + Send + Sync>(
    spec: &DriftSpec<S>,
    eps: S,
    t_final: S,
    dt: S,
    seeds: usize,
    master_seed: u64,
) -> Result<ScaleChangeReport<S>> {
    if !(eps > S::zero()) {
        return Err(Error::invalid("scale comparison needs eps > 0"));
    }
    if seeds < 2 {
        return Err(Error::invalid("scale comparison needs at least 2 seeds"));
    }
    let n = spec.n();
    let x0 = vec![S::zero(); n];
    let direct_cfg = SimConfig {
        eps,
        dt,
        t_final,
    };
    let rescaled_cfg = SimConfig {
        eps: S::one(),
        dt: dt / eps,
        t_final: t_final / eps,
    };
    direct_cfg.validate()?;
    rescaled_cfg.validate()?;

    // Per-path summary: center of mass at T, squared dispersion about it,
    // and ascending-cone time fraction (left-endpoint rule).
    let run = |cfg: &SimConfig<S>, rng: &mut rand_chacha::ChaCha8Rng| -> Result<[S; 3]> {
        let mut prev_t = S::zero();
        let mut prev_asc = false;
        let mut asc_time = S::zero();
        let mut started = false;
        let x = simulate(spec, &x0, cfg, rng, |_, t, x| {
            if started && prev_asc {
                asc_time = asc_time + (t - prev_t);
            }
            started = true;
            prev_t = t;
            prev_asc = x.windows(2).all(|w| w[0] <= w[1]);
        })?;
        let nf = S::from_count(n);
        let com = x.iter().fold(S::zero(), |a, v| a + *v) / nf;
        let disp = x
            .iter()
            .fold(S::zero(), |a, v| a + (*v - com) * (*v - com))
            / nf;
        Ok([com, disp, asc_time / cfg.t_final])
    };

    let all: Vec<Result<[S; 3]>> = monte_carlo(2 * seeds, master_seed, |p, rng| {
        if (p as usize) < seeds {
            run(&direct_cfg, rng)
        } else {
            // Map the unit-noise statistics back to the ε scale: space
            // shrinks by ε (dispersion by ε²), time fractions are invariant.
            run(&rescaled_cfg, rng).map(|[com, disp, frac]| [eps * com, eps * eps * disp, frac])
        }
    });
    let mut direct: Vec<[S; 3]> = Vec::with_capacity(seeds);
    let mut rescaled: Vec<[S; 3]> = Vec::with_capacity(seeds);
    for (k, r) in all.into_iter().enumerate() {
        if k < seeds {
            direct.push(r?);
        } else {
            rescaled.push(r?);
        }
    }

    let names = [
        "center_of_mass",
        "dispersion",
        "ascending_cone_fraction",
    ];
    let mut stats = Vec::with_capacity(3);
    let mut max_abs_z = S::zero();
    for (k, name) in names.into_iter().enumerate() {
        let da: Vec<S> = direct.iter().map(|s| s[k]).collect();
        let db: Vec<S> = rescaled.iter().map(|s| s[k]).collect();
        let (ma, sa) = mean_se(&da);
        let (mb, sb) = mean_se(&db);
        let denom = (sa * sa + sb * sb).sqrt();
        let diff = ma - mb;
        let z = if denom > S::zero() {
            diff / denom
        } else if diff == S::zero() {
            S::zero()
        } else {
            S::infinity()
        };
        if z.abs() > max_abs_z {
            max_abs_z = z.abs();
        }
        stats.push(ScaleChangeStat {
            name,
            direct_mean: ma,
            direct_se: sa,
            rescaled_mean: mb,
            rescaled_se: sb,
            z,
        });
    }
    Ok(ScaleChangeReport {
        stats,
        max_abs_z,
        flagged: max_abs_z > S::from_count(4),
    })
}
