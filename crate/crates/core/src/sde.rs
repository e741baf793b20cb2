//! Euler–Maruyama simulation of the order-dependent diffusion
//! `dX_i = b_i(σ(X)) dt + √(2ε) dW_i`, plus the reduced difference process
//! for two particles and a deterministic parallel Monte Carlo driver.
//!
//! Simulators stream states through an observer callback instead of storing
//! trajectories, so memory stays flat for long horizons and large path
//! counts; callers that want a dense record collect it in the observer.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::drift::{DriftKind, DriftSpec};
use crate::error::{Error, Result};
use crate::ordering::{factorial, in_coincidence_set, lehmer_rank_of, sigma_of, Permutation};
use crate::scalar::{FloatScalar, Scalar};
use crate::trajectory::Trajectory;

/// Step size, horizon, and noise level of one simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig<S> {
    /// Noise level `ε` (`>= 0`; zero gives the deterministic Euler flow).
    pub eps: S,
    /// Step size (`> 0`). The final step is shortened to land on `t_final`.
    pub dt: S,
    /// Horizon (`>= 0`).
    pub t_final: S,
}

impl<S: FloatScalar> SimConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps >= S::zero()) || !self.eps.is_finite() {
            return Err(Error::invalid("eps must be finite and >= 0"));
        }
        if !(self.dt > S::zero()) || !self.dt.is_finite() {
            return Err(Error::invalid("dt must be finite and > 0"));
        }
        if !(self.t_final >= S::zero()) || !self.t_final.is_finite() {
            return Err(Error::invalid("t_final must be finite and >= 0"));
        }
        Ok(())
    }

    /// Number of steps: full `dt` steps plus, when `t_final` is not a near
    /// multiple of `dt`, one shortened step.
    pub fn num_steps(&self) -> usize {
        let ratio = self.t_final / self.dt;
        let rounded = ratio.round();
        let slack = S::from_f64(1e-9).unwrap() * (S::one() + ratio.abs());
        let steps = if (ratio - rounded).abs() <= slack {
            rounded
        } else {
            ratio.ceil()
        };
        num_traits::cast::<S, f64>(steps).expect("finite step count") as usize
    }
}

/// Drift lookup optimized for the inner simulation loop: rank-based
/// specifications scatter a fixed vector through the sorting permutation;
/// general tables are flattened into a dense array indexed by the
/// permutation's position in lexicographic order.
pub struct DriftEval<S> {
    n: usize,
    mode: EvalMode<S>,
}

enum EvalMode<S> {
    Rank(Vec<S>),
    Dense(Vec<Vec<S>>),
}

impl<S: Scalar> DriftEval<S> {
    pub fn new(spec: &DriftSpec<S>) -> Self {
        let n = spec.n();
        let mode = match spec.kind() {
            DriftKind::RankBased => EvalMode::Rank(spec.rank_vector().unwrap().to_vec()),
            DriftKind::General => {
                let mut dense = Vec::with_capacity(factorial(n));
                for sigma in crate::ordering::Permutation::all(n) {
                    debug_assert_eq!(dense.len(), sigma.lehmer_rank());
                    dense.push(spec.drift_vector(&sigma));
                }
                EvalMode::Dense(dense)
            }
        };
        DriftEval { n, mode }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Writes `b(σ(x))` into `out`, using `order` as scratch for the argsort.
    pub fn eval_into(&self, x: &[S], order: &mut Vec<usize>, out: &mut [S]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        order.clear();
        order.extend(0..self.n);
        order.sort_unstable_by(|&i, &j| {
            x[i].partial_cmp(&x[j])
                .expect("positions must be comparable")
                .then(i.cmp(&j))
        });
        match &self.mode {
            EvalMode::Rank(b) => {
                for (k, &i) in order.iter().enumerate() {
                    out[i] = b[k].clone();
                }
            }
            EvalMode::Dense(dense) => {
                out.clone_from_slice(&dense[lehmer_rank_of(order)]);
            }
        }
    }
}

/// Simulates the n-particle diffusion from `x0`, calling
/// `observe(step, time, state)` at every grid node including step 0, and
/// returns the final state.
pub fn simulate<S, R, F>(
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
    if x0.len() != spec.n() {
        return Err(Error::invalid(format!(
            "{} initial positions for {} particles",
            x0.len(),
            spec.n()
        )));
    }
    let eval = DriftEval::new(spec);
    let n = spec.n();
    let steps = cfg.num_steps();
    let mut x = x0.to_vec();
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
        for i in 0..n {
            let xi = S::standard_normal(rng);
            x[i] = x[i] + drift[i] * h + noise * xi;
        }
        observe(k + 1, t_next, &x);
    }
    Ok(x)
}

/// Simulates the two-particle difference `Z = X₁ − X₂` directly:
/// `dZ = ℓ(Z) dt + 2√ε dB` with `ℓ(z) = b⁻` for `z <= 0` and `b⁺` for
/// `z > 0`. One-dimensional, so large path counts stay cheap. Calls
/// `observe(step, time, z)` at every node and returns the final value.
pub fn simulate_difference<S, R, F>(
    z0: S,
    b_minus: S,
    b_plus: S,
    cfg: &SimConfig<S>,
    rng: &mut R,
    mut observe: F,
) -> Result<S>
where
    S: FloatScalar,
    R: Rng + ?Sized,
    F: FnMut(usize, S, S),
{
    cfg.validate()?;
    let steps = cfg.num_steps();
    let mut z = z0;
    observe(0, S::zero(), z);
    for k in 0..steps {
        let t = cfg.dt * S::from_count(k);
        let (h, t_next) = if k + 1 == steps {
            (cfg.t_final - t, cfg.t_final)
        } else {
            (cfg.dt, cfg.dt * S::from_count(k + 1))
        };
        let ell = if z > S::zero() { b_plus } else { b_minus };
        let noise = (S::from_count(4) * cfg.eps * h).sqrt();
        z = z + ell * h + noise * S::standard_normal(rng);
        observe(k + 1, t_next, z);
    }
    Ok(z)
}

/// The generator for one Monte Carlo path: a fixed master seed with the
/// path index as the stream, so every path is reproducible independently of
/// scheduling and path count.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Runs `f` over `paths` independent generators in parallel and collects
/// results in path order. Deterministic for fixed `seed` and `paths`.
pub fn monte_carlo<T, F>(paths: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    (0..paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(seed, p);
            f(p, &mut rng)
        })
        .collect()
}

/// Time spent in each ordering along a trajectory:
/// `ζ(σ) = ∫₀^T 1{Σ X(s) = σ} ds`, accumulated by the left-endpoint rule.
#[derive(Clone, Debug)]
pub struct OccupationStats<S> {
    /// Accumulated time per ordering; orderings never visited are absent.
    pub zeta: BTreeMap<Permutation, S>,
    /// Elapsed time of the trajectory. The `ζ(σ)` sum to it up to rounding,
    /// since both sides add up the same grid intervals.
    pub total_time: S,
}

impl<S: Scalar> OccupationStats<S> {
    /// `ζ(σ) / total_time`; zero for unvisited orderings or an empty horizon.
    pub fn fraction(&self, sigma: &Permutation) -> S {
        match self.zeta.get(sigma) {
            Some(z) if self.total_time > S::zero() => z.clone() / self.total_time.clone(),
            _ => S::zero(),
        }
    }

    /// CSV rendering with header `sigma,time,fraction` and `\n` endings,
    /// one row per visited ordering.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("sigma,time,fraction\n");
        for (sigma, z) in &self.zeta {
            let f = if self.total_time > S::zero() {
                z.clone() / self.total_time.clone()
            } else {
                S::zero()
            };
            let _ = writeln!(out, "{sigma},{z},{f}");
        }
        out
    }
}

/// Accumulates the occupation times of every ordering along `traj` by the
/// left-endpoint rule: each grid interval contributes its full length to the
/// ordering at its left node. The discretization error is `O(dt)` per
/// ordering change and is folded into callers' tolerances.
pub fn occupation_times<S: FloatScalar>(traj: &Trajectory<S>) -> OccupationStats<S> {
    let times = traj.times();
    let mut zeta: BTreeMap<Permutation, S> = BTreeMap::new();
    let mut total = S::zero();
    for k in 0..traj.len() - 1 {
        let h = times[k + 1] - times[k];
        total = total + h;
        let entry = zeta.entry(sigma_of(traj.state(k))).or_insert_with(S::zero);
        *entry = *entry + h;
    }
    OccupationStats {
        zeta,
        total_time: total,
    }
}

/// Fraction of grid time (left-endpoint rule) during which some pair of
/// particles is within `delta` of each other. Decreases pointwise as `delta`
/// shrinks; for a fixed noise level it vanishes in the limit, reflecting the
/// negligible time spent at coincidences.
pub fn coincidence_fraction<S: FloatScalar>(traj: &Trajectory<S>, delta: &S) -> S {
    let times = traj.times();
    let mut hit = S::zero();
    let mut total = S::zero();
    for k in 0..traj.len() - 1 {
        let h = times[k + 1] - times[k];
        total = total + h;
        if in_coincidence_set(traj.state(k), delta) {
            hit = hit + h;
        }
    }
    if total > S::zero() {
        hit / total
    } else {
        S::zero()
    }
}
