//! Deterministic sticky particle dynamics on the line.
//!
//! The state is a list of *clusters*: maximal contiguous blocks of ranks
//! `lo..=hi` sharing one position. A cluster's velocity is the mean of the
//! rank velocities `b[lo..=hi]`, so total momentum `Σ b_i` is conserved.
//! Clusters move linearly until an adjacent pair collides; colliding
//! clusters merge (mass-weighted position, pooled velocity) and the motion
//! continues. With `n` particles at most `n − 1` merges can occur, so every
//! path is a finite sequence of affine segments that this module computes
//! exactly (event-driven, no time stepping). Over rationals all event data
//! are exact; over floats a relative tolerance decides coincidence and
//! simultaneity.
//!
//! Initial coincidences are resolved by pooling: clusters at the same
//! position merge whenever the left velocity is `>=` the right velocity,
//! repeatedly, which yields the unique partition whose blocks are internally
//! stable (every left sub-block mean `>=` right sub-block mean) while
//! distinct same-position blocks strictly order their velocities and so
//! separate immediately. Equal-velocity neighbours at one point merge: they
//! would otherwise travel together indistinguishably, and pooling them keeps
//! the partition canonical.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{close, Scalar};
use crate::trajectory::Trajectory;

/// A maximal block of ranks `lo..=hi` (0-based, inclusive) at a common
/// position, moving at the mean of its rank velocities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster<S> {
    pub lo: usize,
    pub hi: usize,
    pub position: S,
    pub velocity: S,
}

impl<S> Cluster<S> {
    pub fn mass(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, rank: usize) -> bool {
        self.lo <= rank && rank <= self.hi
    }
}

/// Cluster configuration at a fixed time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StickyState<S> {
    pub time: S,
    pub clusters: Vec<Cluster<S>>,
}

impl<S: Scalar> StickyState<S> {
    pub fn n(&self) -> usize {
        self.clusters.last().map_or(0, |c| c.hi + 1)
    }

    /// Per-particle positions (length `n`).
    pub fn positions(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.n());
        for c in &self.clusters {
            for _ in c.lo..=c.hi {
                out.push(c.position.clone());
            }
        }
        out
    }

    /// Per-particle velocities (length `n`).
    pub fn velocities(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.n());
        for c in &self.clusters {
            for _ in c.lo..=c.hi {
                out.push(c.velocity.clone());
            }
        }
        out
    }

    /// Index of the cluster containing `rank`.
    pub fn cluster_of(&self, rank: usize) -> usize {
        self.clusters
            .partition_point(|c| c.hi < rank)
            .min(self.clusters.len() - 1)
    }

    /// Verifies the structural invariants against the rank velocities `b`:
    /// the ranges tile `0..n`, positions are nondecreasing, every velocity
    /// is the mean of its block of `b`, every block is internally stable
    /// (each left/right split has left mean >= right mean), and distinct
    /// blocks at one position have strictly increasing velocities.
    pub fn check_invariants(&self, b: &[S]) -> Result<()> {
        let n = self.n();
        if n != b.len() {
            return Err(Error::invalid("state and rank velocities disagree on n"));
        }
        let prefix = prefix_sums(b);
        let slack = S::tolerance();
        let mut expected_lo = 0usize;
        for (k, c) in self.clusters.iter().enumerate() {
            if c.lo != expected_lo || c.hi < c.lo || c.hi >= n {
                return Err(Error::invalid(format!(
                    "cluster {k} has range {}..={} (expected lo = {expected_lo})",
                    c.lo, c.hi
                )));
            }
            expected_lo = c.hi + 1;
            let mean = block_mean(&prefix, c.lo, c.hi);
            if !close(&c.velocity, &mean) {
                return Err(Error::invalid(format!(
                    "cluster {k} velocity {} is not the block mean {}",
                    c.velocity, mean
                )));
            }
            for split in c.lo..c.hi {
                let left = block_mean(&prefix, c.lo, split);
                let right = block_mean(&prefix, split + 1, c.hi);
                if left.clone() < right.clone() - slack.clone() {
                    return Err(Error::invalid(format!(
                        "cluster {k} unstable at split {split}: {left} < {right}"
                    )));
                }
            }
            if k > 0 {
                let prev = &self.clusters[k - 1];
                if !(prev.position <= c.position.clone() + slack.clone()) {
                    return Err(Error::invalid(format!(
                        "cluster positions decrease at {k}"
                    )));
                }
                if close(&prev.position, &c.position) && !(prev.velocity < c.velocity) {
                    return Err(Error::invalid(format!(
                        "coincident clusters {} and {k} should have merged",
                        k - 1
                    )));
                }
            }
        }
        if expected_lo != n {
            return Err(Error::invalid("cluster ranges do not tile 0..n"));
        }
        Ok(())
    }
}

/// One collision: all cluster ranges created at this instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent<S> {
    pub time: S,
    pub created: Vec<(usize, usize)>,
}

/// The full piecewise-affine path: the initial configuration, every
/// collision event, and the cluster configuration after each event.
#[derive(Clone, Debug, Serialize)]
pub struct StickyPath<S> {
    y0: Vec<S>,
    b: Vec<S>,
    prefix: Vec<S>,
    events: Vec<CollisionEvent<S>>,
    segments: Vec<StickyState<S>>,
}

impl<S: Scalar> StickyPath<S> {
    /// Runs the dynamics from nondecreasing initial positions `y0` with rank
    /// velocities `b` until no further collision can occur.
    pub fn new(y0: &[S], b: &[S]) -> Result<Self> {
        let initial = initial_clusters(y0, b)?;
        let prefix = prefix_sums(b);
        let mut segments = vec![initial];
        let mut events = Vec::new();
        // Each event removes at least one cluster, so n - 1 bounds the count.
        for _budget in 0..y0.len() {
            let current = segments.last().unwrap();
            let t = match next_collision_time(current) {
                Some(t) => t,
                None => break,
            };
            let state = merge_at(current, &t, &prefix);
            let created = created_ranges(current, &state);
            debug_assert!(!created.is_empty(), "collision event must merge");
            events.push(CollisionEvent {
                time: state.time.clone(),
                created,
            });
            segments.push(state);
        }
        debug_assert!(next_collision_time(segments.last().unwrap()).is_none());
        Ok(StickyPath {
            y0: y0.to_vec(),
            b: b.to_vec(),
            prefix,
            events,
            segments,
        })
    }

    pub fn n(&self) -> usize {
        self.y0.len()
    }

    pub fn initial_positions(&self) -> &[S] {
        &self.y0
    }

    pub fn rank_velocities(&self) -> &[S] {
        &self.b
    }

    pub fn events(&self) -> &[CollisionEvent<S>] {
        &self.events
    }

    /// Configurations at `t = 0` and after each event, in time order.
    pub fn segments(&self) -> &[StickyState<S>] {
        &self.segments
    }

    pub fn initial_state(&self) -> &StickyState<S> {
        &self.segments[0]
    }

    pub fn final_state(&self) -> &StickyState<S> {
        self.segments.last().unwrap()
    }

    /// The configuration at time `t >= 0`, positions advanced linearly.
    pub fn state_at(&self, t: &S) -> Result<StickyState<S>> {
        if *t < S::zero() {
            return Err(Error::domain("sticky paths are defined for t >= 0"));
        }
        let idx = self.segments.partition_point(|s| s.time <= *t);
        let base = &self.segments[idx - 1];
        let dt = t.clone() - base.time.clone();
        let clusters = base
            .clusters
            .iter()
            .map(|c| Cluster {
                lo: c.lo,
                hi: c.hi,
                position: c.position.clone() + c.velocity.clone() * dt.clone(),
                velocity: c.velocity.clone(),
            })
            .collect();
        Ok(StickyState {
            time: t.clone(),
            clusters,
        })
    }

    pub fn positions_at(&self, t: &S) -> Result<Vec<S>> {
        Ok(self.state_at(t)?.positions())
    }

    pub fn velocities_at(&self, t: &S) -> Result<Vec<S>> {
        Ok(self.state_at(t)?.velocities())
    }

    /// Samples per-particle positions on a nondecreasing time grid.
    pub fn sample(&self, grid: &[S]) -> Result<Trajectory<S>> {
        let mut states = Vec::with_capacity(grid.len());
        for t in grid {
            states.push(self.positions_at(t)?);
        }
        Trajectory::new(grid.to_vec(), states)
    }
}

/// Resolves initial coincidences by velocity pooling and returns the state
/// at `t = 0`. `y0` must be nondecreasing and match `b` in length.
pub fn initial_clusters<S: Scalar>(y0: &[S], b: &[S]) -> Result<StickyState<S>> {
    if y0.is_empty() {
        return Err(Error::invalid("need at least one particle"));
    }
    if y0.len() != b.len() {
        return Err(Error::invalid(format!(
            "{} positions but {} rank velocities",
            y0.len(),
            b.len()
        )));
    }
    for (i, w) in y0.windows(2).enumerate() {
        if !(w[0] <= w[1]) {
            return Err(Error::invalid(format!(
                "initial positions must be nondecreasing (violated at index {i})"
            )));
        }
    }
    let prefix = prefix_sums(b);
    let singletons = y0
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (p, v))| Cluster {
            lo: i,
            hi: i,
            position: p.clone(),
            velocity: v.clone(),
        })
        .collect();
    Ok(StickyState {
        time: S::zero(),
        clusters: pool_coincident(singletons, &prefix),
    })
}

/// Total momentum `Σ mass · velocity`; constant along any path and equal to
/// the sum of the rank velocities.
pub fn total_momentum<S: Scalar>(state: &StickyState<S>) -> S {
    state
        .clusters
        .iter()
        .fold(S::zero(), |acc, c| {
            acc + S::from_count(c.mass()) * c.velocity.clone()
        })
}

/// Difference between each particle's cluster velocity and its own rank
/// velocity, written as a discrete divergence of a boundary-free flux.
///
/// For a cluster `lo..=hi` with velocity `v`: `kappa_rates[i] = v - b[i]`,
/// `ell` is the cluster's total rate `Σ |v - b_i|`, and `gamma[i]` (length
/// `n + 1`, zero at every cluster boundary) satisfies
/// `kappa_rates[i] = (gamma[i] - gamma[i+1]) · ell` within the cluster.
/// For internally stable clusters all `gamma[i] >= 0`: the interaction only
/// pushes neighbours together, never apart.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionDecomposition<S> {
    pub kappa_rates: Vec<S>,
    pub gamma: Vec<S>,
    /// Per cluster, aligned with `cluster_ranges`.
    pub ell: Vec<S>,
    pub cluster_ranges: Vec<(usize, usize)>,
}

/// Computes the reflection decomposition of `path` at a non-collision time.
pub fn reflection_decomposition<S: Scalar>(
    path: &StickyPath<S>,
    t: &S,
) -> Result<ReflectionDecomposition<S>> {
    let slack = S::tolerance() * (S::one() + t.abs());
    for e in path.events() {
        if (e.time.clone() - t.clone()).abs() <= slack {
            return Err(Error::domain(format!(
                "velocities are undefined at collision time {}",
                e.time
            )));
        }
    }
    let state = path.state_at(t)?;
    let b = path.rank_velocities();
    let n = b.len();
    let mut kappa_rates = vec![S::zero(); n];
    let mut gamma = vec![S::zero(); n + 1];
    let mut ell = Vec::with_capacity(state.clusters.len());
    let mut ranges = Vec::with_capacity(state.clusters.len());
    for c in &state.clusters {
        let v = &c.velocity;
        let mut total = S::zero();
        for i in c.lo..=c.hi {
            kappa_rates[i] = v.clone() - b[i].clone();
            total = total + kappa_rates[i].abs();
        }
        if total > S::zero() {
            let mut acc = S::zero();
            for i in c.lo + 1..=c.hi {
                acc = acc + (b[i - 1].clone() - v.clone());
                gamma[i] = acc.clone() / total.clone();
            }
        }
        ell.push(total);
        ranges.push((c.lo, c.hi));
    }
    #[cfg(debug_assertions)]
    for ((lo, hi), l) in ranges.iter().zip(&ell) {
        for i in *lo..=*hi {
            let lhs = kappa_rates[i].clone();
            let rhs = (gamma[i].clone() - gamma[i + 1].clone()) * l.clone();
            debug_assert!(close(&lhs, &rhs), "flux identity failed at {i}");
        }
    }
    Ok(ReflectionDecomposition {
        kappa_rates,
        gamma,
        ell,
        cluster_ranges: ranges,
    })
}

/// Checks the semigroup property: restarting the dynamics from the path's
/// own configuration at intermediate times reproduces the original path.
/// Returns the largest per-particle position discrepancy found.
pub fn check_flow_property<S: Scalar>(
    path: &StickyPath<S>,
    horizon: &S,
    restarts: usize,
) -> Result<S> {
    let mut worst = S::zero();
    for k in 1..=restarts {
        let s = horizon.clone() * S::from_count(k) / S::from_count(restarts + 1);
        let restarted = StickyPath::new(&path.positions_at(&s)?, path.rank_velocities())?;
        for j in 0..=4usize {
            let d = (horizon.clone() - s.clone()) * S::from_count(j) / S::from_count(4);
            let direct = path.positions_at(&(s.clone() + d.clone()))?;
            let rerun = restarted.positions_at(&d)?;
            for (a, b) in direct.iter().zip(&rerun) {
                let gap = (a.clone() - b.clone()).abs();
                if gap > worst {
                    worst = gap;
                }
            }
        }
    }
    Ok(worst)
}

/// Largest increase of the squared `L²` distance between two paths (same
/// rank velocities, same `n`) over consecutive grid times. Nonpositive up
/// to roundoff: the dynamics is a contraction.
pub fn contractivity_violation<S: Scalar>(
    a: &StickyPath<S>,
    b: &StickyPath<S>,
    grid: &[S],
) -> Result<S> {
    if a.n() != b.n() {
        return Err(Error::invalid("paths have different particle counts"));
    }
    if grid.len() < 2 {
        return Err(Error::invalid("grid needs at least two times"));
    }
    let dist2 = |t: &S| -> Result<S> {
        let xa = a.positions_at(t)?;
        let xb = b.positions_at(t)?;
        Ok(xa
            .iter()
            .zip(&xb)
            .fold(S::zero(), |acc, (u, v)| {
                let d = u.clone() - v.clone();
                acc + d.clone() * d
            }))
    };
    let mut prev = dist2(&grid[0])?;
    let mut worst = S::zero();
    for t in &grid[1..] {
        let cur = dist2(t)?;
        let inc = cur.clone() - prev;
        if inc > worst {
            worst = inc.clone();
        }
        prev = cur;
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Internals
// ---------------------------------------------------------------------------

fn prefix_sums<S: Scalar>(b: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(b.len() + 1);
    out.push(S::zero());
    for v in b {
        let last = out.last().unwrap().clone();
        out.push(last + v.clone());
    }
    out
}

fn block_mean<S: Scalar>(prefix: &[S], lo: usize, hi: usize) -> S {
    (prefix[hi + 1].clone() - prefix[lo].clone()) / S::from_count(hi - lo + 1)
}

fn pooled<S: Scalar>(left: Cluster<S>, right: Cluster<S>, prefix: &[S]) -> Cluster<S> {
    debug_assert_eq!(left.hi + 1, right.lo);
    let (ml, mr) = (S::from_count(left.mass()), S::from_count(right.mass()));
    let mass = ml.clone() + mr.clone();
    Cluster {
        lo: left.lo,
        hi: right.hi,
        position: (ml * left.position + mr * right.position) / mass,
        velocity: block_mean(prefix, left.lo, right.hi),
    }
}

/// Left-to-right pooling pass: merge adjacent clusters that coincide in
/// position while the left one is not slower. One pass with re-checks
/// against the growing left stack resolves all cascades.
fn pool_coincident<S: Scalar>(seed: Vec<Cluster<S>>, prefix: &[S]) -> Vec<Cluster<S>> {
    let mut out: Vec<Cluster<S>> = Vec::with_capacity(seed.len());
    for mut c in seed {
        while let Some(prev) = out.last() {
            if close(&prev.position, &c.position) && prev.velocity >= c.velocity {
                c = pooled(out.pop().unwrap(), c, prefix);
            } else {
                break;
            }
        }
        out.push(c);
    }
    out
}

/// Earliest future collision time, if any adjacent pair approaches.
fn next_collision_time<S: Scalar>(state: &StickyState<S>) -> Option<S> {
    let mut best: Option<S> = None;
    for w in state.clusters.windows(2) {
        if w[0].velocity > w[1].velocity {
            let mut gap = w[1].position.clone() - w[0].position.clone();
            if gap < S::zero() {
                gap = S::zero();
            }
            let t = state.time.clone() + gap / (w[0].velocity.clone() - w[1].velocity.clone());
            if best.as_ref().map_or(true, |cur| t < *cur) {
                best = Some(t);
            }
        }
    }
    best
}

/// Advances to time `t`, merges every adjacent run whose collision falls at
/// `t` (within relative slack), then pools any coincidences this created.
fn merge_at<S: Scalar>(state: &StickyState<S>, t: &S, prefix: &[S]) -> StickyState<S> {
    let slack = S::tolerance() * (S::one() + t.abs());
    let k = state.clusters.len();
    let mut colliding = vec![false; k.saturating_sub(1)];
    for (i, w) in state.clusters.windows(2).enumerate() {
        if w[0].velocity > w[1].velocity {
            let mut gap = w[1].position.clone() - w[0].position.clone();
            if gap < S::zero() {
                gap = S::zero();
            }
            let hit =
                state.time.clone() + gap / (w[0].velocity.clone() - w[1].velocity.clone());
            colliding[i] = hit <= t.clone() + slack.clone();
        }
    }
    let dt = t.clone() - state.time.clone();
    let moved: Vec<Cluster<S>> = state
        .clusters
        .iter()
        .map(|c| Cluster {
            lo: c.lo,
            hi: c.hi,
            position: c.position.clone() + c.velocity.clone() * dt.clone(),
            velocity: c.velocity.clone(),
        })
        .collect();
    let mut merged: Vec<Cluster<S>> = Vec::with_capacity(k);
    for (i, c) in moved.into_iter().enumerate() {
        if i > 0 && colliding[i - 1] {
            let prev = merged.pop().unwrap();
            merged.push(pooled(prev, c, prefix));
        } else {
            merged.push(c);
        }
    }
    StickyState {
        time: t.clone(),
        clusters: pool_coincident(merged, prefix),
    }
}

fn created_ranges<S: Scalar>(before: &StickyState<S>, after: &StickyState<S>) -> Vec<(usize, usize)> {
    after
        .clusters
        .iter()
        .map(|c| (c.lo, c.hi))
        .filter(|r| !before.clusters.iter().any(|c| (c.lo, c.hi) == *r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::FromPrimitive;

    fn rat(x: f64) -> BigRational {
        BigRational::from_f64(x).unwrap()
    }

    fn rats(xs: &[f64]) -> Vec<BigRational> {
        xs.iter().copied().map(rat).collect()
    }

    #[test]
    fn coincident_start_pools_to_single_cluster() {
        let state = initial_clusters(&[0.0, 0.0, 0.0], &[0.0, 1.0, -1.0]).unwrap();
        assert_eq!(state.clusters.len(), 1);
        let c = &state.clusters[0];
        assert_eq!((c.lo, c.hi), (0, 2));
        assert_eq!(c.velocity, 0.0);
        state.check_invariants(&[0.0, 1.0, -1.0]).unwrap();
    }

    #[test]
    fn coincident_start_separates_when_ordered() {
        // Velocities already strictly increasing: no pooling.
        let state = initial_clusters(&[1.0, 1.0], &[-1.0, 1.0]).unwrap();
        assert_eq!(state.clusters.len(), 2);
        state.check_invariants(&[-1.0, 1.0]).unwrap();
        // Equal velocities at one point do pool.
        let state = initial_clusters(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(state.clusters.len(), 1);
    }

    #[test]
    fn simultaneous_triple_merge() {
        let b = [1.0, 0.0, -1.0];
        let path = StickyPath::new(&[0.0, 1.0, 2.0], &b).unwrap();
        assert_eq!(path.events().len(), 1);
        let e = &path.events()[0];
        assert_eq!(e.time, 1.0);
        assert_eq!(e.created, vec![(0, 2)]);
        assert_eq!(path.positions_at(&2.0).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(path.velocities_at(&2.0).unwrap(), vec![0.0, 0.0, 0.0]);
        for s in path.segments() {
            s.check_invariants(&b).unwrap();
        }
    }

    #[test]
    fn diverging_pair_never_collides() {
        let path = StickyPath::new(&[0.0, 1.0], &[-1.0, 1.0]).unwrap();
        assert!(path.events().is_empty());
        assert_eq!(path.positions_at(&3.0).unwrap(), vec![-3.0, 4.0]);
    }

    #[test]
    fn two_stage_merge_with_exact_rationals() {
        // First 0 catches 1 at t = 1/3, then the pair catches 2 at t = 3.
        let y0 = rats(&[0.0, 1.0, 2.0]);
        let b = rats(&[2.0, -1.0, 0.0]);
        let path = StickyPath::new(&y0, &b).unwrap();
        assert_eq!(path.events().len(), 2);
        assert_eq!(path.events()[0].time, rat(1.0) / rat(3.0));
        assert_eq!(path.events()[0].created, vec![(0, 1)]);
        assert_eq!(path.events()[1].time, rat(3.0));
        assert_eq!(path.events()[1].created, vec![(0, 2)]);
        let fin = path.final_state();
        assert_eq!(fin.clusters[0].velocity, rat(1.0) / rat(3.0));
        assert_eq!(fin.clusters[0].position, rat(2.0));
        assert_eq!(
            path.positions_at(&rat(6.0)).unwrap(),
            vec![rat(3.0), rat(3.0), rat(3.0)]
        );
        for s in path.segments() {
            s.check_invariants(&b).unwrap();
            assert_eq!(total_momentum(s), rat(1.0));
        }
    }

    #[test]
    fn collision_onto_existing_cluster_pools() {
        let path = StickyPath::new(&[0.0f64, 2.0, 2.0], &[1.0, 1.0, -1.0]).unwrap();
        assert_eq!(path.initial_state().clusters.len(), 2);
        assert_eq!(path.events().len(), 1);
        assert_eq!(path.events()[0].time, 2.0);
        let fin = path.final_state();
        assert_eq!(fin.clusters.len(), 1);
        assert_eq!(fin.clusters[0].position, 2.0);
        assert!((fin.clusters[0].velocity - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reflection_decomposition_of_merged_triple() {
        let path = StickyPath::new(&[0.0, 1.0, 2.0], &[1.0, 0.0, -1.0]).unwrap();
        let dec = reflection_decomposition(&path, &2.0).unwrap();
        assert_eq!(dec.cluster_ranges, vec![(0, 2)]);
        assert_eq!(dec.kappa_rates, vec![-1.0, 0.0, 1.0]);
        assert_eq!(dec.ell, vec![2.0]);
        assert_eq!(dec.gamma, vec![0.0, 0.5, 0.5, 0.0]);
        // Collision instants are rejected.
        assert!(reflection_decomposition(&path, &1.0).is_err());
    }

    #[test]
    fn reflection_decomposition_of_singleton_is_zero() {
        let path = StickyPath::new(&[0.0], &[5.0]).unwrap();
        let dec = reflection_decomposition(&path, &1.0).unwrap();
        assert_eq!(dec.kappa_rates, vec![0.0]);
        assert_eq!(dec.gamma, vec![0.0, 0.0]);
        assert_eq!(dec.ell, vec![0.0]);
    }

    #[test]
    fn flow_property_holds() {
        let path = StickyPath::new(&[0.0, 0.5, 2.0, 2.5], &[2.0, 1.0, -1.0, -2.0]).unwrap();
        let worst = check_flow_property(&path, &4.0, 7).unwrap();
        assert!(worst < 1e-12, "flow discrepancy {worst}");
    }

    #[test]
    fn squared_distance_between_paths_contracts() {
        let b = [1.0, 0.0, -1.0];
        let pa = StickyPath::new(&[0.0, 1.0, 2.0], &b).unwrap();
        let pb = StickyPath::new(&[-1.0, 1.5, 2.0], &b).unwrap();
        let grid: Vec<f64> = (0..=60).map(|k| k as f64 * 0.05).collect();
        let worst = contractivity_violation(&pa, &pb, &grid).unwrap();
        assert!(worst <= 1e-12, "contractivity violation {worst}");
    }

    #[test]
    fn input_validation() {
        assert!(StickyPath::new(&[1.0, 0.0], &[0.0, 0.0]).is_err());
        assert!(StickyPath::new(&[0.0, 1.0], &[0.0]).is_err());
        assert!(StickyPath::<f64>::new(&[], &[]).is_err());
        let path = StickyPath::new(&[0.0], &[1.0]).unwrap();
        assert!(path.positions_at(&-0.5).is_err());
    }

    #[test]
    fn sampling_matches_pointwise_queries() {
        let path = StickyPath::new(&[0.0, 1.0, 2.0], &[1.0, 0.0, -1.0]).unwrap();
        let grid: Vec<f64> = vec![0.0, 0.5, 1.0, 1.5];
        let traj = path.sample(&grid).unwrap();
        for (k, t) in grid.iter().enumerate() {
            assert_eq!(traj.state(k), path.positions_at(t).unwrap().as_slice());
        }
    }

    #[test]
    fn state_json_roundtrip() {
        let path = StickyPath::new(&[0.0, 1.0, 2.0], &[1.0, 0.0, -1.0]).unwrap();
        let text = serde_json::to_string(path.final_state()).unwrap();
        let back: StickyState<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(&back, path.final_state());
    }
}
