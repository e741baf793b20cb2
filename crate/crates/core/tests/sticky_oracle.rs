//! Independent oracles for the sticky dynamics.
//!
//! Two deliberately different implementations cross-check the event-driven
//! engine: a brute-force search over all contiguous partitions for the
//! canonical cluster decomposition, and a fixed-step front-tracking
//! integrator whose only tie to the engine is the shared definition of
//! block-mean velocities.

use num_rational::BigRational;
use num_traits::FromPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oflab_core::sticky::{initial_clusters, total_momentum, StickyPath};
use oflab_core::trajectory::uniform_grid;

fn block_mean(b: &[f64], lo: usize, hi: usize) -> f64 {
    b[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
}

fn block_stable(b: &[f64], lo: usize, hi: usize) -> bool {
    (lo..hi).all(|split| {
        block_mean(b, lo, split) >= block_mean(b, split + 1, hi) - 1e-12
    })
}

/// The unique contiguous partition of `lo..=hi` whose blocks are internally
/// stable with strictly increasing block means, found by exhaustive search.
fn canonical_partition(b: &[f64], lo: usize, hi: usize) -> Vec<(usize, usize)> {
    let m = hi - lo + 1;
    let mut found: Option<Vec<(usize, usize)>> = None;
    for mask in 0u32..(1 << (m - 1)) {
        let mut blocks = Vec::new();
        let mut start = lo;
        for g in 0..m - 1 {
            if mask & (1 << g) != 0 {
                blocks.push((start, lo + g));
                start = lo + g + 1;
            }
        }
        blocks.push((start, hi));
        let stable = blocks.iter().all(|&(a, z)| block_stable(b, a, z));
        let increasing = blocks.windows(2).all(|w| {
            block_mean(b, w[0].0, w[0].1) < block_mean(b, w[1].0, w[1].1) - 1e-12
        });
        if stable && increasing {
            assert!(
                found.is_none(),
                "canonical partition is not unique for {:?}",
                &b[lo..=hi]
            );
            found = Some(blocks);
        }
    }
    found.expect("no canonical partition found")
}

/// Fixed-step front tracking: group particles whose gaps are within one
/// step's reach, give each canonical block its mean velocity, advance.
fn oracle_positions(y0: &[f64], b: &[f64], h: f64, steps: usize) -> Vec<Vec<f64>> {
    let n = y0.len();
    let vmax = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tie = h * (2.0 * vmax + 1.0);
    let mut x = y0.to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x.clone());
    for _ in 0..steps {
        let mut v = vec![0.0f64; n];
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && x[j + 1] - x[j] <= tie {
                j += 1;
            }
            for (lo, hi) in canonical_partition(b, i, j) {
                let mean = block_mean(b, lo, hi);
                v[lo..=hi].fill(mean);
            }
            i = j + 1;
        }
        for k in 0..n {
            x[k] += v[k] * h;
        }
        out.push(x.clone());
    }
    out
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut y0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    y0.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // A third of the instances start with an exact tie somewhere.
    if n >= 2 && rng.gen_bool(1.0 / 3.0) {
        let i = rng.gen_range(0..n - 1);
        y0[i + 1] = y0[i];
    }
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (y0, b)
}

#[test]
fn initial_partition_matches_brute_force_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..300 {
        let n = 2 + (trial % 4);
        let (mut y0, b) = random_instance(&mut rng, n);
        // Force richer coincidences: collapse a random prefix range.
        if rng.gen_bool(0.5) {
            let lo = rng.gen_range(0..n - 1);
            let hi = rng.gen_range(lo + 1..n);
            let p = y0[lo];
            for v in y0[lo..=hi].iter_mut() {
                *v = p;
            }
            y0.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        let state = initial_clusters(&y0, &b).unwrap();
        state.check_invariants(&b).unwrap();
        // Expected ranges: canonical partition within each coincidence group.
        let mut expected = Vec::new();
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && y0[j + 1] == y0[i] {
                j += 1;
            }
            expected.extend(canonical_partition(&b, i, j));
            i = j + 1;
        }
        let got: Vec<(usize, usize)> = state.clusters.iter().map(|c| (c.lo, c.hi)).collect();
        assert_eq!(got, expected, "trial {trial}: y0={y0:?} b={b:?}");
        for c in &state.clusters {
            assert!((c.velocity - block_mean(&b, c.lo, c.hi)).abs() < 1e-12);
        }
    }
}

#[test]
fn event_driven_path_matches_front_tracking() {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    let h = 1e-3;
    let horizon = 3.0;
    let steps = (horizon / h) as usize;
    let grid = uniform_grid(&h, steps);
    let mut worst: f64 = 0.0;
    for trial in 0..60 {
        let n = 2 + (trial % 4);
        let (y0, b) = random_instance(&mut rng, n);
        let path = StickyPath::new(&y0, &b).unwrap();
        for s in path.segments() {
            s.check_invariants(&b).unwrap();
            assert!((total_momentum(s) - b.iter().sum::<f64>()).abs() < 1e-10);
        }
        let exact = path.sample(&grid).unwrap();
        let approx = oracle_positions(&y0, &b, h, steps);
        for (k, xs) in approx.iter().enumerate() {
            for (i, x) in xs.iter().enumerate() {
                let gap = (x - exact.state(k)[i]).abs();
                worst = worst.max(gap);
                assert!(
                    gap <= 10.0 * h,
                    "trial {trial} t={} particle {i}: oracle {x} vs exact {} (y0={y0:?} b={b:?})",
                    grid[k],
                    exact.state(k)[i]
                );
            }
        }
    }
    // Roughly one step's worth of discrepancy is expected, not much more.
    assert!(worst > 0.0);
}

#[test]
fn float_path_agrees_with_exact_rational_path() {
    let rat = |x: f64| BigRational::from_f64(x).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..40 {
        let n = 2 + (trial % 4);
        // Dyadic data so the rational conversion is exact.
        let mut y0: Vec<f64> = (0..n)
            .map(|_| (rng.gen_range(-32i32..32) as f64) / 16.0)
            .collect();
        y0.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let b: Vec<f64> = (0..n)
            .map(|_| (rng.gen_range(-32i32..32) as f64) / 16.0)
            .collect();
        let yq: Vec<BigRational> = y0.iter().map(|&v| rat(v)).collect();
        let bq: Vec<BigRational> = b.iter().map(|&v| rat(v)).collect();
        let pf = StickyPath::new(&y0, &b).unwrap();
        let pq = StickyPath::new(&yq, &bq).unwrap();
        assert_eq!(pf.events().len(), pq.events().len(), "trial {trial}");
        for t in [0.0, 0.3, 0.7, 1.1, 2.5, 6.0] {
            // Dyadic query times keep the rational evaluation exact too.
            let tq = rat(t);
            let xf = pf.positions_at(&t).unwrap();
            let xq = pq.positions_at(&tq).unwrap();
            for (a, bq_pos) in xf.iter().zip(&xq) {
                let back = num_traits::ToPrimitive::to_f64(bq_pos).unwrap();
                assert!(
                    (a - back).abs() < 1e-10,
                    "trial {trial} t={t}: float {a} vs exact {back}"
                );
            }
        }
    }
}

#[test]
fn collision_event_record_golden() {
    let path = StickyPath::new(&[0.0, 1.0, 2.0, 4.0], &[2.0, 1.0, -1.0, -2.0]).unwrap();
    let summary: Vec<(f64, Vec<(usize, usize)>)> = path
        .events()
        .iter()
        .map(|e| (e.time, e.created.clone()))
        .collect();
    // Pair (1,2) collides at t = 1/2 and pools to velocity 0; particle 0
    // (speed 2) catches it at t = 3/4; the left triple then moves at 2/3
    // and meets particle 3 (speed -2) at t = 9/8, position 7/4.
    assert_eq!(summary.len(), 3);
    assert_eq!(summary[0], (0.5, vec![(1, 2)]));
    assert_eq!(summary[1], (0.75, vec![(0, 2)]));
    assert_eq!(summary[2], (1.125, vec![(0, 3)]));
    let text = serde_json::to_string(path.final_state()).unwrap();
    assert_eq!(
        text,
        r#"{"time":1.125,"clusters":[{"lo":0,"hi":3,"position":1.75,"velocity":0.0}]}"#
    );
}
