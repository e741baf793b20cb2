//! Aggregation beyond the stability condition.
//!
//! The stability condition (every left/right split of every ordering has
//! left average drift at least the right average) is sufficient for
//! aggregation but not necessary. This experiment builds a three-particle
//! drift table that violates the condition yet still aggregates: two special
//! orderings carry custom drifts `lambda` and `eta`, and the remaining four
//! carry a restoring rank drift `(1, 0, -1)`. The top pair forms a cluster
//! whose gap alternates sign, spending a predictable fraction
//! `rho = (eta3-eta2) / ((lambda2-lambda3) + (eta3-eta2))` of its
//! two-ordering time with the pair in ascending index order, while the
//! whole system still collapses (final spread shrinks with the noise).
//!
//! Defaults: `lambda = (-0.5, 1, -1)`, `eta = (2, -1, 1)`, ladder
//! `[1e-2, 1e-3, 1e-4]`, `T = 1`, `dt = 0.1·eps`, 200 paths.

use std::collections::BTreeMap;

use oflab_core::analytics::mean_and_se;
use oflab_core::drift::{analyze_stability, DriftSpec};
use oflab_core::ordering::{sigma_of, Permutation};
use oflab_core::sde::{monte_carlo, simulate, SimConfig};

use crate::config::RunConfig;
use crate::error::{config, Result};
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    if cfg.drift.is_some() {
        return Err(config(
            "counterexample-3p builds its own drift table; configure it via \
             params lambda1..lambda3 / eta1..eta3 instead of a drift",
        ));
    }
    let lambda = [
        cfg.param_or("lambda1", -0.5),
        cfg.param_or("lambda2", 1.0),
        cfg.param_or("lambda3", -1.0),
    ];
    let eta = [
        cfg.param_or("eta1", 2.0),
        cfg.param_or("eta2", -1.0),
        cfg.param_or("eta3", 1.0),
    ];
    if !(eta[2] > eta[1] && lambda[2] < lambda[1]) {
        return Err(config(
            "counterexample-3p needs eta3 > eta2 and lambda3 < lambda2 so the \
             top pair's gap is attracted to zero from both sides",
        ));
    }
    let rho_target = (eta[2] - eta[1]) / ((lambda[1] - lambda[2]) + (eta[2] - eta[1]));

    // Drift table by particle index: the identity ordering gets `lambda`,
    // ordering (132) gets `eta`, every other ordering the restoring rank
    // drift (1, 0, -1) assigned to its occupants bottom-to-top.
    let stable = [1.0, 0.0, -1.0];
    let special = Permutation::new(vec![0, 2, 1])?;
    let identity = Permutation::identity(3);
    let mut table: BTreeMap<Permutation, Vec<f64>> = BTreeMap::new();
    for p in Permutation::all(3) {
        let v = if p == identity {
            lambda.to_vec()
        } else if p == special {
            eta.to_vec()
        } else {
            let mut v = vec![0.0; 3];
            for (r, &i) in p.word().iter().enumerate() {
                v[i] = stable[r];
            }
            v
        };
        table.insert(p, v);
    }
    let spec = DriftSpec::general(table)?;

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());
    let stability = analyze_stability(&spec)?;
    report.check_within(
        "stability_condition_violated",
        if stability.satisfies_sc { 0.0 } else { 1.0 },
        1.0,
        0.0,
        "the drift table must violate the split-average stability condition",
    );

    let ladder = cfg.eps_ladder_or(&[1e-2, 1e-3, 1e-4]);
    let t_final = cfg.t_final_or(1.0);
    let paths = cfg.paths_or(200);
    let x0 = [0.0f64; 3];

    let mut rows: Vec<(f64, f64, f64, f64, f64)> = Vec::new(); // (eps, dt, rho_hat, mean_spread, spread_se)
    for (k, &eps) in ladder.iter().enumerate() {
        let dt = cfg.dt_for(eps, 0.1);
        let sim = SimConfig { eps, dt, t_final };
        sim.validate()?;
        let steps = sim.num_steps();
        let samples: Vec<(u64, u64, f64)> =
            monte_carlo(paths, cfg.seed.wrapping_add(k as u64), |_, rng| {
                let mut in_identity = 0u64;
                let mut in_special = 0u64;
                let mut spread = 0.0;
                simulate(&spec, &x0, &sim, rng, |node, _, x| {
                    if node < steps {
                        let sigma = sigma_of(x);
                        if sigma == identity {
                            in_identity += 1;
                        } else if sigma == special {
                            in_special += 1;
                        }
                    } else {
                        let mut lo = x[0];
                        let mut hi = x[0];
                        for &v in &x[1..] {
                            lo = lo.min(v);
                            hi = hi.max(v);
                        }
                        spread = hi - lo;
                    }
                })
                .expect("config validated above");
                (in_identity, in_special, spread)
            });
        let total_identity: u64 = samples.iter().map(|s| s.0).sum();
        let total_special: u64 = samples.iter().map(|s| s.1).sum();
        let rho_hat = total_identity as f64 / (total_identity + total_special) as f64;
        let spreads: Vec<f64> = samples.iter().map(|s| s.2).collect();
        let (mean_spread, spread_se) = mean_and_se(&spreads);
        rows.push((eps, dt, rho_hat, mean_spread, spread_se));
    }

    let smallest = rows.last().expect("ladder is nonempty");
    report.check_within(
        "occupancy_ratio",
        smallest.2,
        rho_target,
        0.05,
        "time share of the identity ordering among the two special orderings, smallest noise level",
    );
    for pair in rows.windows(2) {
        let (eps_hi, _, _, spread_hi, _) = pair[0];
        let (eps_lo, _, _, spread_lo, _) = pair[1];
        report.check_at_most(
            &format!("final_spread_monotone_eps_{eps_lo:e}_vs_{eps_hi:e}"),
            spread_lo,
            spread_hi,
            0.0,
            "mean final spread shrinks as the noise level decreases, confirming aggregation",
        );
    }

    let mut csv = String::from("eps,dt,rho_hat,mean_final_spread,se\n");
    for &(eps, dt, rho_hat, mean_spread, se) in &rows {
        csv.push_str(&format!("{eps},{dt},{rho_hat},{mean_spread},{se}\n"));
    }
    report.artifact(save_artifact(&cfg.output_dir, "counterexample.csv", &csv)?);
    let ratio_svg = Plot::new(
        "Occupancy ratio of the two special orderings",
        "eps",
        "time share of the identity ordering",
    )
    .log_x()
    .with_series(
        "measured",
        rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>(),
    )
    .with_series(
        "target",
        rows.iter().map(|r| (r.0, rho_target)).collect::<Vec<_>>(),
    )
    .render();
    report.artifact(save_artifact(
        &cfg.output_dir,
        "occupancy_ratio.svg",
        &ratio_svg,
    )?);
    let spread_svg = Plot::new("Final spread vs noise level", "eps", "mean final spread")
        .log_x()
        .log_y()
        .with_series(
            "measured",
            rows.iter().map(|r| (r.0, r.3)).collect::<Vec<_>>(),
        )
        .render();
    report.artifact(save_artifact(
        &cfg.output_dir,
        "final_spread.svg",
        &spread_svg,
    )?);
    Ok(report)
}
