//! Long-run velocity via the ergodic cone-occupancy formula.
//!
//! For a strictly stable rank drift the centered dynamics admit a stationary
//! measure, and the long-run velocity of every particle equals the average
//! drift under that measure's ordering-cone weights. This experiment
//! estimates the cone measure from one long centered path, evaluates the
//! velocity functional per particle, and compares against the sticky-flow
//! velocity (the mean of the rank velocities, since a stable system forms a
//! single cluster). A short direct-simulation leg cross-checks the same
//! velocity from independently simulated displacement averages.
//!
//! Defaults: rank drift `[3, 1, -1]`, `eps = 1`, horizon `T = 1e4` with
//! `dt = 1e-3`, burn-in fraction 0.1, 10 batches; the direct leg runs 200
//! paths of the noisy system at `eps = 1e-2` over `T = 10`.

use oflab_core::analytics::mean_and_se;
use oflab_core::drift::DriftSpec;
use oflab_core::ergodic::{cone_measure_streamed, estimate_velocity};
use oflab_core::sde::{monte_carlo, path_rng, simulate, SimConfig};
use oflab_core::sticky::{initial_clusters, total_momentum};

use crate::config::RunConfig;
use crate::error::{config, Result};
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    let spec = super::drift_or(cfg, || {
        DriftSpec::rank_based(vec![3.0, 1.0, -1.0]).expect("valid default rank drift")
    });
    let rank = spec
        .rank_vector()
        .ok_or_else(|| config("ergodic-velocity requires a rank-based drift"))?
        .to_vec();
    let n = spec.n();
    let burn_in = cfg.param_or("burn_in", 0.1);
    let batches = cfg.param_or("batches", 10.0) as usize;
    let eps = cfg.eps_ladder_or(&[1.0])[0];
    let t_final = cfg.t_final_or(1e4);
    let dt = cfg.dt_abs(eps, 1e-3);
    let sim = SimConfig { eps, dt, t_final };
    sim.validate()?;
    let x0 = vec![0.0f64; n];

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());

    // Sticky-flow reference: from a coincident start a stable system pools
    // into one cluster whose velocity is the mean rank velocity.
    let sticky = initial_clusters(&x0, &rank)?;
    let v_sticky = total_momentum(&sticky) / n as f64;
    report.check_within(
        "sticky_single_cluster",
        sticky.clusters.len() as f64,
        1.0,
        0.0,
        "the sticky flow pools a coincident stable start into one cluster",
    );

    let measure = cone_measure_streamed(
        &spec,
        &x0,
        &sim,
        burn_in,
        batches,
        &mut path_rng(cfg.seed, 0),
    )?;
    let velocity = estimate_velocity(&spec, &measure)?;
    for (i, v) in velocity.per_particle.iter().enumerate() {
        report.check_within(
            &format!("ergodic_velocity_particle_{}", i + 1),
            *v,
            v_sticky,
            0.05,
            "per-particle ergodic velocity vs the sticky cluster velocity",
        );
    }
    report.check_at_most(
        "ergodic_velocity_spread",
        velocity.spread,
        0.05,
        0.0,
        "spread of per-particle ergodic velocities (should vanish under strict stability)",
    );
    report.check_within(
        "ergodic_velocity_mean",
        velocity.mean,
        v_sticky,
        0.05,
        "mean ergodic velocity vs the sticky cluster velocity",
    );

    // Direct leg: displacement averages of the noisy system itself.
    let direct_eps = cfg.param_or("direct_eps", 1e-2);
    let direct_t = cfg.param_or("direct_t", 10.0);
    let direct_paths = cfg.param_or("direct_paths", 200.0) as usize;
    let direct_sim = SimConfig {
        eps: direct_eps,
        dt: 1e-3,
        t_final: direct_t,
    };
    direct_sim.validate()?;
    let direct: Vec<f64> = monte_carlo(
        direct_paths,
        cfg.seed.wrapping_add(1),
        |_, rng| {
            let x = simulate(&spec, &x0, &direct_sim, rng, |_, _, _| {})
                .expect("config validated above");
            x.iter().sum::<f64>() / (n as f64 * direct_t)
        },
    );
    let (direct_mean, direct_se) = mean_and_se(&direct);
    report.check_within(
        "direct_velocity",
        direct_mean,
        v_sticky,
        (3.0 * direct_se).max(0.05),
        "center-of-mass displacement rate of the noisy system vs the sticky velocity",
    );

    report.artifact(save_artifact(
        &cfg.output_dir,
        "cone_weights.csv",
        &measure.to_csv(),
    )?);
    let velocity_json = serde_json::json!({
        "v_by_index": velocity.per_particle,
        "v": velocity.mean,
        "spread": velocity.spread,
        "stderr": velocity.batch_se,
    });
    report.artifact(save_artifact(
        &cfg.output_dir,
        "velocity.json",
        &format!("{:#}\n", velocity_json),
    )?);
    let weights_pts: Vec<(f64, f64)> = measure
        .weights
        .values()
        .enumerate()
        .map(|(i, w)| (i as f64, *w))
        .collect();
    let svg = Plot::new(
        "Cone-occupancy weights of the centered dynamics",
        "ordering (Lehmer rank)",
        "weight",
    )
    .with_series("weight", weights_pts)
    .render();
    report.artifact(save_artifact(&cfg.output_dir, "cone_weights.svg", &svg)?);
    Ok(report)
}
