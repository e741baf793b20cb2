//! Cluster velocity of a mutually chasing pair.
//!
//! With gap drifts `b⁻ >= 0 >= b⁺` the two particles trap each other in a
//! cluster of width `O(eps)` that travels at a deterministic velocity: the
//! time-share weighted average of the per-configuration mean drifts, with
//! ascending-configuration weight `−b⁺/(b⁻ − b⁺)`. This experiment measures
//! the empirical center-of-mass velocity `(X₁(T) + X₂(T)) / (2T)` against
//! the closed form and the mean running maximum of `|Z|²` against its
//! `(8√2 + 4)·eps·T` envelope.
//!
//! Defaults: drift `(2, −1)` in the ascending and `(−3, 1)` in the
//! descending configuration, ladder `[1e-2, 1e-3, 1e-4]`, `T = 1`,
//! `dt = 0.1·eps`, `10³` paths.

use oflab_core::analytics::{cluster_velocity, mean_and_se, two_particle_gap_bound};
use oflab_core::sde::{monte_carlo, simulate, SimConfig};
use oflab_core::DriftSpec64;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    let spec = super::drift_or(cfg, || {
        DriftSpec64::two_particle([2.0, -1.0], [-3.0, 1.0])
    });
    if spec.n() != 2 {
        return Err(Error::config(format!(
            "this experiment takes a two-particle drift, got n = {}",
            spec.n()
        )));
    }
    let v_target = cluster_velocity(&spec)?;
    let ladder = cfg.eps_ladder_or(&[1e-2, 1e-3, 1e-4]);
    let t_final = cfg.t_final_or(1.0);
    let paths = cfg.paths_or(1_000);

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());
    let mut csv = String::from("eps,dt,v_hat,se,v_target,mean_sup_z2,bound\n");
    let mut velocities = Vec::new();
    for (k, &eps) in ladder.iter().enumerate() {
        let dt = cfg.dt_for(eps, 0.1);
        let sim = SimConfig { eps, dt, t_final };
        sim.validate()?;
        let spec_mc = spec.clone();
        let per_path: Vec<(f64, f64)> =
            monte_carlo(paths, cfg.seed.wrapping_add(k as u64), move |_, rng| {
                let mut sup_z2 = 0.0f64;
                let x = simulate(&spec_mc, &[0.0, 0.0], &sim, rng, |_, _, x| {
                    let z = x[0] - x[1];
                    sup_z2 = sup_z2.max(z * z);
                })
                .expect("config validated above");
                ((x[0] + x[1]) / (2.0 * t_final), sup_z2)
            });
        let (v_hat, v_se) = mean_and_se(&per_path.iter().map(|p| p.0).collect::<Vec<_>>());
        let (sup_mean, _) = mean_and_se(&per_path.iter().map(|p| p.1).collect::<Vec<_>>());
        let bound = two_particle_gap_bound(eps, t_final);
        report.check_within(
            &format!("v_hat_eps_{eps:e}"),
            v_hat,
            v_target,
            0.02,
            "center-of-mass displacement per unit time vs the cluster-velocity formula",
        );
        report.check_at_most(
            &format!("mean_sup_z2_eps_{eps:e}"),
            sup_mean,
            bound,
            0.0,
            "mean running max of |X1 - X2|^2 vs its (8*sqrt(2)+4)*eps*T envelope",
        );
        csv.push_str(&format!(
            "{eps},{dt},{v_hat},{v_se},{v_target},{sup_mean},{bound}\n"
        ));
        velocities.push((eps, v_hat));
    }
    report.artifact(save_artifact(&cfg.output_dir, "cluster.csv", &csv)?);
    let svg = Plot::new("Pair cluster velocity", "eps", "v_hat")
        .log_x()
        .with_series("empirical", velocities)
        .with_series("formula", ladder.iter().map(|&e| (e, v_target)).collect())
        .render();
    report.artifact(save_artifact(&cfg.output_dir, "cluster.svg", &svg)?);
    Ok(report)
}
