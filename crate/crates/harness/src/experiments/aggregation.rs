//! Aggregation of a stable system around its center of mass.
//!
//! When the drift satisfies the stability condition, all particles collapse
//! into a single cluster that travels with the center of mass, and the
//! centered spread stays of the order of the noise level. This experiment
//! starts every particle at 0, tracks the running maximum of the squared
//! distance to the center of mass, and checks each ladder rung against the
//! closed-form bound `(4·sqrt(2) + 2)·(n-1)·eps·T`.
//!
//! Defaults: rank drift `[1, 0, -1]`, ladder `[1e-3]`, `T = 1`,
//! `dt = 0.1·eps`, 1000 paths.

use oflab_core::analytics::{mean_and_se, projected_gap_bound};
use oflab_core::drift::{analyze_stability, DriftSpec};
use oflab_core::sde::{monte_carlo, simulate, SimConfig};

use crate::config::RunConfig;
use crate::error::{config, Result};
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    let spec = super::drift_or(cfg, || {
        DriftSpec::rank_based(vec![1.0, 0.0, -1.0]).expect("valid default rank drift")
    });
    let stability = analyze_stability(&spec)?;
    if !stability.satisfies_sc {
        return Err(config(
            "aggregation requires a drift satisfying the stability condition",
        ));
    }
    let n = spec.n();
    let ladder = cfg.eps_ladder_or(&[1e-3]);
    let t_final = cfg.t_final_or(1.0);
    let paths = cfg.paths_or(1000);
    let x0 = vec![0.0f64; n];

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());
    let mut rows: Vec<(f64, f64, f64, f64, f64)> = Vec::new(); // (eps, dt, mean_sup, se, bound)
    for (k, &eps) in ladder.iter().enumerate() {
        let dt = cfg.dt_for(eps, 0.1);
        let sim = SimConfig { eps, dt, t_final };
        sim.validate()?;
        let sups: Vec<f64> = monte_carlo(paths, cfg.seed.wrapping_add(k as u64), |_, rng| {
            let mut sup = 0.0f64;
            simulate(&spec, &x0, &sim, rng, |_, _, x| {
                let mean: f64 = x.iter().sum::<f64>() / n as f64;
                let spread2: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
                if spread2 > sup {
                    sup = spread2;
                }
            })
            .expect("config validated above");
            sup
        });
        let (mean_sup, se) = mean_and_se(&sups);
        let bound = projected_gap_bound(n, eps, t_final);
        report.check_at_most(
            &format!("mean_sup_spread2_eps_{eps:e}"),
            mean_sup,
            bound,
            0.0,
            "mean running max of squared distance to the center of mass vs (4*sqrt(2)+2)*(n-1)*eps*T",
        );
        rows.push((eps, dt, mean_sup, se, bound));
    }

    let mut csv = String::from("eps,dt,mean_sup,se,bound\n");
    for &(eps, dt, mean_sup, se, bound) in &rows {
        csv.push_str(&format!("{eps},{dt},{mean_sup},{se},{bound}\n"));
    }
    report.artifact(save_artifact(&cfg.output_dir, "aggregation.csv", &csv)?);
    let svg = Plot::new(
        "Centered spread of a stable system",
        "eps",
        "mean sup squared spread",
    )
    .log_x()
    .log_y()
    .with_series(
        "measured",
        rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>(),
    )
    .with_series("bound", rows.iter().map(|r| (r.0, r.4)).collect::<Vec<_>>())
    .render();
    report.artifact(save_artifact(&cfg.output_dir, "aggregation.svg", &svg)?);
    Ok(report)
}
