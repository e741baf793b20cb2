//! Small-noise convergence of the pair difference to its deterministic limit.
//!
//! As the noise level shrinks, the difference process with piecewise-constant
//! drift converges pathwise to an explicit piecewise-linear limit path. This
//! experiment measures the mean supremum deviation from that limit over a
//! noise ladder and checks that it both sits below a calibrated envelope
//! `8·sqrt(eps·T)` and decreases monotonically down the ladder.
//!
//! Defaults: drifts `(1, -1)` (attracting), `z0 = 1`, ladder
//! `[1e-2, 1e-3, 1e-4]`, `T = 2`, `dt = 0.1·eps`, 200 paths.

use oflab_core::analytics::{limit_path_z, mean_and_se};
use oflab_core::sde::{monte_carlo, simulate_difference, SimConfig};

use crate::config::RunConfig;
use crate::error::{config, Result};
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    let (b_minus, b_plus) = super::gap_drifts(cfg, 1.0, -1.0)?;
    let z0 = cfg.param_or("z0", 1.0);
    if z0 == 0.0 {
        return Err(config(
            "limit-path-z needs z0 != 0: the zero-noise path from 0 is not unique",
        ));
    }
    let ladder = cfg.eps_ladder_or(&[1e-2, 1e-3, 1e-4]);
    let t_final = cfg.t_final_or(2.0);
    let paths = cfg.paths_or(200);

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());
    let mut rows: Vec<(f64, f64, f64, f64, f64)> = Vec::new(); // (eps, dt, mean_sup, se, envelope)
    for (k, &eps) in ladder.iter().enumerate() {
        let dt = cfg.dt_for(eps, 0.1);
        let sim = SimConfig { eps, dt, t_final };
        sim.validate()?;
        let sups: Vec<f64> = monte_carlo(paths, cfg.seed.wrapping_add(k as u64), |_, rng| {
            let mut sup = 0.0f64;
            simulate_difference(z0, b_minus, b_plus, &sim, rng, |_, t, z| {
                let reference =
                    limit_path_z(&z0, &b_minus, &b_plus, &t).expect("t >= 0 and z0 != 0");
                let dev = (z - reference).abs();
                if dev > sup {
                    sup = dev;
                }
            })
            .expect("config validated above");
            sup
        });
        let (mean_sup, se) = mean_and_se(&sups);
        let envelope = 8.0 * (eps * t_final).sqrt();
        report.check_at_most(
            &format!("mean_sup_dev_eps_{eps:e}"),
            mean_sup,
            envelope,
            0.0,
            "mean supremum deviation from the deterministic limit path vs calibrated envelope 8*sqrt(eps*T)",
        );
        rows.push((eps, dt, mean_sup, se, envelope));
    }
    for pair in rows.windows(2) {
        let (eps_hi, _, sup_hi, _, _) = pair[0];
        let (eps_lo, _, sup_lo, _, _) = pair[1];
        report.check_at_most(
            &format!("monotone_dev_eps_{eps_lo:e}_vs_{eps_hi:e}"),
            sup_lo,
            sup_hi,
            0.0,
            "mean supremum deviation decreases as the noise level decreases",
        );
    }

    let mut csv = String::from("eps,dt,mean_sup,se,envelope\n");
    for &(eps, dt, mean_sup, se, envelope) in &rows {
        csv.push_str(&format!("{eps},{dt},{mean_sup},{se},{envelope}\n"));
    }
    report.artifact(save_artifact(&cfg.output_dir, "limit_path_dev.csv", &csv)?);
    let svg = Plot::new(
        "Supremum deviation from the deterministic limit path",
        "eps",
        "mean sup deviation",
    )
    .log_x()
    .log_y()
    .with_series(
        "measured",
        rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>(),
    )
    .with_series(
        "envelope",
        rows.iter().map(|r| (r.0, r.4)).collect::<Vec<_>>(),
    )
    .render();
    report.artifact(save_artifact(&cfg.output_dir, "limit_path_dev.svg", &svg)?);
    Ok(report)
}
