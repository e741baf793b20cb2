//! Occupation-time law of a driftless pair difference.
//!
//! With both gap drifts zero, `Z = X₁ − X₂` is a Brownian motion and the
//! fraction of `[0, T]` it spends positive follows the arcsine law. This
//! experiment simulates many paths, accumulates the left-endpoint occupation
//! fraction per path, and checks the Kolmogorov–Smirnov distance to the
//! arcsine CDF `(2/π)·asin(√x)`.
//!
//! Defaults: `eps = 1`, `T = 1`, `dt = 1e-4`, `10⁴` paths.

use oflab_core::analytics::{arcsine_cdf, ks_statistic, mean_and_se};
use oflab_core::sde::{monte_carlo, simulate_difference, SimConfig};

use crate::config::RunConfig;
use crate::error::Result;
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    let ladder = cfg.eps_ladder_or(&[1.0]);
    let t_final = cfg.t_final_or(1.0);
    let paths = cfg.paths_or(10_000);

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());
    for (k, &eps) in ladder.iter().enumerate() {
        let dt = cfg.dt_abs(eps, 1e-4);
        let sim = SimConfig { eps, dt, t_final };
        sim.validate()?;
        let steps = sim.num_steps();
        let mut fractions: Vec<f64> =
            monte_carlo(paths, cfg.seed.wrapping_add(k as u64), |_, rng| {
                let mut positive = 0usize;
                simulate_difference(0.0, 0.0, 0.0, &sim, rng, |node, _, z| {
                    if node < steps && z > 0.0 {
                        positive += 1;
                    }
                })
                .expect("config validated above");
                positive as f64 / steps as f64
            });
        let (mean, mean_se) = mean_and_se(&fractions);
        let ks = ks_statistic(&mut fractions, arcsine_cdf);
        report.check_at_most(
            &format!("ks_distance_eps_{eps:e}"),
            ks,
            0.02,
            0.0,
            "Kolmogorov-Smirnov distance of time-positive fractions to the arcsine CDF",
        );
        report.check_within(
            &format!("mean_fraction_eps_{eps:e}"),
            mean,
            0.5,
            3.0 * mean_se,
            "mean time-positive fraction vs the arcsine mean 1/2 (3 standard errors)",
        );

        // Empirical CDF artifact, thinned to keep files small.
        let mut csv = String::from("fraction,empirical_cdf,arcsine_cdf\n");
        let mut ecdf_pts = Vec::new();
        let n = fractions.len();
        let stride = n.div_ceil(256);
        for i in (0..n).step_by(stride) {
            let x = fractions[i]; // sorted in place by the KS statistic
            let f = (i + 1) as f64 / n as f64;
            csv.push_str(&format!("{x},{f},{}\n", arcsine_cdf(x)));
            ecdf_pts.push((x, f));
        }
        report.artifact(save_artifact(
            &cfg.output_dir,
            &format!("occupation_cdf_eps_{eps:e}.csv"),
            &csv,
        )?);
        let curve: Vec<(f64, f64)> = (0..=100)
            .map(|i| {
                let x = i as f64 / 100.0;
                (x, arcsine_cdf(x))
            })
            .collect();
        let svg = Plot::new(
            "Occupation-time distribution vs arcsine law",
            "fraction of time positive",
            "CDF",
        )
        .with_series("empirical", ecdf_pts)
        .with_series("arcsine", curve)
        .render();
        report.artifact(save_artifact(
            &cfg.output_dir,
            &format!("occupation_cdf_eps_{eps:e}.svg"),
            &svg,
        )?);
    }
    Ok(report)
}
