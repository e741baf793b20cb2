//! Time spent near coincidences is negligible.
//!
//! Even for an aggregating drift, the diffusion spends a vanishing fraction
//! of time with two particles exactly coincident: the fraction of grid time
//! with some pair closer than `delta` falls off linearly in `delta` (the
//! inter-particle gaps have a stationary density near zero of order
//! `1/eps`). This experiment measures the mean coincidence fraction over a
//! geometric ladder of radii, checks that it decreases in `delta` (exactly,
//! since the events are nested path by path), and checks the smallest radius
//! against the calibrated threshold `3·delta/eps`.
//!
//! Defaults: rank drift `[1, 0, -1]`, `eps = 1e-2`, radii
//! `0.1 × 0.1^j` for `j = 0..4`, `T = 1`, `dt = 1e-4`, 50 paths.

use oflab_core::analytics::mean_and_se;
use oflab_core::drift::DriftSpec;
use oflab_core::sde::{coincidence_fraction, monte_carlo, simulate, SimConfig};
use oflab_core::trajectory::Trajectory;

use crate::config::RunConfig;
use crate::error::{config, Result};
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    let spec = super::drift_or(cfg, || {
        DriftSpec::rank_based(vec![1.0, 0.0, -1.0]).expect("valid default rank drift")
    });
    let n = spec.n();
    let delta_max = cfg.param_or("delta_max", 1e-1);
    let delta_count = cfg.param_or("delta_count", 4.0) as usize;
    let delta_ratio = cfg.param_or("delta_ratio", 0.1);
    if !(delta_max > 0.0 && delta_ratio > 0.0 && delta_ratio < 1.0) || delta_count == 0 {
        return Err(config(
            "coincidence needs delta_max > 0, 0 < delta_ratio < 1 and delta_count >= 1",
        ));
    }
    let radii: Vec<f64> = (0..delta_count)
        .map(|j| delta_max * delta_ratio.powi(j as i32))
        .collect();
    let eps = cfg.eps_ladder_or(&[1e-2])[0];
    let t_final = cfg.t_final_or(1.0);
    let dt = cfg.dt_abs(eps, 1e-4);
    let sim = SimConfig { eps, dt, t_final };
    sim.validate()?;
    let paths = cfg.paths_or(50);
    let x0 = vec![0.0f64; n];

    let per_path: Vec<Vec<f64>> = monte_carlo(paths, cfg.seed, |_, rng| {
        let mut times = Vec::with_capacity(sim.num_steps() + 1);
        let mut states = Vec::with_capacity(sim.num_steps() + 1);
        simulate(&spec, &x0, &sim, rng, |_, t, x| {
            times.push(t);
            states.push(x.to_vec());
        })
        .expect("config validated above");
        let traj = Trajectory::new(times, states).expect("simulation grid is valid");
        radii
            .iter()
            .map(|&delta| coincidence_fraction(&traj, &delta))
            .collect()
    });

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());
    let mut rows: Vec<(f64, f64, f64)> = Vec::new(); // (delta, mean_fraction, se)
    for (j, &delta) in radii.iter().enumerate() {
        let fractions: Vec<f64> = per_path.iter().map(|f| f[j]).collect();
        let (mean, se) = mean_and_se(&fractions);
        rows.push((delta, mean, se));
    }
    for pair in rows.windows(2) {
        let (delta_hi, frac_hi, _) = pair[0];
        let (delta_lo, frac_lo, _) = pair[1];
        report.check_at_most(
            &format!("fraction_monotone_delta_{delta_lo:.3e}_vs_{delta_hi:.3e}"),
            frac_lo,
            frac_hi,
            0.0,
            "coincidence fraction shrinks with the radius (nested events, exact)",
        );
    }
    let &(delta_min, frac_min, _) = rows.last().expect("radius ladder is nonempty");
    report.check_at_most(
        &format!("fraction_delta_{delta_min:.3e}"),
        frac_min,
        (3.0 * delta_min / eps).min(1.0),
        0.0,
        "mean coincidence fraction at the smallest radius vs the calibrated 3*delta/eps threshold",
    );

    let mut csv = String::from("delta,mean_fraction,se\n");
    for &(delta, mean, se) in &rows {
        csv.push_str(&format!("{delta},{mean},{se}\n"));
    }
    report.artifact(save_artifact(&cfg.output_dir, "coincidence.csv", &csv)?);
    let svg = Plot::new(
        "Time near coincidences vs radius",
        "delta",
        "mean coincidence fraction",
    )
    .log_x()
    .log_y()
    .with_series(
        "measured",
        rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>(),
    )
    .render();
    report.artifact(save_artifact(&cfg.output_dir, "coincidence.svg", &svg)?);
    Ok(report)
}
