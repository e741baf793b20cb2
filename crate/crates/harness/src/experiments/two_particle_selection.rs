//! Branch selection of a mutually fleeing pair.
//!
//! With gap drifts `b⁻ < 0 < b⁺` the difference `Z = X₁ − X₂` flees zero on
//! both sides, and as the noise vanishes the final configuration becomes a
//! Bernoulli pick between the two escape branches, each branch weighted by
//! its own strength: `P(Z settles below 0) = −b⁻ / (b⁺ − b⁻)`. This
//! experiment measures the empirical frequency of `Z(T) <= 0` along a noise
//! ladder and compares it to that formula.
//!
//! Defaults: `b_minus = −1`, `b_plus = 3`, `z0 = 0`, ladder
//! `[1e-2, 1e-3, 1e-4]`, per-rung `T = 50·eps`, `dt = 0.005·eps`, `10⁴`
//! paths. The horizon shrinks with the noise because commitment to a branch
//! happens on the `eps` time scale (drift beats the ~`2·sqrt(eps·t)` noise
//! spread once `t ≫ eps`), and the step is kept well below `eps` so that the
//! frozen-drift integrator's overshoot at sign changes (an upward bias on the
//! crossing count of order `dt/eps`) stays far inside the tolerance.

use oflab_core::analytics::{mean_and_se, selection_probability};
use oflab_core::sde::{monte_carlo, simulate_difference, SimConfig};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    let (b_minus, b_plus) = super::gap_drifts(cfg, -1.0, 3.0)?;
    if !(b_minus < 0.0 && b_plus > 0.0) {
        return Err(Error::config(format!(
            "branch selection needs b_minus < 0 < b_plus, got ({b_minus}, {b_plus})"
        )));
    }
    let z0 = cfg.param_or("z0", 0.0);
    let ladder = cfg.eps_ladder_or(&[1e-2, 1e-3, 1e-4]);
    let paths = cfg.paths_or(10_000);
    let target = selection_probability(&b_minus, &b_plus)?;

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());
    let mut csv = String::from("eps,dt,p_hat,se,target\n");
    let mut empirical = Vec::new();
    for (k, &eps) in ladder.iter().enumerate() {
        let t_final = cfg.t_final_or(50.0 * eps);
        let dt = cfg.dt_for(eps, 0.005);
        let sim = SimConfig { eps, dt, t_final };
        sim.validate()?;
        let below: Vec<f64> = monte_carlo(paths, cfg.seed.wrapping_add(k as u64), |_, rng| {
            let z = simulate_difference(z0, b_minus, b_plus, &sim, rng, |_, _, _| {})
                .expect("config validated above");
            if z <= 0.0 {
                1.0
            } else {
                0.0
            }
        });
        let (p_hat, se) = mean_and_se(&below);
        report.check_within(
            &format!("p_low_eps_{eps:e}"),
            p_hat,
            target,
            0.03,
            "frequency of Z(T) <= 0 vs the branch-selection formula -b_minus/(b_plus - b_minus)",
        );
        csv.push_str(&format!("{eps},{dt},{p_hat},{se},{target}\n"));
        empirical.push((eps, p_hat));
    }
    report.artifact(save_artifact(&cfg.output_dir, "selection.csv", &csv)?);
    let svg = Plot::new(
        "Downward branch selection frequency",
        "eps",
        "P(Z(T) <= 0)",
    )
    .log_x()
    .with_series("empirical", empirical)
    .with_series("formula", ladder.iter().map(|&e| (e, target)).collect())
    .render();
    report.artifact(save_artifact(&cfg.output_dir, "selection.svg", &svg)?);
    Ok(report)
}
