//! Exit probabilities of the difference process through a shrinking window.
//!
//! For a doubly diverging pair (`c⁻ < 0 < c⁺`) started at `Z = 0`, the
//! probability of exiting `[-δ, δ]` through the top has a closed form, a
//! general quadrature route through the scale function, and a small-noise
//! limit `c⁺/(c⁺ − c⁻)` when `δ = eps^q` with `q ∈ (0, 1)`. This experiment
//! checks quadrature against the closed form across a noise ladder, checks
//! the closed form against the limit at the smallest rung, and cross-checks
//! one rung by direct Monte Carlo of the Euler walk.
//!
//! Defaults: `c⁺ = 1`, `c⁻ = -2`, `δ = eps^0.75`, ladder
//! `[1e-1, …, 1e-6]`; the Monte Carlo leg runs 4000 paths at `eps = 1e-2`
//! with `dt = 2e-6`.

use oflab_core::analytics::{
    exit_probability, exit_probability_constant, exit_probability_limit, mean_and_se,
};
use oflab_core::scalar::FloatScalar;
use oflab_core::sde::monte_carlo;

use crate::config::RunConfig;
use crate::error::{config, Result};
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    let c_plus = cfg.param_or("c_plus", 1.0);
    let c_minus = cfg.param_or("c_minus", -2.0);
    let exponent = cfg.param_or("delta_exponent", 0.75);
    if !(c_minus < 0.0 && c_plus > 0.0) {
        return Err(config(
            "hitting-prob needs diverging gap drifts: c_minus < 0 < c_plus",
        ));
    }
    if !(exponent > 0.0 && exponent < 1.0) {
        return Err(config("delta_exponent must lie in (0, 1)"));
    }
    let ladder = cfg.eps_ladder_or(&[1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]);

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());
    let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new(); // (eps, delta, quad, closed)
    for &eps in &ladder {
        let delta = eps.powf(exponent);
        let quad = exit_probability(|_| c_plus, |_| c_minus, delta, eps, 1e-11)?;
        let closed = exit_probability_constant(c_plus, c_minus, delta, eps)?;
        report.check_at_most(
            &format!("quad_vs_closed_eps_{eps:e}"),
            (quad - closed).abs(),
            1e-8,
            0.0,
            "scale-function quadrature agrees with the constant-drift closed form",
        );
        rows.push((eps, delta, quad, closed));
    }
    let limit = exit_probability_limit(&c_plus, &c_minus)?;
    let closed_smallest = rows.last().expect("ladder is nonempty").3;
    report.check_at_most(
        "limit_gap",
        (closed_smallest - limit).abs(),
        1e-3,
        0.0,
        "closed form at the smallest noise level vs the limit c+/(c+ - c-)",
    );

    // Direct Monte Carlo of the Euler walk at one rung.
    let mc_eps = cfg.param_or("mc_eps", 1e-2);
    if !(mc_eps > 0.0) {
        return Err(config("mc_eps must be positive"));
    }
    let mc_delta = mc_eps.powf(exponent);
    let dt = cfg.dt_abs(mc_eps, 2e-6);
    let paths = cfg.paths_or(4000);
    let noise = 2.0 * (mc_eps * dt).sqrt();
    let max_steps = (0.5 / dt).ceil() as usize;
    let hits: Vec<f64> = monte_carlo(paths, cfg.seed.wrapping_add(ladder.len() as u64), {
        |_, rng| {
            let mut z = 0.0f64;
            for _ in 0..max_steps {
                let drift = if z > 0.0 { c_plus } else { c_minus };
                z += drift * dt + noise * f64::standard_normal(rng);
                if z >= mc_delta {
                    return 1.0;
                }
                if z <= -mc_delta {
                    return 0.0;
                }
            }
            // Censored path (vanishingly rare for diverging drifts over this
            // horizon); split the difference rather than bias a side.
            0.5
        }
    });
    if hits.contains(&0.5) {
        log::warn!("some Monte Carlo paths were censored before exiting [-delta, delta]");
    }
    let (mc_mean, _mc_se) = mean_and_se(&hits);
    let mc_closed = exit_probability_constant(c_plus, c_minus, mc_delta, mc_eps)?;
    report.check_within(
        "mc_vs_closed",
        mc_mean,
        mc_closed,
        0.03,
        "Monte Carlo upward-exit frequency vs the closed form at the same noise level",
    );

    let mut csv = String::from("eps,delta,quad,closed\n");
    for &(eps, delta, quad, closed) in &rows {
        csv.push_str(&format!("{eps},{delta},{quad},{closed}\n"));
    }
    report.artifact(save_artifact(&cfg.output_dir, "exit_prob.csv", &csv)?);
    let svg = Plot::new(
        "Upward exit probability through a shrinking window",
        "eps",
        "P(exit through +delta)",
    )
    .log_x()
    .with_series(
        "closed form",
        rows.iter().map(|r| (r.0, r.3)).collect::<Vec<_>>(),
    )
    .with_series("limit", rows.iter().map(|r| (r.0, limit)).collect::<Vec<_>>())
    .with_series("monte carlo", vec![(mc_eps, mc_mean)])
    .render();
    report.artifact(save_artifact(&cfg.output_dir, "exit_prob.svg", &svg)?);
    Ok(report)
}
