//! Laplace transform of the first hitting time of zero.
//!
//! For the difference process started at `z0 > 0` with constant drift above
//! zero, `E[e^{-alpha*tau}]` for the first time `tau` of reaching zero has
//! the closed form `exp(-z0*(mu + sqrt(mu^2 + 8*alpha*eps))/(4*eps))`. This
//! experiment estimates the transform by Monte Carlo over a grid of `alpha`
//! values (hitting times from linearly interpolated Euler crossings, with
//! paths that never hit contributing zero) and compares each against the
//! closed form. It also checks the zero-`alpha` uphill identity: with
//! `mu > 0` the transform at `alpha = 0` is the probability `e^{-mu*z0/(2*eps)}`
//! of ever reaching zero.
//!
//! Defaults: `z0 = 1`, drift `-1`, `eps = 1e-2`, `dt = 1e-4`, `10⁴` paths,
//! horizon cap `t_cap = 8`.

use oflab_core::analytics::{exit_time_laplace, mean_and_se};
use oflab_core::scalar::FloatScalar;
use oflab_core::sde::monte_carlo;

use crate::config::RunConfig;
use crate::error::{config, Result};
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    let z0 = cfg.param_or("z0", 1.0);
    let mu = cfg.param_or("b_plus", -1.0);
    let alpha_extra = cfg.param_or("alpha", 1.0);
    let t_cap = cfg.param_or("t_cap", 8.0);
    if !(z0 > 0.0) {
        return Err(config("laplace needs z0 > 0"));
    }
    if !(t_cap > 0.0) {
        return Err(config("laplace needs t_cap > 0"));
    }
    if !(alpha_extra >= 0.0) {
        return Err(config("laplace needs alpha >= 0"));
    }
    let eps = cfg.eps_ladder_or(&[1e-2])[0];
    let dt = cfg.dt_abs(eps, 1e-4);
    let paths = cfg.paths_or(10_000);

    let mut alphas = vec![0.25, 0.5, 1.0, 2.0, 4.0, alpha_extra];
    alphas.sort_by(|a, b| a.partial_cmp(b).expect("finite alphas"));
    alphas.dedup();

    // First hitting times of zero; paths that never hit before `t_cap`
    // contribute tau = infinity, i.e. zero to every transform value.
    let noise = 2.0 * (eps * dt).sqrt();
    let max_steps = (t_cap / dt).ceil() as usize;
    let taus: Vec<f64> = monte_carlo(paths, cfg.seed, |_, rng| {
        let mut z = z0;
        for k in 0..max_steps {
            let z_next = z + mu * dt + noise * f64::standard_normal(rng);
            if z_next <= 0.0 {
                return k as f64 * dt + dt * z / (z - z_next);
            }
            z = z_next;
        }
        f64::INFINITY
    });

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());
    let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new(); // (alpha, mc, se, formula)
    for &alpha in &alphas {
        let transformed: Vec<f64> = taus.iter().map(|&tau| (-alpha * tau).exp()).collect();
        let (mc, se) = mean_and_se(&transformed);
        let formula = exit_time_laplace(z0, mu, eps, alpha)?;
        report.check_within(
            &format!("laplace_alpha_{alpha}"),
            mc,
            formula,
            0.01,
            "Monte Carlo hitting-time transform vs the closed form",
        );
        rows.push((alpha, mc, se, formula));
    }

    // Bit-level consistency of the closed form with the uphill zero-alpha
    // hitting probability.
    let mu_up = mu.abs().max(1.0);
    let lhs = exit_time_laplace(z0, mu_up, eps, 0.0)?;
    let rhs = (-mu_up * z0 / (2.0 * eps)).exp();
    report.check_at_most(
        "uphill_zero_alpha_identity_rel_gap",
        (lhs - rhs).abs() / rhs,
        1e-12,
        0.0,
        "transform at alpha = 0 with uphill drift equals the reach-zero probability",
    );

    let mut csv = String::from("alpha,mc,se,formula\n");
    for &(alpha, mc, se, formula) in &rows {
        csv.push_str(&format!("{alpha},{mc},{se},{formula}\n"));
    }
    report.artifact(save_artifact(&cfg.output_dir, "laplace.csv", &csv)?);
    let (alpha_lo, alpha_hi) = (alphas[0], alphas[alphas.len() - 1]);
    let curve: Vec<(f64, f64)> = (0..=100)
        .map(|i| {
            let a = alpha_lo + (alpha_hi - alpha_lo) * i as f64 / 100.0;
            (a, exit_time_laplace(z0, mu, eps, a).expect("validated inputs"))
        })
        .collect();
    let svg = Plot::new(
        "Hitting-time Laplace transform",
        "alpha",
        "E[exp(-alpha*tau)]",
    )
    .with_series(
        "monte carlo",
        rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>(),
    )
    .with_series("formula", curve)
    .render();
    report.artifact(save_artifact(&cfg.output_dir, "laplace.svg", &svg)?);
    Ok(report)
}
