//! Uniformity of the final ordering from a coincident start.
//!
//! When every particle starts at the same point, the dynamics treat the
//! particle labels exchangeably, so the ordering observed at any later time
//! is uniform over all `n!` permutations. This experiment simulates many
//! paths from a coincident start, tabulates the final ordering of each, and
//! applies a chi-square goodness-of-fit test against the uniform law.
//!
//! The default horizon and step scale with the noise level (`T = 50·eps`,
//! `dt = 0.005·eps`): long enough for orderings to separate cleanly, short
//! enough that the discrete-time start (where exact ties fall back to one
//! fixed ordering's drift for a few steps) perturbs the cell probabilities
//! by far less than a standard error.
//!
//! Defaults: rank drift `[-1, 0, 1]`, ladder `[1e-3]`, 6000 paths.

use oflab_core::drift::DriftSpec;
use oflab_core::ordering::{factorial, sigma_of};
use oflab_core::sde::{monte_carlo, simulate, SimConfig};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::config::RunConfig;
use crate::error::Result;
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    let spec = super::drift_or(cfg, || {
        DriftSpec::rank_based(vec![-1.0, 0.0, 1.0]).expect("valid default rank drift")
    });
    let n = spec.n();
    let cells = factorial(n);
    let ladder = cfg.eps_ladder_or(&[1e-3]);
    let paths = cfg.paths_or(6000);
    let x0 = vec![0.0f64; n];

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());
    for (k, &eps) in ladder.iter().enumerate() {
        let t_final = cfg.t_final_or(50.0 * eps);
        let dt = cfg.dt_for(eps, 0.005);
        let sim = SimConfig { eps, dt, t_final };
        sim.validate()?;
        let ranks: Vec<usize> = monte_carlo(paths, cfg.seed.wrapping_add(k as u64), |_, rng| {
            let x = simulate(&spec, &x0, &sim, rng, |_, _, _| {})
                .expect("config validated above");
            sigma_of(&x).lehmer_rank()
        });
        let mut counts = vec![0u64; cells];
        for r in ranks {
            counts[r] += 1;
        }
        let expected = paths as f64 / cells as f64;
        if expected < 5.0 {
            log::warn!(
                "expected count per ordering is {expected:.2} (< 5); \
                 the chi-square approximation may be unreliable"
            );
        }
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        let dist = ChiSquared::new((cells - 1) as f64).expect("positive degrees of freedom");
        let p_value = 1.0 - dist.cdf(chi2);
        report.check_at_least(
            &format!("chi_square_p_value_eps_{eps:e}"),
            p_value,
            0.001,
            0.0,
            "chi-square goodness-of-fit p-value for uniformity of the final ordering",
        );

        let mut csv = String::from("lehmer_rank,count,expected\n");
        for (r, &c) in counts.iter().enumerate() {
            csv.push_str(&format!("{r},{c},{expected}\n"));
        }
        report.artifact(save_artifact(
            &cfg.output_dir,
            &format!("ordering_counts_eps_{eps:e}.csv"),
            &csv,
        )?);
        let svg = Plot::new(
            "Final ordering counts from a coincident start",
            "ordering (Lehmer rank)",
            "count",
        )
        .with_series(
            "observed",
            counts
                .iter()
                .enumerate()
                .map(|(r, &c)| (r as f64, c as f64))
                .collect::<Vec<_>>(),
        )
        .with_series(
            "expected",
            vec![(0.0, expected), ((cells - 1) as f64, expected)],
        )
        .render();
        report.artifact(save_artifact(
            &cfg.output_dir,
            &format!("ordering_counts_eps_{eps:e}.svg"),
            &svg,
        )?);
    }
    Ok(report)
}
