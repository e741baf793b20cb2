//! Sorted diffusion vs sticky reference flow.
//!
//! For a rank-based drift, the vector of sorted particle positions converges,
//! as the noise level shrinks, to the deterministic sticky flow started from
//! the same (sorted) initial condition. This experiment measures the mean
//! running maximum of the squared Euclidean distance between the sorted
//! diffusion state and the sticky reference along a noise ladder, checking
//! each value against the closed-form bound `(4·sqrt(2n) + 2n)·eps·T` and
//! checking that the deviation scales proportionally to `eps` (ratio between
//! consecutive rungs within a factor of 3 of the ladder ratio).
//!
//! Defaults: rank drift `[2, 1, -1, -2]`, ladder `[1e-2, 1e-3, 1e-4]`,
//! `T = 1`, `dt = 0.1·eps`, 1000 paths, all particles started at 0.

use oflab_core::analytics::{mean_and_se, sorted_vs_sticky_bound};
use oflab_core::drift::DriftSpec;
use oflab_core::sde::{monte_carlo, simulate, SimConfig};
use oflab_core::sticky::StickyPath;

use crate::config::RunConfig;
use crate::error::{config, Result};
use crate::plot::Plot;
use crate::report::{save_artifact, Report};

pub(super) fn run(cfg: &RunConfig) -> Result<Report> {
    let spec = super::drift_or(cfg, || {
        DriftSpec::rank_based(vec![2.0, 1.0, -1.0, -2.0]).expect("valid default rank drift")
    });
    let rank = spec
        .rank_vector()
        .ok_or_else(|| config("rank-sticky requires a rank-based drift"))?
        .to_vec();
    let n = rank.len();
    let ladder = cfg.eps_ladder_or(&[1e-2, 1e-3, 1e-4]);
    let t_final = cfg.t_final_or(1.0);
    let paths = cfg.paths_or(1000);
    let x0 = vec![0.0f64; n];

    let mut report = Report::new(&cfg.experiment, cfg.echo.clone());
    let mut rows: Vec<(f64, f64, f64, f64, f64)> = Vec::new(); // (eps, dt, mean_sup, se, bound)
    for (k, &eps) in ladder.iter().enumerate() {
        let dt = cfg.dt_for(eps, 0.1);
        let sim = SimConfig { eps, dt, t_final };
        sim.validate()?;
        let steps = sim.num_steps();
        // Sticky reference positions on the simulation's node times, computed once.
        let mut grid: Vec<f64> = (0..steps).map(|i| i as f64 * dt).collect();
        grid.push(t_final);
        let reference = StickyPath::new(&x0, &rank)?.sample(&grid)?;

        let sups: Vec<f64> = monte_carlo(paths, cfg.seed.wrapping_add(k as u64), |_, rng| {
            let mut sup = 0.0f64;
            simulate(&spec, &x0, &sim, rng, |node, _, x| {
                let mut sorted = x.to_vec();
                sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite positions"));
                let xi = reference.state(node);
                let dist2: f64 = sorted
                    .iter()
                    .zip(xi.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if dist2 > sup {
                    sup = dist2;
                }
            })
            .expect("config validated above");
            sup
        });
        let (mean_sup, se) = mean_and_se(&sups);
        let bound = sorted_vs_sticky_bound(n, eps, t_final);
        report.check_at_most(
            &format!("mean_sup_dist2_eps_{eps:e}"),
            mean_sup,
            bound,
            0.0,
            "mean running max of squared distance between sorted diffusion and sticky flow vs (4*sqrt(2n)+2n)*eps*T",
        );
        rows.push((eps, dt, mean_sup, se, bound));
    }
    for pair in rows.windows(2) {
        let (eps_hi, _, sup_hi, _, _) = pair[0];
        let (eps_lo, _, sup_lo, _, _) = pair[1];
        // Deviation should be proportional to eps: the normalized ratio
        // (sup/eps at one rung over the next) stays within a factor of 3.
        let log_ratio = ((sup_hi / eps_hi) / (sup_lo / eps_lo)).ln();
        report.check_within(
            &format!("eps_scaling_log_ratio_{eps_lo:e}_vs_{eps_hi:e}"),
            log_ratio,
            0.0,
            3.0f64.ln(),
            "log of eps-normalized deviation ratio between ladder rungs stays within ln(3)",
        );
    }

    let mut csv = String::from("eps,dt,mean_sup,se,bound\n");
    for &(eps, dt, mean_sup, se, bound) in &rows {
        csv.push_str(&format!("{eps},{dt},{mean_sup},{se},{bound}\n"));
    }
    report.artifact(save_artifact(&cfg.output_dir, "sticky_dev.csv", &csv)?);
    let svg = Plot::new(
        "Sorted diffusion vs sticky flow",
        "eps",
        "mean sup squared distance",
    )
    .log_x()
    .log_y()
    .with_series(
        "measured",
        rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>(),
    )
    .with_series("bound", rows.iter().map(|r| (r.0, r.4)).collect::<Vec<_>>())
    .render();
    report.artifact(save_artifact(&cfg.output_dir, "sticky_dev.svg", &svg)?);
    Ok(report)
}
