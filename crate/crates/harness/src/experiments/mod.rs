//! The experiment registry: named, self-contained simulation studies.
//!
//! Each experiment resolves its inputs from a [`RunConfig`] (documented
//! defaults for anything omitted), runs its Monte Carlo or quadrature work,
//! writes CSV/SVG artifacts into the configured output directory, and
//! returns a [`Report`] whose metric rows carry explicit targets,
//! tolerances, and verdicts.

mod aggregation;
mod arcsine;
mod coincidence;
mod counterexample_3p;
mod ergodic_velocity;
mod hitting_prob;
mod laplace;
mod limit_path_z;
mod ordering_uniformity;
mod rank_sticky;
mod two_particle_cluster;
mod two_particle_selection;

use oflab_core::drift::classify_two_particle;
use oflab_core::DriftSpec64;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::report::Report;

/// A registered experiment.
pub struct ExperimentDef {
    pub name: &'static str,
    pub summary: &'static str,
    /// Keys accepted in the config's `params` map.
    pub allowed_params: &'static [&'static str],
    pub run: fn(&RunConfig) -> Result<Report>,
}

pub const EXPERIMENTS: &[ExperimentDef] = &[
    ExperimentDef {
        name: "two-particle-selection",
        summary: "final-ordering frequency of a mutually fleeing pair vs the branch-selection formula, along a noise ladder",
        allowed_params: &["b_minus", "b_plus", "z0"],
        run: two_particle_selection::run,
    },
    ExperimentDef {
        name: "two-particle-cluster",
        summary: "travel velocity and gap envelope of a mutually chasing pair vs closed forms",
        allowed_params: &[],
        run: two_particle_cluster::run,
    },
    ExperimentDef {
        name: "arcsine",
        summary: "occupation-time law of a driftless pair difference vs the arcsine distribution (KS distance)",
        allowed_params: &[],
        run: arcsine::run,
    },
    ExperimentDef {
        name: "limit-path-z",
        summary: "sup-distance of the pair difference to its zero-noise path, decreasing along a noise ladder",
        allowed_params: &["b_minus", "b_plus", "z0"],
        run: limit_path_z::run,
    },
    ExperimentDef {
        name: "rank-sticky",
        summary: "sorted diffusion vs the deterministic sticky flow: mean running max of the squared L2 gap against its linear-in-eps envelope",
        allowed_params: &[],
        run: rank_sticky::run,
    },
    ExperimentDef {
        name: "ordering-uniformity",
        summary: "chi-square test that a fully separating rank drift started from coincident points selects every final ordering equally often",
        allowed_params: &[],
        run: ordering_uniformity::run,
    },
    ExperimentDef {
        name: "aggregation",
        summary: "mean running max of the squared centered spread of a stable system against its envelope",
        allowed_params: &[],
        run: aggregation::run,
    },
    ExperimentDef {
        name: "ergodic-velocity",
        summary: "cone-occupation measure of the centered unit-noise process, its velocity functional, and cross-checks against momentum and direct simulation",
        allowed_params: &["burn_in", "batches", "direct_eps", "direct_t", "direct_paths"],
        run: ergodic_velocity::run,
    },
    ExperimentDef {
        name: "counterexample-3p",
        summary: "a three-particle drift that violates the split stability condition yet still aggregates; checks the excursion occupancy ratio",
        allowed_params: &["lambda1", "lambda2", "lambda3", "eta1", "eta2", "eta3"],
        run: counterexample_3p::run,
    },
    ExperimentDef {
        name: "hitting-prob",
        summary: "two-sided exit probability of the pair difference: quadrature vs closed form vs Monte Carlo, and its small-noise limit",
        allowed_params: &["c_plus", "c_minus", "delta_exponent", "mc_eps"],
        run: hitting_prob::run,
    },
    ExperimentDef {
        name: "laplace",
        summary: "Laplace transform of the first meeting time of a pair: Monte Carlo vs the closed form over a sweep of transform parameters",
        allowed_params: &["z0", "b_plus", "alpha", "t_cap"],
        run: laplace::run,
    },
    ExperimentDef {
        name: "coincidence",
        summary: "fraction of time any two particles sit within a radius, decreasing with the radius",
        allowed_params: &["delta_max", "delta_count", "delta_ratio"],
        run: coincidence::run,
    },
];

pub fn find(name: &str) -> Option<&'static ExperimentDef> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

/// Validates the request against the registry and runs the experiment.
pub fn run_experiment(cfg: &RunConfig) -> Result<Report> {
    let def = find(&cfg.experiment).ok_or_else(|| {
        let names: Vec<&str> = EXPERIMENTS.iter().map(|e| e.name).collect();
        Error::config(format!(
            "unknown experiment {:?}; known experiments: {}",
            cfg.experiment,
            names.join(", ")
        ))
    })?;
    for key in cfg.params.keys() {
        if !def.allowed_params.contains(&key.as_str()) {
            let allowed = if def.allowed_params.is_empty() {
                "none".to_string()
            } else {
                def.allowed_params.join(", ")
            };
            return Err(Error::config(format!(
                "experiment {:?} does not take param {key:?}; allowed params: {allowed}",
                def.name
            )));
        }
    }
    (def.run)(cfg)
}

/// Drift gaps `(b⁻, b⁺)` of the two-sided difference process, either derived
/// from an explicit two-particle drift or taken from `b_minus`/`b_plus`
/// params with experiment defaults.
pub(crate) fn gap_drifts(
    cfg: &RunConfig,
    default_minus: f64,
    default_plus: f64,
) -> Result<(f64, f64)> {
    if let Some(spec) = &cfg.drift {
        if spec.n() != 2 {
            return Err(Error::config(format!(
                "this experiment takes a two-particle drift, got n = {}",
                spec.n()
            )));
        }
        let c = classify_two_particle(spec)?;
        Ok((c.b_minus, c.b_plus))
    } else {
        Ok((
            cfg.param_or("b_minus", default_minus),
            cfg.param_or("b_plus", default_plus),
        ))
    }
}

/// The configured drift, or the experiment's default.
pub(crate) fn drift_or(cfg: &RunConfig, default: impl FnOnce() -> DriftSpec64) -> DriftSpec64 {
    match &cfg.drift {
        Some(spec) => spec.clone(),
        None => default(),
    }
}
