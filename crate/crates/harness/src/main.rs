//! `oflab` — command-line front end of the order-based diffusion lab.
//!
//! Subcommands: `run` executes a registered experiment from a JSON
//! configuration and writes a report; `check-sc` analyzes the stability
//! condition of a drift specification; `sticky` prints a sticky-flow
//! trajectory as CSV; `list-experiments` lists the registry.
//!
//! Exit codes: 0 = success (all metrics pass), 1 = some metric failed,
//! 2 = configuration or usage error. `OFLAB_THREADS` caps the Monte Carlo
//! thread pool; `OFLAB_SEED` overrides the configured seed.

// Validation guards are written as `!(x > 0)` rather than `x <= 0` so that a
// NaN argument fails the guard instead of slipping past it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oflab_harness::config::RunConfig;
use oflab_harness::experiments::{run_experiment, EXPERIMENTS};

#[derive(Parser)]
#[command(name = "oflab", version, about = "Order-based diffusion lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a registered experiment from a JSON configuration file.
    Run {
        /// Path to the experiment configuration (JSON).
        config: PathBuf,
    },
    /// Analyze the stability condition of a drift specification.
    CheckSc {
        /// Path to the drift specification (JSON).
        drift: PathBuf,
        /// Emit the analysis as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Print a sticky-flow trajectory as CSV on stdout.
    Sticky {
        /// Comma-separated nondecreasing initial positions, e.g. "0,0,1".
        y0: String,
        /// Comma-separated rank velocities, e.g. "1,0,-1".
        b: String,
        /// Horizon.
        #[arg(long = "T", default_value_t = 1.0)]
        t_final: f64,
        /// Sampling step; 0 samples exactly the collision breakpoints.
        #[arg(long, default_value_t = 0.0)]
        dt: f64,
    },
    /// List the registered experiments.
    ListExperiments,
}

fn main() -> ExitCode {
    env_logger::init();
    if let Err(msg) = apply_thread_cap() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => run(&config),
        Command::CheckSc { drift, json } => check_sc(&drift, json),
        Command::Sticky {
            y0,
            b,
            t_final,
            dt,
        } => sticky(&y0, &b, t_final, dt),
        Command::ListExperiments => {
            for def in EXPERIMENTS {
                println!("{:<24} {}", def.name, def.summary);
                if !def.allowed_params.is_empty() {
                    println!("{:<24} params: {}", "", def.allowed_params.join(", "));
                }
            }
            ExitCode::SUCCESS
        }
    }
}

/// Applies `OFLAB_THREADS` to the global Monte Carlo pool before any
/// parallel work runs.
fn apply_thread_cap() -> Result<(), String> {
    let Ok(raw) = std::env::var("OFLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|e| format!("OFLAB_THREADS must be a positive integer: {e}"))?;
    if threads == 0 {
        return Err("OFLAB_THREADS must be a positive integer".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("cannot configure the thread pool: {e}"))
}

fn run(config_path: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let base = config_path.parent().unwrap_or_else(|| Path::new("."));
    let mut cfg = match RunConfig::from_json_str(&text, base) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Ok(raw) = std::env::var("OFLAB_SEED") {
        match raw.trim().parse::<u64>() {
            Ok(seed) => cfg.seed = seed,
            Err(e) => {
                eprintln!("error: OFLAB_SEED must be an unsigned integer: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report_path = match report.write(&cfg.output_dir) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!("{}", report.summary());
    println!("report: {}", report_path.display());
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn check_sc(drift_path: &Path, as_json: bool) -> ExitCode {
    let text = match std::fs::read_to_string(drift_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", drift_path.display());
            return ExitCode::from(2);
        }
    };
    let analysis = oflab_core::drift::from_json_str(&text)
        .and_then(|spec| oflab_core::drift::analyze_stability(&spec));
    let report = match analysis {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if as_json {
        let violations: Vec<_> = report
            .violations
            .iter()
            .map(|v| {
                serde_json::json!({
                    "sigma": v.sigma.to_string(),
                    "split": v.split,
                    "left_avg": v.left_avg,
                    "right_avg": v.right_avg,
                })
            })
            .collect();
        let out = serde_json::json!({
            "satisfies_sc": report.satisfies_sc,
            "satisfies_ssc": report.satisfies_ssc,
            "b_bar": report.b_bar,
            "violations": violations,
        });
        println!("{out:#}");
    } else {
        println!(
            "stability condition: {}",
            if report.satisfies_sc {
                "satisfied"
            } else {
                "violated"
            }
        );
        println!(
            "strict stability: {} (margin {})",
            if report.satisfies_ssc {
                "satisfied"
            } else {
                "violated"
            },
            report.b_bar
        );
        for v in &report.violations {
            println!(
                "  ordering {}: split after rank {}: left avg {} < right avg {}",
                v.sigma, v.split, v.left_avg, v.right_avg
            );
        }
    }
    ExitCode::SUCCESS
}

fn sticky(y0_raw: &str, b_raw: &str, t_final: f64, dt: f64) -> ExitCode {
    let parse_list = |raw: &str, what: &str| -> Result<Vec<f64>, String> {
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("{what} entry {s:?} is not a number: {e}"))
            })
            .collect()
    };
    let result = (|| -> Result<String, String> {
        let y0 = parse_list(y0_raw, "y0")?;
        let b = parse_list(b_raw, "b")?;
        if !(t_final > 0.0) || dt < 0.0 {
            return Err("need T > 0 and dt >= 0".into());
        }
        let path = oflab_core::sticky::StickyPath::new(&y0, &b).map_err(|e| e.to_string())?;
        let grid = if dt == 0.0 {
            let mut g = vec![0.0];
            g.extend(path.events().iter().map(|e| e.time).filter(|&t| t < t_final));
            g.push(t_final);
            g.dedup();
            g
        } else {
            let mut g: Vec<f64> = (0..)
                .map(|k| k as f64 * dt)
                .take_while(|&t| t < t_final)
                .collect();
            g.push(t_final);
            g
        };
        let traj = path.sample(&grid).map_err(|e| e.to_string())?;
        Ok(traj.to_csv())
    })();
    match result {
        Ok(csv) => {
            print!("{csv}");
            ExitCode::SUCCESS
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
