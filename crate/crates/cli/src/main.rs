//! `trustsim`: validate scenarios, run simulations, and rate one-off evidence.
//!
//! Exit codes: 0 success, 1 validation failure, 2 I/O or parse failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::LevelFilter;
use thiserror::Error;
use trustsim_core::aleatoric::MonteCarloConfig;
use trustsim_core::scenario::{parse_evidence, write_bundle, ScenarioConfig};
use trustsim_core::sim::{self, Summary};
use trustsim_core::trust::TrustEvaluator;

#[derive(Debug, Parser)]
#[command(
    name = "trustsim",
    version,
    about = "Trust management under uncertainty"
)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario file and list every problem found.
    Validate {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a scenario and write the report bundle.
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Directory for trust_timeseries.csv, task_log.csv and summary.json.
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
    /// Rate a single evidence file with the built-in defaults.
    Trust {
        evidence: PathBuf,
        /// Resampling seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct Overrides {
    /// Replace the scenario's simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the scenario's round count.
    #[arg(long)]
    rounds: Option<u64>,
}

#[derive(Debug, Error)]
enum Failure {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    let result = match cli.command {
        Command::Validate {
            scenario,
            overrides,
        } => validate(&scenario, &overrides),
        Command::Simulate {
            scenario,
            overrides,
            out,
        } => simulate(&scenario, &overrides, &out),
        Command::Trust { evidence, seed } => trust(&evidence, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig, Failure> {
    let mut cfg = ScenarioConfig::load(path).map_err(|e| Failure::Io(e.to_string()))?;
    if let Some(seed) = overrides.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(rounds) = overrides.rounds {
        cfg.simulation.rounds = rounds;
    }
    Ok(cfg)
}

fn validate(path: &Path, overrides: &Overrides) -> Result<(), Failure> {
    let report = load(path, overrides)?.validate();
    if !report.is_ok() {
        return Err(Failure::Invalid(report.to_string().trim_end().to_string()));
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("{}: ok", path.display());
    Ok(())
}

fn simulate(path: &Path, overrides: &Overrides, out: &Path) -> Result<(), Failure> {
    let cfg = load(path, overrides)?;
    let (scenario, report) = cfg
        .compile()
        .map_err(|r| Failure::Invalid(r.to_string().trim_end().to_string()))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    log::info!("running {} rounds", cfg.simulation.rounds);
    let report = sim::run(scenario).map_err(|e| Failure::Invalid(e.to_string()))?;
    write_bundle(out, &report, &cfg).map_err(|e| Failure::Io(e.to_string()))?;
    print_summary(&report.summary);
    println!("report written to {}", out.display());
    Ok(())
}

fn print_summary(s: &Summary) {
    println!("seed: {}", s.seed);
    println!("rounds: {}", s.rounds);
    println!("nodes: {}", s.nodes.len());
    match s.rank_correlation {
        Some(rho) => println!("rank_correlation: {rho:.6}"),
        None => println!("rank_correlation: n/a"),
    }
    for c in &s.final_coordinators {
        let tag = if c.bootstrap { " (bootstrap)" } else { "" };
        println!("coordinator {}: {}{tag}", c.cluster, c.node);
    }
    println!("coordinator_changes: {}", s.coordinator_changes.len());
    println!(
        "tasks: {} assigned, {} refused, {} routing errors",
        s.tasks.assigned, s.tasks.refused, s.tasks.routing_error
    );
    println!("max_divergence: {}", s.max_divergence);
}

fn trust(path: &Path, seed: u64) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let base = TrustEvaluator::default();
    let evidence = parse_evidence(&text, &base.taxonomy)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let evaluator = TrustEvaluator {
        monte_carlo: MonteCarloConfig {
            seed,
            ..base.monte_carlo
        },
        weight_overrides: evidence.weights,
        ..base
    };
    let invalid = |e: trustsim_core::Error| Failure::Invalid(e.to_string());
    let q = evaluator.quantify(&evidence.set).map_err(invalid)?;
    let w = evaluator.weights(&evidence.set).map_err(invalid)?;
    let t = trustsim_core::trust::weighted_trust(&q, &w).map_err(invalid)?;

    println!("T = {t:.6}");
    println!("{:<40} {:<10} {:>8} {:>8}", "facet", "kind", "q", "w");
    for (entry, w) in q.entries().iter().zip(w.as_slice()) {
        let name = evaluator
            .taxonomy
            .facet(&entry.facet)
            .map(|f| f.name.clone())
            .unwrap_or_else(|_| entry.facet.to_string());
        println!(
            "{name:<40} {:<10} {:>8.6} {w:>8.3}",
            entry.kind.as_str(),
            entry.value
        );
    }
    Ok(())
}
