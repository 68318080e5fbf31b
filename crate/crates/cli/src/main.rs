//! `qfim`: quantum Fisher information, Cramér-Rao bounds and homodyne simulation
//! for complex parameters.
//!
//! Exit codes: 0 success, 1 consistency-check failure, 2 config error, 3 numerical failure.

mod commands;
mod config;
mod error;
mod model;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qfim_core::qfim::Kind;

use config::{parse_complex, parse_key, parse_kind, parse_list, List, Representation, Route, RunConfig};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "qfim", version, about = "Quantum Fisher information and Cramér-Rao bounds for complex parameters")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Builtin model: coherent-1mode, coherent-2mode or qubit-test [default: coherent-1mode]
    #[arg(long, global = true)]
    model: Option<String>,

    /// JSON run configuration; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Parameter point as "re,im" [default: 0.3,0]
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    z: Option<[f64; 2]>,

    /// Coherent key, four numbers "Re ε,Im ε,Re η,Im η" per mode [default: 1,0,0,0 or 1,0,0,0,0,0,1,0]
    #[arg(long, global = true, value_parser = parse_key, allow_hyphen_values = true)]
    key: Option<List<[[f64; 2]; 2]>>,

    /// QFIM kind: symmetric or right [default: symmetric]
    #[arg(long, global = true, value_parser = parse_kind)]
    kind: Option<Kind>,

    /// Fock truncation per mode [default: 40 for one mode, 20 for two]
    #[arg(long, global = true)]
    truncation: Option<usize>,

    /// Finite-difference base step [default: cube root of machine epsilon, relative]
    #[arg(long = "fd-step", global = true)]
    fd_step: Option<f64>,

    /// Mixing weight ε for ρ = (1−ε)|ψ⟩⟨ψ| + εI/d [default: none]
    #[arg(long, global = true)]
    mixing: Option<f64>,

    /// Pure-state formulas or density-matrix route for coherent models [default: pure]
    #[arg(long, global = true, value_enum)]
    route: Option<Route>,

    /// Random seed [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the nine identities of the real-to-complex map on random draws
    VerifyMap {
        /// Number of random trials [default: 100]
        #[arg(long)]
        trials: Option<usize>,
        /// Row half-dimension d [default: 2]
        #[arg(long)]
        d: Option<usize>,
        /// Column half-dimension k [default: 2]
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, hide = true)]
        corrupt_map: bool,
    },
    /// Quantum Fisher information matrix with a cross-check against the real route
    Qfim {
        /// Output blocks over (θ, θ*) or the real matrix over (Re θ, Im θ) [default: complex]
        #[arg(long, value_enum)]
        representation: Option<Representation>,
    },
    /// Covariance and weighted mean-square-error bounds
    Crb {
        /// Diagonal weight W = w·I [default: 1]
        #[arg(long)]
        weight: Option<f64>,
    },
    /// Homodyne Monte Carlo for coherent models
    Simulate {
        /// Number of shots [default: 100000]
        #[arg(long)]
        shots: Option<usize>,
        /// Quadrature phase per mode, comma separated [default: 0 or 0,π/2]
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        phases: Option<List<f64>>,
        /// Quadrature variance [default: 0.25]
        #[arg(long)]
        variance: Option<f64>,
        /// Export samples as CSV (shot,mode,outcome)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Worked coherent-state example with closed-form checks
    DemoCoherent,
}

fn flag_config(cli: &Cli) -> RunConfig {
    let c = &cli.common;
    let mut cfg = RunConfig {
        model: c.model.clone(),
        key: c.key.clone().map(|k| k.0),
        truncation: c.truncation,
        mixing: c.mixing,
        route: c.route,
        z: c.z,
        kind: c.kind,
        seed: c.seed,
        out: c.out.clone(),
        ..Default::default()
    };
    match &cli.command {
        Command::VerifyMap { trials, d, k, .. } => {
            cfg.trials = *trials;
            cfg.d = *d;
            cfg.k = *k;
        }
        Command::Qfim { representation } => cfg.representation = *representation,
        Command::Crb { weight } => cfg.weight = *weight,
        Command::Simulate {
            shots,
            phases,
            variance,
            csv,
        } => {
            cfg.shots = *shots;
            cfg.phases = phases.clone().map(|p| p.0);
            cfg.variance = *variance;
            cfg.csv = csv.clone();
        }
        Command::DemoCoherent => {}
    }
    cfg
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let file = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut cfg = flag_config(&cli).or(file);
    if let Some(h) = cli.common.fd_step {
        let mut policy = cfg.policy.unwrap_or_default();
        policy.fd.step = h;
        cfg.policy = Some(policy);
    }
    cfg.policy()?;
    let out = cfg.out.clone();
    let report = match cli.command {
        Command::VerifyMap { corrupt_map, .. } => commands::cmd_verify_map(cfg, corrupt_map)?,
        Command::Qfim { .. } => commands::cmd_qfim(cfg)?,
        Command::Crb { .. } => commands::cmd_crb(cfg)?,
        Command::Simulate { .. } => commands::cmd_simulate(cfg)?,
        Command::DemoCoherent => commands::cmd_demo_coherent(cfg)?,
    };
    let json = report.to_json();
    match out {
        Some(path) => std::fs::write(path, json)?,
        None => print!("{json}"),
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} = {:.3e} > {:.3e}", c.name, c.value, c.tolerance);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Core(qfim_core::Error::RankDeficient { .. }) = e {
                eprintln!("hint: use --route pure or give a --mixing weight");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
