//! `pde-select`: simulate Burgers' equation, build candidate libraries, and
//! run the model-selection sweep from the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pde_select::pde::{Differentiation, PenaltyScale};
use pde_select::{InitialCondition, Strategy};

use config::{parse_scales, RunConfig};

/// Failure classes mapped to exit codes 2 and 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

#[derive(Parser)]
#[command(name = "pde-select", version, about = "Information-criterion model selection for PDE discovery")]
struct Cli {
    /// JSON run configuration; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory [default: out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print machine-readable results on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate viscous Burgers' equation and write the field.
    Simulate(SimArgs),
    /// Build the candidate term library from a field.
    BuildLibrary {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        lib: LibArgs,
    },
    /// Run the support-size sweep and print the selected equations.
    Discover {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        lib: LibArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Check UBIC against BIC on the augmented model over random instances.
    VerifyEquivalence(EquivalenceArgs),
    /// Find the smallest a_N whose ICOMP selection is the oracle support.
    ScanAn {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        lib: LibArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        scan: ScanArgs,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a non-negative number, got {s:?}")),
    }
}

#[derive(Clone, Debug)]
struct Scales(Vec<PenaltyScale<f64>>);

fn scales(s: &str) -> Result<Scales, String> {
    parse_scales(s).map(Scales)
}

#[derive(Clone, Copy, ValueEnum)]
enum Initial {
    Sine,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum Diff {
    CentralFd,
    Spectral,
}

#[derive(Clone, Copy, ValueEnum)]
enum Search {
    Exhaustive,
    Forward,
    Auto,
}

#[derive(Args)]
struct SimArgs {
    /// Viscosity.
    #[arg(long, allow_negative_numbers = true, value_parser = positive)]
    nu: Option<f64>,
    #[arg(long)]
    n_x: Option<usize>,
    #[arg(long)]
    n_t: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true, value_parser = positive)]
    t_max: Option<f64>,
    /// Initial profile, with default amplitude and shape.
    #[arg(long, value_enum)]
    initial: Option<Initial>,
}

#[derive(Args)]
struct LibArgs {
    /// Field CSV to build from instead of simulating.
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long)]
    n_samples: Option<usize>,
    /// Noise SD on u_t as a fraction of its RMS.
    #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
    target_noise: Option<f64>,
    #[arg(long)]
    max_poly_degree: Option<usize>,
    #[arg(long)]
    max_deriv_order: Option<usize>,
    #[arg(long, value_enum)]
    differentiation: Option<Diff>,
}

#[derive(Args)]
struct SweepArgs {
    /// Library CSV to load instead of building one.
    #[arg(long)]
    library: Option<PathBuf>,
    #[arg(long)]
    max_size: Option<usize>,
    #[arg(long)]
    n_boot: Option<usize>,
    /// Comma-separated ICOMP penalty scales, numbers or log_n.
    #[arg(long, value_parser = scales)]
    a_n: Option<Scales>,
    #[arg(long, value_enum)]
    strategy: Option<Search>,
}

#[derive(Args)]
struct EquivalenceArgs {
    #[arg(long)]
    instances: Option<usize>,
    /// Corrupt one augmentation coefficient; every check should then fail.
    #[arg(long)]
    perturb: bool,
}

#[derive(Args)]
struct ScanArgs {
    /// Ascending comma-separated a_N values, numbers or log_n.
    #[arg(long, value_parser = scales)]
    schedule: Option<Scales>,
    /// Comma-separated oracle term names.
    #[arg(long, value_delimiter = ',')]
    oracle: Option<Vec<String>>,
}

impl SimArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let sim = &mut cfg.simulate;
        if let Some(v) = self.nu {
            sim.nu = v;
        }
        let d = &mut sim.domain;
        if let Some(v) = self.n_x {
            d.n_x = v;
        }
        if let Some(v) = self.n_t {
            d.n_t = v;
        }
        if let Some(v) = self.x_min {
            d.x_min = v;
        }
        if let Some(v) = self.x_max {
            d.x_max = v;
        }
        if let Some(v) = self.t_max {
            d.t_max = v;
        }
        match self.initial {
            Some(Initial::Sine) => sim.initial = InitialCondition::sine(),
            Some(Initial::Gaussian) => sim.initial = InitialCondition::gaussian(),
            None => {}
        }
    }
}

impl LibArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let lib = &mut cfg.library;
        if let Some(v) = &self.field {
            lib.field = Some(v.clone());
        }
        if let Some(v) = self.n_samples {
            lib.n_samples = v;
        }
        if let Some(v) = self.target_noise {
            lib.target_noise = v;
        }
        if let Some(v) = self.max_poly_degree {
            lib.max_poly_degree = v;
        }
        if let Some(v) = self.max_deriv_order {
            lib.max_deriv_order = v;
        }
        match self.differentiation {
            Some(Diff::CentralFd) => lib.differentiation = Differentiation::CentralFd,
            Some(Diff::Spectral) => lib.differentiation = Differentiation::Spectral,
            None => {}
        }
    }
}

impl SweepArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let s = &mut cfg.sweep;
        if let Some(v) = &self.library {
            s.library = Some(v.clone());
        }
        if let Some(v) = self.max_size {
            s.max_size = Some(v);
        }
        if let Some(v) = self.n_boot {
            s.n_boot = v;
        }
        if let Some(v) = &self.a_n {
            s.a_n = v.0.clone();
        }
        match self.strategy {
            Some(Search::Exhaustive) => s.strategy = Strategy::Exhaustive,
            Some(Search::Forward) => s.strategy = Strategy::Forward,
            Some(Search::Auto) => s.strategy = Strategy::Auto,
            None => {}
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    match &cli.command {
        Command::Simulate(sim) => sim.apply(&mut cfg),
        Command::BuildLibrary { sim, lib } => {
            sim.apply(&mut cfg);
            lib.apply(&mut cfg);
        }
        Command::Discover { sim, lib, sweep } => {
            sim.apply(&mut cfg);
            lib.apply(&mut cfg);
            sweep.apply(&mut cfg);
        }
        Command::VerifyEquivalence(eq) => {
            if let Some(v) = eq.instances {
                cfg.equivalence.instances = v;
            }
            if eq.perturb {
                cfg.equivalence.perturb = true;
            }
        }
        Command::ScanAn { sim, lib, sweep, scan } => {
            sim.apply(&mut cfg);
            lib.apply(&mut cfg);
            sweep.apply(&mut cfg);
            if let Some(v) = &scan.schedule {
                cfg.scan.schedule = v.0.clone();
            }
            if let Some(v) = &scan.oracle {
                cfg.scan.oracle = v.clone();
            }
        }
    }
    cfg.validate()?;

    match cli.command {
        Command::Simulate(_) => commands::simulate(&cfg, cli.json),
        Command::BuildLibrary { .. } => commands::build(&cfg, cli.json),
        Command::Discover { .. } => commands::discover(&cfg, cli.json),
        Command::VerifyEquivalence(_) => commands::verify_equivalence(&cfg, cli.json),
        Command::ScanAn { .. } => commands::scan_an(&cfg, cli.json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
