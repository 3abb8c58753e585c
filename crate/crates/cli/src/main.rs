use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gvlab_cli::config::{parse_grid, parse_list, parse_values, Config};
use gvlab_cli::verbs::{run, Options, Output, RunError, Verb};

const EXIT_USAGE: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

/// Godbillon-Vey type invariants of plane fields on 3D grids.
#[derive(Parser, Debug)]
#[command(name = "gvlab", version)]
struct Cli {
    #[command(subcommand)]
    verb: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// gv by direct integration and through the Frenet frame
    Gv,
    /// Euler-Lagrange residuals: (L_T)^3 omega, frame form, metric Q-terms, umbilic system
    Critical,
    /// Analytic first and second variations against finite differences
    Variation,
    /// A seeded Jacobi field on the chart [-1,1]^3 and its operator residuals
    Jacobi,
    /// Frenet apparatus of the T-curves and the frame values of d eta
    Frenet,
    /// Convergence table (CSV) of one quantity along an axis
    Sweep {
        /// grid, dt or amplitude
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated axis values (at least 3)
        #[arg(long)]
        values: Option<String>,
        /// rw-gap, rw-pointwise, dd, d-error, first-variation, omega-domega
        #[arg(long)]
        quantity: Option<String>,
    },
    /// Print the scenario catalog
    ListScenarios,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// N1,N2,N3
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Comma-separated check names, or `all`
    #[arg(long, global = true)]
    checks: Option<String>,
    #[arg(long = "tol-scale", global = true)]
    tol_scale: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long = "no-timestamp", global = true)]
    no_timestamp: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// key = value file; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

fn options(cli: &Cli) -> Result<(Verb, Options), RunError> {
    let usage = RunError::Usage;
    let mut file = Config::default();
    if let Some(path) = &cli.common.config {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        file = Config::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let c = &cli.common;
    let mut flags = Config {
        scenario: c.scenario.clone(),
        grid: c.grid.as_deref().map(parse_grid).transpose().map_err(usage)?,
        checks: c.checks.as_deref().map(parse_list),
        tol_scale: c.tol_scale,
        dt: c.dt,
        out: c.out.clone(),
        no_timestamp: c.no_timestamp.then_some(true),
        seed: c.seed,
        ..Default::default()
    };
    let verb = match &cli.verb {
        Command::Gv => Verb::Gv,
        Command::Critical => Verb::Critical,
        Command::Variation => Verb::Variation,
        Command::Jacobi => Verb::Jacobi,
        Command::Frenet => Verb::Frenet,
        Command::ListScenarios => Verb::ListScenarios,
        Command::Sweep { axis, values, quantity } => {
            flags.axis = axis.clone();
            flags.values = values.as_deref().map(parse_values).transpose().map_err(usage)?;
            flags.quantity = quantity.clone();
            Verb::Sweep
        }
    };
    let m = file.overlay(flags);
    let d = Options::default();
    Ok((
        verb,
        Options {
            scenario: m.scenario.unwrap_or(d.scenario),
            grid: m.grid.unwrap_or(d.grid),
            checks: m.checks.unwrap_or_default(),
            tol_scale: m.tol_scale.unwrap_or(d.tol_scale),
            dt: m.dt.unwrap_or(d.dt),
            out: m.out,
            no_timestamp: m.no_timestamp.unwrap_or(false),
            seed: m.seed.unwrap_or(d.seed),
            axis: m.axis,
            values: m.values.unwrap_or_default(),
            quantity: m.quantity,
        },
    ))
}

fn init_threads() -> Result<(), RunError> {
    let n = match std::env::var("GVLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| RunError::Usage(format!("GVLAB_THREADS must be a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| RunError::Internal(e.to_string()))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), RunError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| RunError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main_inner() -> Result<bool, RunError> {
    let cli = Cli::try_parse().map_err(|e| {
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            let _ = e.print();
            std::process::exit(0);
        }
        RunError::Usage(e.to_string())
    })?;
    let (verb, opts) = options(&cli)?;
    init_threads()?;
    let exe = std::env::current_exe().ok();
    match run(verb, &opts, exe)? {
        Output::Text(t) => {
            emit(&t, opts.out.as_ref())?;
            Ok(true)
        }
        Output::Report(r) => {
            for c in &r.checks {
                for line in c.lines() {
                    eprintln!("{line}");
                }
            }
            emit(&(r.to_json() + "\n"), opts.out.as_ref())?;
            Ok(r.all_passed())
        }
    }
}

fn main() -> ExitCode {
    match std::panic::catch_unwind(main_inner) {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(EXIT_CHECK_FAILED),
        Ok(Err(e)) => {
            eprintln!("gvlab: {e}");
            ExitCode::from(match e {
                RunError::Usage(_) => EXIT_USAGE,
                RunError::Internal(_) => EXIT_INTERNAL,
            })
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
