//! `splitkit` command-line front end.
//!
//! Exit status: 0 on success, 1 when a computed verdict disagrees with the
//! expected one, 2 on usage, parse or model errors.

mod render;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use splitkit::config::{Config, OutputFormat};
use splitkit::order::Model;
use splitkit::schemes::{catalog_get, parse_scheme, Coefficient, Placement, Scheme};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlacementArg {
    Combined,
    Separate,
}

#[derive(Parser)]
#[command(name = "splitkit", version, about = "Order checks, convergence tests and coefficient search for splitting methods")]
struct Cli {
    /// TOML configuration file (falls back to $SPLITKIT_CONFIG)
    #[arg(long, global = true, env = "SPLITKIT_CONFIG")]
    config: Option<PathBuf>,
    /// Seed for randomized subcommands (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Catalog schemes with claimed and verified orders
    ListSchemes,
    /// Exact order of a scheme file or catalog name
    CheckOrder {
        scheme: String,
        #[arg(long, default_value = "autonomous")]
        model: Model,
        /// Highest degree to check
        #[arg(long, default_value_t = 6)]
        max: u32,
    },
    /// Empirical convergence order on a seeded random test problem
    EstimateOrder {
        scheme: String,
        #[arg(long, default_value = "autonomous")]
        model: Model,
        /// Drop all commutator terms before running
        #[arg(long)]
        zero_c: bool,
        /// Run the commutator-free rewrite instead (nonautonomous-k1 only)
        #[arg(long)]
        commutator_free: bool,
        /// Comma-separated step sizes, each half the previous
        #[arg(long, value_delimiter = ',')]
        tau: Option<Vec<f64>>,
    },
    /// Multi-start coefficient search over a pattern
    Search {
        /// Factor letters in printed order: A, B, G (B with a commutator
        /// slot); or E repeated for commutator-free stages
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        order: u32,
        #[arg(long, default_value = "autonomous")]
        model: Model,
        #[arg(long, value_enum, default_value = "combined")]
        placement: PlacementArg,
        /// Slot kinds constrained to be >= 0: any of a, b
        #[arg(long, value_delimiter = ',')]
        nonneg: Vec<String>,
        /// Pin a free slot: INDEX=VALUE (index in free-slot order)
        #[arg(long)]
        fix: Vec<String>,
        #[arg(long, default_value_t = 100)]
        starts: usize,
    },
    /// Run the feasibility experiments, the commutator-free identity suite,
    /// the positive-scheme recovery and the stiff demo
    VerifyTheorems {
        /// Only these experiments (comma-separated names)
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Heat-equation stability run
    StiffDemo {
        scheme: String,
        #[arg(long)]
        grid: Option<usize>,
    },
}

/// Error carrying the exit status.
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl std::fmt::Display) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

pub struct Output {
    pub body: String,
    /// verdict mismatches, reported on stderr with exit status 1
    pub mismatches: Vec<String>,
}

fn load_scheme(arg: &str) -> Result<Scheme, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{arg}: {e}")))?;
        parse_scheme(&text).map_err(|e| Failure::usage(format!("{arg}: {e}")))
    } else {
        catalog_get(arg).map_err(|e| Failure::usage(format!("{arg}: no such file, and {e}")))
    }
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p).map_err(Failure::usage)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(f) = cli.format {
        config.format = match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Text => OutputFormat::Text,
        };
    }
    Ok(config)
}

fn parse_fix(arg: &str) -> Result<(usize, Coefficient), Failure> {
    let (i, v) = arg
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("--fix {arg:?}: expected INDEX=VALUE")))?;
    let i = i
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("--fix {arg:?}: bad index")))?;
    let v = Coefficient::parse(v.trim()).map_err(|e| Failure::usage(format!("--fix {arg:?}: {e}")))?;
    Ok((i, v))
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let config = load_config(cli)?;
    let fmt = config.format;
    match &cli.command {
        Command::ListSchemes => render::list_schemes(&config, fmt),
        Command::CheckOrder { scheme, model, max } => render::check_order(&load_scheme(scheme)?, *model, *max, &config, fmt),
        Command::EstimateOrder {
            scheme,
            model,
            zero_c,
            commutator_free,
            tau,
        } => {
            let mut s = load_scheme(scheme)?;
            if *zero_c {
                s = s.with_zero_c();
            }
            let taus = tau.clone().unwrap_or_else(|| config.tau_grid.clone());
            render::estimate_order(&s, *model, *commutator_free, &taus, &config, fmt)
        }
        Command::Search {
            pattern,
            order,
            model,
            placement,
            nonneg,
            fix,
            starts,
        } => {
            let placement = match placement {
                PlacementArg::Combined => Placement::Combined,
                PlacementArg::Separate => Placement::Separate,
            };
            let mut p = splitkit::schemes::Pattern::from_shape(pattern, placement).map_err(Failure::usage)?;
            let mut fixes = fix.iter().map(|f| parse_fix(f)).collect::<Result<Vec<_>, _>>()?;
            // pin from the highest index down so earlier indices stay valid
            fixes.sort_by(|a, b| b.0.cmp(&a.0));
            for (i, v) in fixes {
                if i >= p.free_count() {
                    return Err(Failure::usage(format!("--fix index {i} out of range")));
                }
                p = p.fix(i, v);
            }
            render::search(p, *order, *model, nonneg, *starts, &config, fmt)
        }
        Command::VerifyTheorems { only } => render::verify_theorems(only, &config, fmt),
        Command::StiffDemo { scheme, grid } => {
            let n = grid.unwrap_or(config.experiments.stiff_grid_size);
            render::stiff_demo(&load_scheme(scheme)?, n, fmt)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    let out = match result {
        Ok(out) => out,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &out.body).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(out.body.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if !out.mismatches.is_empty() {
        for m in &out.mismatches {
            eprintln!("mismatch: {m}");
        }
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
