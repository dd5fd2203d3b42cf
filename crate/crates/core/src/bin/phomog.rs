use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use phomog::cli::{self, OutputFormat, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Validate,
    Ineq,
    Oned,
    Cell,
    Defect,
    Homog,
}

/// Numerical homogenization experiments for the p-Laplace equation.
///
/// Thread count follows RAYON_NUM_THREADS.
#[derive(Debug, Parser)]
#[command(name = "phomog", version)]
struct Args {
    command: Command,
    /// TOML run configuration.
    config: PathBuf,
    /// Directions for `cell` and `defect`, e.g. `--xi 1,0 --xi 0,1`.
    #[arg(long, value_delimiter = ';')]
    xi: Vec<String>,
    /// Overrides `output.path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `output.format`.
    #[arg(long)]
    format: Option<String>,
    /// Overrides `solver.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let sub = match args.command {
        Command::Validate => Subcommand::Validate,
        Command::Ineq => Subcommand::Ineq,
        Command::Oned => Subcommand::Oned,
        Command::Cell => Subcommand::Cell,
        Command::Defect => Subcommand::Defect,
        Command::Homog => Subcommand::Homog,
    };
    let bytes = match std::fs::read(&args.config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(cli::EXIT_ERROR as u8);
        }
    };
    let mut cfg = match cli::parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(cli::exit_code(&e) as u8);
        }
    };
    if let Some(out) = args.out {
        cfg.output.path = out;
    }
    match args.format.as_deref() {
        None => {}
        Some("csv") => cfg.output.format = OutputFormat::Csv,
        Some("json") => cfg.output.format = OutputFormat::Json,
        Some(f) => {
            eprintln!("error: unknown format {f:?}");
            return ExitCode::from(cli::EXIT_ERROR as u8);
        }
    }
    if let Some(s) = args.seed {
        cfg.solver.seed = s;
    }
    if !args.xi.is_empty() {
        let parsed: Result<Vec<Vec<f64>>, _> =
            args.xi.iter().map(|s| s.split(',').map(|t| t.trim().parse::<f64>()).collect()).collect();
        match parsed {
            Ok(v) if v.iter().all(|x| x.len() == cfg.coefficient.dim) => cfg.problem.xi = v,
            _ => {
                eprintln!("error: --xi needs {} comma-separated numbers per direction", cfg.coefficient.dim);
                return ExitCode::from(cli::EXIT_ERROR as u8);
            }
        }
    }
    match cli::run(sub, &cfg, &bytes) {
        Ok(o) => {
            if let Some(e) = &o.error {
                eprintln!("error: {e}");
            }
            for w in &o.manifest.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(p) = &o.data_path {
                println!("{}", p.display());
            }
            println!("{}", o.manifest_path.display());
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::EXIT_ERROR as u8)
        }
    }
}
