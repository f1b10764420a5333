//! Command-line front end: parse maps and families, classify points, list
//! periodic points, run bifurcation scans, and verify the two-letter
//! coding, emitting deterministic JSON reports.
//!
//! Exit codes: 0 success, 2 parse error, 3 domain error, 4 unsupported
//! computation (e.g. a period factor too large to resolve).

mod commands;
mod expr;
mod points;

use clap::{Parser, Subcommand};
use commands::{CmdError, Ctx};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "berkdyn", version, about = "dynamics on the Berkovich projective line over p-adic fields")]
struct Cli {
    /// Working prime p (odd).
    #[arg(long, global = true)]
    prime: Option<u64>,
    /// Significant p-adic digits carried by scalars.
    #[arg(long, global = true, default_value_t = 60)]
    precision: u32,
    /// Adjoin sqrt(D) to the working field.
    #[arg(long, global = true)]
    ext: Option<i64>,
    /// Largest period examined by classify.
    #[arg(long, global = true, default_value_t = 4)]
    max_period: u32,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for scans.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a point: kind, image, periodicity, multiplier or local degree.
    Classify { map: String, point: String },
    /// List type I periodic points of period dividing N.
    Periodic { map: String, n: u32 },
    /// Scan parameter points of a family for bifurcations.
    Scan { family: String, points: PathBuf, n_max: u32 },
    /// Verify the shift conjugacy of the itinerary coding for z^2 + lambda.
    Cantor { lambda: String, length: u32 },
}

fn run(cli: &Cli) -> Result<(serde_json::Value, i32), CmdError> {
    let prime = cli.prime.ok_or(CmdError::Parse("--prime is required".into()))?;
    let cfg = match cli.ext {
        Some(d) => berkdyn_core::FieldConfig::with_ext(prime, cli.precision, d),
        None => berkdyn_core::FieldConfig::base(prime, cli.precision),
    }
    .map_err(|e| CmdError::Parse(e.to_string()))?;
    if let Some(j) = cli.jobs {
        // a second initialization (e.g. in tests) is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let ctx = Ctx { cfg, max_period: cli.max_period };
    match &cli.command {
        Cmd::Classify { map, point } => Ok((commands::cmd_classify(&ctx, map, point)?, 0)),
        Cmd::Periodic { map, n } => {
            let (v, major) = commands::cmd_periodic(&ctx, map, *n)?;
            Ok((v, if major { 4 } else { 0 }))
        }
        Cmd::Scan { family, points, n_max } => {
            let src = std::fs::read_to_string(points)
                .map_err(|e| CmdError::Parse(format!("cannot read points file: {e}")))?;
            Ok((commands::cmd_scan(&ctx, family, &src, *n_max)?, 0))
        }
        Cmd::Cantor { lambda, length } => Ok((commands::cmd_cantor(&ctx, lambda, *length)?, 0)),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((value, code)) => {
            let text = serde_json::to_string_pretty(&value).expect("serializable report");
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        std::process::exit(3);
                    }
                }
                None => println!("{text}"),
            }
            std::process::exit(code);
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}
