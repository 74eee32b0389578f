use aclab_lab::{run, Kind, Overrides, RunConfig};
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Run one Allen–Cahn experiment and write its ledgers and manifest.
#[derive(Debug, Parser)]
#[command(name = "aclab", version)]
struct Cli {
    /// profiles, dirichlet, balanced-energy, expansion-order, variation-check,
    /// spectrum, mountain-pass, strong-minmax, descend or diagnose
    kind: Kind,
    /// Flat `key = value` file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated, strictly descending
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Grid columns per side
    #[arg(long)]
    res: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $ACLAB_OUT/<kind>-<hash>)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(p) => match RunConfig::load(cli.kind, p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("aclab: {e}");
                return ExitCode::from(2);
            }
        },
        None => RunConfig::new(cli.kind),
    };
    Overrides { eps: cli.eps, res: cli.res, seed: cli.seed, out: cli.out }.apply(&mut cfg);
    match run(&cfg) {
        Ok(m) => {
            for c in &m.checks {
                println!("{} {} {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            println!("output {}", cfg.output_dir().display());
            if m.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("aclab: {e}");
            ExitCode::from(2)
        }
    }
}
