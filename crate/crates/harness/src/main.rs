use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geofix_harness::commands::{dispatch, Context};
use geofix_harness::config::ExperimentConfig;
use geofix_harness::EXIT_USAGE;

#[derive(Parser)]
#[command(name = "geofix", version, about = "Run and audit Tikhonov-Mann and modified Halpern experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV output.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress progress and timing lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample point tuples and check the W-hyperbolic and CAT(0) inequalities.
    Axioms(Common),
    /// Run both iterations and check that they coincide.
    Run(Common),
    /// Build every rate certificate and audit it on the runs.
    Certify(Common),
    /// Transfer a metastability rate across the link and audit it.
    Meta(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let (name, common) = match &cli.command {
        Command::Axioms(c) => ("axioms", c),
        Command::Run(c) => ("run", c),
        Command::Certify(c) => ("certify", c),
        Command::Meta(c) => ("meta", c),
    };
    let outcome = ExperimentConfig::load(&common.config).and_then(|mut cfg| {
        if let Some(seed) = common.seed {
            cfg.seed = seed;
        }
        let ctx = Context::new(&common.out, &common.config, common.quiet)?;
        dispatch(name, &cfg, &ctx)
    });
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
