use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hivelab_cli::{run, Command, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "hivelab", version, about = "Seeded experiments on random hives and lozenge tilings")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true)]
    trials: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Mean and variance heatmaps of the normalized hive value.
    SampleHive,
    /// Surface tension estimates over tilts and half-widths.
    Tension,
    /// Maximize the variational functional and compare with sampled hives.
    Solve,
    /// Dyadic good/bad decomposition of a Lipschitz function.
    Czd,
    /// Run the property suite; exits 3 on any violation.
    Check,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::SampleHive => Command::SampleHive,
        Cmd::Tension => Command::Tension,
        Cmd::Solve => Command::Solve,
        Cmd::Czd => Command::Czd,
        Cmd::Check => Command::Check,
    };
    let ov = Overrides { seed: cli.seed, out: cli.out, threads: cli.threads, trials: cli.trials };
    let result = RunConfig::load(cli.config.as_deref(), &ov).and_then(|cfg| run(cmd, &cfg));
    match result {
        Ok(m) => {
            println!("{}", serde_json::to_string_pretty(&m["record"]["summary"]).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hivelab {}: {e}", cmd.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
