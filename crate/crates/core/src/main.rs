use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rootflow::cli::{error_exit_code, execute, Command, RunSpec};

#[derive(Parser, Debug)]
#[command(name = "rootflow", version, about = "Simulate and check the arctan(Hu/u) flow on the circle")]
struct Args {
    /// One of solve, sweep-delta, smoothing, stability, roots-compare, check-operators.
    command: Command,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// `section.key=value`, repeatable; beats the config file.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let spec = RunSpec {
        command: args.command,
        config_path: args.config,
        output_dir: args.out,
        overrides: args.set,
        seed: args.seed,
    };
    match execute(&spec) {
        Ok(summary) => {
            print!("{}", summary.render());
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
