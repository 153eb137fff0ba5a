use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vqalab_cli::{list_experiments, run, OutputFormat, RunOptions};

#[derive(Parser)]
#[command(name = "vqalab", version, about = "Run verification-of-quantum-advantage experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the machine's parallelism.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Print every experiment kind with its parameters.
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::List => {
            print!("{}", list_experiments());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            seed,
            workers,
            out,
            format,
        } => {
            let opts = RunOptions {
                seed,
                workers,
                out_dir: out,
                format,
            };
            match run(&config, &opts) {
                Ok(outcome) => {
                    for (k, v) in &outcome.output.summary {
                        println!("{k} = {v}");
                    }
                    println!("wrote {} (config {})", outcome.out_dir.display(), outcome.config_hash);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
