use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fpme::harness;

#[derive(Parser)]
#[command(name = "fpme", version, about = "Fractional porous medium simulation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file.
    Run { config: PathBuf },
    /// Run a parameter sweep and fit decay exponents.
    Sweep { config: PathBuf },
    /// Run the built-in property suite.
    Check,
    /// Print the header of a snapshot file.
    Info { snapshot: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => match harness::cli_run(&config) {
            Ok(rep) => {
                println!(
                    "{}: {} records, {} steps -> {}",
                    rep.manifest.name,
                    rep.manifest.record_count,
                    rep.manifest.steps,
                    rep.output_dir.display()
                );
                for w in &rep.manifest.warnings {
                    eprintln!("warning: {w}");
                }
                if rep.has_warnings() {
                    2
                } else {
                    0
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Command::Sweep { config } => match harness::cli_sweep(&config) {
            Ok(rep) => {
                print!("{}", harness::sweep::summary_csv(&rep.summary));
                for r in &rep.runs {
                    if let Err(e) = &r.result {
                        eprintln!("run s={} mass={} failed: {e}", r.s, r.mass);
                    }
                }
                rep.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Command::Check => {
            let (text, code) = harness::cli_check();
            print!("{text}");
            code
        }
        Command::Info { snapshot } => match harness::info(&snapshot) {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
    };
    ExitCode::from(code as u8)
}
