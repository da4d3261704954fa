use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rsf_core::cli::{
    cmd_contract_study, cmd_run, cmd_verify, parse_config, preset, CliError, CommandError, Suite, EXIT_FAILURE, EXIT_IO,
    PRESET_NAMES,
};

/// Viscoelastic bilateral contact with rate-and-state friction.
#[derive(Parser)]
#[command(name = "rsf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coupled simulation and write trajectories and reports.
    Run { config: PathBuf },
    /// Run verification suites and print an aggregate JSON report.
    Verify {
        config: PathBuf,
        #[arg(long, default_value = "all")]
        suite: Suite,
    },
    /// Tabulate contraction ratios against the theoretical constant.
    ContractStudy {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        windows: Vec<f64>,
    },
    /// Print a preset scenario configuration.
    Preset {
        name: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn configure_threads() {
    let threads = std::env::var("RSF_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0).unwrap_or(1);
    // Only fails if a pool exists already, which cannot happen here.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
}

fn fail(err: &CommandError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match cli.command {
        Command::Run { config } => {
            let result = parse_config(&config).map_err(CommandError::from).and_then(|cfg| cmd_run(&cfg));
            match result {
                Ok(out) => {
                    println!("{}", serde_json::to_string_pretty(&out).expect("paths serialize"));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Verify { config, suite } => {
            let result = parse_config(&config).map_err(CommandError::from).and_then(|cfg| cmd_verify(&cfg, suite));
            match result {
                Ok(report) => {
                    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
                    for c in report.checks.iter().filter(|c| !c.passed) {
                        eprintln!("FAILED {}/{}", c.suite, c.name);
                    }
                    if report.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_FAILURE as u8)
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Command::ContractStudy { config, windows } => {
            let result = parse_config(&config).map_err(CommandError::from).and_then(|cfg| cmd_contract_study(&cfg, &windows));
            match result {
                Ok(rows) => {
                    println!("window_length\tsteps\tmax_ratio\ttheoretical_L_RS\titerations\tconverged");
                    for r in rows {
                        println!(
                            "{}\t{}\t{:e}\t{:e}\t{}\t{}",
                            r.window_length, r.steps, r.max_ratio, r.theoretical_l_rs, r.iterations, r.converged
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Preset { name, output } => {
            let Some(cfg) = preset(&name) else {
                eprintln!("error: unknown preset `{name}` (available: {})", PRESET_NAMES.join(", "));
                return ExitCode::from(EXIT_FAILURE as u8);
            };
            let text = cfg.to_json();
            match output {
                None => {
                    // A closed pipe (e.g. `| head`) is not an error worth reporting.
                    let _ = writeln!(std::io::stdout(), "{text}");
                    ExitCode::SUCCESS
                }
                Some(path) => match std::fs::write(&path, text + "\n") {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => {
                        eprintln!("error: {}", CliError::Io(format!("{}: {e}", path.display())));
                        ExitCode::from(EXIT_IO as u8)
                    }
                },
            }
        }
    }
}
