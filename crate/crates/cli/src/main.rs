use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use krein_cli::{run, schema, CliError, Format, RunConfig};

/// Linear stability and Kreĭn signature analysis of plasma and fluid equilibria.
#[derive(Parser)]
#[command(name = "krein", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analysis described by a config file.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Output format, overriding the config.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Worker threads (also read from KREIN_THREADS).
        #[arg(long, env = "KREIN_THREADS")]
        threads: Option<usize>,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// Print the JSON schema of the config document.
    Schema,
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

/// Prints a line, ignoring a closed stdout (e.g. piped into `head`).
fn say(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            output,
            format,
            threads,
        } => {
            let mut cfg = load(&config)?;
            if let Some(o) = output {
                cfg.output.path = o;
            }
            if let Some(f) = format {
                cfg.output.format = f;
            }
            if let Some(n) = threads {
                if n == 0 {
                    return Err(CliError::Usage("thread count must be positive".into()));
                }
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Internal(e.to_string()))?;
            }
            // Everything is computed before the first file is written.
            let out = run(&cfg)?;
            let written = out.write(&cfg.output.path, cfg.output.format)?;
            let list: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
            say(&list.join("\n"));
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            cfg.validate()?;
            say("ok");
            Ok(())
        }
        Command::Schema => {
            let text = serde_json::to_string_pretty(&schema())
                .map_err(|e| CliError::Internal(e.to_string()))?;
            say(&text);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("krein: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
