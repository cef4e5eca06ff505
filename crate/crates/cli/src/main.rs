use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use conceptbase::ConceptBase;
use conceptbase_cli::http::{router, AppState};
use conceptbase_cli::{describe_approval, describe_ingest, describe_maintenance, describe_result, open_base, Stats};

#[derive(Parser)]
#[command(name = "conceptbase", version, about = "Concept-tree knowledge base")]
struct Cli {
    /// Base file to read and update.
    #[arg(
        long,
        global = true,
        env = "CONCEPTBASE_PATH",
        default_value = "conceptbase.cbase.json"
    )]
    base: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a plain-text file ("-" for stdin).
    Ingest { file: PathBuf },
    /// Run a query such as "[shirt:white] AND [trousers:?]".
    Query {
        expr: String,
        /// How many ranked solutions to print.
        #[arg(long, default_value_t = 3)]
        top: usize,
    },
    /// Approve one solution of a pending result.
    Approve { result_id: u64, solution_index: usize },
    /// Reject a pending result.
    Reject { result_id: u64 },
    /// Run one decay and merge cycle.
    Maintain,
    /// Print counts of trees, nodes and links.
    Stats,
    /// Check structural invariants; exits 1 on any error.
    Validate,
    /// Serve the JSON API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

/// Writes to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn read_input(file: &Path) -> anyhow::Result<String> {
    if file == Path::new("-") {
        return std::io::read_to_string(std::io::stdin()).context("reading stdin");
    }
    std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))
}

fn save(base: &ConceptBase, path: &Path) -> anyhow::Result<()> {
    base.save(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut base = open_base(&cli.base)?;
    match cli.command {
        Command::Ingest { file } => {
            let report = base.ingest_text(&read_input(&file)?)?;
            save(&base, &cli.base)?;
            out!("{}", describe_ingest(&report));
        }
        Command::Query { expr, top } => {
            let result = base.execute_query(&expr)?;
            save(&base, &cli.base)?;
            out!("{}", describe_result(&result, top).trim_end());
        }
        Command::Approve {
            result_id,
            solution_index,
        } => {
            let report = base.approve_result(result_id, solution_index)?;
            save(&base, &cli.base)?;
            out!("{}", describe_approval(&report, solution_index));
        }
        Command::Reject { result_id } => {
            base.reject_result(result_id)?;
            save(&base, &cli.base)?;
            out!("rejected result {result_id}");
        }
        Command::Maintain => {
            let report = base.maintain()?;
            save(&base, &cli.base)?;
            out!("{}", describe_maintenance(&report));
        }
        Command::Stats => out!("{}", Stats::of(&base)),
        Command::Validate => {
            let report = base.validate();
            for v in &report {
                let severity = if v.is_warning() { "warning" } else { "error" };
                out!("{severity}: {v}");
            }
            if report.iter().any(|v| !v.is_warning()) {
                return Ok(ExitCode::FAILURE);
            }
            if report.is_empty() {
                out!("ok");
            }
        }
        Command::Serve { port, host } => {
            let state = AppState::new(base, Some(cli.base.clone()));
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port)).await?;
                tracing::info!("listening on {}", listener.local_addr()?);
                axum::serve(listener, router(state)).await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
