use std::path::PathBuf;
use std::process::ExitCode;

use bimodal_cli::{parse_config, run, CliError, Command, RunOptions, OUT_DIR_ENV};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Ground-state phase diagram of the undriven model.
    StaticPhase,
    /// Phase diagram of the effective driven model.
    DrivenPhase,
    /// Sideband orders and effective parameters along a sweep.
    EffectiveParams,
    /// Loschmidt echo between two frame-compatible Hamiltonians.
    Echo,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::StaticPhase => Command::StaticPhase,
            Cmd::DrivenPhase => Command::DrivenPhase,
            Cmd::EffectiveParams => Command::EffectiveParams,
            Cmd::Echo => Command::Echo,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bimodal", version, about = "Phase diagrams and echo dynamics of a driven three-level atom in a two-mode cavity")]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,

    /// JSON config; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory. Overrides BIMODAL_OUT_DIR and the config.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads. Overrides the config.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,

    /// Fail when a validity condition is violated.
    #[arg(long)]
    strict: bool,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let cfg = parse_config(&text)?;
    let resolved = cfg.resolve(cli.command.into())?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&cfg.output));
    let opts = RunOptions {
        out_dir,
        workers: cli.workers.map(|n| n as usize),
        strict: cli.strict,
        stop_after: None,
    };
    let s = run(&resolved, &opts)?;
    eprintln!(
        "{}: {} cells, {} computed{}, config {}",
        s.command,
        s.cells_total,
        s.cells_computed,
        if s.cache_hit { " (cached)" } else { "" },
        s.config_hash
    );
    let verb = if s.cache_hit { "up to date" } else { "wrote" };
    for f in &s.files {
        eprintln!("  {verb} {}", f.display());
    }
    if !s.deviations.is_empty() {
        eprintln!("  {} deviation(s) recorded in the manifest", s.deviations.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
