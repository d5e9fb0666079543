use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::error;
use weylstrip_cli::{run_scenario, CliError, Format, Mode, ScenarioConfig};

/// Weyl-function scenarios for the matrix defocusing NLS equation.
#[derive(Debug, Parser)]
#[command(name = "weylstrip", version)]
struct Args {
    mode: Mode,
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Report destination; defaults to output.path from the config, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; 0 picks the number of CPUs.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(&args.config)?;
    let report = run_scenario(args.mode, &cfg, args.workers)?;
    let format = args.format.or(cfg.output.format).unwrap_or(Format::Json);
    let out = args.out.clone().or_else(|| cfg.output.path.as_deref().map(|p| cfg.resolve(p)));
    let write_err = |path: String| move |source: io::Error| CliError::Output { path, source };
    match out {
        Some(path) => {
            let name = path.display().to_string();
            let file = File::create(&path).map_err(write_err(name.clone()))?;
            let mut w = BufWriter::new(file);
            report.write(&mut w, format).map_err(write_err(name.clone()))?;
            w.flush().map_err(write_err(name))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            report.write(&mut lock, format).map_err(write_err("stdout".into()))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WEYLSTRIP_LOG", "warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("weylstrip: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
