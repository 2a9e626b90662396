mod args;
mod commands;
mod output;
mod svg;

use std::io::Write;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use geostatic::flatdist::extracted_constants;

use args::Cli;
use output::{RunManifest, Verdict};

/// Bad invocation that clap cannot detect on its own.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const EXIT_SOLVER: u8 = 3;
const EXIT_USAGE: u8 = 4;

fn error_code(err: &anyhow::Error) -> u8 {
    use geostatic::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::HypothesisViolated { .. } | E::ScaleViolatesSeparation { .. } | E::HoleAtOrigin { .. } | E::NoFeasibleEpsilon { .. }) => {
            Verdict::GateFailed.exit_code()
        }
        Some(e) if e.is_solver_failure() => EXIT_SOLVER,
        _ => EXIT_USAGE,
    }
}

fn execute(cli: &Cli) -> Result<Verdict> {
    let name = cli.command.name();
    let common = cli.command.common();
    let report = commands::run(&cli.command)?;
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(output::to_json(&report.summary)?.as_bytes())?;
    if let Some(dir) = &common.out {
        let holes = commands::load_holes(common).ok();
        let (constants, source) = commands::resolve_constants(common, holes.as_ref())?;
        let mut outputs = output::write_files(dir, name, &report)?;
        outputs.push("manifest.json".into());
        let manifest = RunManifest {
            command: name,
            version: env!("CARGO_PKG_VERSION"),
            config: common.config_path().map(|p| p.display().to_string()),
            seed: common.seed,
            tolerances: report.tolerances.clone(),
            out: Some(dir.display().to_string()),
            constants_source: source,
            constants,
            extracted_constants: extracted_constants(&constants),
            parameters: report.parameters.clone(),
            outputs,
            verdict: report.verdict,
        };
        output::write_manifest(dir, &manifest)?;
    }
    Ok(report.verdict)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(v) => ExitCode::from(v.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
