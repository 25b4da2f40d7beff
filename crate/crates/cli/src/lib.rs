//! Library side of the `multidicke` command-line tool. `main` only parses
//! arguments and maps [`CliError`] to an exit code.

pub mod args;
pub mod commands;

use std::path::Path;

use multidicke::model::presets;
use multidicke::AtomicSystem;
use thiserror::Error;

pub use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, unreadable or invalid system file, I/O failures.
    #[error("{0}")]
    Config(String),
    /// Basis over budget or an eigensolver that did not converge.
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Compute(_) => 2,
        }
    }
}

impl From<multidicke::Error> for CliError {
    fn from(e: multidicke::Error) -> Self {
        match e {
            multidicke::Error::BudgetExceeded { .. } | multidicke::Error::NonConvergence { .. } => {
                CliError::Compute(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Read a TOML system file (`n`, `omega`, `atom_count`, `[[transitions]]`
/// with `j`, `k`, `Omega`, `mu`) or a built-in `preset:<name>`, unvalidated.
pub fn read_system(source: &str) -> Result<AtomicSystem, CliError> {
    Ok(match source.strip_prefix("preset:") {
        Some(name) => match name {
            "xi3" => presets::xi3(0.0, 0.0),
            "v3" => presets::v3(0.0, 0.0),
            "lambda3" => presets::lambda3(0.0, 0.0),
            "xi4" => presets::xi4(0.0, 0.0, 0.0),
            "two-level" => presets::two_level(0.0),
            _ => return Err(CliError::Config(format!("unknown preset '{name}'"))),
        },
        None => {
            let text = std::fs::read_to_string(Path::new(source))
                .map_err(|e| CliError::Config(format!("cannot read {source}: {e}")))?;
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{source}: {e}")))?
        }
    })
}

pub fn load_system(source: &str) -> Result<AtomicSystem, CliError> {
    let system = read_system(source)?;
    system.ensure_valid()?;
    Ok(system)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::PhaseDiagram(a) => commands::phase_diagram(&a),
        Command::Observables(a) => commands::observables(&a),
        Command::Exact(a) => commands::exact(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Validate(a) => commands::validate(&a.system).map(|report| print!("{report}")),
    }
}
