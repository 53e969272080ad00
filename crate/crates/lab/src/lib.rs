//! Configuration-driven experiment sweeps over the bilayer energy laboratory, written
//! as CSV tables.

pub mod check;
pub mod config;
mod error;
pub mod experiments;

use std::fs::File;
use std::io::Write;
use std::path::Path;

pub use error::{Error, Result};

use config::{ExperimentConfig, ExperimentKind};
use experiments::Table;

/// Loads `config`, checks that it describes `kind`, runs it and writes the CSV to `out`.
///
/// The CSV is written even when numerical invariants fail; those are then returned as
/// [`Error::Invariant`] together with nothing else.
pub fn run_experiment(kind: ExperimentKind, config: &Path, out: &Path) -> Result<Vec<String>> {
    let cfg = ExperimentConfig::load(config)?;
    if cfg.kind() != kind {
        return Err(Error::Config(format!(
            "{} describes a `{}` experiment, not `{}`",
            config.display(),
            cfg.kind().name(),
            kind.name()
        )));
    }
    let base = config.parent().unwrap_or(Path::new("."));
    let table: Box<dyn Table> = match &cfg {
        ExperimentConfig::Convergence(c) => Box::new(experiments::convergence::run(c, base)?),
        ExperimentConfig::GridValidation(c) => Box::new(experiments::grid::run(c)?),
        ExperimentConfig::Scaling(c) => Box::new(experiments::scaling::run(c)?),
        ExperimentConfig::RingSweep(c) => Box::new(experiments::ring::run(c)?),
    };
    let output_error = |source: csv::Error| Error::Output {
        path: out.to_path_buf(),
        source,
    };
    let file = File::create(out).map_err(|e| output_error(e.into()))?;
    let sink: Box<dyn Write> = Box::new(file);
    let mut writer = csv::Writer::from_writer(sink);
    table.write_csv(&mut writer).map_err(output_error)?;
    if table.violations().is_empty() {
        Ok(table.summary().to_vec())
    } else {
        Err(Error::Invariant(table.violations().to_vec()))
    }
}
