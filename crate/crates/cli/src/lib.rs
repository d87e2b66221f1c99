//! Command-line front end for the cubic Curie-Weiss experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use args::{Cli, Command, Format};
use config::{resolve, ConfigFile};
pub use error::CliError;

/// Runs one invocation and writes its output.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(w) = cli.workers.or(file.globals.workers) {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        // fails only if a pool already exists, which keeps the earlier setting
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let format = cli.format.or(file.globals.format).unwrap_or(Format::Csv);
    let name = cli.command.name();
    let (effective, report) = match cli.command {
        Command::Phase(a) => commands::phase(resolve(&a, &file, name)?),
        Command::Gamma(a) => commands::gamma(resolve(&a, &file, name)?),
        Command::Law(a) => commands::law(resolve(&a, &file, name)?),
        Command::Be(a) => commands::be(resolve(&a, &file, name)?),
        Command::Threshold(a) => commands::threshold(resolve(&a, &file, name)?),
        Command::Concentration(a) => commands::concentration(resolve(&a, &file, name)?),
        Command::Cramer(a) => commands::cramer(resolve(&a, &file, name)?),
        Command::Mdp(a) => commands::mdp(resolve(&a, &file, name)?),
        Command::Stein(a) => commands::stein(resolve(&a, &file, name)?),
        Command::Sample(a) => commands::sample(resolve(&a, &file, name)?),
    }?;
    let text = output::render(format, name, &effective, &report);
    let out_dir = cli.out_dir.or_else(|| file.globals.out_dir.map(Into::into));
    let dest = output::destination(cli.out, out_dir, name, format);
    output::emit(&text, dest.as_ref())
}
