//! Command-line front end for the `qkdnoise` library.
//!
//! Every subcommand writes a CSV table: `#`-prefixed lines echoing the
//! version and the resolved parameters, one header row, then data rows
//! whose last column is a status token (`ok`, `none`, `cv_secure`, `fail`).

mod commands;
pub mod params;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;

use clap::{CommandFactory, Parser};

use crate::commands::Table;
use crate::params::{Cli, Params};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(#[from] qkdnoise::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Numeric(_) | CliError::Io(_) => 2,
        }
    }
}

/// Runs the CLI against the process stdout and stderr, returning the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            );
            let text = e.render().to_string();
            if informational && e.kind() != ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = write!(out, "{text}");
                return 0;
            }
            let _ = write!(err, "{text}");
            return 1;
        }
    };
    match execute(&cli, out) {
        Ok(0) => 0,
        Ok(failures) => {
            let _ = writeln!(err, "error: {failures} row(s) failed");
            2
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.exit_code() == 1 {
                let _ = writeln!(err, "\n{}", Cli::command().render_usage());
            }
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<usize, CliError> {
    let params = Params::resolve(&cli.command)?;
    let table = commands::execute(&params)?;
    let csv = render(&params, &table);
    match &params.out {
        Some(path) => std::fs::write(path, csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(table.failures)
}

fn render(params: &Params, table: &Table) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# qkdnoise {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# command = {}", params.command);
    for (key, value) in params.echo() {
        let _ = writeln!(s, "# {key} = {value}");
    }
    let _ = writeln!(s, "{}", table.header.join(","));
    for row in &table.rows {
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}
