//! Command-line front end: catalog, symmetry reports, spectra, stationary
//! solutions, figure data and the verification suite.

/// `println!` that exits quietly when stdout is closed (e.g. piped into `head`).
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout().lock(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
        }
    }};
}

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};
use commands::{FIG1, FIG2};

/// Parses `argv`, runs the subcommand and returns the process exit status:
/// 0 on success, 1 on failure (including a failed verification), 2 on usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = cli.command.to_config().and_then(|cfg| {
        if cli.command.shared().dump_config {
            outln!("{}", cfg.to_json().trim_end());
            return Ok(0);
        }
        match &cli.command {
            Command::Catalog(_) => commands::catalog_cmd(&cfg),
            Command::Symmetry(_) => commands::symmetry_cmd(&cfg),
            Command::Spectrum(_) => commands::spectrum_cmd(&cfg),
            Command::Solve(_) => commands::solve_cmd(&cfg),
            Command::Fig1(_) => commands::figure_cmd(&cfg, FIG1),
            Command::Fig2(_) => commands::figure_cmd(&cfg, FIG2),
            Command::Verify(_) => commands::verify_cmd(&cfg),
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
