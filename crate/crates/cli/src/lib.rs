//! The `candor` command line. Each subcommand is a thin adapter over
//! `candor-core`; [`run`] returns the process exit code (0 success, 1 for
//! errors from the pipeline, 2 for usage errors).

pub mod args;
pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::args::Cli;

pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::expand_argv(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match commands::run(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}
