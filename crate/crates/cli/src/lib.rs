//! The `hrw` command line. [`run`] parses arguments, dispatches to a
//! subcommand and writes either aligned text or a JSON document.

mod args;
mod cli;
mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use cli::{Cli, Command, Format};
pub use output::Failure;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MATH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Runs one invocation; `argv[0]` is the program name. Returns the exit
/// code. Errors are a single `error[<Name>]: <message>` line on `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            return report(&Failure::usage("UsageError", clap_message(&e)), err);
        }
    };
    match commands::dispatch(&cli) {
        Ok(o) => {
            let text = match cli.global.format {
                Format::Text => o.text,
                Format::Json => hrw_core::report::to_json_string(&o.json),
            };
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_MATH;
            }
            EXIT_OK
        }
        Err(f) => report(&f, err),
    }
}

fn report(f: &Failure, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "{}", f.line());
    if f.usage {
        EXIT_USAGE
    } else {
        EXIT_MATH
    }
}

/// Clap's first error line without its `error: ` prefix.
fn clap_message(e: &clap::Error) -> String {
    let rendered = e.render().to_string();
    let first = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
    first.trim_start_matches("error: ").trim().to_string()
}
