//! `dyadic`: command-line front end for the dyadic tiling library.

mod commands;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use commands::Cli;

/// Exit status for a certificate that was not established (or a transcript
/// that does not re-verify).
pub const EXIT_NOT_ESTABLISHED: u8 = 2;
pub const EXIT_USAGE: u8 = 1;

fn main() -> ExitCode {
    let start = Instant::now();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let subcommand = cli.command.name();
    let seed = cli.command.seed();
    let code = match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    };
    let manifest = serde_json::json!({
        "manifest": {
            "subcommand": subcommand,
            "args": &argv[1..],
            "seed": seed,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": start.elapsed().as_secs_f64(),
            "exit": code,
        }
    });
    eprintln!("{manifest}");
    ExitCode::from(code)
}
