mod args;
mod output;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VALIDATION: u8 = 1;
    pub const NUMERICAL: u8 = 2;
    pub const PROPERTY: u8 = 3;
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let argv = match args::merge_config(raw) {
        Ok(argv) => argv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::VALIDATION } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run::execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
