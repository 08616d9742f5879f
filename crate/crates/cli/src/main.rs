use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use lightcone_cli::{run, write_file, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let written = match &cli.out {
        Some(path) => write_file(path, &out.body).map_err(|e| e.to_string()),
        None => std::io::stdout()
            .lock()
            .write_all(out.body.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(out.exit_code)
}
