use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use meaning_core::cli::{execute, exit_code, Cli};
use meaning_core::error::Error;

fn write_to(path: &std::path::Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<(), Error> {
    let out = execute(cli)?;
    if let (Some(path), Some(plot)) = (&cli.emit_plot_data, &out.plot) {
        write_to(path, plot)?;
    }
    match &cli.output {
        Some(path) => write_to(path, &out.report),
        None => std::io::stdout()
            .write_all(out.report.as_bytes())
            .map_err(|e| Error::Io(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("meaning: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
