mod cli;
mod run;
mod serve;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match cli::Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run::run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Errors raised by the pipeline on bad input are the caller's to fix;
            // anything else is a fault in the tool or its environment.
            let user = e.downcast_ref::<aha_core::Error>().is_some_and(aha_core::Error::is_user_error)
                || e.downcast_ref::<serde_json::Error>().is_some();
            ExitCode::from(if user { 1 } else { 2 })
        }
    }
}
