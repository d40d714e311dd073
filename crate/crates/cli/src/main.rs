use std::process::ExitCode;

fn main() -> ExitCode {
    match sweepcoal_cli::run_from_args(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ sweepcoal_cli::Failure::Usage(_)) => {
            eprint!("{}", e);
            ExitCode::from(e.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
