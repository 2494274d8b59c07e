use std::process::ExitCode;

fn main() -> ExitCode {
    match stochastic_fd::cli::run(std::env::args_os()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("stochfd: {e}");
            ExitCode::FAILURE
        }
    }
}
