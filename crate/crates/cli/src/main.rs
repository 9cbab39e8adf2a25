use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(bohr_cli::run(std::env::args_os().collect()))
}
