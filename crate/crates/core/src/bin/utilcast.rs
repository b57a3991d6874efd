use std::process::ExitCode;

fn main() -> ExitCode {
    utilcast::experiment::cli::main_with_args(std::env::args_os())
}
