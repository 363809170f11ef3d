use std::process::ExitCode;

fn main() -> ExitCode {
    halbach_cli::main_with(std::env::args_os())
}
