use std::process::ExitCode;

fn main() -> ExitCode {
    rsmdp::cli::run(std::env::args_os())
}
