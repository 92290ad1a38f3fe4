use std::process::ExitCode;

fn main() -> ExitCode {
    qmfband::cli::run()
}
