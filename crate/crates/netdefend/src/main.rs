use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(netdefend::cli::run() as u8)
}
