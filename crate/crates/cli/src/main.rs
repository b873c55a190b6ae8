use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(e) = classicality_cli::init_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    ExitCode::from(classicality_cli::main_with(std::env::args_os()) as u8)
}
