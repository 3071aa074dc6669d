use std::process::ExitCode;

fn main() -> ExitCode {
    let code = match weakdo_cli::parse_args(std::env::args_os()) {
        Ok(config) => weakdo_cli::dispatch(&config),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
