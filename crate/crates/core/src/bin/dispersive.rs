use std::process::ExitCode;

fn main() -> ExitCode {
    dispersive_core::cli::main()
}
