use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(diffquad::run::main_entry() as u8)
}
