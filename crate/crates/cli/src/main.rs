use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    if let Err(e) = moyal_lab::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let (out, err, code) = moyal_lab::run_args(std::env::args_os());
    std::io::stdout().write_all(out.as_bytes()).expect("stdout");
    std::io::stderr().write_all(err.as_bytes()).expect("stderr");
    ExitCode::from(code as u8)
}
