use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let inv = twovar_cli::run(std::env::args_os());
    let _ = std::io::stderr().write_all(inv.stderr.as_bytes());
    let mut stdout = std::io::stdout().lock();
    if stdout.write_all(inv.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
        return ExitCode::from(4);
    }
    ExitCode::from(inv.code)
}
