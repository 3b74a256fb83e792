use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = nestfn_cli::run(std::env::args_os(), &mut std::io::stdin().lock());
    std::io::stdout()
        .write_all(&outcome.stdout)
        .expect("write stdout");
    eprint!("{}", outcome.stderr);
    ExitCode::from(outcome.exit_code as u8)
}
