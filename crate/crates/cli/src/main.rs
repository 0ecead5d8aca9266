use clap::Parser;

use tone_audit_cli::commands;
use tone_audit_cli::config::Cli;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version land on stdout and exit 0; usage errors are
            // validation failures.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = commands::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
