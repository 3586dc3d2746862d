use std::io::Write;
use std::process::ExitCode;

use cantor_waring_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        let _ = e.print();
        // clap uses 2 for usage errors; 2 means verification failure here
        std::process::exit(if e.use_stderr() { 1 } else { 0 });
    });
    let json_errors = cli.config.json_errors;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let res = run(cli, &mut out);
    let _ = out.flush();
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json_errors {
                eprintln!("{}", e.to_json());
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
