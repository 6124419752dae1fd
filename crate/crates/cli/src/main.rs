use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use uml_cli::{run, Cli, Config};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Config::from_env().and_then(|cfg| {
        let stdout = io::stdout();
        let mut out = stdout.lock();
        let r = run(cli, &cfg, &mut out);
        out.flush().ok();
        r
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
