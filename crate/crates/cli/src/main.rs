use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use tg_cli::{run, RunConfig, EXIT_INPUT};

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors.
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match run(&cfg, &mut out) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("tg: {f}");
            f.code
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
