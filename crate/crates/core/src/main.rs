use std::process::ExitCode;

use clap::Parser;
use qfs_core::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    let (command, cmd_args) = args.command.split();
    let result = cli::configure_threads(std::env::var("QFS_THREADS").ok().as_deref())
        .and_then(|()| cli::resolve_args(command, cmd_args))
        .and_then(|config| cli::run(command, &config));
    match result {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qfs {command}: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
