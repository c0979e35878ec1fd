use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use mixcomp::cli::{error_json, run, Cli};
use mixcomp::Error;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_json("ParseError", e.to_string().trim()));
            return ExitCode::from(2);
        }
    };
    let out = match run(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            let code = match e {
                Error::Parse(_) => 2,
                _ if e.is_validation() => 3,
                _ => 1,
            };
            return ExitCode::from(code);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &out.text),
        None => {
            print!("{}", out.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("{}", error_json("IoError", &e.to_string()));
        return ExitCode::from(1);
    }
    if out.success {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
