use std::process::ExitCode;

use mabfuzz_runner::{parse_config, run_experiment, CliError};

fn main() -> ExitCode {
    let result = parse_config(std::env::args_os()).and_then(|spec| {
        let outcome = run_experiment(&spec)?;
        print!("{}", outcome.table);
        println!("results in {}", spec.out.display());
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Help(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
