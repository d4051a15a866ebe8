//! Command-line experiment harness: single solves, convergence figures,
//! parameter sweeps and problem generation.

pub mod args;
pub mod error;
pub mod figure;
pub mod output;
pub mod runs;
pub mod solve;
pub mod sweep;

use std::io::Write;

use args::{Cli, Command, GenProblemArgs};
use error::{CliError, CliResult};
use output::OutputSet;

pub fn gen_problem(args: &GenProblemArgs) -> CliResult<()> {
    let inst = runs::load_problem(&args.problem)?;
    let json = inst.to_json()?;
    match &args.out {
        Some(path) => {
            let mut out = OutputSet::new();
            out.write(path, json.as_bytes())?;
            out.commit();
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{json}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(CliError::io("stdout", e))
                }
                _ => {}
            }
        }
    }
    Ok(())
}

// Summary lines go to stdout; a closed pipe is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve(args) => {
            let report = solve::solve(&args)?;
            say!(
                "{} iterations, final relative error {:.3e}",
                report.iterations, report.rel_error
            );
            for f in report.files {
                say!("wrote {}", f.display());
            }
        }
        Command::Figure(args) => {
            let report = figure::figure(&args)?;
            for f in report.files {
                say!("wrote {} ({} rows)", f.display(), report.rows);
            }
        }
        Command::Sweep(args) => {
            let report = sweep::sweep(&args)?;
            say!("{} runs, {} rows", report.runs, report.rows);
            for f in report.files {
                say!("wrote {}", f.display());
            }
        }
        Command::GenProblem(args) => gen_problem(&args)?,
    }
    Ok(())
}
