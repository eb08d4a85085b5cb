//! `lecforge run-mini` — interpret a program in the bundled mini language.
//!
//! Exit codes: 0 on success, 1 on runtime error, 2 on parse error, 3 when
//! an explicit `--max-steps` budget runs out. Program input is read from
//! stdin as whitespace-separated integers; output is printed only when the
//! whole run succeeds, so a crashing program emits nothing.
//!
//! There is deliberately no default step limit: the injector's sandbox
//! enforces a wall-clock timeout instead, which classifies an injected
//! infinite loop the same way any other hung program is classified.

use std::path::PathBuf;

use clap::Args;
use lecforge_core::mini::{self, MiniError};

use crate::CliError;

#[derive(Debug, Args)]
pub struct RunMiniArgs {
    /// Program file in the mini language.
    #[arg(value_name = "FILE")]
    pub file: PathBuf,

    /// Parse only; exit 0 silently when the program is well-formed.
    #[arg(long)]
    pub check: bool,

    /// Abort with exit code 3 after this many executed statements.
    #[arg(long, value_name = "N")]
    pub max_steps: Option<u64>,
}

pub fn run(args: RunMiniArgs) -> Result<i32, CliError> {
    let source = std::fs::read_to_string(&args.file)
        .map_err(|e| CliError::Domain(format!("{}: {e}", args.file.display())))?;

    if args.check {
        return Ok(match mini::check(&source) {
            Ok(()) => 0,
            Err(err) => {
                eprintln!("{err}");
                2
            }
        });
    }

    let input = std::io::read_to_string(std::io::stdin())
        .map_err(|e| CliError::Domain(format!("stdin: {e}")))?;
    match mini::run(&source, &input, args.max_steps) {
        Ok(output) => {
            print!("{output}");
            Ok(0)
        }
        Err(err) => {
            eprintln!("{err}");
            Ok(match err {
                MiniError::Parse { .. } => 2,
                MiniError::Runtime { .. } => 1,
                MiniError::StepLimit => 3,
            })
        }
    }
}
