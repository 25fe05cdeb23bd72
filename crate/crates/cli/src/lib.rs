//! `nbx` command-line front end.

pub mod args;
pub mod commands;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

pub use args::{parse_args, Command};
pub use commands::{execute, CliError, Success};
pub use report::{emit_report, Outcome, Report};

/// Caps the rayon pool at `NBX_THREADS` workers when set.
fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("NBX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("NBX_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Result of [`run`]: what to write, where, and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub report: Report,
    pub csv: Option<String>,
    pub exit_code: i32,
}

/// Runs a parsed command and builds its report. `argv` is echoed in the
/// report.
pub fn run(cmd: &Command, argv: Vec<String>) -> Execution {
    let timed = std::env::var_os("NBX_TIMINGS").is_some();
    match execute(cmd) {
        Ok(s) => Execution {
            report: Report {
                command: argv,
                outcome: Outcome::Results(s.results),
                timings_ms: timed.then_some(s.timings_ms),
            },
            csv: s.csv,
            exit_code: 0,
        },
        Err(e) => Execution {
            report: Report {
                command: argv,
                outcome: Outcome::Error {
                    kind: e.kind().into(),
                    message: e.to_string(),
                },
                timings_ms: None,
            },
            csv: None,
            exit_code: e.exit_code(),
        },
    }
}

fn report_path(cmd: &Command) -> Option<&std::path::Path> {
    use args::Action::*;
    let out = match &cmd.action {
        Gen(_) => return None,
        Walk(a) => &a.output,
        AccessTime(a) => &a.output,
        Bounds(a) => &a.output,
        Spectral(a) => &a.output,
        Classify(a) => &a.output,
        Train(a) => &a.output,
        Forward(a) => &a.output,
        Info(a) => &a.output,
    };
    out.out.as_deref()
}

/// Full process behavior minus `exit`: parse, run, write. Returns the exit
/// code.
pub fn main_with<I: IntoIterator<Item = OsString>>(argv: I) -> i32 {
    let argv: Vec<OsString> = argv.into_iter().collect();
    let cmd = match parse_args(argv.clone()) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 2;
    }
    let echo = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let exec = run(&cmd, echo);
    if let Outcome::Error { kind, message } = &exec.report.outcome {
        eprintln!("error: {kind}: {message}");
    }
    let bytes = match &exec.csv {
        Some(table) => table.clone().into_bytes(),
        None => emit_report(&exec.report, false),
    };
    let written = match report_path(&cmd) {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => exec.exit_code,
        Err(msg) => {
            eprintln!("error: IoError: {msg}");
            1
        }
    }
}
