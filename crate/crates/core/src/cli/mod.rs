//! Command-line front end.
//!
//! ```text
//! hjlab <subcommand> [--config FILE] [--out DIR] [key=value ...]
//! ```
//!
//! Assignments on the command line override the file. Every run writes its
//! CSV tables and a `manifest.txt` into the output directory (default
//! `hjlab-out/<subcommand>`).
//!
//! Exit status: 0 success, 1 verification failure, 2 usage error,
//! 3 numerical failure.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

pub use commands::{problem_on, Outcome};
pub use config::{apply, parse_config, Config, DriftKind, ExactKind, SelectionMode};
pub use output::{write_outputs, Cell, Manifest, Table};

use crate::error::{LabError, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const SUBCOMMANDS: [&str; 10] = [
    "solve-hj",
    "solve-fp",
    "seminorm",
    "verify-duality",
    "verify-oscillation",
    "ldiff",
    "blowup",
    "liouville-probe",
    "sweep-maxreg",
    "selftest",
];

pub fn usage() -> String {
    format!(
        "usage: hjlab <subcommand> [--config FILE] [--out DIR] [key=value ...]\n\
         subcommands: {}\n",
        SUBCOMMANDS.join(", ")
    )
}

/// Runs one subcommand on a resolved configuration.
pub fn execute(subcommand: &str, cfg: &Config) -> Result<Outcome> {
    match subcommand {
        "solve-hj" => commands::solve_hj_cmd(cfg),
        "solve-fp" => commands::solve_fp_cmd(cfg),
        "seminorm" => commands::seminorm_cmd(cfg),
        "verify-duality" => commands::verify_duality_cmd(cfg),
        "verify-oscillation" => commands::verify_oscillation_cmd(cfg),
        "ldiff" => commands::ldiff_cmd(cfg),
        "blowup" => commands::blowup_cmd(cfg),
        "liouville-probe" => commands::liouville_cmd(cfg),
        "sweep-maxreg" => commands::sweep_maxreg_cmd(cfg),
        "selftest" => commands::selftest_cmd(cfg),
        other => Err(LabError::Parse(format!("unknown subcommand {other:?}"))),
    }
}

/// Exit status for an error.
pub fn exit_code(err: &LabError) -> i32 {
    match err {
        e if e.is_numerical() => EXIT_NUMERICAL,
        LabError::Parse(_)
        | LabError::InvalidParameter(_)
        | LabError::InvalidGrid(_)
        | LabError::Io(_) => EXIT_USAGE,
        _ => EXIT_VERIFICATION,
    }
}

struct Invocation {
    subcommand: String,
    config: Config,
    out: PathBuf,
}

fn parse_args(args: &[String]) -> Result<Invocation> {
    let (sub, rest) = args
        .split_first()
        .ok_or_else(|| LabError::Parse("missing subcommand".into()))?;
    if !SUBCOMMANDS.contains(&sub.as_str()) {
        return Err(LabError::Parse(format!("unknown subcommand {sub:?}")));
    }
    let mut config = Config::default();
    let mut out = None;
    let mut assignments = Vec::new();
    let mut it = rest.iter();
    while let Some(a) = it.next() {
        match a.as_str() {
            "--config" => {
                let path = it
                    .next()
                    .ok_or_else(|| LabError::Parse("--config needs a file".into()))?;
                let text = std::fs::read_to_string(path)?;
                apply(&mut config, text.lines())?;
            }
            "--out" => {
                out = Some(PathBuf::from(it.next().ok_or_else(|| {
                    LabError::Parse("--out needs a directory".into())
                })?));
            }
            s if s.contains('=') => assignments.push(s.to_string()),
            s => return Err(LabError::Parse(format!("unexpected argument {s:?}"))),
        }
    }
    apply(&mut config, assignments.iter().map(String::as_str))?;
    config.validate()?;
    Ok(Invocation {
        out: out.unwrap_or_else(|| PathBuf::from("hjlab-out").join(sub)),
        subcommand: sub.clone(),
        config,
    })
}

/// Full command-line entry point; returns the exit status.
pub fn run(args: &[String], stdout: &mut impl Write, stderr: &mut impl Write) -> i32 {
    if matches!(
        args.first().map(String::as_str),
        Some("-h" | "--help" | "help")
    ) {
        let _ = write!(stdout, "{}", usage());
        return EXIT_OK;
    }
    let inv = match parse_args(args) {
        Ok(inv) => inv,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            let _ = write!(stderr, "{}", usage());
            return exit_code(&e);
        }
    };
    let start = Instant::now();
    let (outcome, status) = match execute(&inv.subcommand, &inv.config) {
        Ok(o) => {
            let code = if o.passed { EXIT_OK } else { EXIT_VERIFICATION };
            (o, code)
        }
        Err(e) => {
            let code = exit_code(&e);
            // machine-readable failure record
            let _ = writeln!(
                stderr,
                "failure: subcommand={} code={code} error={e}",
                inv.subcommand
            );
            let mut t = Table::new("failure", &inv.config, &["code", "error"]);
            t.push(vec![(code as u64).into(), e.to_string().into()]);
            (
                Outcome {
                    tables: vec![t],
                    passed: false,
                    notes: vec![format!("error={e}")],
                },
                code,
            )
        }
    };
    let manifest = Manifest {
        subcommand: inv.subcommand.clone(),
        config: inv.config.clone(),
        elapsed_ms: start.elapsed().as_millis(),
        outputs: outcome.tables.iter().map(Table::file_name).collect(),
        status: match status {
            EXIT_OK => "ok".into(),
            EXIT_VERIFICATION => "verification-failure".into(),
            _ => "numerical-failure".into(),
        },
        notes: outcome.notes.clone(),
    };
    match write_outputs(&inv.out, &outcome.tables, &manifest) {
        Ok(paths) => {
            for p in paths {
                let _ = writeln!(stdout, "wrote {}", p.display());
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    }
    for n in &outcome.notes {
        let _ = writeln!(stdout, "{n}");
    }
    let _ = writeln!(stdout, "status: {}", manifest.status);
    status
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn unknown_subcommand_is_a_usage_error() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(&args(&["frobnicate"]), &mut o, &mut e), EXIT_USAGE);
        assert!(String::from_utf8(e).unwrap().contains("usage:"));
    }

    #[test]
    fn bad_gamma_is_a_usage_error() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(
            run(&args(&["ldiff", "gamma=2"]), &mut o, &mut e),
            EXIT_USAGE
        );
        assert!(String::from_utf8(e)
            .unwrap()
            .contains("gamma must exceed 2"));
    }

    #[test]
    fn every_subcommand_dispatches() {
        for s in SUBCOMMANDS {
            let err = parse_args(&args(&[s, "nonsense"])).err().unwrap();
            assert!(err.to_string().contains("unexpected argument"));
        }
    }
}
