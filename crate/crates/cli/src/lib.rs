//! Seeded experiment runner for the simonbench attacks.
//!
//! Every subcommand writes JSON Lines: one record per trial in trial order,
//! then a summary record. Exit status is 0 when every trial succeeds, 1 on
//! an attack failure and 2 on a configuration error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::Value;

pub mod config;
pub mod experiments;
pub mod fixtures;
pub mod report;
pub mod selftest;

pub use config::{ConfigError, Options};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_ATTACK_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "simonbench",
    version,
    about = "Period-finding attacks on toy Farfalle and Feistel instances"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simon's algorithm on planted, Even-Mansour, LRW or 3-round Feistel oracles.
    SimonDemo(Options),
    /// Periods of the single-string Farfalle constructions.
    FarfallePeriod(Options),
    /// Recovers the key of a Farfalle instance with a linear roll.
    ExtractKey(Options),
    /// Forges Farfalle-SAE tags.
    ForgeSae(Options),
    /// Forges Farfalle-SIV tags (variants i and ii).
    ForgeSiv(Options),
    /// Tells Farfalle-WBC apart from a random permutation.
    DistinguishWbc(Options),
    /// Recovers a Feistel round key by Lagrange or ANF interpolation.
    GfnExtract(Options),
    /// Runs the invariant suites.
    Selftest(Options),
    /// Checks (or with --regen rewrites) the golden report file.
    Fixtures(Options),
}

/// What a subcommand produced.
pub enum Outcome {
    Records { records: Vec<Value>, success: bool },
    Text(String),
}

/// Default location of the golden report file.
pub fn default_fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join("golden.jsonl")
}

fn records((records, successes): experiments::Records) -> Outcome {
    let total = records.len() - 1;
    Outcome::Records {
        records,
        success: successes == total,
    }
}

/// Resolves the options of `command` and runs it.
pub fn execute(command: Command) -> Result<Outcome, ConfigError> {
    Ok(match command {
        Command::SimonDemo(o) => records(experiments::simon_demo(&o.resolve()?)?),
        Command::FarfallePeriod(o) => records(experiments::farfalle_period(&o.resolve()?)?),
        Command::ExtractKey(o) => records(experiments::extract_key_cmd(&o.resolve()?)?),
        Command::ForgeSae(o) => records(experiments::forge_sae_cmd(&o.resolve()?)?),
        Command::ForgeSiv(o) => records(experiments::forge_siv_cmd(&o.resolve()?)?),
        Command::DistinguishWbc(o) => records(experiments::distinguish_wbc(&o.resolve()?)?),
        Command::GfnExtract(o) => match experiments::gfn_extract(&o.resolve()?)? {
            experiments::GfnOutput::Records(r) => records(r),
            experiments::GfnOutput::Count(c) => Outcome::Text(c.to_string()),
        },
        Command::Selftest(o) => {
            let o = o.resolve()?;
            o.restrict("selftest", &["seed"])?;
            let (records, success) = selftest::run(o.seed.unwrap_or(selftest::DEFAULT_SEED));
            Outcome::Records { records, success }
        }
        Command::Fixtures(o) => {
            let o = o.resolve()?;
            o.restrict("fixtures", &["regen", "path"])?;
            let path = o.path.clone().unwrap_or_else(default_fixture_path);
            let (records, success) = fixtures::run(&path, o.regen.unwrap_or(false))?;
            Outcome::Records { records, success }
        }
    })
}

fn output_path(command: &Command) -> Option<PathBuf> {
    match command {
        Command::SimonDemo(o)
        | Command::FarfallePeriod(o)
        | Command::ExtractKey(o)
        | Command::ForgeSae(o)
        | Command::ForgeSiv(o)
        | Command::DistinguishWbc(o)
        | Command::GfnExtract(o)
        | Command::Selftest(o)
        | Command::Fixtures(o) => o.clone().resolve().ok().and_then(|o| o.output),
    }
}

fn emit(outcome: &Outcome, target: Option<PathBuf>, stdout: &mut dyn Write) -> Result<(), ConfigError> {
    let mut file;
    let out: &mut dyn Write = match target {
        Some(path) => {
            file = BufWriter::new(File::create(path).map_err(ConfigError::Output)?);
            &mut file
        }
        None => stdout,
    };
    match outcome {
        Outcome::Records { records, .. } => report::write_records(out, records),
        Outcome::Text(text) => writeln!(out, "{text}").and_then(|_| out.flush()),
    }
    .map_err(ConfigError::Output)
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_CONFIG_ERROR
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_SUCCESS
            };
        }
    };
    let target = output_path(&cli.command);
    let result = execute(cli.command).and_then(|outcome| {
        emit(&outcome, target, stdout)?;
        Ok(outcome)
    });
    match result {
        Ok(Outcome::Records { success: false, .. }) => EXIT_ATTACK_FAILURE,
        Ok(_) => EXIT_SUCCESS,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CONFIG_ERROR
        }
    }
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
