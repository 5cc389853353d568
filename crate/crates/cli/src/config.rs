//! Flat key-value configuration shared by every subcommand.
//!
//! Keys are the long flag names (`nonce-bits`, `roll-poly`, ...). A
//! `--config` file supplies any subset of them in TOML; flags given on the
//! command line take precedence. Environment variables are never read.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("key `{key}` does not apply to `{subcommand}`")]
    Irrelevant { key: String, subcommand: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("`{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("cannot write report: {0}")]
    Output(std::io::Error),
}

impl ConfigError {
    pub fn invalid(key: &'static str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key,
            message: message.into(),
        }
    }
}

/// Every configuration key. Each subcommand accepts a subset.
#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Options {
    /// Flat TOML file holding any of the keys below.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Write the JSONL report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Master seed; per-trial seeds are derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of independent trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Farfalle block size.
    #[arg(long)]
    pub b: Option<u32>,
    /// Input size of the Simon or Feistel instance.
    #[arg(long)]
    pub n: Option<u32>,
    /// Tag length.
    #[arg(long)]
    pub t: Option<usize>,
    /// SAE alignment unit, in bits.
    #[arg(long)]
    pub ell: Option<usize>,
    /// SAE nonce length, in bits.
    #[arg(long)]
    pub nonce_bits: Option<usize>,
    /// `linear` or `table`.
    #[arg(long)]
    pub roll: Option<String>,
    /// Hex polynomial for a linear roll (degree `b`, constant term 1).
    #[arg(long)]
    pub roll_poly: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub blank_index_mode: Option<bool>,
    /// simon-demo oracle: `planted`, `even-mansour`, `lrw` or `feistel3`.
    #[arg(long)]
    pub kind: Option<String>,
    /// Dimension of the planted period space (random in 1..=2 if unset).
    #[arg(long)]
    pub dim: Option<usize>,
    /// farfalle-period: `all`, `c1a`, `c1b`, `c2i`, `c2ii`; forge-siv:
    /// `both`, `i`, `ii`.
    #[arg(long)]
    pub variant: Option<String>,
    /// Observed expansion block.
    #[arg(long)]
    pub output_block: Option<usize>,
    /// Comma-separated index pairs such as `0-1,0-2`.
    #[arg(long)]
    pub pairs: Option<String>,
    /// `both`, `real` or `random`.
    #[arg(long)]
    pub oracle: Option<String>,
    /// `lagrange` or `anf`.
    #[arg(long)]
    pub method: Option<String>,
    /// Univariate degree (lagrange) or algebraic degree bound (anf).
    #[arg(long)]
    pub degree: Option<u32>,
    /// Hex field modulus for the lagrange method.
    #[arg(long)]
    pub modulus: Option<String>,
    /// Print only the number of ANF samples and exit.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub count_only: Option<bool>,
    /// Rewrite the fixture file instead of checking it.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub regen: Option<bool>,
    /// Fixture file location.
    #[arg(long, value_name = "FILE")]
    pub path: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        Options {
            config: None,
            $($field: $top.$field.or($base.$field),)*
        }
    };
}

impl Options {
    /// Loads `--config` (if any) and lays the flags over it.
    pub fn resolve(self) -> Result<Options, ConfigError> {
        let Some(path) = self.config.clone() else {
            return Ok(Options { config: None, ..self });
        };
        let base = Self::from_file(&path)?;
        Ok(overlay!(
            base,
            self,
            output,
            seed,
            trials,
            b,
            n,
            t,
            ell,
            nonce_bits,
            roll,
            roll_poly,
            blank_index_mode,
            kind,
            dim,
            variant,
            output_block,
            pairs,
            oracle,
            method,
            degree,
            modulus,
            count_only,
            regen,
            path
        ))
    }

    pub fn from_file(path: &Path) -> Result<Options, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })
    }

    /// Keys that carry a value.
    pub fn present_keys(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => {
                map.into_iter().filter(|(_, v)| !v.is_null()).map(|(k, _)| k).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Rejects keys outside `allowed` (plus `output`).
    pub fn restrict(&self, subcommand: &str, allowed: &[&str]) -> Result<(), ConfigError> {
        for key in self.present_keys() {
            if key != "output" && !allowed.contains(&key.as_str()) {
                return Err(ConfigError::Irrelevant {
                    key,
                    subcommand: subcommand.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64, ConfigError> {
        self.seed.ok_or(ConfigError::Missing("seed"))
    }
}

pub fn parse_hex(key: &'static str, text: &str) -> Result<u64, ConfigError> {
    let digits = text.trim_start_matches("0x").trim_start_matches("0X");
    u64::from_str_radix(digits, 16).map_err(|e| ConfigError::invalid(key, format!("{text:?}: {e}")))
}

/// `"0-1,0-2"` into `[(0, 1), (0, 2)]`.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, usize)>, ConfigError> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (i, j) = p
                .trim()
                .split_once('-')
                .ok_or_else(|| ConfigError::invalid("pairs", format!("{p:?} is not i-j")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| ConfigError::invalid("pairs", format!("{p:?}: {e}")))
            };
            let (i, j) = (parse(i)?, parse(j)?);
            if i >= j || j > 32 {
                return Err(ConfigError::invalid("pairs", format!("{p:?} needs i < j <= 32")));
            }
            Ok((i, j))
        })
        .collect()
}

pub fn check_range<T: PartialOrd + std::fmt::Display + Copy>(
    key: &'static str,
    value: T,
    lo: T,
    hi: T,
) -> Result<T, ConfigError> {
    if value < lo || value > hi {
        Err(ConfigError::invalid(key, format!("{value} outside {lo}..={hi}")))
    } else {
        Ok(value)
    }
}
