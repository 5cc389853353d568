//! JSON Lines reports: one record per trial in trial order, then a summary.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use simonbench::derive_seed;

/// The only field allowed to differ between identical runs.
pub const TIMING_FIELD: &str = "elapsed_ms";

/// Outcome of one trial plus its attack-specific fields.
#[derive(Debug, Clone, Default)]
pub struct Trial {
    pub success: bool,
    pub fields: Map<String, Value>,
}

impl Trial {
    pub fn new(success: bool) -> Self {
        Trial {
            success,
            fields: Map::new(),
        }
    }

    pub fn failure(error: impl std::fmt::Display) -> Self {
        Trial::new(false).with("error", error.to_string())
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.set(key, value);
        self
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.fields.insert(key.to_string(), v);
    }
}

/// Hex of `v`.
pub fn hex(v: u64) -> String {
    format!("{v:x}")
}

pub fn hex_all(vs: &[u64]) -> Vec<String> {
    vs.iter().map(|&v| hex(v)).collect()
}

/// First 16 hex digits of SHA-256 over the canonical JSON config.
pub fn config_hash(subcommand: &str, config: &Value) -> String {
    let canonical = json!({ "subcommand": subcommand, "config": config }).to_string();
    let digest = Sha256::digest(canonical.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// A fully resolved experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub subcommand: &'static str,
    pub master_seed: u64,
    pub trials: usize,
    pub config: Value,
}

/// Runs trials in parallel with seeds `derive_seed(master, i)` and returns
/// the records in trial order and the number of successes.
pub fn run_trials<F>(exp: &Experiment, trial: F) -> (Vec<Value>, usize)
where
    F: Fn(u64) -> Trial + Sync,
{
    let start = Instant::now();
    let hash = config_hash(exp.subcommand, &exp.config);
    let mut records: Vec<Value> = (0..exp.trials as u64)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(exp.master_seed, i);
            let t0 = Instant::now();
            let result = trial(seed);
            let mut rec = result.fields;
            rec.insert("record".into(), json!("trial"));
            rec.insert("subcommand".into(), json!(exp.subcommand));
            rec.insert("config_hash".into(), json!(hash));
            rec.insert("trial".into(), json!(i));
            rec.insert("seed".into(), json!(seed));
            rec.insert("outcome".into(), json!(outcome(result.success)));
            rec.insert(TIMING_FIELD.into(), json!(t0.elapsed().as_millis() as u64));
            Value::Object(rec)
        })
        .collect();
    let successes = records.iter().filter(|r| r["outcome"] == "success").count();
    records.push(json!({
        "record": "summary",
        "subcommand": exp.subcommand,
        "config_hash": hash,
        "config": exp.config,
        "master_seed": exp.master_seed,
        "trials": exp.trials,
        "successes": successes,
        "outcome": outcome(successes == exp.trials),
        TIMING_FIELD: start.elapsed().as_millis() as u64,
    }));
    (records, successes)
}

fn outcome(success: bool) -> &'static str {
    if success {
        "success"
    } else {
        "failure"
    }
}

pub fn write_records(out: &mut dyn Write, records: &[Value]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{r}")?;
    }
    out.flush()
}

/// Drops the timing field so reports can be compared byte for byte.
pub fn strip_timing(line: &str) -> String {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(mut map)) => {
            map.remove(TIMING_FIELD);
            Value::Object(map).to_string()
        }
        _ => line.to_string(),
    }
}
