//! Golden reports: small fixed runs of every attack subcommand, stored
//! without timing fields.

use std::path::Path;

use serde_json::{json, Value};

use crate::report::strip_timing;
use crate::{execute, Cli, ConfigError, Outcome};
use clap::Parser;

/// Command lines whose reports are pinned.
pub const FIXTURES: &[&str] = &[
    "simon-demo --seed 1 --trials 2 --n 8",
    "simon-demo --seed 1 --trials 2 --kind feistel3 --n 6",
    "simon-demo --seed 1 --trials 2 --kind even-mansour --n 8",
    "farfalle-period --seed 2 --trials 2",
    "extract-key --seed 3 --trials 2",
    "forge-sae --seed 4 --trials 2",
    "forge-siv --seed 5 --trials 2",
    "distinguish-wbc --seed 6 --trials 2",
    "gfn-extract --seed 7 --trials 2 --method lagrange",
    "gfn-extract --seed 8 --trials 2 --method anf",
];

/// The fixture file contents, one stripped record per line.
pub fn generate() -> Result<Vec<String>, ConfigError> {
    let mut lines = Vec::new();
    for fixture in FIXTURES {
        let args = std::iter::once("simonbench").chain(fixture.split_whitespace());
        let cli = Cli::try_parse_from(args).expect("fixture command lines parse");
        let Outcome::Records { records, .. } = execute(cli.command)? else {
            unreachable!("fixtures produce reports");
        };
        for r in records {
            let mut r = r;
            r["fixture"] = json!(fixture);
            lines.push(strip_timing(&r.to_string()));
        }
    }
    Ok(lines)
}

/// Rewrites or checks the fixture file.
pub fn run(path: &Path, regen: bool) -> Result<(Vec<Value>, bool), ConfigError> {
    let lines = generate()?;
    if regen {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(ConfigError::Output)?;
        }
        std::fs::write(path, lines.join("\n") + "\n").map_err(ConfigError::Output)?;
        let summary = json!({
            "record": "summary",
            "subcommand": "fixtures",
            "action": "regenerated",
            "path": path.display().to_string(),
            "records": lines.len(),
            "outcome": "success",
        });
        return Ok((vec![summary], true));
    }
    let stored = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let stored: Vec<&str> = stored.lines().collect();
    let mismatches: Vec<usize> = (0..lines.len().max(stored.len()))
        .filter(|&i| lines.get(i).map(String::as_str) != stored.get(i).copied())
        .collect();
    let ok = mismatches.is_empty();
    let summary = json!({
        "record": "summary",
        "subcommand": "fixtures",
        "action": "checked",
        "path": path.display().to_string(),
        "records": lines.len(),
        "mismatched_lines": mismatches.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "outcome": if ok { "success" } else { "failure" },
    });
    Ok((vec![summary], ok))
}
