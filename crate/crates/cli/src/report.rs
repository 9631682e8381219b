//! Report assembly and output plumbing.
//!
//! Every run produces one JSON report whose header makes the output
//! reproducible on its own: tool name and version, schema version, mode,
//! the effective seed, and a full echo of the configuration. Headline
//! scalars carry a sibling `*_text` field rendered at 17 significant
//! digits, enough to round-trip an f64 exactly, so regression diffs stay
//! meaningful even when a JSON consumer re-rounds the native number.
//!
//! `--out BASE` writes `BASE.json` plus mode-specific siblings
//! (`BASE.outcomes.jsonl`, `BASE.draws.csv`, `BASE.sweep.csv`). A trailing
//! `.json` on BASE is treated as the stem so `--out run.json` does not
//! produce `run.json.json`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{Mode, RunConfig};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits; the shortest form that always round-trips.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex_entry(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn assemble(mode: Mode, seed: Option<u64>, config: &RunConfig, result: Value) -> Value {
    json!({
        "tool": "bosonq",
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
        "mode": mode.name(),
        "seed": seed,
        "config": serde_json::to_value(config).unwrap_or(Value::Null),
        "result": result,
    })
}

/// Where the run's files go. `None` base means stdout only.
pub struct Emitter {
    stem: Option<PathBuf>,
}

impl Emitter {
    pub fn new(base: Option<&Path>) -> Self {
        let stem = base.map(|p| {
            match p.extension().and_then(|e| e.to_str()) {
                Some("json") => p.with_extension(""),
                _ => p.to_path_buf(),
            }
        });
        Emitter { stem }
    }

    fn path(&self, suffix: &str) -> Option<PathBuf> {
        self.stem.as_ref().map(|stem| {
            let mut s = stem.clone().into_os_string();
            s.push(suffix);
            PathBuf::from(s)
        })
    }

    /// Stream a side file through the given writer closure. Returns the
    /// path written, or `None` when no output base was requested.
    pub fn write_stream(
        &self,
        suffix: &str,
        f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
    ) -> Result<Option<PathBuf>, CliError> {
        let Some(path) = self.path(suffix) else {
            return Ok(None);
        };
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)
                    .map_err(|e| CliError::config(format!("{}: {e}", parent.display())))?;
            }
        }
        let file = fs::File::create(&path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let mut writer = BufWriter::new(file);
        f(&mut writer).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        writer
            .flush()
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Ok(Some(path))
    }

    /// Write the main report and, unless `quiet`, print it to stdout.
    pub fn finish(&self, report: &Value, quiet: bool) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(report)
            .map_err(|e| CliError::config(format!("serializing report: {e}")))?;
        self.write_stream(".json", |w| writeln!(w, "{text}"))?;
        if !quiet {
            println!("{text}");
        }
        Ok(())
    }
}
