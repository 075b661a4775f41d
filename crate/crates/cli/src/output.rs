use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats with 9 significant digits, fixed notation where it reads well.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

pub fn digest_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A CSV table plus the parameters that produced it.
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self { name, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Inputs of one run. Everything here goes into the CSV header, so no
/// clock readings.
pub struct RunInputs {
    pub subcommand: &'static str,
    pub spec_path: Option<PathBuf>,
    pub spec_digest: Option<String>,
    pub params: BTreeMap<&'static str, String>,
}

impl RunInputs {
    fn header(&self) -> String {
        let mut h = format!("# magdirac {TOOL_VERSION}\n# subcommand={}\n", self.subcommand);
        if let Some(p) = &self.spec_path {
            h += &format!("# spec={}\n", p.display());
        }
        if let Some(d) = &self.spec_digest {
            h += &format!("# spec_sha256={d}\n");
        }
        for (k, v) in &self.params {
            h += &format!("# {k}={v}\n");
        }
        h
    }
}

fn render(inputs: &RunInputs, table: &Table) -> Result<Vec<u8>> {
    let mut buf = inputs.header().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&table.columns)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

#[derive(Serialize)]
struct RunManifest<'a> {
    subcommand: &'a str,
    spec: Option<String>,
    spec_sha256: Option<&'a str>,
    parameters: &'a BTreeMap<&'static str, String>,
    tool_version: &'a str,
    wall_time_s: f64,
    outputs: Vec<OutputEntry>,
}

#[derive(Serialize)]
struct OutputEntry {
    file: String,
    sha256: String,
    rows: usize,
}

/// Writes the tables to `out` with a `manifest.json`, or to stdout.
pub fn emit(inputs: &RunInputs, tables: &[Table], out: Option<&Path>, wall_time_s: f64) -> Result<()> {
    let Some(dir) = out else {
        let mut stdout = std::io::stdout().lock();
        for t in tables {
            stdout.write_all(&render(inputs, t)?)?;
        }
        return Ok(());
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut outputs = Vec::new();
    for t in tables {
        let bytes = render(inputs, t)?;
        let file = format!("{}.csv", t.name);
        fs::write(dir.join(&file), &bytes).with_context(|| format!("writing {file}"))?;
        outputs.push(OutputEntry { file, sha256: digest_hex(&bytes), rows: t.rows.len() });
    }
    let manifest = RunManifest {
        subcommand: inputs.subcommand,
        spec: inputs.spec_path.as_ref().map(|p| p.display().to_string()),
        spec_sha256: inputs.spec_digest.as_deref(),
        parameters: &inputs.params,
        tool_version: TOOL_VERSION,
        wall_time_s,
        outputs,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(2f64.sqrt()), "1.41421356");
        assert_eq!(num(2.0), "2.00000000");
        assert_eq!(num(-123.456), "-123.456000");
        assert_eq!(num(1.5e-7), "1.50000000e-7");
        assert_eq!(num(0.0), "0");
    }
}
