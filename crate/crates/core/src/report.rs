//! Report plumbing: versioned JSON documents and plot-ready CSV tables.

use std::path::Path;

use serde::Serialize;

use crate::Result;

/// Wraps a payload with the schema marker so report consumers can pin their
/// parsers.
#[derive(Debug, Serialize)]
pub struct Document<T: Serialize> {
    pub schema: u32,
    pub experiment: String,
    #[serde(flatten)]
    pub payload: T,
}

pub fn write_json<T: Serialize>(path: &Path, experiment: &str, payload: T) -> Result<()> {
    let doc = Document {
        schema: 1,
        experiment: experiment.to_string(),
        payload,
    };
    std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}
