//! Self-describing output files: every emitted file begins with a metadata
//! header recording the tool version, the full configuration, and the seed,
//! so any output is regenerable from its own header. CSV files carry the
//! header as a `#`-prefixed first line; JSON documents carry it as a
//! `_meta` field; JSON-Lines files carry it as a first line holding only a
//! `_meta` object.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

/// Crate version stamped into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileMeta {
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    /// Wall-clock write time; suppressed in reproducible mode so reruns are
    /// byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
}

impl FileMeta {
    pub fn new(
        command: &str,
        config: &impl Serialize,
        seed: Option<u64>,
        reproducible: bool,
    ) -> Self {
        let timestamp_unix = if reproducible {
            None
        } else {
            Some(
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            )
        };
        Self {
            version: VERSION.to_string(),
            command: command.to_string(),
            seed,
            config: serde_json::to_value(config).expect("config serializes"),
            timestamp_unix,
        }
    }

    /// `# {json}` comment line for CSV outputs.
    pub fn comment_line(&self) -> String {
        format!("# {}", serde_json::to_string(self).expect("meta serializes"))
    }

    /// `{"_meta": {...}}` first line for JSON-Lines outputs.
    pub fn jsonl_line(&self) -> String {
        format!(
            "{{\"_meta\":{}}}",
            serde_json::to_string(self).expect("meta serializes")
        )
    }
}

/// A JSON document wrapped with its `_meta` header. Deserializing the body
/// type directly from such a document also works, since unknown fields are
/// ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Documented<T> {
    #[serde(rename = "_meta")]
    pub meta: FileMeta,
    #[serde(flatten)]
    pub body: T,
}

/// Writes a CSV file: meta comment line, header row, then data rows.
pub fn write_csv<I>(path: &Path, meta: &FileMeta, header: &str, rows: I) -> io::Result<()>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", meta.comment_line())?;
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{}", row.as_ref())?;
    }
    out.flush()
}

/// Writes a JSON-Lines file: meta line, then one JSON value per item.
pub fn write_jsonl<T: Serialize>(path: &Path, meta: &FileMeta, items: &[T]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", meta.jsonl_line())?;
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Writes a JSON document with the meta header as its `_meta` field.
pub fn write_json_document<T: Serialize>(
    path: &Path,
    meta: &FileMeta,
    body: &T,
) -> io::Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        #[serde(rename = "_meta")]
        meta: &'a FileMeta,
        #[serde(flatten)]
        body: &'a T,
    }
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &Doc { meta, body })?;
    out.write_all(b"\n")?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_meta_has_no_timestamp() {
        let meta = FileMeta::new("run", &serde_json::json!({"rc": 5}), Some(42), true);
        assert_eq!(meta.timestamp_unix, None);
        let line = meta.comment_line();
        assert!(line.starts_with("# {"));
        assert!(!line.contains("timestamp_unix"));
        assert!(line.contains("\"seed\":42"));
        let wall = FileMeta::new("run", &serde_json::json!({}), None, false);
        assert!(wall.timestamp_unix.is_some());
    }

    #[test]
    fn jsonl_meta_line_parses_back() {
        let meta = FileMeta::new("sweep", &serde_json::json!({"m": 45}), Some(7), true);
        let line = meta.jsonl_line();
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["_meta"]["command"], "sweep");
        assert_eq!(value["_meta"]["version"], VERSION);
    }
}
