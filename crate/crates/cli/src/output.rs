//! Record emission: JSON with a schema version, CSV with 17 significant
//! digits.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sm_pricer_core::sampling::fmt_real;

use crate::{CliError, SCHEMA_VERSION};

/// A record tagged with [`SCHEMA_VERSION`].
#[derive(Debug, Serialize)]
pub struct Versioned<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub record: T,
}

impl<T> Versioned<T> {
    pub fn new(record: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            record,
        }
    }
}

/// One JSON document per line.
pub fn json_lines<T: Serialize>(records: &[T]) -> Result<String, CliError> {
    let mut out = String::new();
    for r in records {
        out.push_str(&json_string(&Versioned::new(r))?);
        out.push('\n');
    }
    Ok(out)
}

pub fn json_document<T: Serialize>(record: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(&Versioned::new(record))
        .map_err(|e| CliError::Usage(format!("cannot serialize record: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn json_string<T: Serialize>(record: &T) -> Result<String, CliError> {
    serde_json::to_string(record).map_err(|e| CliError::Usage(format!("cannot serialize record: {e}")))
}

pub fn real(x: f64) -> String {
    fmt_real(x)
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Builds a CSV table row by row.
#[derive(Debug, Default)]
pub struct CsvTable {
    text: String,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut t = Self::default();
        t.row(header.iter().map(|h| h.to_string()));
        t
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let cells: Vec<String> = cells.into_iter().collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Writes `text` to `out`, or to standard output when `out` is absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
