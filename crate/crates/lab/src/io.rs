//! CSV and JSON files: header-checked reading, atomic writing, provenance.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing header `{expected}`")]
    MissingHeader { path: String, expected: String },
    #[error("{path}: header is `{found}`, expected `{expected}`")]
    WrongHeader {
        path: String,
        found: String,
        expected: String,
    },
    #[error("{path}:{line}: {reason}")]
    BadRow { path: String, line: usize, reason: String },
}

/// Numeric columns of a CSV file with a single header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[k])
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r[0], r[1])).collect()
    }
}

/// Parses CSV text whose header starts with `required`. Extra trailing
/// columns listed in `optional` are accepted in order.
pub fn parse_csv(text: &str, path: &str, required: &[&str], optional: &[&str]) -> Result<Table, IoError> {
    let expected = required.join(",");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header: Vec<String> = match records.next() {
        None => {
            return Err(IoError::MissingHeader {
                path: path.into(),
                expected,
            })
        }
        Some(Err(e)) => {
            return Err(IoError::BadRow {
                path: path.into(),
                line: 1,
                reason: e.to_string(),
            })
        }
        Some(Ok(r)) => r.iter().map(str::to_string).collect(),
    };
    let allowed: Vec<&str> = required.iter().chain(optional).copied().collect();
    let matches = header.len() >= required.len()
        && header.len() <= allowed.len()
        && header.iter().zip(&allowed).all(|(h, a)| h == a);
    if !matches {
        let found = header.join(",");
        if header.iter().all(|h| h.parse::<f64>().is_ok()) {
            return Err(IoError::MissingHeader {
                path: path.into(),
                expected,
            });
        }
        return Err(IoError::WrongHeader {
            path: path.into(),
            found,
            expected,
        });
    }
    let width = header.len();
    let mut rows = Vec::new();
    for (k, record) in records.enumerate() {
        let line = k + 2;
        let bad = |reason: String| IoError::BadRow {
            path: path.into(),
            line,
            reason,
        };
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != width {
            return Err(bad(format!("expected {width} fields, found {}", record.len())));
        }
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("`{f}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>, IoError>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

pub fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_csv(path: &Path, required: &[&str], optional: &[&str]) -> Result<Table, IoError> {
    parse_csv(&read_to_string(path)?, &path.display().to_string(), required, optional)
}

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place, so `path` never holds a partial result.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let err = |source| IoError::Write {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

/// Shortest round-trip representation in scientific notation.
pub fn number(v: f64) -> String {
    format!("{v:e}")
}

/// Optional number; absent values are empty fields.
pub fn maybe(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

/// CSV text built row by row with the given header.
#[derive(Debug, Clone)]
pub struct CsvText {
    text: String,
    width: usize,
}

impl CsvText {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            width: header.len(),
        }
    }

    /// Appends one row. Fields with separators or quotes are quoted.
    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        assert_eq!(fields.len(), self.width, "row width");
        for (k, f) in fields.iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            let f = f.as_ref();
            if f.contains([',', '"', '\n', '\r']) {
                let _ = write!(self.text, "\"{}\"", f.replace('"', "\"\""));
            } else {
                self.text.push_str(f);
            }
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Digest of one input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn digest(path: &Path) -> Result<InputDigest, IoError> {
    let bytes = std::fs::read(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let hash = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in hash {
        let _ = write!(hex, "{b:02x}");
    }
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hex,
    })
}

/// Wrapper shared by every JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: C,
    pub inputs: Vec<InputDigest>,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(command: &'static str, seed: u64, config: C, inputs: Vec<InputDigest>, result: R) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            inputs,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("outputs serialize");
        s.push('\n');
        s
    }
}

/// `path` with its extension replaced, for companion outputs.
pub fn companion(path: &Path, extension: &str) -> PathBuf {
    path.with_extension(extension)
}
