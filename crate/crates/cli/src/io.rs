//! Flat-file formats: comma-separated numeric tables written with full
//! round-trip precision, JSON sidecars, atomic replacement.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::{CliError, Result};

/// Seventeen significant digits: parses back to the identical `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes via a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Reads an input produced by an earlier stage; `stage` names the subcommand to
/// suggest when it is missing.
pub fn read_input(path: &Path, stage: &'static str) -> Result<String> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == ErrorKind::NotFound => Err(CliError::MissingInput(path.to_path_buf(), stage)),
        Err(e) => Err(io_err(path)(e)),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path, stage: &'static str) -> Result<T> {
    let text = read_input(path, stage)?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

/// A numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |msg: String| CliError::Format {
            path: path.to_path_buf(),
            msg,
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| bad("empty file".into()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
            if row.len() != header.len() {
                return Err(bad(format!("row {}: {} fields, header has {}", i + 1, row.len(), header.len())));
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    /// Column indices of `names`, in that order.
    pub fn columns(&self, names: &[String], path: &Path) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.header.iter().position(|h| h == n).ok_or_else(|| CliError::Format {
                    path: path.to_path_buf(),
                    msg: format!("missing column {n}"),
                })
            })
            .collect()
    }
}

/// Column names `prefix` + each suffix.
pub fn names(prefix: &str, suffixes: &[&str]) -> Vec<String> {
    suffixes.iter().map(|s| format!("{prefix}{s}")).collect()
}

pub const SYM: [&str; 6] = ["11", "12", "13", "22", "23", "33"];
pub const FULL: [&str; 9] = ["11", "12", "13", "21", "22", "23", "31", "32", "33"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip_is_exact() {
        let mut t = Table::new(vec!["a".into(), "b".into()]);
        t.rows.push(vec![0.1 + 0.2, -1e-300]);
        t.rows.push(vec![std::f64::consts::PI, 12345.678901234567]);
        let back = Table::parse(&t.to_csv(), Path::new("x")).unwrap();
        assert_eq!(back, t);
        assert!(t.to_csv().ends_with('\n') && !t.to_csv().contains('\r'));
    }

    #[test]
    fn ragged_rows_and_missing_files() {
        assert!(Table::parse("a,b\n1,2,3\n", Path::new("x")).is_err());
        let err = read_input(Path::new("/nonexistent/invsurr/file.csv"), "gen-data").unwrap_err();
        assert!(matches!(err, CliError::MissingInput(_, "gen-data")));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/f.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
