//! Tab-delimited table reading for the registry and lexicon files.

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: header must start with '{expected}', found '{found}'")]
    Header { path: PathBuf, expected: String, found: String },
    #[error("{path}:{line}: {message}")]
    Row { path: PathBuf, line: usize, message: String },
}

impl TableError {
    pub fn row(path: &Path, line: usize, message: impl Into<String>) -> Self {
        TableError::Row { path: path.to_path_buf(), line, message: message.into() }
    }
}

/// A data row with its 1-based line number. Missing trailing columns read
/// as empty strings.
#[derive(Debug, Clone)]
pub struct Row {
    pub line: usize,
    pub cells: Vec<String>,
}

impl Row {
    pub fn get(&self, i: usize) -> &str {
        self.cells.get(i).map_or("", |s| s.trim())
    }

    /// Pipe-separated list cell, blanks dropped.
    pub fn list(&self, i: usize) -> Vec<String> {
        split_pipe(self.get(i))
    }
}

pub fn split_pipe(cell: &str) -> Vec<String> {
    cell.split('|').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// Reads a table whose header begins with `required` columns. Blank lines
/// and lines starting with `#` are skipped.
pub fn read_table(path: &Path, required: &[&str]) -> Result<Vec<Row>, TableError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| TableError::Io { path: path.to_path_buf(), source })?;
    parse_table(path, &text, required)
}

pub fn parse_table(path: &Path, text: &str, required: &[&str]) -> Result<Vec<Row>, TableError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let expected = required.join("\t");
    let header: Vec<&str> = match lines.next() {
        Some((_, h)) => h.split('\t').map(str::trim).collect(),
        None if required.is_empty() => return Ok(Vec::new()),
        None => {
            return Err(TableError::Header {
                path: path.to_path_buf(),
                expected,
                found: String::new(),
            })
        }
    };
    if header.len() < required.len() || header[..required.len()] != *required {
        return Err(TableError::Header {
            path: path.to_path_buf(),
            expected,
            found: header.join("\t"),
        });
    }
    Ok(lines
        .map(|(i, l)| Row {
            line: i + 1,
            cells: l.trim_end_matches(['\r', '\n']).split('\t').map(str::to_string).collect(),
        })
        .collect())
}
