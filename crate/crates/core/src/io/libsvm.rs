//! The libsvm text format: one sample per line, `label idx:val idx:val ...`
//! with 1-based, strictly ascending feature indices. Labels are used as the
//! regression response.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DesignMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRecord {
    pub label: f64,
    /// `(index, value)` with 1-based indices.
    pub entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LibsvmData {
    pub records: Vec<SparseRecord>,
}

impl LibsvmData {
    pub fn labels(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Largest feature index present, 0 if there are no entries.
    pub fn max_index(&self) -> usize {
        self.records
            .iter()
            .filter_map(|r| r.entries.last().map(|e| e.0))
            .max()
            .unwrap_or(0)
    }

    /// Dense design matrix with `p` columns (default: the largest index) and
    /// the labels as response.
    pub fn densify(&self, p: Option<usize>) -> Result<(DesignMatrix, Vec<f64>)> {
        let n = self.records.len();
        let max = self.max_index();
        let p = p.unwrap_or(max);
        if max > p {
            return Err(Error::InvalidArgument(format!(
                "feature index {max} exceeds the requested p = {p}"
            )));
        }
        super::check_dense_size(n, p)?;
        let mut values = vec![0.0; n * p];
        for (i, rec) in self.records.iter().enumerate() {
            for &(j, v) in &rec.entries {
                values[(j - 1) * n + i] = v;
            }
        }
        Ok((DesignMatrix::from_column_major(n, p, values)?, self.labels()))
    }
}

pub fn read_libsvm(path: &Path) -> Result<LibsvmData> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses libsvm text. Blank lines and lines starting with `#` are skipped.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<LibsvmData> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io("<libsvm input>", e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        records.push(parse_line(line, lineno)?);
    }
    Ok(LibsvmData { records })
}

fn parse_line(line: &str, lineno: usize) -> Result<SparseRecord> {
    let err = |msg: String| Error::Parse { line: lineno, msg };
    let mut tokens = line.split_whitespace();
    let label_tok = tokens.next().unwrap_or_default();
    let label: f64 = label_tok
        .parse()
        .map_err(|_| err(format!("invalid label '{label_tok}'")))?;
    if !label.is_finite() {
        return Err(err(format!("non-finite label '{label_tok}'")));
    }
    let mut entries = Vec::new();
    let mut last = 0usize;
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| err(format!("expected 'index:value', got '{tok}'")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| err(format!("invalid feature index '{idx}'")))?;
        if idx == 0 {
            return Err(err("feature indices are 1-based".into()));
        }
        if idx <= last {
            return Err(err(format!(
                "feature indices must be strictly ascending ({idx} after {last})"
            )));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| err(format!("invalid feature value '{val}'")))?;
        if !val.is_finite() {
            return Err(err(format!("non-finite value for feature {idx}")));
        }
        last = idx;
        entries.push((idx, val));
    }
    Ok(SparseRecord { label, entries })
}
