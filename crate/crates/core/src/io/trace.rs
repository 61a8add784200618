//! Trace files.
//!
//! CSV: an optional `# variant=<v>, lambda=<l>` line, the header
//! `k,f,alpha,step_norm,sparsity`, then one row per sweep with floats at 17
//! significant digits and an empty `alpha` cell when there is none.
//!
//! JSON lines: an optional `{"meta":{"variant":..,"lambda":..}}` line, then
//! one object per sweep with the same five fields (`alpha` may be `null`).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{IterationTrace, TraceMeta, TraceRow};

const CSV_HEADER: &str = "k,f,alpha,step_norm,sparsity";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    JsonLines,
}

impl TraceFormat {
    /// `.jsonl` / `.json` / `.ndjson` select JSON lines; everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "json" | "ndjson") => TraceFormat::JsonLines,
            _ => TraceFormat::Csv,
        }
    }
}

impl FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TraceFormat::Csv),
            "jsonl" | "json_lines" | "json-lines" => Ok(TraceFormat::JsonLines),
            other => Err(Error::InvalidArgument(format!("unknown trace format '{other}'"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MetaLine {
    meta: TraceMeta,
}

pub fn write_trace(trace: &IterationTrace, path: &Path, format: TraceFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    match format {
        TraceFormat::Csv => {
            if let Some(m) = &trace.meta {
                writeln!(w, "# variant={}, lambda={}", m.variant, m.lambda).map_err(io)?;
            }
            writeln!(w, "{CSV_HEADER}").map_err(io)?;
            for r in &trace.rows {
                let alpha = r.alpha.map(|a| format!("{a:.16e}")).unwrap_or_default();
                writeln!(
                    w,
                    "{},{:.16e},{},{:.16e},{:.16e}",
                    r.k, r.f, alpha, r.step_norm, r.sparsity
                )
                .map_err(io)?;
            }
        }
        TraceFormat::JsonLines => {
            let json = |e: serde_json::Error| Error::io(path, e.into());
            if let Some(meta) = trace.meta {
                serde_json::to_writer(&mut w, &MetaLine { meta }).map_err(json)?;
                writeln!(w).map_err(io)?;
            }
            for r in &trace.rows {
                serde_json::to_writer(&mut w, r).map_err(json)?;
                writeln!(w).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

pub fn read_trace(path: &Path, format: TraceFormat) -> Result<IterationTrace> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let lines = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<String>>>()
        .map_err(|e| Error::io(path, e))?;
    match format {
        TraceFormat::Csv => parse_csv(&lines),
        TraceFormat::JsonLines => parse_jsonl(&lines),
    }
}

fn parse_csv(lines: &[String]) -> Result<IterationTrace> {
    let mut trace = IterationTrace::default();
    let mut seen_header = false;
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            trace.meta = Some(parse_meta(meta, lineno)?);
            continue;
        }
        if !seen_header {
            if line != CSV_HEADER {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header '{CSV_HEADER}'"),
                });
            }
            seen_header = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(Error::RaggedRow {
                line: lineno,
                expected: 5,
                got: cells.len(),
            });
        }
        let num = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid number '{s}'"),
            })
        };
        trace.rows.push(TraceRow {
            k: cells[0].trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid sweep index '{}'", cells[0]),
            })?,
            f: num(cells[1])?,
            alpha: match cells[2].trim() {
                "" => None,
                s => Some(num(s)?),
            },
            step_norm: num(cells[3])?,
            sparsity: num(cells[4])?,
        });
    }
    Ok(trace)
}

fn parse_meta(s: &str, line: usize) -> Result<TraceMeta> {
    let err = |msg: String| Error::Parse { line, msg };
    let mut variant = None;
    let mut lambda = None;
    for part in s.split(',') {
        let (key, value) = part
            .trim()
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value in '{}'", part.trim())))?;
        match key.trim() {
            "variant" => variant = Some(value.trim().parse().map_err(|e| err(format!("{e}")))?),
            "lambda" => {
                lambda = Some(
                    value
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| err(format!("invalid lambda '{value}'")))?,
                )
            }
            _ => {}
        }
    }
    match (variant, lambda) {
        (Some(variant), Some(lambda)) => Ok(TraceMeta { variant, lambda }),
        _ => Err(err("metadata line needs variant and lambda".into())),
    }
}

fn parse_jsonl(lines: &[String]) -> Result<IterationTrace> {
    let mut trace = IterationTrace::default();
    for (i, line) in lines.iter().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |e: serde_json::Error| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        };
        if trace.rows.is_empty() && trace.meta.is_none() && line.starts_with("{\"meta\"") {
            trace.meta = Some(serde_json::from_str::<MetaLine>(line).map_err(err)?.meta);
        } else {
            trace.rows.push(serde_json::from_str(line).map_err(err)?);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Variant;

    fn sample() -> IterationTrace {
        IterationTrace {
            meta: Some(TraceMeta {
                variant: Variant::Srrc,
                lambda: 0.1 + 0.2,
            }),
            rows: vec![
                TraceRow {
                    k: 1,
                    f: 0.052449123456789,
                    alpha: None,
                    step_norm: 1.0 / 3.0,
                    sparsity: 0.0,
                },
                TraceRow {
                    k: 2,
                    f: 1e-300,
                    alpha: Some(1.1147401234567891),
                    step_norm: 2.0f64.sqrt(),
                    sparsity: 0.4,
                },
            ],
        }
    }

    #[test]
    fn round_trip_both_formats() {
        let d = tempfile::tempdir().unwrap();
        for (name, fmt) in [("t.csv", TraceFormat::Csv), ("t.jsonl", TraceFormat::JsonLines)] {
            let path = d.path().join(name);
            write_trace(&sample(), &path, fmt).unwrap();
            assert_eq!(read_trace(&path, fmt).unwrap(), sample());
        }
    }

    #[test]
    fn empty_trace() {
        let d = tempfile::tempdir().unwrap();
        let csv = d.path().join("e.csv");
        write_trace(&IterationTrace::default(), &csv, TraceFormat::Csv).unwrap();
        assert_eq!(std::fs::read_to_string(&csv).unwrap(), format!("{CSV_HEADER}\n"));
        let jl = d.path().join("e.jsonl");
        write_trace(&IterationTrace::default(), &jl, TraceFormat::JsonLines).unwrap();
        assert_eq!(std::fs::read_to_string(&jl).unwrap(), "");
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(TraceFormat::from_path(Path::new("a.jsonl")), TraceFormat::JsonLines);
        assert_eq!(TraceFormat::from_path(Path::new("a.csv")), TraceFormat::Csv);
    }

    #[test]
    fn bad_header_is_reported() {
        assert!(matches!(
            parse_csv(&["a,b".to_string()]),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
