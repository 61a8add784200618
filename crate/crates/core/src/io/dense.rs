//! Numeric CSV without a header. With a single file the last column is the
//! response; with two files the second holds the response as one column.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DesignMatrix;

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                other => Error::Parse {
                    line,
                    msg: format!("{other:?}"),
                },
            }
        })?;
        let line = rec.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let row = rec
            .iter()
            .map(|cell| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    line,
                    msg: format!("'{cell}' is not a finite number"),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::RaggedRow {
                    line,
                    expected: first.len(),
                    got: row.len(),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} contains no data rows",
            path.display()
        )));
    }
    Ok(rows)
}

/// Reads `X` and `y`. Without `y_path` the last column of `x_path` is `y`.
pub fn read_dense_csv(x_path: &Path, y_path: Option<&Path>) -> Result<(DesignMatrix, Vec<f64>)> {
    let mut rows = read_rows(x_path)?;
    let y = match y_path {
        Some(yp) => {
            let yrows = read_rows(yp)?;
            if yrows[0].len() != 1 {
                return Err(Error::RaggedRow {
                    line: 1,
                    expected: 1,
                    got: yrows[0].len(),
                });
            }
            if yrows.len() != rows.len() {
                return Err(Error::DimensionMismatch {
                    what: "response file",
                    expected: rows.len(),
                    got: yrows.len(),
                });
            }
            yrows.into_iter().map(|r| r[0]).collect()
        }
        None => {
            if rows[0].len() < 2 {
                return Err(Error::InvalidArgument(
                    "need at least one feature column plus the response column".into(),
                ));
            }
            rows.iter_mut().map(|r| r.pop().unwrap_or_default()).collect()
        }
    };
    super::check_dense_size(rows.len(), rows[0].len())?;
    Ok((DesignMatrix::from_rows(&rows)?, y))
}

fn write_lines(path: &Path, lines: impl Iterator<Item = String>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for line in lines {
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `x` row by row. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_matrix_csv(path: &Path, x: &DesignMatrix) -> Result<()> {
    write_lines(
        path,
        (0..x.n()).map(|i| {
            (0..x.p())
                .map(|j| x.get(i, j).to_string())
                .collect::<Vec<_>>()
                .join(",")
        }),
    )
}

pub fn write_vector_csv(path: &Path, v: &[f64]) -> Result<()> {
    write_lines(path, v.iter().map(f64::to_string))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn tmp(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn trivial_pair() {
        let d = tempfile::tempdir().unwrap();
        let x = tmp(&d, "x.csv", "2.0\n");
        let y = tmp(&d, "y.csv", "4.0\n");
        let (m, v) = read_dense_csv(&x, Some(&y)).unwrap();
        assert_eq!((m.n(), m.p(), m.get(0, 0)), (1, 1, 2.0));
        assert_eq!(v, vec![4.0]);
    }

    #[test]
    fn last_column_is_response() {
        let d = tempfile::tempdir().unwrap();
        let x = tmp(&d, "xy.csv", "1, 2, 3\n4, 5, 6\n");
        let (m, v) = read_dense_csv(&x, None).unwrap();
        assert_eq!((m.n(), m.p()), (2, 2));
        assert_eq!(m.get(1, 0), 4.0);
        assert_eq!(v, vec![3.0, 6.0]);
    }

    #[test]
    fn ragged_rows() {
        let d = tempfile::tempdir().unwrap();
        let x = tmp(&d, "x.csv", "1,2,3\n4,5\n");
        assert!(matches!(
            read_dense_csv(&x, None).unwrap_err(),
            Error::RaggedRow { line: 2, expected: 3, got: 2 }
        ));
    }

    #[test]
    fn non_numeric_cell() {
        let d = tempfile::tempdir().unwrap();
        let x = tmp(&d, "x.csv", "1,2\n3,abc\n");
        assert!(matches!(read_dense_csv(&x, None).unwrap_err(), Error::Parse { line: 2, .. }));
    }

    #[test]
    fn zero_column() {
        let d = tempfile::tempdir().unwrap();
        let x = tmp(&d, "x.csv", "1,0,1\n2,0,1\n");
        assert!(matches!(read_dense_csv(&x, None).unwrap_err(), Error::ZeroColumn(1)));
    }

    #[test]
    fn missing_file_names_path() {
        let e = read_dense_csv(Path::new("/nonexistent/x.csv"), None).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/x.csv"));
    }

    #[test]
    fn bundled_example() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/paper_example.csv");
        let (x, y) = read_dense_csv(&path, None).unwrap();
        let demo = crate::fixtures::demo_problem(0.0);
        assert_eq!(&x, demo.x());
        assert_eq!(y, demo.y());
    }

    #[test]
    fn write_then_read() {
        let d = tempfile::tempdir().unwrap();
        let demo = crate::fixtures::demo_problem(0.0);
        let (xp, yp) = (d.path().join("x.csv"), d.path().join("y.csv"));
        write_matrix_csv(&xp, demo.x()).unwrap();
        write_vector_csv(&yp, demo.y()).unwrap();
        let (x, y) = read_dense_csv(&xp, Some(&yp)).unwrap();
        assert_eq!(&x, demo.x());
        assert_eq!(y, demo.y());
    }
}
