//! Loading problems from files or a seeded generator, and writing traces.

pub mod dense;
pub mod libsvm;
pub mod synth;
pub mod trace;

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DesignMatrix;

pub use dense::{read_dense_csv, write_matrix_csv, write_vector_csv};
pub use libsvm::{read_libsvm, LibsvmData, SparseRecord};
pub use synth::{synth, SyntheticSpec};
pub use trace::{read_trace, write_trace, TraceFormat};

/// Densification refuses matrices with more entries than this.
pub const MAX_DENSE_ENTRIES: usize = 100_000_000;

pub(crate) fn check_dense_size(n: usize, p: usize) -> Result<()> {
    match n.checked_mul(p) {
        Some(e) if e <= MAX_DENSE_ENTRIES => Ok(()),
        _ => Err(Error::Unsupported(format!(
            "{n} x {p} exceeds the dense limit of {MAX_DENSE_ENTRIES} entries"
        ))),
    }
}

/// Input file flavours accepted by [`load`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Libsvm,
}

impl InputFormat {
    /// `.csv` means CSV, anything else is read as libsvm.
    pub fn guess(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Libsvm,
        }
    }
}

/// Reads a design matrix and response. For CSV input without `response`,
/// the last column is the response.
pub fn load(
    path: &Path,
    format: InputFormat,
    response: Option<&Path>,
) -> Result<(DesignMatrix, Vec<f64>)> {
    match format {
        InputFormat::Csv => read_dense_csv(path, response),
        InputFormat::Libsvm => {
            if response.is_some() {
                return Err(Error::InvalidArgument(
                    "a separate response file is only supported for CSV input".into(),
                ));
            }
            read_libsvm(path)?.densify(None)
        }
    }
}
