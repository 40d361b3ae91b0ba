use std::path::Path;

use qvuln_core::embedding::VectorTable;

use crate::error::{Error, Result};

/// Reads a pretrained word-vector file (`token v1 … vd` per line, optional
/// `COUNT DIM` header).
pub fn load_vectors(path: &Path) -> Result<VectorTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    VectorTable::parse(&text).map_err(|e| match e {
        qvuln_core::Error::VectorLine { line, message } => Error::format(path, line, message),
        other => other.into(),
    })
}
