//! Plain-text model persistence.
//!
//! ```text
//! gsa-model v1
//! <kind> <L> <p> <has_bias>
//! <L lines of p reals, space separated, 17 significant digits>
//! ```
//!
//! 17 significant digits make the decimal rendering round-trip exact, so
//! `load(save(m)) == m` bit for bit.

use std::fs;
use std::path::Path;

use thiserror::Error;

use gsa_core::linalg::DenseVec;
use gsa_core::models::{LinearModel, ModelKind};

pub const MAGIC: &str = "gsa-model v1";

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("unsupported model file header {0:?} (expected {MAGIC:?})")]
    Version(String),
    #[error("malformed model header line: {0:?}")]
    Header(String),
    #[error("unknown model kind {0:?}")]
    Kind(String),
    #[error("expected {expected} weight rows of {width} values, found {found}")]
    Shape { expected: usize, width: usize, found: usize },
    #[error("malformed number {token:?} in weight row {row}")]
    Number { row: usize, token: String },
    #[error("invalid model shape: {0}")]
    Model(#[from] gsa_core::models::ModelError),
}

pub fn save_model(model: &LinearModel, has_bias: bool, path: &Path) -> Result<(), ModelIoError> {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!(
        "{} {} {} {}\n",
        model.kind().as_str(),
        model.n_rows(),
        model.n_features(),
        has_bias
    ));
    for row in model.rows() {
        let mut first = true;
        for v in row.as_slice() {
            if !first {
                out.push(' ');
            }
            out.push_str(&format!("{v:.16e}"));
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out)
        .map_err(|source| ModelIoError::Io { path: path.display().to_string(), source })
}

pub fn load_model(path: &Path) -> Result<(LinearModel, bool), ModelIoError> {
    let text = fs::read_to_string(path)
        .map_err(|source| ModelIoError::Io { path: path.display().to_string(), source })?;
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or_default();
    if magic != MAGIC {
        return Err(ModelIoError::Version(magic.to_string()));
    }
    let header = lines.next().unwrap_or_default();
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [kind_str, l_str, p_str, bias_str] = fields.as_slice() else {
        return Err(ModelIoError::Header(header.to_string()));
    };
    let kind = match *kind_str {
        "linear" => ModelKind::Linear,
        "logistic" => ModelKind::Logistic,
        "softmax" => ModelKind::Softmax,
        other => return Err(ModelIoError::Kind(other.to_string())),
    };
    let l: usize = l_str.parse().map_err(|_| ModelIoError::Header(header.to_string()))?;
    let p: usize = p_str.parse().map_err(|_| ModelIoError::Header(header.to_string()))?;
    let has_bias: bool = bias_str.parse().map_err(|_| ModelIoError::Header(header.to_string()))?;

    let mut rows = Vec::with_capacity(l);
    for (row_idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut values = Vec::with_capacity(p);
        for token in line.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| ModelIoError::Number { row: row_idx, token: token.to_string() })?;
            values.push(v);
        }
        if values.len() != p {
            return Err(ModelIoError::Shape { expected: l, width: p, found: values.len() });
        }
        rows.push(
            DenseVec::from_vec(values)
                .map_err(|_| ModelIoError::Number { row: row_idx, token: "non-finite".into() })?,
        );
    }
    if rows.len() != l {
        return Err(ModelIoError::Shape { expected: l, width: p, found: rows.len() });
    }
    Ok((LinearModel::from_rows(kind, rows)?, has_bias))
}
