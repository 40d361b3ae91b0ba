//! Pretrained word-vector tables and vocabulary-aligned embedding matrices.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::Rng;

use crate::math::sqrt;
use crate::text::{EncodedSequence, Vocabulary, OOV_INDEX, PAD_INDEX};
use crate::{Error, Result};

pub const DEFAULT_BASIC_DIM: usize = 50;
const INIT_RANGE: f64 = 0.05;

/// Token → vector map parsed from the whitespace-separated text format
/// (`token v1 … vd` per line, optional `COUNT DIM` header).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTable {
    dim: usize,
    order: Vec<String>,
    entries: BTreeMap<String, Vec<f64>>,
}

impl VectorTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut dim = 0;
        let mut order = Vec::new();
        let mut entries = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if k == 0 && rest.len() == 1 && token.parse::<u64>().is_ok() && rest[0].parse::<u64>().is_ok() {
                continue;
            }
            let values = rest
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| Error::VectorLine {
                        line: line_no,
                        message: format!("cannot parse {f:?} as a number"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.is_empty() {
                return Err(Error::VectorLine {
                    line: line_no,
                    message: "token without a vector".to_string(),
                });
            }
            if dim == 0 {
                dim = values.len();
            } else if values.len() != dim {
                return Err(Error::VectorLine {
                    line: line_no,
                    message: format!("expected {dim} values, found {}", values.len()),
                });
            }
            if !entries.contains_key(token) {
                order.push(token.to_string());
                entries.insert(token.to_string(), values);
            }
        }
        if dim == 0 {
            return Err(Error::VectorLine {
                line: 0,
                message: "no vectors found".to_string(),
            });
        }
        Ok(Self { dim, order, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    /// Serializes in file order, without a header.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.order {
            out.push_str(t);
            for v in &self.entries[t] {
                let _ = write!(out, " {v:?}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingSource {
    Basic,
    Glove,
    FastText,
    GloveFastText,
}

impl EmbeddingSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            EmbeddingSource::Basic => "basic",
            EmbeddingSource::Glove => "glove",
            EmbeddingSource::FastText => "fasttext",
            EmbeddingSource::GloveFastText => "glove+fasttext",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "basic" => Some(Self::Basic),
            "glove" => Some(Self::Glove),
            "fasttext" => Some(Self::FastText),
            "glove+fasttext" => Some(Self::GloveFastText),
            _ => None,
        }
    }

    fn table_count(&self) -> usize {
        match self {
            EmbeddingSource::Basic => 0,
            EmbeddingSource::Glove | EmbeddingSource::FastText => 1,
            EmbeddingSource::GloveFastText => 2,
        }
    }
}

/// (V + 2) × d matrix aligned with vocabulary indices. Row 0 (padding) is
/// always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
    pub trainable: bool,
    pub source: EmbeddingSource,
}

impl EmbeddingMatrix {
    pub fn from_parts(rows: usize, dim: usize, data: Vec<f64>, trainable: bool, source: EmbeddingSource) -> Result<Self> {
        if data.len() != rows * dim || rows < 2 || dim == 0 {
            return Err(Error::Dimension {
                expected: rows * dim,
                actual: data.len(),
            });
        }
        let mut m = Self {
            rows,
            dim,
            data,
            trainable,
            source,
        };
        m.row_mut(PAD_INDEX as usize).fill(0.0);
        Ok(m)
    }

    pub fn zeros(rows: usize, dim: usize, trainable: bool, source: EmbeddingSource) -> Self {
        Self {
            rows,
            dim,
            data: vec![0.0; rows * dim],
            trainable,
            source,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows 1.. — everything an optimizer may touch.
    pub fn non_padding(&self) -> &[f64] {
        &self.data[self.dim..]
    }

    pub fn non_padding_mut(&mut self) -> &mut [f64] {
        &mut self.data[self.dim..]
    }

    /// Per column over rows 1..: subtract the mean, divide by the population
    /// standard deviation; constant columns become zero.
    fn standardize(&mut self) {
        let n = (self.rows - 1) as f64;
        for col in 0..self.dim {
            let idx: Vec<usize> = (1..self.rows).map(|r| r * self.dim + col).collect();
            let mean = idx.iter().map(|&i| self.data[i]).sum::<f64>() / n;
            let var = idx.iter().map(|&i| (self.data[i] - mean) * (self.data[i] - mean)).sum::<f64>() / n;
            let sd = sqrt(var);
            if sd <= 1e-12 * (1.0 + mean.abs()) {
                for i in idx {
                    self.data[i] = 0.0;
                }
            } else {
                for i in idx {
                    self.data[i] = (self.data[i] - mean) / sd;
                }
            }
        }
    }
}

fn uniform_vec<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-INIT_RANGE..INIT_RANGE)).collect()
}

/// Builds the embedding matrix for `vocab`.
///
/// `Basic` draws every row from uniform(−0.05, 0.05) and is trainable.
/// Pretrained modes look each token up in its table, falling back to one
/// shared random OOV vector per table, and concatenate the two lookups for
/// `GloveFastText`. All modes are column-standardized and row 0 is zeroed.
pub fn build_embedding_matrix(
    vocab: &Vocabulary,
    tables: &[VectorTable],
    mode: EmbeddingSource,
    seed: u64,
    d_basic: usize,
) -> Result<EmbeddingMatrix> {
    if tables.len() != mode.table_count() {
        return Err(Error::TableCount {
            mode: mode.as_str(),
            expected: mode.table_count(),
            actual: tables.len(),
        });
    }
    let mut rng = crate::training::rng(seed);
    let rows = vocab.rows();
    let mut m = if mode == EmbeddingSource::Basic {
        if d_basic == 0 {
            return Err(Error::Invalid("basic embedding dimension must be at least 1".into()));
        }
        let data = (0..rows * d_basic).map(|_| rng.gen_range(-INIT_RANGE..INIT_RANGE)).collect();
        EmbeddingMatrix {
            rows,
            dim: d_basic,
            data,
            trainable: true,
            source: mode,
        }
    } else {
        let dim: usize = tables.iter().map(VectorTable::dim).sum();
        let oov: Vec<Vec<f64>> = tables.iter().map(|t| uniform_vec(t.dim(), &mut rng)).collect();
        let mut m = EmbeddingMatrix::zeros(rows, dim, false, mode);
        for r in 1..rows {
            let token = if r as u32 == OOV_INDEX { None } else { vocab.token(r as u32) };
            let row = m.row_mut(r);
            let mut offset = 0;
            for (table, fallback) in tables.iter().zip(&oov) {
                let v = token.and_then(|t| table.get(t)).unwrap_or(fallback);
                row[offset..offset + table.dim()].copy_from_slice(v);
                offset += table.dim();
            }
        }
        m
    };
    m.standardize();
    m.row_mut(PAD_INDEX as usize).fill(0.0);
    Ok(m)
}

/// Row lookup for every position of `seq`.
pub fn embed(seq: &EncodedSequence, matrix: &EmbeddingMatrix) -> Result<Vec<Vec<f64>>> {
    seq.indices
        .iter()
        .map(|&i| {
            let i = i as usize;
            if i >= matrix.rows {
                Err(Error::EmbeddingIndex {
                    index: i,
                    rows: matrix.rows,
                })
            } else {
                Ok(matrix.row(i).to_vec())
            }
        })
        .collect()
}
