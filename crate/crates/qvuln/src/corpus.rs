//! Labeled CSV datasets and the preprocessed (encoded) corpus layout.
//!
//! Raw layout: a directory holding `train.csv`, `validation.csv` and
//! `test.csv`, each RFC 4180 with header `code,label`.
//!
//! Preprocessed layout: `vocab.txt` (one token per line, line k has index
//! k + 2) and `<split>.tsv` (one sample per line: label, TAB, space-separated
//! indices).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qvuln_core::text::{
    balance, encode_corpus, normalize, EncodedSequence, LabeledCorpus, Sample, Split, Vocabulary,
};

use crate::error::{Error, Result};

/// Reads one split from a `code,label` CSV file.
pub fn load_dataset(path: &Path, split: Split) -> Result<LabeledCorpus> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, 0, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, 0, e))?.clone();
    let (Some(code_col), Some(label_col)) = (
        headers.iter().position(|h| h.trim() == "code"),
        headers.iter().position(|h| h.trim() == "label"),
    ) else {
        return Err(Error::Row {
            path: path.to_path_buf(),
            row: 0,
            message: format!("header must contain `code` and `label`, found {:?}", headers.iter().collect::<Vec<_>>()),
        });
    };
    let mut samples = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| csv_error(path, row, e))?;
        let row_err = |message: String| Error::Row {
            path: path.to_path_buf(),
            row,
            message,
        };
        let code = record.get(code_col).ok_or_else(|| row_err("missing code field".into()))?;
        let label_text = record.get(label_col).ok_or_else(|| row_err("missing label field".into()))?;
        let label: i64 = label_text
            .trim()
            .parse()
            .map_err(|_| row_err(format!("label {label_text:?} is not an integer")))?;
        if normalize(code).trim().is_empty() {
            return Err(row_err("empty code".into()));
        }
        let sample = Sample::new(code, label).map_err(|e| row_err(e.to_string()))?;
        samples.push(sample);
    }
    Ok(LabeledCorpus::new(split, samples))
}

fn csv_error(path: &Path, row: usize, e: csv::Error) -> Error {
    // Record 0 is the header, so record k is data row k.
    let row = e.position().map_or(row, |p| p.record() as usize);
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        _ => Error::Row {
            path: path.to_path_buf(),
            row,
            message,
        },
    }
}

pub fn split_file(dir: &Path, split: Split) -> PathBuf {
    dir.join(format!("{}.csv", split.as_str()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreprocessOptions {
    pub max_len: usize,
    pub max_vocab: usize,
    pub balance: bool,
    pub seed: u64,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self {
            max_len: qvuln_core::text::DEFAULT_MAX_LEN,
            max_vocab: qvuln_core::text::DEFAULT_MAX_VOCAB,
            balance: false,
            seed: 42,
        }
    }
}

/// Encoded samples of one split.
pub type EncodedSplit = Vec<(EncodedSequence, u8)>;

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedCorpus {
    pub vocab: Vocabulary,
    pub max_len: usize,
    pub train: EncodedSplit,
    pub validation: EncodedSplit,
    pub test: EncodedSplit,
}

impl EncodedCorpus {
    pub fn split(&self, split: Split) -> &EncodedSplit {
        match split {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
            Split::Test => &self.test,
        }
    }
}

/// load → (balance) → tokenize → vocabulary from train → encode every split.
/// Missing validation/test files yield empty splits; train is required.
pub fn preprocess(data_dir: &Path, opts: &PreprocessOptions) -> Result<EncodedCorpus> {
    let mut corpora = Vec::new();
    for (k, split) in Split::ALL.into_iter().enumerate() {
        let path = split_file(data_dir, split);
        let corpus = if split != Split::Train && !path.exists() {
            log::warn!("{} not found; {} split left empty", path.display(), split.as_str());
            LabeledCorpus::new(split, Vec::new())
        } else {
            load_dataset(&path, split)?
        };
        let corpus = if opts.balance && !corpus.is_empty() {
            balance(&corpus, opts.seed.wrapping_add(k as u64))?
        } else {
            corpus
        };
        corpora.push(corpus);
    }
    let vocab = Vocabulary::from_corpus(&corpora[0], opts.max_vocab)?;
    let mut encoded = corpora
        .iter()
        .map(|c| encode_corpus(c, &vocab, opts.max_len))
        .collect::<qvuln_core::Result<Vec<_>>>()?
        .into_iter();
    Ok(EncodedCorpus {
        vocab,
        max_len: opts.max_len,
        train: encoded.next().unwrap_or_default(),
        validation: encoded.next().unwrap_or_default(),
        test: encoded.next().unwrap_or_default(),
    })
}

pub fn write_vocab(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let mut text = String::new();
    for t in vocab.tokens() {
        text.push_str(t);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let tokens: Vec<String> = text.lines().map(str::to_string).collect();
    if let Some(k) = tokens.iter().position(|t| t.is_empty() || t.contains(char::is_whitespace)) {
        return Err(Error::format(path, k + 1, "vocabulary tokens must be non-empty and whitespace-free"));
    }
    Ok(Vocabulary::from_tokens(tokens)?)
}

/// Writes `vocab.txt` and one `.tsv` per split into `out`.
pub fn write_encoded(out: &Path, corpus: &EncodedCorpus) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_vocab(&out.join("vocab.txt"), &corpus.vocab)?;
    for split in Split::ALL {
        let path = out.join(format!("{}.tsv", split.as_str()));
        let mut file = std::io::BufWriter::new(fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
        for (seq, label) in corpus.split(split) {
            let indices: Vec<String> = seq.indices.iter().map(u32::to_string).collect();
            writeln!(file, "{label}\t{}", indices.join(" ")).map_err(|e| Error::io(&path, e))?;
        }
        file.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn read_split(path: &Path, rows: usize) -> Result<(EncodedSplit, Option<usize>)> {
    if !path.exists() {
        return Ok((Vec::new(), None));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut width = None;
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let (label, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(path, line_no, "expected `label<TAB>indices`"))?;
        let label: u8 = match label {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::format(path, line_no, format!("label {other:?} is not 0 or 1"))),
        };
        let indices = rest
            .split_whitespace()
            .map(|s| {
                let i: u32 = s.parse().map_err(|_| Error::format(path, line_no, format!("bad index {s:?}")))?;
                if i as usize >= rows {
                    return Err(Error::format(path, line_no, format!("index {i} outside vocabulary")));
                }
                Ok(i)
            })
            .collect::<Result<Vec<u32>>>()?;
        match width {
            None => width = Some(indices.len()),
            Some(w) if w != indices.len() => {
                return Err(Error::format(path, line_no, format!("expected {w} indices, found {}", indices.len())))
            }
            _ => {}
        }
        out.push((EncodedSequence::from_indices(indices), label));
    }
    Ok((out, width))
}

pub fn read_encoded(dir: &Path) -> Result<EncodedCorpus> {
    let vocab = read_vocab(&dir.join("vocab.txt"))?;
    let mut splits = Vec::new();
    let mut max_len = None;
    for split in Split::ALL {
        let path = dir.join(format!("{}.tsv", split.as_str()));
        let (data, width) = read_split(&path, vocab.rows())?;
        if let (Some(a), Some(b)) = (max_len, width) {
            if a != b {
                return Err(Error::format(&path, 1, format!("sequence length {b} differs from {a}")));
            }
        }
        max_len = max_len.or(width);
        splits.push(data);
    }
    let mut splits = splits.into_iter();
    Ok(EncodedCorpus {
        vocab,
        max_len: max_len.unwrap_or(0),
        train: splits.next().unwrap_or_default(),
        validation: splits.next().unwrap_or_default(),
        test: splits.next().unwrap_or_default(),
    })
}
