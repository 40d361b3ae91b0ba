//! Source-code normalization, tokenization, vocabularies and fixed-length
//! integer encoding.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};

use crate::{Error, Result};

pub const PAD_INDEX: u32 = 0;
pub const OOV_INDEX: u32 = 1;
pub const DEFAULT_MAX_LEN: usize = 100;
pub const DEFAULT_MAX_VOCAB: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub code: String,
    pub label: u8,
}

impl Sample {
    pub fn new(code: impl Into<String>, label: i64) -> Result<Self> {
        match label {
            0 | 1 => Ok(Self {
                code: code.into(),
                label: label as u8,
            }),
            other => Err(Error::Label(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    pub split: Split,
    pub samples: Vec<Sample>,
}

impl LabeledCorpus {
    pub fn new(split: Split, samples: Vec<Sample>) -> Self {
        Self { split, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// (negatives, positives).
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.samples.iter().filter(|s| s.label == 1).count();
        (self.samples.len() - pos, pos)
    }
}

/// Down-samples the majority class to the minority count and shuffles the
/// result, both driven by `seed`.
pub fn balance(corpus: &LabeledCorpus, seed: u64) -> Result<LabeledCorpus> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let (neg, pos): (Vec<&Sample>, Vec<&Sample>) = {
        let mut neg = Vec::new();
        let mut pos = Vec::new();
        for s in &corpus.samples {
            if s.label == 1 {
                pos.push(s);
            } else {
                neg.push(s);
            }
        }
        (neg, pos)
    };
    if neg.is_empty() || pos.is_empty() {
        return Err(Error::SingleClass);
    }
    let mut rng = crate::training::rng(seed);
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let mut keep = index::sample(&mut rng, majority.len(), minority.len()).into_vec();
    keep.sort_unstable();
    let mut samples: Vec<Sample> = minority.into_iter().cloned().collect();
    samples.extend(keep.into_iter().map(|k| majority[k].clone()));
    samples.shuffle(&mut rng);
    Ok(LabeledCorpus {
        split: corpus.split,
        samples,
    })
}

const OPERATORS: [&str; 16] = [
    "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "++", "--", "+=", "-=", "*=", "/=", "->", "::",
];
const PUNCTUATION: &str = "(){}[];,.<>=+-*/%&|^!~?:#\"'";

fn is_punct(c: char) -> bool {
    PUNCTUATION.contains(c)
}

/// Replaces escaped line breaks and tabs (`\n`, `\r`, `\t` written as two
/// characters) left over from CSV export with spaces.
pub fn normalize(code: &str) -> String {
    let mut out = String::with_capacity(code.len());
    let mut chars = code.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(&n) = chars.peek() {
                if matches!(n, 'n' | 'r' | 't') {
                    chars.next();
                    out.push(' ');
                    continue;
                }
            }
        }
        out.push(c);
    }
    out
}

/// Splits C/C++ source into tokens.
///
/// Comments are dropped, string and character literals collapse to `""` and
/// `''`, two-character operators win over their one-character prefixes, and
/// identifiers and numbers stay whole. Case is preserved.
pub fn tokenize(code: &str) -> Vec<String> {
    let code = normalize(code);
    let chars: Vec<char> = code.chars().collect();
    let mut tokens = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, tokens: &mut Vec<String>| {
        if !word.is_empty() {
            tokens.push(core::mem::take(word));
        }
    };
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if c.is_whitespace() {
            flush(&mut word, &mut tokens);
            i += 1;
        } else if c == '/' && next == Some('/') {
            flush(&mut word, &mut tokens);
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && next == Some('*') {
            flush(&mut word, &mut tokens);
            i += 2;
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                i += 1;
            }
            i = (i + 2).min(chars.len());
        } else if c == '"' || c == '\'' {
            flush(&mut word, &mut tokens);
            let mut lit = String::new();
            lit.push(c);
            lit.push(c);
            tokens.push(lit);
            i += 1;
            while i < chars.len() && chars[i] != c && chars[i] != '\n' {
                if chars[i] == '\\' {
                    i += 1;
                }
                i += 1;
            }
            i += 1;
        } else if !word.is_empty() && word.starts_with(|w: char| w.is_ascii_digit()) && c == '.' {
            // 3.14 stays one literal.
            word.push(c);
            i += 1;
        } else if is_punct(c) {
            flush(&mut word, &mut tokens);
            if let Some(n) = next {
                let mut pair = String::new();
                pair.push(c);
                pair.push(n);
                if OPERATORS.contains(&pair.as_str()) {
                    tokens.push(pair);
                    i += 2;
                    continue;
                }
            }
            tokens.push(c.to_string());
            i += 1;
        } else {
            word.push(c);
            i += 1;
        }
    }
    flush(&mut word, &mut tokens);
    tokens
}

/// Token ↔ index map. Index 0 is padding, 1 is out-of-vocabulary, real tokens
/// start at 2 in order of descending frequency (ties: first occurrence).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Vocabulary {
    /// Ranks the tokens of `documents` and keeps the `max_vocab` most frequent.
    pub fn build<'a, I, D>(documents: I, max_vocab: usize) -> Result<Self>
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = &'a String>,
    {
        if max_vocab == 0 {
            return Err(Error::Invalid("max_vocab must be at least 1".into()));
        }
        // token -> (count, first occurrence)
        let mut stats: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        let mut position = 0usize;
        for doc in documents {
            for tok in doc {
                let entry = stats.entry(tok.as_str()).or_insert((0, position));
                entry.0 += 1;
                position += 1;
            }
        }
        let mut ranked: Vec<(&str, usize, usize)> =
            stats.into_iter().map(|(t, (n, first))| (t, n, first)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        ranked.truncate(max_vocab);
        Self::from_tokens(ranked.into_iter().map(|(t, _, _)| String::from(t)).collect())
    }

    /// Tokenizes every sample of `corpus` and builds the vocabulary.
    pub fn from_corpus(corpus: &LabeledCorpus, max_vocab: usize) -> Result<Self> {
        let docs: Vec<Vec<String>> = corpus.samples.iter().map(|s| tokenize(&s.code)).collect();
        Self::build(docs.iter(), max_vocab)
    }

    /// Real tokens in index order (the first gets index 2).
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (k, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), k as u32 + 2).is_some() {
                return Err(Error::Invalid(alloc::format!("duplicate vocabulary token {t:?}")));
            }
        }
        Ok(Self { tokens, index })
    }

    /// Number of real tokens (excludes padding and OOV).
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Rows needed by an aligned embedding matrix: real tokens + 2.
    pub fn rows(&self) -> usize {
        self.tokens.len() + 2
    }

    pub fn index_of(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(OOV_INDEX)
    }

    /// Token for a real index (≥ 2).
    pub fn token(&self, index: u32) -> Option<&str> {
        (index as usize).checked_sub(2).and_then(|k| self.tokens.get(k)).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSequence {
    pub indices: Vec<u32>,
    pub true_length: usize,
}

/// Maps tokens to indices, keeps the last `max_len` of them and pads the
/// end with zeros.
pub fn encode_and_pad<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary, max_len: usize) -> Result<EncodedSequence> {
    if max_len == 0 {
        return Err(Error::Invalid("max_len must be at least 1".into()));
    }
    let start = tokens.len().saturating_sub(max_len);
    let mut indices: Vec<u32> = tokens[start..].iter().map(|t| vocab.index_of(t.as_ref())).collect();
    let true_length = indices.len();
    indices.resize(max_len, PAD_INDEX);
    Ok(EncodedSequence {
        indices,
        true_length,
    })
}

impl EncodedSequence {
    pub fn from_indices(indices: Vec<u32>) -> Self {
        let true_length = indices.iter().rposition(|&i| i != PAD_INDEX).map_or(0, |p| p + 1);
        Self {
            indices,
            true_length,
        }
    }
}

/// Tokenize + encode every sample of a corpus.
pub fn encode_corpus(corpus: &LabeledCorpus, vocab: &Vocabulary, max_len: usize) -> Result<Vec<(EncodedSequence, u8)>> {
    corpus
        .samples
        .iter()
        .map(|s| Ok((encode_and_pad(&tokenize(&s.code), vocab, max_len)?, s.label)))
        .collect()
}

/// Empty placeholder used where a vocabulary is not meaningful (sine task).
pub fn empty_vocabulary() -> Vocabulary {
    Vocabulary {
        tokens: vec![],
        index: BTreeMap::new(),
    }
}
