//! Line-oriented text checkpoint.
//!
//! ```text
//! qvuln-checkpoint
//! version 1
//! model qlstm
//! task classify
//! <key> <value>            hyperparameters, embedding_source, input_dim,
//!                          vocab_digest
//! tensor <name> <len> <v>… network tensors in canonical order
//! embedding <rows> <dim> <trainable> <source> <v>…
//! end
//! ```
//!
//! Values are written with 17 significant digits so a save/load round trip
//! reproduces every parameter bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use qvuln_core::embedding::{EmbeddingMatrix, EmbeddingSource};
use qvuln_core::model::{Model, ModelKind, Network, Task};
use qvuln_core::neural::LstmParams;
use qvuln_core::qlstm::{HiddenActivation, QlstmParams};
use qvuln_core::tensor::Parameters;
use qvuln_core::text::Vocabulary;

use crate::error::{Error, Result};
use crate::trainer::TrainConfig;

pub const MAGIC: &str = "qvuln-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub model: Model,
    /// SHA-256 of the vocabulary tokens joined by newlines; `None` for the
    /// sine task.
    pub vocab_digest: Option<String>,
}

pub fn vocab_digest(vocab: &Vocabulary) -> String {
    let mut h = Sha256::new();
    h.update(vocab.tokens().join("\n").as_bytes());
    hex::encode(h.finalize())
}

fn push_values(out: &mut String, values: &[f64]) {
    for v in values {
        write!(out, " {v:.16e}").unwrap();
    }
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        writeln!(s, "{MAGIC}\nversion {VERSION}").unwrap();
        for (k, v) in [
            ("model", c.model.as_str().to_string()),
            ("task", c.task.as_str().into()),
            ("embedding_source", c.embedding.as_str().into()),
            ("epochs", c.epochs.to_string()),
            ("batch", c.batch.to_string()),
            ("lr", format!("{:?}", c.lr)),
            ("seed", c.seed.to_string()),
            ("max_len", c.max_len.to_string()),
            ("threshold", format!("{:?}", c.threshold)),
            ("hidden", c.hidden.to_string()),
            ("d_basic", c.d_basic.to_string()),
            ("hidden_activation", c.hidden_activation.as_str().into()),
            ("sine_points", c.sine_points.to_string()),
            ("sine_window", c.sine_window.to_string()),
            ("input_dim", self.model.network.input_dim().to_string()),
            ("vocab_digest", self.vocab_digest.clone().unwrap_or_else(|| "none".into())),
        ] {
            writeln!(s, "{k} {v}").unwrap();
        }
        for t in self.model.network.tensors() {
            write!(s, "tensor {} {}", t.name, t.values.len()).unwrap();
            push_values(&mut s, t.values);
            s.push('\n');
        }
        if let Some(m) = &self.model.embedding {
            write!(s, "embedding {} {} {} {}", m.rows(), m.dim(), m.trainable, m.source.as_str()).unwrap();
            push_values(&mut s, m.as_slice());
            s.push('\n');
        }
        s.push_str("end\n");
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::format(path, line, msg);
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
        match lines.next() {
            Some((_, MAGIC)) => {}
            _ => return Err(err(1, format!("missing `{MAGIC}` header"))),
        }
        match lines.next().and_then(|(_, l)| l.strip_prefix("version ")) {
            Some(v) if v.trim() == VERSION.to_string() => {}
            Some(v) => {
                return Err(Error::Version {
                    found: v.trim().into(),
                    expected: VERSION,
                })
            }
            None => return Err(err(2, "missing version line".into())),
        }

        let mut header: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        let mut tensors: Vec<(usize, &str, Vec<f64>)> = Vec::new();
        let mut embedding = None;
        let mut ended = false;
        for (n, line) in lines.by_ref() {
            let mut words = line.split_ascii_whitespace();
            let Some(key) = words.next() else { continue };
            match key {
                "end" => {
                    ended = true;
                    break;
                }
                "tensor" => {
                    let name = words.next().ok_or_else(|| err(n, "tensor line without a name".into()))?;
                    let len = parse_num::<usize>(words.next(), n, "tensor length", path)?;
                    let values = parse_values(words, len, n, path)?;
                    tensors.push((n, name, values));
                }
                "embedding" => {
                    let rows = parse_num::<usize>(words.next(), n, "embedding rows", path)?;
                    let dim = parse_num::<usize>(words.next(), n, "embedding dim", path)?;
                    let trainable = parse_num::<bool>(words.next(), n, "trainable flag", path)?;
                    let source = words
                        .next()
                        .and_then(EmbeddingSource::parse)
                        .ok_or_else(|| err(n, "unknown embedding source".into()))?;
                    let values = parse_values(words, rows * dim, n, path)?;
                    embedding = Some(EmbeddingMatrix::from_parts(rows, dim, values, trainable, source)?);
                }
                _ => {
                    let value = line[key.len()..].trim();
                    if header.insert(key, (n, value)).is_some() {
                        return Err(err(n, format!("duplicate key `{key}`")));
                    }
                }
            }
        }
        if !ended {
            return Err(err(text.lines().count(), "truncated checkpoint (missing `end`)".into()));
        }

        let field = |key: &str| -> Result<(usize, &str)> {
            header.get(key).copied().ok_or_else(|| err(0, format!("missing key `{key}`")))
        };
        let choice = |key: &str, parse: &dyn Fn(&str) -> Option<()>| -> Result<()> {
            let (n, v) = field(key)?;
            parse(v).ok_or_else(|| err(n, format!("invalid {key} `{v}`")))
        };
        let num = |key: &str| -> Result<usize> {
            let (n, v) = field(key)?;
            parse_num(Some(v), n, key, path)
        };
        let float = |key: &str| -> Result<f64> {
            let (n, v) = field(key)?;
            parse_num(Some(v), n, key, path)
        };

        choice("model", &|v| ModelKind::parse(v).map(drop))?;
        choice("task", &|v| Task::parse(v).map(drop))?;
        choice("embedding_source", &|v| EmbeddingSource::parse(v).map(drop))?;
        choice("hidden_activation", &|v| HiddenActivation::parse(v).map(drop))?;
        let model_kind = ModelKind::parse(field("model")?.1).unwrap();
        let task = Task::parse(field("task")?.1).unwrap();
        let (seed_line, seed_text) = field("seed")?;

        let mut config = TrainConfig::new(model_kind, task);
        config.embedding = EmbeddingSource::parse(field("embedding_source")?.1).unwrap();
        config.epochs = num("epochs")?;
        config.batch = num("batch")?;
        config.lr = float("lr")?;
        config.seed = parse_num(Some(seed_text), seed_line, "seed", path)?;
        config.max_len = num("max_len")?;
        config.threshold = float("threshold")?;
        config.hidden = num("hidden")?;
        config.d_basic = num("d_basic")?;
        config.hidden_activation = HiddenActivation::parse(field("hidden_activation")?.1).unwrap();
        config.sine_points = num("sine_points")?;
        config.sine_window = num("sine_window")?;
        let input_dim = num("input_dim")?;
        let vocab_digest = match field("vocab_digest")?.1 {
            "none" => None,
            d => Some(d.to_string()),
        };

        let mut network = match config.model {
            ModelKind::Lstm => Network::Lstm(LstmParams::zeros(config.hidden, input_dim)),
            ModelKind::Qlstm => {
                let mut p = QlstmParams::zeros(input_dim);
                p.hidden_activation = config.hidden_activation;
                Network::Qlstm(p)
            }
        };
        {
            let mut slots = network.tensors_mut();
            if slots.len() != tensors.len() {
                return Err(err(0, format!("expected {} tensors, found {}", slots.len(), tensors.len())));
            }
            for (slot, (n, name, values)) in slots.iter_mut().zip(&tensors) {
                if slot.name != *name {
                    return Err(err(*n, format!("expected tensor `{}`, found `{name}`", slot.name)));
                }
                if slot.values.len() != values.len() {
                    return Err(err(*n, format!("tensor `{name}` has {} values, expected {}", values.len(), slot.values.len())));
                }
                slot.values.copy_from_slice(values);
            }
        }
        match (task, &embedding) {
            (Task::Classify, None) => return Err(err(0, "classification checkpoint without an embedding".into())),
            (Task::Classify, Some(m)) if m.dim() != input_dim => {
                return Err(err(0, format!("embedding dim {} does not match input_dim {input_dim}", m.dim())))
            }
            (Task::Sine, Some(_)) => return Err(err(0, "sine checkpoint must not carry an embedding".into())),
            _ => {}
        }
        Ok(Self {
            config,
            model: Model {
                task,
                network,
                embedding,
            },
            vocab_digest,
        })
    }

    /// Warning text when `vocab` differs from the one used for training.
    pub fn digest_warning(&self, vocab: &Vocabulary) -> Option<String> {
        let expected = self.vocab_digest.as_deref()?;
        let actual = vocab_digest(vocab);
        (expected != actual).then(|| {
            format!("vocabulary digest {actual} differs from the checkpoint's {expected}; token indices may not match")
        })
    }
}

fn parse_num<T: std::str::FromStr>(word: Option<&str>, line: usize, what: &str, path: &Path) -> Result<T> {
    let w = word.ok_or_else(|| Error::format(path, line, format!("missing {what}")))?;
    w.parse()
        .map_err(|_| Error::format(path, line, format!("invalid {what} `{w}`")))
}

fn parse_values<'a>(words: impl Iterator<Item = &'a str>, expected: usize, line: usize, path: &Path) -> Result<Vec<f64>> {
    let values = words
        .map(|w| parse_num::<f64>(Some(w), line, "value", path))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::format(path, line, format!("expected {expected} values, found {}", values.len())));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::format(path, line, format!("non-finite value {v}")));
    }
    Ok(values)
}
