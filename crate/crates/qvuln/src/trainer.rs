//! Training and evaluation drivers: configuration, model construction,
//! wall-clock timing and report assembly.

use std::time::Instant;

use qvuln_core::embedding::{build_embedding_matrix, EmbeddingSource, VectorTable, DEFAULT_BASIC_DIM};
use qvuln_core::metrics::ConfusionMatrix;
use qvuln_core::model::{Example, Input, Model, ModelKind, Network, Task};
use qvuln_core::neural::{AdamConfig, LstmParams, OptimizerState, DEFAULT_HIDDEN};
use qvuln_core::qlstm::{HiddenActivation, QlstmParams};
use qvuln_core::sine::{sine_task, DEFAULT_POINTS, DEFAULT_WINDOW};
use qvuln_core::tensor::Parameters;
use qvuln_core::text::{EncodedSequence, Vocabulary};
use qvuln_core::training::{rng, train_epoch};

use crate::error::{Error, Result};
use crate::report::{CurvePoint, MetricsReport};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub task: Task,
    pub embedding: EmbeddingSource,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
    pub max_len: usize,
    pub threshold: f64,
    /// Hidden units of the classical LSTM (the quantum cell is fixed at 4).
    pub hidden: usize,
    pub d_basic: usize,
    pub hidden_activation: HiddenActivation,
    pub sine_points: usize,
    pub sine_window: usize,
}

impl TrainConfig {
    /// Defaults: 30 epochs and lr 1e-2 for the sine task, 10 epochs and
    /// lr 1e-3 for classification; batch 16, seed 42, threshold 0.5.
    pub fn new(model: ModelKind, task: Task) -> Self {
        let (epochs, lr) = match task {
            Task::Sine => (30, 1e-2),
            Task::Classify => (10, 1e-3),
        };
        Self {
            model,
            task,
            embedding: EmbeddingSource::Basic,
            epochs,
            batch: 16,
            lr,
            seed: 42,
            max_len: qvuln_core::text::DEFAULT_MAX_LEN,
            threshold: 0.5,
            hidden: DEFAULT_HIDDEN,
            d_basic: DEFAULT_BASIC_DIM,
            hidden_activation: HiddenActivation::Sigmoid,
            sine_points: DEFAULT_POINTS,
            sine_window: DEFAULT_WINDOW,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Usage(m));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.batch == 0 {
            return bad("batch size must be at least 1".into());
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold {} must lie in (0, 1)", self.threshold));
        }
        if !self.lr.is_finite() || self.lr < 0.0 {
            return bad(format!("learning rate {} must be finite and non-negative", self.lr));
        }
        if self.hidden == 0 || self.d_basic == 0 || self.max_len == 0 {
            return bad("hidden, embedding dimension and max_len must be at least 1".into());
        }
        Ok(())
    }
}

/// Examples plus the x coordinate used when dumping prediction curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub examples: Vec<Example>,
    pub xs: Vec<f64>,
}

impl Dataset {
    pub fn sine(points: usize, window: usize) -> Result<Self> {
        let samples = sine_task(points, window)?;
        Ok(Self {
            xs: samples.iter().map(|s| s.x).collect(),
            examples: samples
                .into_iter()
                .map(|s| Example {
                    input: Input::Vectors(s.inputs),
                    target: s.target,
                })
                .collect(),
        })
    }

    pub fn classification(samples: &[(EncodedSequence, u8)]) -> Self {
        Self {
            xs: (0..samples.len()).map(|k| k as f64).collect(),
            examples: samples
                .iter()
                .map(|(seq, label)| Example {
                    input: Input::Tokens(seq.clone()),
                    target: f64::from(*label),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Freshly initialized model for `config`. Classification needs the
/// vocabulary (and vector tables for pretrained embeddings).
pub fn build_model(config: &TrainConfig, vocab: Option<&Vocabulary>, tables: &[VectorTable]) -> Result<Model> {
    let (embedding, d_in) = match config.task {
        Task::Sine => (None, 1),
        Task::Classify => {
            let vocab = vocab.ok_or_else(|| Error::Usage("classification requires a vocabulary".into()))?;
            let m = build_embedding_matrix(vocab, tables, config.embedding, config.seed.wrapping_add(1), config.d_basic)?;
            let d = m.dim();
            (Some(m), d)
        }
    };
    let mut r = rng(config.seed);
    let network = match config.model {
        ModelKind::Lstm => Network::Lstm(LstmParams::init(config.hidden, d_in, &mut r)),
        ModelKind::Qlstm => {
            let mut p = QlstmParams::init(d_in, &mut r);
            p.hidden_activation = config.hidden_activation;
            Network::Qlstm(p)
        }
    };
    Ok(Model {
        task: config.task,
        network,
        embedding,
    })
}

pub struct TrainOutcome {
    pub model: Model,
    pub report: MetricsReport,
    /// Per-epoch predictions on the evaluation data (empty unless requested).
    pub curves: Vec<CurvePoint>,
}

pub fn predictions(model: &Model, data: &Dataset, epoch: usize) -> Result<Vec<CurvePoint>> {
    data.examples
        .iter()
        .zip(&data.xs)
        .map(|(ex, &x)| {
            Ok(CurvePoint {
                x,
                actual: ex.target,
                predicted: model.predict(&ex.input)?,
                epoch,
            })
        })
        .collect()
}

/// Trains `model` on `train` and reports on `eval`.
pub fn train(config: &TrainConfig, mut model: Model, train: &Dataset, eval: &Dataset, record_curves: bool) -> Result<TrainOutcome> {
    config.validate()?;
    if train.is_empty() {
        return Err(qvuln_core::Error::EmptyCorpus.into());
    }
    let start = Instant::now();
    let mut shuffler = rng(config.seed.wrapping_add(2));
    let mut opt = OptimizerState::new(AdamConfig {
        lr: config.lr,
        ..AdamConfig::default()
    });
    let mut loss_curve = Vec::with_capacity(config.epochs);
    let mut curves = Vec::new();
    for epoch in 1..=config.epochs {
        let loss = train_epoch(&mut model, &mut opt, &train.examples, config.batch, &mut shuffler)?;
        log::info!("epoch {epoch}/{}: mean training loss {loss:.6}", config.epochs);
        loss_curve.push(loss);
        if record_curves {
            curves.extend(predictions(&model, eval, epoch)?);
        }
    }
    let eval_data = if eval.is_empty() {
        log::warn!("evaluation split is empty; reporting on training data");
        train
    } else {
        eval
    };
    let mut report = evaluate(&model, eval_data, config.threshold)?;
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    report.loss_curve = loss_curve;
    Ok(TrainOutcome { model, report, curves })
}

/// Thresholded confusion-matrix metrics (classification) or MSE with
/// per-point predictions (sine).
pub fn evaluate(model: &Model, data: &Dataset, threshold: f64) -> Result<MetricsReport> {
    let mut report = MetricsReport {
        model: model.kind().as_str().into(),
        task: model.task.as_str().into(),
        samples: data.len(),
        accuracy: None,
        precision: None,
        recall: None,
        f1: None,
        tp: None,
        fp: None,
        tn: None,
        fn_: None,
        mse: None,
        wall_time_seconds: 0.0,
        parameter_count: model.parameter_count(),
        loss_curve: Vec::new(),
        undefined: Vec::new(),
        warnings: Vec::new(),
        predictions: None,
    };
    match model.task {
        Task::Classify => {
            let mut cm = ConfusionMatrix::default();
            for ex in &data.examples {
                let p = model.predict(&ex.input)?;
                cm.record(p >= threshold, ex.target == 1.0);
            }
            let s = cm.scores();
            report.accuracy = Some(s.accuracy);
            report.precision = Some(s.precision);
            report.recall = Some(s.recall);
            report.f1 = Some(s.f1);
            report.tp = Some(cm.tp);
            report.fp = Some(cm.fp);
            report.tn = Some(cm.tn);
            report.fn_ = Some(cm.fn_);
            for (flag, name) in [
                (s.accuracy_undefined, "accuracy"),
                (s.precision_undefined, "precision"),
                (s.recall_undefined, "recall"),
                (s.f1_undefined, "f1"),
            ] {
                if flag {
                    log::warn!("{name} has a zero denominator; reported as 0");
                    report.undefined.push(name.into());
                }
            }
        }
        Task::Sine => {
            let points = predictions(model, data, 0)?;
            report.mse = Some(crate::report::curve_mse(&points));
            report.predictions = Some(points);
        }
    }
    Ok(report)
}
