//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error,
//! 3 failed verification (gradcheck, census).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use qvuln_core::embedding::EmbeddingSource;
use qvuln_core::gradcheck::{check_lstm, check_qlstm, check_vqc, CheckReport};
use qvuln_core::model::{ModelKind, Task};
use qvuln_core::qlstm::HiddenActivation;
use qvuln_core::tensor::Parameters;
use qvuln_core::text::Split;

use crate::checkpoint::{vocab_digest, Checkpoint};
use crate::corpus::{preprocess, read_encoded, write_encoded, PreprocessOptions};
use crate::error::{Error, Result};
use crate::report::{curve_mse, write_curve, CurvePoint};
use crate::trainer::{build_model, evaluate, train, Dataset, TrainConfig};
use crate::vectors::load_vectors;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qvuln", version, about = "Hybrid classical/quantum LSTM vulnerability classifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize and encode a CSV corpus (train.csv, validation.csv, test.csv)
    Preprocess(PreprocessArgs),
    /// Train a model and write a checkpoint plus a metrics report
    Train(TrainArgs),
    /// Evaluate a checkpoint on a preprocessed split
    Eval(EvalArgs),
    /// Train on the sine task and dump epoch-1 and final-epoch curves
    SineDemo(SineDemoArgs),
    /// Compare analytic gradients with central finite differences
    Gradcheck(GradcheckArgs),
    /// Count trainable parameters and compare with the closed form
    Census(CensusArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Lstm,
    Qlstm,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Lstm => ModelKind::Lstm,
            ModelArg::Qlstm => ModelKind::Qlstm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoModelArg {
    Lstm,
    Qlstm,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Classify,
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmbeddingArg {
    Basic,
    Glove,
    Fasttext,
    #[value(name = "glove+fasttext")]
    GloveFasttext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ActivationArg {
    Sigmoid,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Directory holding train.csv and optionally validation.csv and test.csv
    #[arg(long, value_name = "DIR")]
    pub data_dir: PathBuf,
    /// Tokens kept per sample (the last ones)
    #[arg(long, default_value_t = 100)]
    pub max_len: usize,
    /// Vocabulary size cap, excluding padding and OOV
    #[arg(long, default_value_t = 10000)]
    pub max_vocab: usize,
    /// Down-sample the majority class of every split [default: off]
    #[arg(long, default_value_t = false)]
    pub balance: bool,
    /// Seed for balancing
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory (vocab.txt and one .tsv per split)
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value_t = TaskArg::Classify)]
    pub task: TaskArg,
    /// Preprocessed corpus directory, required for classify [default: none]
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EmbeddingArg::Basic)]
    pub embedding: EmbeddingArg,
    /// Word-vector text file; repeat for glove+fasttext (GloVe first) [default: none]
    #[arg(long, value_name = "FILE")]
    pub vectors: Vec<PathBuf>,
    /// Training epochs [default: 30 for sine, 10 for classify]
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    /// Adam learning rate [default: 0.01 for sine, 0.001 for classify]
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Decision threshold on the positive-class probability
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Hidden units of the classical LSTM
    #[arg(long, default_value_t = 50)]
    pub hidden: usize,
    /// Dimension of the basic (trainable) embedding
    #[arg(long, default_value_t = 50)]
    pub embedding_dim: usize,
    /// Activation producing the quantum cell's hidden state
    #[arg(long, value_enum, default_value_t = ActivationArg::Sigmoid)]
    pub hidden_activation: ActivationArg,
    /// Points on one period of the sine task
    #[arg(long, default_value_t = 100)]
    pub sine_points: usize,
    /// Input window of the sine task
    #[arg(long, default_value_t = 4)]
    pub sine_window: usize,
    /// Checkpoint output file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Metrics report output file (JSON)
    #[arg(long, value_name = "FILE")]
    pub metrics: PathBuf,
    /// Directory for per-epoch prediction dumps [default: none]
    #[arg(long, value_name = "DIR")]
    pub curves: Option<PathBuf>,
    /// Record wall time as 0 so repeated runs give identical files [default: off]
    #[arg(long, default_value_t = false)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    pub ckpt: PathBuf,
    /// Preprocessed corpus directory (ignored for sine checkpoints) [default: none]
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,
    /// Decision threshold [default: the checkpoint's]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Metrics report output file (JSON)
    #[arg(long, value_name = "FILE")]
    pub metrics: PathBuf,
    /// Record wall time as 0 so repeated runs give identical files [default: off]
    #[arg(long, default_value_t = false)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct SineDemoArgs {
    #[arg(long, value_enum, default_value_t = DemoModelArg::Both)]
    pub model: DemoModelArg,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    /// Output directory for <model>_epoch1.csv and <model>_epoch<N>.csv
    #[arg(long, value_name = "DIR")]
    pub curves: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random instances per suite
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    #[arg(long, value_name = "FILE")]
    pub ckpt: PathBuf,
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok,
    VerificationFailed,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::VerificationFailed) => EXIT_VERIFY,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::SineDemo(a) => cmd_sine_demo(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Census(a) => cmd_census(a),
    }
}

fn cmd_preprocess(a: PreprocessArgs) -> Result<Outcome> {
    if a.max_len == 0 {
        return Err(Error::Usage("--max-len must be at least 1".into()));
    }
    let opts = PreprocessOptions {
        max_len: a.max_len,
        max_vocab: a.max_vocab,
        balance: a.balance,
        seed: a.seed,
    };
    let corpus = preprocess(&a.data_dir, &opts)?;
    write_encoded(&a.out, &corpus)?;
    log::info!(
        "vocabulary {} tokens; train {}, validation {}, test {}",
        corpus.vocab.len(),
        corpus.train.len(),
        corpus.validation.len(),
        corpus.test.len()
    );
    Ok(Outcome::Ok)
}

fn train_config(a: &TrainArgs) -> TrainConfig {
    let task = match a.task {
        TaskArg::Classify => Task::Classify,
        TaskArg::Sine => Task::Sine,
    };
    let mut c = TrainConfig::new(a.model.into(), task);
    c.embedding = match a.embedding {
        EmbeddingArg::Basic => EmbeddingSource::Basic,
        EmbeddingArg::Glove => EmbeddingSource::Glove,
        EmbeddingArg::Fasttext => EmbeddingSource::FastText,
        EmbeddingArg::GloveFasttext => EmbeddingSource::GloveFastText,
    };
    if let Some(e) = a.epochs {
        c.epochs = e;
    }
    if let Some(lr) = a.lr {
        c.lr = lr;
    }
    c.batch = a.batch;
    c.seed = a.seed;
    c.threshold = a.threshold;
    c.hidden = a.hidden;
    c.d_basic = a.embedding_dim;
    c.hidden_activation = match a.hidden_activation {
        ActivationArg::Sigmoid => HiddenActivation::Sigmoid,
        ActivationArg::Identity => HiddenActivation::Identity,
    };
    c.sine_points = a.sine_points;
    c.sine_window = a.sine_window;
    c
}

fn cmd_train(a: TrainArgs) -> Result<Outcome> {
    let mut config = train_config(&a);
    config.validate()?;
    let (model, train_data, eval_data, digest) = match config.task {
        Task::Sine => {
            if a.data.is_some() {
                log::warn!("--data is ignored for the sine task");
            }
            let data = Dataset::sine(config.sine_points, config.sine_window)?;
            (build_model(&config, None, &[])?, data.clone(), data, None)
        }
        Task::Classify => {
            let dir = a
                .data
                .as_deref()
                .ok_or_else(|| Error::Usage("--data is required for --task classify".into()))?;
            let corpus = read_encoded(dir)?;
            config.max_len = corpus.max_len;
            let tables = a.vectors.iter().map(|p| load_vectors(p)).collect::<Result<Vec<_>>>()?;
            let model = build_model(&config, Some(&corpus.vocab), &tables)?;
            (
                model,
                Dataset::classification(&corpus.train),
                Dataset::classification(&corpus.validation),
                Some(vocab_digest(&corpus.vocab)),
            )
        }
    };
    let outcome = train(&config, model, &train_data, &eval_data, a.curves.is_some())?;
    let mut report = outcome.report;
    log::info!("wall time {:.3} s", report.wall_time_seconds);
    if a.deterministic {
        report.wall_time_seconds = 0.0;
    }
    if let Some(dir) = &a.curves {
        write_epoch_curves(dir, config.model.as_str(), &outcome.curves)?;
    }
    Checkpoint {
        config,
        model: outcome.model,
        vocab_digest: digest,
    }
    .save(&a.out)?;
    report.write(&a.metrics)?;
    print_summary(&report);
    Ok(Outcome::Ok)
}

fn write_epoch_curves(dir: &Path, prefix: &str, points: &[CurvePoint]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let last = points.iter().map(|p| p.epoch).max().unwrap_or(0);
    for epoch in 1..=last {
        let pts: Vec<CurvePoint> = points.iter().filter(|p| p.epoch == epoch).cloned().collect();
        write_curve(&dir.join(format!("{prefix}_epoch{epoch}.csv")), &pts)?;
    }
    Ok(())
}

fn print_summary(r: &crate::report::MetricsReport) {
    let mut out = std::io::stdout().lock();
    let mut line = format!("{} {} samples={}", r.model, r.task, r.samples);
    for (k, v) in [("accuracy", r.accuracy), ("precision", r.precision), ("recall", r.recall), ("f1", r.f1), ("mse", r.mse)] {
        if let Some(v) = v {
            line.push_str(&format!(" {k}={v:.6}"));
        }
    }
    let _ = writeln!(out, "{line}");
}

fn cmd_eval(a: EvalArgs) -> Result<Outcome> {
    let start = std::time::Instant::now();
    let ck = Checkpoint::load(&a.ckpt)?;
    let threshold = a.threshold.unwrap_or(ck.config.threshold);
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Usage(format!("threshold {threshold} must lie in (0, 1)")));
    }
    let mut warnings = Vec::new();
    let data = match ck.model.task {
        Task::Sine => Dataset::sine(ck.config.sine_points, ck.config.sine_window)?,
        Task::Classify => {
            let dir = a
                .data
                .as_deref()
                .ok_or_else(|| Error::Usage("--data is required for classification checkpoints".into()))?;
            let corpus = read_encoded(dir)?;
            if let Some(w) = ck.digest_warning(&corpus.vocab) {
                log::warn!("{w}");
                warnings.push(w);
            }
            let rows = ck.model.embedding.as_ref().map_or(0, |m| m.rows());
            if corpus.vocab.rows() != rows {
                return Err(Error::format(
                    dir.join("vocab.txt"),
                    0,
                    format!("vocabulary needs {} embedding rows, checkpoint has {rows}", corpus.vocab.rows()),
                ));
            }
            let split = match a.split {
                SplitArg::Train => Split::Train,
                SplitArg::Validation => Split::Validation,
                SplitArg::Test => Split::Test,
            };
            let samples = corpus.split(split);
            if samples.is_empty() {
                return Err(qvuln_core::Error::EmptyCorpus.into());
            }
            Dataset::classification(samples)
        }
    };
    let mut report = evaluate(&ck.model, &data, threshold)?;
    report.warnings = warnings;
    let elapsed = start.elapsed().as_secs_f64();
    log::info!("wall time {elapsed:.3} s");
    report.wall_time_seconds = if a.deterministic { 0.0 } else { elapsed };
    report.write(&a.metrics)?;
    print_summary(&report);
    Ok(Outcome::Ok)
}

fn cmd_sine_demo(a: SineDemoArgs) -> Result<Outcome> {
    let kinds: &[ModelKind] = match a.model {
        DemoModelArg::Lstm => &[ModelKind::Lstm],
        DemoModelArg::Qlstm => &[ModelKind::Qlstm],
        DemoModelArg::Both => &[ModelKind::Lstm, ModelKind::Qlstm],
    };
    std::fs::create_dir_all(&a.curves).map_err(|e| Error::io(&a.curves, e))?;
    let mut rows = Vec::new();
    for &kind in kinds {
        let mut c = TrainConfig::new(kind, Task::Sine);
        c.epochs = a.epochs;
        c.seed = a.seed;
        c.lr = a.lr;
        c.batch = a.batch;
        c.validate()?;
        let data = Dataset::sine(c.sine_points, c.sine_window)?;
        let out = train(&c, build_model(&c, None, &[])?, &data, &data, true)?;
        let epoch = |e: usize| -> Vec<CurvePoint> { out.curves.iter().filter(|p| p.epoch == e).cloned().collect() };
        let (first, last) = (epoch(1), epoch(a.epochs));
        write_curve(&a.curves.join(format!("{}_epoch1.csv", kind.as_str())), &first)?;
        write_curve(&a.curves.join(format!("{}_epoch{}.csv", kind.as_str(), a.epochs)), &last)?;
        rows.push((kind, curve_mse(&first), curve_mse(&last), out.report.wall_time_seconds));
    }
    let mut o = std::io::stdout().lock();
    let _ = writeln!(o, "{:<6} {:>14} {:>14} {:>10}", "model", "mse_epoch1", format!("mse_epoch{}", a.epochs), "seconds");
    for (kind, first, last, secs) in rows {
        let _ = writeln!(o, "{:<6} {first:>14.6} {last:>14.6} {secs:>10.2}", kind.as_str());
    }
    Ok(Outcome::Ok)
}

fn cmd_gradcheck(a: GradcheckArgs) -> Result<Outcome> {
    if a.trials == 0 {
        return Err(Error::Usage("--trials must be at least 1".into()));
    }
    let reports: [CheckReport; 3] = [check_vqc(a.seed, a.trials)?, check_lstm(a.seed, a.trials)?, check_qlstm(a.seed, a.trials)?];
    let mut o = std::io::stdout().lock();
    let mut ok = true;
    for r in &reports {
        let status = if r.passed() { "pass" } else { "FAIL" };
        ok &= r.passed();
        let _ = writeln!(o, "{status} {:<6} compared={:<6} max_error={:.3e} tolerance={:.0e}", r.name, r.compared, r.max_error, r.tolerance);
    }
    Ok(if ok { Outcome::Ok } else { Outcome::VerificationFailed })
}

fn cmd_census(a: CensusArgs) -> Result<Outcome> {
    let ck = Checkpoint::load(&a.ckpt)?;
    let counted = ck.model.parameter_count();
    let analytic = ck.model.analytic_census();
    let mut o = std::io::stdout().lock();
    let _ = writeln!(o, "{} parameters: counted={counted} analytic={analytic}", ck.model.kind().as_str());
    if counted != analytic {
        eprintln!("error: parameter count {counted} differs from the closed form {analytic}");
        return Ok(Outcome::VerificationFailed);
    }
    Ok(Outcome::Ok)
}
