use std::path::{Path, PathBuf};

use qvuln::checkpoint::Checkpoint;
use qvuln::cli::{run, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use qvuln::corpus::{read_encoded, read_vocab, write_vocab};
use qvuln::report::{read_curve, MetricsReport, CURVE_HEADER};
use qvuln_core::tensor::Parameters;
use qvuln_core::text::Vocabulary;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn q(args: &[&str]) -> i32 {
    run(std::iter::once("qvuln").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn preprocessed(dir: &Path) -> PathBuf {
    let enc = dir.join("enc");
    let csv = fixtures().join("csv");
    assert_eq!(q(&["preprocess", "--data-dir", s(&csv), "--out", s(&enc), "--max-len", "24"]), EXIT_OK);
    enc
}

#[test]
fn unknown_model_is_a_usage_error() {
    assert_eq!(q(&["train", "--model", "tcn"]), EXIT_USAGE);
    assert_eq!(q(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(q(&["gradcheck", "--seed", "1", "--bogus"]), EXIT_USAGE);
}

#[test]
fn classify_without_data_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let code = q(&["train", "--model", "lstm", "--out", s(&dir.path().join("c")), "--metrics", s(&dir.path().join("m"))]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn missing_and_malformed_inputs_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(q(&["preprocess", "--data-dir", s(&dir.path().join("nope")), "--out", s(dir.path())]), EXIT_DATA);
    let bad = dir.path().join("csv");
    std::fs::create_dir(&bad).unwrap();
    std::fs::write(bad.join("train.csv"), "code,label\n\"int x;\",2\n").unwrap();
    assert_eq!(q(&["preprocess", "--data-dir", s(&bad), "--out", s(&dir.path().join("o"))]), EXIT_DATA);
    let ck = dir.path().join("ck");
    std::fs::write(&ck, "not a checkpoint\n").unwrap();
    assert_eq!(q(&["census", "--ckpt", s(&ck)]), EXIT_DATA);
}

#[test]
fn help_snapshot_lists_every_flag_with_default() {
    let mut text = String::new();
    for sub in ["preprocess", "train", "eval", "sine-demo", "gradcheck", "census"] {
        let err = <qvuln::cli::Cli as clap::Parser>::try_parse_from(["qvuln", sub, "--help"]).unwrap_err();
        let help = err.render().to_string();
        let usage = help.lines().find(|l| l.starts_with("Usage:")).unwrap();
        let options: Vec<&str> = help.lines().skip_while(|l| !l.starts_with("Options:")).skip(1).collect();
        let starts: Vec<usize> = (0..options.len()).filter(|&k| options[k].trim_start().starts_with('-')).collect();
        for (n, &k) in starts.iter().enumerate() {
            let end = starts.get(n + 1).copied().unwrap_or(options.len());
            let block = options[k..end].join(" ");
            let flag = block.split_whitespace().find(|w| w.starts_with("--")).unwrap();
            if flag == "--help" {
                continue;
            }
            let required = usage.contains(&format!("] {flag} <")) || usage.contains(&format!("> {flag} <")) || usage.contains(&format!("{sub} {flag} <"));
            assert!(required || block.contains("[default: "), "{sub} {flag} has neither a default nor is required");
        }
        text.push_str(&format!("== {sub}\n{help}\n"));
    }
    let snapshot = fixtures().join("help.snapshot");
    if std::env::var_os("UPDATE_SNAPSHOTS").is_some() {
        std::fs::write(&snapshot, &text).unwrap();
    }
    let expected = std::fs::read_to_string(&snapshot).expect("snapshot exists (regenerate with UPDATE_SNAPSHOTS=1)");
    assert_eq!(text, expected);
}

#[test]
fn preprocess_outputs_reload() {
    let dir = tempfile::tempdir().unwrap();
    let enc = preprocessed(dir.path());
    let corpus = read_encoded(&enc).unwrap();
    assert_eq!((corpus.train.len(), corpus.validation.len(), corpus.test.len()), (8, 2, 4));
    assert_eq!(corpus.max_len, 24);
    assert!(corpus.vocab.index_of("strcpy") >= 2);
    assert_eq!(corpus.vocab.index_of("//"), 1, "comments are stripped");
    let again = dir.path().join("vocab2.txt");
    write_vocab(&again, &corpus.vocab).unwrap();
    assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(enc.join("vocab.txt")).unwrap());
    assert_eq!(read_vocab(&again).unwrap(), corpus.vocab);
}

#[test]
fn classify_pipeline_closes_for_every_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let enc = preprocessed(dir.path());
    let glove = fixtures().join("glove.txt");
    let fasttext = fixtures().join("fasttext.vec");
    let cases: [(&str, &str, Vec<&Path>); 4] = [
        ("lstm", "basic", vec![]),
        ("lstm", "glove", vec![&glove]),
        ("lstm", "fasttext", vec![&fasttext]),
        ("qlstm", "glove+fasttext", vec![&glove, &fasttext]),
    ];
    for (model, emb, vectors) in cases {
        let ck = dir.path().join(format!("{model}-{emb}.ckpt"));
        let m = dir.path().join(format!("{model}-{emb}.json"));
        let mut args = vec!["train", "--model", model, "--embedding", emb, "--data", s(&enc), "--epochs", "2", "--hidden", "4", "--embedding-dim", "6"];
        args.extend(["--out", s(&ck), "--metrics", s(&m)]);
        for v in &vectors {
            args.extend(["--vectors", s(v)]);
        }
        assert_eq!(q(&args), EXIT_OK, "{model} {emb}");
        let report = MetricsReport::read(&m).unwrap();
        assert_eq!(report.loss_curve.len(), 2);
        let loaded = Checkpoint::load(&ck).unwrap();
        assert_eq!(report.parameter_count, loaded.model.parameter_count());
        assert_eq!(loaded.model.embedding.as_ref().unwrap().trainable, emb == "basic");
        let e = dir.path().join(format!("{model}-{emb}-eval.json"));
        assert_eq!(q(&["eval", "--ckpt", s(&ck), "--data", s(&enc), "--metrics", s(&e)]), EXIT_OK);
        let r = MetricsReport::read(&e).unwrap();
        assert_eq!(r.samples, 4);
        let total = r.tp.unwrap() + r.fp.unwrap() + r.tn.unwrap() + r.fn_.unwrap();
        assert_eq!(total, 4);
        assert!(r.warnings.is_empty());
        assert_eq!(q(&["census", "--ckpt", s(&ck)]), EXIT_OK);
    }
}

#[test]
fn wrong_vector_count_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let enc = preprocessed(dir.path());
    let glove = fixtures().join("glove.txt");
    let args = ["train", "--model", "lstm", "--embedding", "glove+fasttext", "--vectors", s(&glove)];
    let code = q(&[&args[..], &["--data", s(&enc), "--out", s(&dir.path().join("c")), "--metrics", s(&dir.path().join("m"))]].concat());
    assert_eq!(code, EXIT_DATA);
}

#[test]
fn eval_warns_on_vocabulary_digest_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let enc = preprocessed(dir.path());
    let ck = dir.path().join("c.ckpt");
    let m = dir.path().join("m.json");
    assert_eq!(q(&["train", "--model", "lstm", "--data", s(&enc), "--epochs", "1", "--hidden", "3", "--out", s(&ck), "--metrics", s(&m)]), EXIT_OK);
    // Same size, different order: indices still fit, but the digest changes.
    let vocab = read_vocab(&enc.join("vocab.txt")).unwrap();
    let mut tokens = vocab.tokens().to_vec();
    tokens.swap(0, 1);
    write_vocab(&enc.join("vocab.txt"), &Vocabulary::from_tokens(tokens).unwrap()).unwrap();
    let e = dir.path().join("e.json");
    assert_eq!(q(&["eval", "--ckpt", s(&ck), "--data", s(&enc), "--metrics", s(&e)]), EXIT_OK);
    let r = MetricsReport::read(&e).unwrap();
    assert_eq!(r.warnings.len(), 1, "{:?}", r.warnings);
    assert!(r.warnings[0].contains("digest"));
}

#[test]
fn tampered_checkpoint_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("c.ckpt");
    let m = dir.path().join("m.json");
    assert_eq!(q(&["train", "--model", "lstm", "--task", "sine", "--epochs", "1", "--hidden", "2", "--out", s(&ck), "--metrics", s(&m)]), EXIT_OK);
    let text = std::fs::read_to_string(&ck).unwrap();
    std::fs::write(&ck, text.replacen("version 1", "version 9", 1)).unwrap();
    assert!(matches!(Checkpoint::load(&ck), Err(qvuln::Error::Version { .. })));
    assert_eq!(q(&["eval", "--ckpt", s(&ck), "--metrics", s(&m)]), EXIT_DATA);
}

#[test]
fn census_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("c.ckpt");
    let m = dir.path().join("m.json");
    assert_eq!(q(&["train", "--model", "qlstm", "--task", "sine", "--epochs", "1", "--sine-points", "8", "--out", s(&ck), "--metrics", s(&m)]), EXIT_OK);
    assert_eq!(q(&["census", "--ckpt", s(&ck)]), EXIT_OK);
    let loaded = Checkpoint::load(&ck).unwrap();
    assert_eq!(loaded.model.parameter_count(), 4 * (4 * 5 + 30) + 2 * (4 * 4 + 30) + 5);
}

#[test]
fn sine_train_curves_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("c.ckpt");
    let m = dir.path().join("m.json");
    let curves = dir.path().join("curves");
    let args = ["train", "--model", "lstm", "--task", "sine", "--epochs", "3", "--hidden", "4", "--sine-points", "20"];
    assert_eq!(q(&[&args[..], &["--out", s(&ck), "--metrics", s(&m), "--curves", s(&curves)]].concat()), EXIT_OK);
    for epoch in 1..=3 {
        let path = curves.join(format!("lstm_epoch{epoch}.csv"));
        assert!(std::fs::read_to_string(&path).unwrap().starts_with(CURVE_HEADER));
        let points = read_curve(&path).unwrap();
        assert_eq!(points.len(), 20);
        assert!(points.iter().all(|p| p.epoch == epoch));
    }
    let report = MetricsReport::read(&m).unwrap();
    let e = dir.path().join("e.json");
    assert_eq!(q(&["eval", "--ckpt", s(&ck), "--metrics", s(&e)]), EXIT_OK);
    assert_eq!(MetricsReport::read(&e).unwrap().mse, report.mse);
}

#[test]
fn gradcheck_passes() {
    assert_eq!(q(&["gradcheck", "--seed", "7", "--trials", "2"]), EXIT_OK);
    assert_eq!(q(&["gradcheck", "--trials", "0"]), EXIT_USAGE);
}
