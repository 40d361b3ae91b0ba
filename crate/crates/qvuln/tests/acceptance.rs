//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;

use qvuln::checkpoint::Checkpoint;
use qvuln::cli::run;
use qvuln::report::{read_curve, CurvePoint, MetricsReport};
use qvuln::trainer::{build_model, TrainConfig};
use qvuln_core::metrics::ConfusionMatrix;
use qvuln_core::model::{Example, Input, Model, ModelKind, Network, Task};
use qvuln_core::neural::LstmParams;
use qvuln_core::qlstm::QlstmParams;
use qvuln_core::qsim::{Gate, StateVector};
use qvuln_core::tensor::Parameters;
use qvuln_core::text::Vocabulary;
use qvuln_core::training::{rng, Rng as ChaCha};
use qvuln_core::vqc::{vqc_forward, vqc_gradients, VqcParams};

type Verdict = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn q(args: &[&str]) -> i32 {
    run(std::iter::once("qvuln").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {:.1} s, limit {:.0} s", elapsed.as_secs_f64(), limit.as_secs_f64()))
    }
}

// 1 ------------------------------------------------------------------------

fn random_gate(r: &mut ChaCha) -> Gate {
    let q = r.gen_range(0..4);
    let t = r.gen_range(-std::f64::consts::PI..std::f64::consts::PI) * 2.0;
    match r.gen_range(0..5) {
        0 => Gate::H(q),
        1 => Gate::Rx(q, t),
        2 => Gate::Ry(q, t),
        3 => Gate::Rz(q, t),
        _ => {
            let target = (q + r.gen_range(1..4)) % 4;
            Gate::Cnot { control: q, target }
        }
    }
}

fn kernel() -> Verdict {
    let start = Instant::now();
    let mut r = rng(2024);
    let (mut norm_dev, mut round_trip): (f64, f64) = (0.0, 0.0);
    for _ in 0..200 {
        let gates: Vec<Gate> = (0..r.gen_range(1..=40)).map(|_| random_gate(&mut r)).collect();
        let mut psi = StateVector::new(4).unwrap();
        // Start from a generic state so the inverse check is not trivial.
        for g in [Gate::H(0), Gate::Ry(1, 0.3), Gate::Rx(2, 1.1), Gate::H(3)] {
            psi.apply(&g).unwrap();
        }
        let original = psi.amplitudes().to_vec();
        for g in &gates {
            psi.apply(g).unwrap();
            let norm: f64 = psi.amplitudes().iter().map(|a| a.re * a.re + a.im * a.im).sum();
            norm_dev = norm_dev.max((norm - 1.0).abs());
        }
        for g in gates.iter().rev() {
            psi.apply(&g.inverse()).unwrap();
        }
        for (a, b) in psi.amplitudes().iter().zip(&original) {
            round_trip = round_trip.max(((a.re - b.re).powi(2) + (a.im - b.im).powi(2)).sqrt());
        }
    }
    let mut cos_err: f64 = 0.0;
    for k in 0..50 {
        let theta = -3.0 * std::f64::consts::PI + 6.0 * std::f64::consts::PI * k as f64 / 49.0;
        let mut psi = StateVector::new(1).unwrap();
        psi.apply(&Gate::Ry(0, theta)).unwrap();
        cos_err = cos_err.max((psi.expect_z(0).unwrap() - theta.cos()).abs());
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    ensure(
        norm_dev < 1e-10 && round_trip < 1e-10 && cos_err < 1e-12,
        format!("norm dev {norm_dev:.1e}, inverse round trip {round_trip:.1e}, RY cos err {cos_err:.1e}"),
    )
}

// 2 ------------------------------------------------------------------------

const H: f64 = 1e-5;

/// Worst |analytic − central difference| over every scalar of `params`.
fn fd_max_error<P: Parameters + Clone>(params: &P, analytic: &P, f: impl Fn(&P) -> f64) -> (f64, usize) {
    let grads: Vec<Vec<f64>> = analytic.tensors().iter().map(|t| t.values.to_vec()).collect();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (t, g) in grads.iter().enumerate() {
        for (i, &g) in g.iter().enumerate() {
            let mut plus = params.clone();
            plus.tensors_mut()[t].values[i] += H;
            let mut minus = params.clone();
            minus.tensors_mut()[t].values[i] -= H;
            let numeric = (f(&plus) - f(&minus)) / (2.0 * H);
            worst = worst.max((numeric - g).abs());
            n += 1;
        }
    }
    (worst, n)
}

fn random_seq(r: &mut ChaCha, len: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..len).map(|_| (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect()).collect()
}

fn bce(z: f64, y: f64) -> f64 {
    let p = 1.0 / (1.0 + (-z).exp());
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

fn model_error(model: &Model, example: &Example) -> (f64, usize) {
    let (_, grad) = model.loss_and_gradient(example).unwrap();
    let target = example.target;
    fd_max_error(model, &grad, |m| {
        let z = m.output(&example.input).unwrap();
        match m.task {
            Task::Classify => bce(z, target),
            Task::Sine => (z - target) * (z - target),
        }
    })
}

fn gradients() -> Verdict {
    let start = Instant::now();
    let mut r = rng(77);
    let mut vqc_err: f64 = 0.0;
    for _ in 0..20 {
        let d = r.gen_range(1..=6);
        let params = VqcParams::random(d, &mut r);
        let input: Vec<f64> = (0..d).map(|_| r.gen_range(-1.5..1.5)).collect();
        let w: [f64; 4] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let objective = |p: &VqcParams, x: &[f64]| -> f64 {
            vqc_forward(p, x).unwrap().values.iter().zip(&w).map(|(v, w)| v * w).sum()
        };
        let g = vqc_gradients(&params, &input, &w).unwrap();
        vqc_err = vqc_err.max(fd_max_error(&params, &g.params, |p| objective(p, &input)).0);
        for i in 0..d {
            let (mut a, mut b) = (input.clone(), input.clone());
            a[i] += H;
            b[i] -= H;
            let numeric = (objective(&params, &a) - objective(&params, &b)) / (2.0 * H);
            vqc_err = vqc_err.max((numeric - g.input[i]).abs());
        }
    }
    let mut lstm_err: f64 = 0.0;
    let mut qlstm_err: f64 = 0.0;
    for trial in 0..5 {
        let lstm = Model {
            task: Task::Classify,
            network: Network::Lstm(LstmParams::init(3, 2, &mut r)),
            embedding: None,
        };
        let ex = Example {
            input: Input::Vectors(random_seq(&mut r, 4, 2)),
            target: f64::from(trial % 2),
        };
        lstm_err = lstm_err.max(model_error(&lstm, &ex).0);

        let qlstm = Model {
            task: Task::Sine,
            network: Network::Qlstm(QlstmParams::init(3, &mut r)),
            embedding: None,
        };
        let ex = Example {
            input: Input::Vectors(random_seq(&mut r, 3, 3)),
            target: r.gen_range(-1.0..1.0),
        };
        qlstm_err = qlstm_err.max(model_error(&qlstm, &ex).0);
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    ensure(
        vqc_err < 1e-6 && lstm_err < 1e-6 && qlstm_err < 1e-5,
        format!("max abs error vqc {vqc_err:.1e}, lstm {lstm_err:.1e}, qlstm {qlstm_err:.1e}"),
    )
}

// 3 ------------------------------------------------------------------------

fn ratio(n: u64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

fn metrics_oracle() -> Verdict {
    let start = Instant::now();
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for tp in 0..=5u64 {
        for fp in 0..=5u64 {
            for tn in 0..=5u64 {
                for fn_ in 0..=5u64 {
                    let p = ratio(tp, tp + fp);
                    let rc = ratio(tp, tp + fn_);
                    let f1 = if p + rc == 0.0 { 0.0 } else { 2.0 * p * rc / (p + rc) };
                    let acc = ratio(tp + tn, tp + fp + tn + fn_);
                    let got = ConfusionMatrix::new(tp, fp, tn, fn_).scores();
                    if [got.precision, got.recall, got.f1, got.accuracy] != [p, rc, f1, acc] {
                        mismatches.push((tp, fp, tn, fn_));
                    }
                    cases += 1;
                }
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    ensure(mismatches.is_empty() && cases == 1296, match mismatches.first() {
        None => format!("{cases} cases, all exact"),
        Some(m) => format!("{cases} cases, {} mismatches, first (tp, fp, tn, fn) = {m:?}", mismatches.len()),
    })
}

// 4 ------------------------------------------------------------------------

fn mse(points: &[CurvePoint]) -> f64 {
    points.iter().map(|p| (p.predicted - p.actual).powi(2)).sum::<f64>() / points.len() as f64
}

fn sine(dir: &Path) -> Verdict {
    let start = Instant::now();
    let curves = dir.join("sine");
    if q(&["sine-demo", "--curves", s(&curves)]) != 0 {
        return Err("sine-demo failed".into());
    }
    let mut lines = Vec::new();
    let mut ok = true;
    for model in ["lstm", "qlstm"] {
        let first = read_curve(&curves.join(format!("{model}_epoch1.csv"))).map_err(|e| e.to_string())?;
        let last = read_curve(&curves.join(format!("{model}_epoch30.csv"))).map_err(|e| e.to_string())?;
        let (a, b) = (mse(&first), mse(&last));
        ok &= first.len() == 100 && last.len() == 100 && b <= 0.05 && b < a;
        lines.push(format!("{model} mse epoch1 {a:.4} epoch30 {b:.4}"));
    }
    within(start.elapsed(), Duration::from_secs(600))?;
    ensure(ok, lines.join("; "))
}

// 5 ------------------------------------------------------------------------

fn classification(dir: &Path) -> Verdict {
    let start = Instant::now();
    let csv = dir.join("synthetic");
    let enc = dir.join("synthetic-enc");
    qvuln::synthetic::write_splits(&csv, 200, 0, 50, 7).map_err(|e| e.to_string())?;
    if q(&["preprocess", "--data-dir", s(&csv), "--out", s(&enc), "--max-len", "36", "--balance"]) != 0 {
        return Err("preprocess failed".into());
    }
    let mut lines = Vec::new();
    let mut ok = true;
    for model in ["lstm", "qlstm"] {
        let ck = dir.join(format!("{model}-cls.ckpt"));
        let m = dir.join(format!("{model}-cls-train.json"));
        let e = dir.join(format!("{model}-cls-test.json"));
        let train = ["train", "--model", model, "--data", s(&enc), "--epochs", "10", "--lr", "0.02", "--out", s(&ck), "--metrics", s(&m)];
        if q(&train) != 0 || q(&["eval", "--ckpt", s(&ck), "--data", s(&enc), "--metrics", s(&e)]) != 0 {
            return Err(format!("{model} pipeline failed"));
        }
        let r = MetricsReport::read(&e).map_err(|e| e.to_string())?;
        let (tp, fp, tn, fn_) = (r.tp.unwrap(), r.fp.unwrap(), r.tn.unwrap(), r.fn_.unwrap());
        let acc = (tp + tn) as f64 / (tp + fp + tn + fn_) as f64;
        ok &= r.samples == 50 && acc >= 0.9 && Some(acc) == r.accuracy;
        lines.push(format!("{model} test accuracy {acc:.3}"));
    }
    within(start.elapsed(), Duration::from_secs(900))?;
    ensure(ok, lines.join("; "))
}

// 6 ------------------------------------------------------------------------

fn determinism(dir: &Path) -> Verdict {
    let csv = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/csv");
    let mut identical = Vec::new();
    for k in 0..2 {
        let d = dir.join(format!("det{k}"));
        let enc = d.join("enc");
        let runs: [Vec<String>; 4] = [
            vec!["preprocess".into(), "--data-dir".into(), s(&csv).into(), "--out".into(), s(&enc).into(), "--balance".into()],
            ["train", "--model", "lstm", "--data", s(&enc), "--epochs", "3", "--hidden", "6", "--deterministic"]
                .iter()
                .map(|a| a.to_string())
                .chain(["--out".into(), s(&d.join("lstm.ckpt")).into(), "--metrics".into(), s(&d.join("lstm.json")).into()])
                .collect(),
            ["train", "--model", "qlstm", "--task", "sine", "--epochs", "2", "--sine-points", "30", "--deterministic"]
                .iter()
                .map(|a| a.to_string())
                .chain(["--out".into(), s(&d.join("qlstm.ckpt")).into(), "--metrics".into(), s(&d.join("qlstm.json")).into()])
                .collect(),
            ["eval", "--deterministic", "--data", s(&enc)]
                .iter()
                .map(|a| a.to_string())
                .chain(["--ckpt".into(), s(&d.join("lstm.ckpt")).into(), "--metrics".into(), s(&d.join("eval.json")).into()])
                .collect(),
        ];
        for argv in &runs {
            let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
            if q(&argv) != 0 {
                return Err(format!("run failed: {}", argv.join(" ")));
            }
        }
    }
    let files = ["enc/vocab.txt", "enc/train.tsv", "lstm.ckpt", "lstm.json", "qlstm.ckpt", "qlstm.json", "eval.json"];
    for f in files {
        let a = std::fs::read(dir.join("det0").join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.join("det1").join(f)).map_err(|e| e.to_string())?;
        identical.push(a == b);
    }
    let n = identical.iter().filter(|&&x| x).count();
    ensure(n == files.len(), format!("{n}/{} output files byte-identical across two runs", files.len()))
}

// 7 ------------------------------------------------------------------------

fn vqc_census(d_in: usize) -> usize {
    4 * d_in + 4 + 24 + 2
}

fn census() -> Verdict {
    let mut r = rng(99);
    let mut lines = Vec::new();
    let mut ok = true;
    for _ in 0..5 {
        let hidden = r.gen_range(1..=64);
        let dim = r.gen_range(1..=64);
        let v = r.gen_range(1..=300);
        let vocab = Vocabulary::from_tokens((0..v).map(|k| format!("t{k}")).collect()).unwrap();
        let embedding = (v + 1) * dim;
        let expected = [
            (ModelKind::Lstm, 4 * hidden * (hidden + dim) + 4 * hidden + hidden + 1 + embedding),
            (ModelKind::Qlstm, 4 * vqc_census(4 + dim) + 2 * vqc_census(4) + 4 + 1 + embedding),
        ];
        for (kind, want) in expected {
            let mut c = TrainConfig::new(kind, Task::Classify);
            c.hidden = hidden;
            c.d_basic = dim;
            let m = build_model(&c, Some(&vocab), &[]).unwrap();
            ok &= m.parameter_count() == want && m.analytic_census() == want;
            lines.push(format!("{}(h{hidden},d{dim},V{v})={}", kind.as_str(), m.parameter_count()));
        }
    }
    ensure(ok, lines.join(" "))
}

// 8 ------------------------------------------------------------------------

fn closure(dir: &Path) -> Verdict {
    let csv = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/csv");
    let enc = dir.join("closure-enc");
    if q(&["preprocess", "--data-dir", s(&csv), "--out", s(&enc), "--max-len", "30"]) != 0 {
        return Err("preprocess failed".into());
    }
    let mut bitwise = true;
    for model in ["lstm", "qlstm"] {
        let ck = dir.join(format!("closure-{model}.ckpt"));
        let m = dir.join(format!("closure-{model}.json"));
        let e = dir.join(format!("closure-{model}-eval.json"));
        let train = ["train", "--model", model, "--data", s(&enc), "--epochs", "2", "--embedding-dim", "5", "--out", s(&ck), "--metrics", s(&m)];
        if q(&train) != 0 || q(&["eval", "--ckpt", s(&ck), "--data", s(&enc), "--metrics", s(&e)]) != 0 {
            return Err(format!("{model} pipeline failed"));
        }
        MetricsReport::read(&e).map_err(|e| e.to_string())?;
        let loaded = Checkpoint::load(&ck).map_err(|e| e.to_string())?;
        let again = dir.join(format!("closure-{model}-again.ckpt"));
        loaded.save(&again).map_err(|e| e.to_string())?;
        let reloaded = Checkpoint::load(&again).map_err(|e| e.to_string())?;
        let bits = |c: &Checkpoint| -> Vec<u64> {
            let mut v: Vec<u64> = c.model.tensors().iter().flat_map(|t| t.values.iter().map(|x| x.to_bits())).collect();
            v.extend(c.model.embedding.as_ref().unwrap().as_slice().iter().map(|x| x.to_bits()));
            v
        };
        bitwise &= std::fs::read(&ck).unwrap() == std::fs::read(&again).unwrap() && bits(&loaded) == bits(&reloaded) && loaded == reloaded;
    }
    ensure(bitwise, "preprocess, train, eval and checkpoint reload for lstm and qlstm".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let criteria: Vec<Criterion<'_>> = vec![
        ("1 quantum kernel", Box::new(kernel)),
        ("2 gradient gates", Box::new(gradients)),
        ("3 metrics oracle", Box::new(metrics_oracle)),
        ("4 sine reproduction", Box::new(|| sine(d))),
        ("5 desk-scale classification", Box::new(|| classification(d))),
        ("6 determinism", Box::new(|| determinism(d))),
        ("7 parameter census", Box::new(census)),
        ("8 format closure", Box::new(|| closure(d))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {name}: PASS ({detail}; {secs:.2} s)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail}; {secs:.2} s)");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
