//! Central finite-difference verification of the analytic gradients,
//! exposed for the command line's self-check.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::neural::{bce_with_logit, lstm_backward, lstm_forward, LstmParams};
use crate::qlstm::{qlstm_backward, qlstm_forward, QlstmParams};
use crate::tensor::Parameters;
use crate::vqc::{vqc_forward, vqc_gradients, VqcParams, N_QUBITS};
use crate::Result;

pub const STEP: f64 = 1e-5;
pub const VQC_TOLERANCE: f64 = 1e-6;
pub const LSTM_TOLERANCE: f64 = 1e-6;
pub const QLSTM_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    /// Number of scalar derivatives compared.
    pub compared: usize,
    /// Worst error under the suite's metric (absolute, or relative with a
    /// floor of 1 for the LSTM).
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

fn central<P: Parameters + Clone>(params: &P, f: &dyn Fn(&P) -> Result<f64>) -> Result<Vec<Vec<f64>>> {
    let mut p = params.clone();
    let shapes: Vec<usize> = params.tensors().iter().map(|t| t.values.len()).collect();
    let mut out = Vec::with_capacity(shapes.len());
    for (k, &n) in shapes.iter().enumerate() {
        let mut g = vec![0.0; n];
        for (j, gj) in g.iter_mut().enumerate() {
            let orig = p.tensors()[k].values[j];
            p.tensors_mut()[k].values[j] = orig + STEP;
            let plus = f(&p)?;
            p.tensors_mut()[k].values[j] = orig - STEP;
            let minus = f(&p)?;
            p.tensors_mut()[k].values[j] = orig;
            *gj = (plus - minus) / (2.0 * STEP);
        }
        out.push(g);
    }
    Ok(out)
}

fn central_inputs(inputs: &[Vec<f64>], f: &dyn Fn(&[Vec<f64>]) -> Result<f64>) -> Result<Vec<Vec<f64>>> {
    let mut xs = inputs.to_vec();
    let mut out = Vec::new();
    for t in 0..xs.len() {
        let mut g = vec![0.0; xs[t].len()];
        for j in 0..g.len() {
            let orig = xs[t][j];
            xs[t][j] = orig + STEP;
            let plus = f(&xs)?;
            xs[t][j] = orig - STEP;
            let minus = f(&xs)?;
            xs[t][j] = orig;
            g[j] = (plus - minus) / (2.0 * STEP);
        }
        out.push(g);
    }
    Ok(out)
}

fn compare(analytic: &[&[f64]], numeric: &[Vec<f64>], relative: bool) -> (usize, f64) {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (a, b) in analytic.iter().zip(numeric) {
        for (x, y) in a.iter().zip(b) {
            let err = (x - y).abs();
            let err = if relative { err / x.abs().max(y.abs()).max(1.0) } else { err };
            worst = worst.max(err);
            n += 1;
        }
    }
    (n, worst)
}

fn random_inputs<R: Rng + ?Sized>(len: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..len)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

/// Parameter-shift gradients against finite differences over `trials` draws.
pub fn check_vqc(seed: u64, trials: usize) -> Result<CheckReport> {
    let mut rng = crate::training::rng(seed);
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let d_in = rng.gen_range(1..=6);
        let mut params = VqcParams::random(d_in, &mut rng);
        params.out_scale = rng.gen_range(0.5..2.0);
        params.out_shift = rng.gen_range(-0.5..0.5);
        for b in &mut params.bias {
            *b = rng.gen_range(-0.5..0.5);
        }
        let input: Vec<f64> = (0..d_in).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let mut upstream = [0.0; N_QUBITS];
        for u in &mut upstream {
            *u = rng.gen_range(-1.0..1.0);
        }
        let objective = |p: &VqcParams, x: &[f64]| -> Result<f64> {
            let out = vqc_forward(p, x)?;
            Ok(out.values.iter().zip(&upstream).map(|(v, u)| v * u).sum())
        };
        let g = vqc_gradients(&params, &input, &upstream)?;
        let numeric = central(&params, &|p| objective(p, &input))?;
        let analytic: Vec<&[f64]> = g.params.tensors().iter().map(|t| t.values).collect();
        let (n, e) = compare(&analytic, &numeric, false);
        let numeric_x = central_inputs(core::slice::from_ref(&input), &|xs| objective(&params, &xs[0]))?;
        let (m, e2) = compare(&[&g.input], &numeric_x, false);
        compared += n + m;
        worst = worst.max(e).max(e2);
    }
    Ok(CheckReport {
        name: "vqc".into(),
        compared,
        max_error: worst,
        tolerance: VQC_TOLERANCE,
    })
}

/// Backpropagation through time against finite differences of the BCE loss
/// (hidden 3, d_in 2, T = 4).
pub fn check_lstm(seed: u64, trials: usize) -> Result<CheckReport> {
    let mut rng = crate::training::rng(seed);
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mut params = LstmParams::init(3, 2, &mut rng);
        for b in params.b_i.iter_mut().chain(&mut params.b_c).chain(&mut params.b_o) {
            *b = rng.gen_range(-0.5..0.5);
        }
        let seq = random_inputs(4, 2, &mut rng);
        let target = if rng.gen_bool(0.5) { 1.0 } else { 0.0 };
        let objective = |p: &LstmParams, xs: &[Vec<f64>]| -> Result<f64> {
            Ok(bce_with_logit(lstm_forward(p, xs)?.output, target)?.0)
        };
        let fwd = lstm_forward(&params, &seq)?;
        let up = bce_with_logit(fwd.output, target)?.1;
        let g = lstm_backward(&params, &fwd, up)?;
        let numeric = central(&params, &|p| objective(p, &seq))?;
        let analytic: Vec<&[f64]> = g.params.tensors().iter().map(|t| t.values).collect();
        let (n, e) = compare(&analytic, &numeric, true);
        let numeric_x = central_inputs(&seq, &|xs| objective(&params, xs))?;
        let analytic_x: Vec<&[f64]> = g.inputs.iter().map(Vec::as_slice).collect();
        let (m, e2) = compare(&analytic_x, &numeric_x, true);
        compared += n + m;
        worst = worst.max(e).max(e2);
    }
    Ok(CheckReport {
        name: "lstm".into(),
        compared,
        max_error: worst,
        tolerance: LSTM_TOLERANCE,
    })
}

/// End-to-end quantum LSTM gradients against finite differences of the
/// squared error (d_x 3, T = 3).
pub fn check_qlstm(seed: u64, trials: usize) -> Result<CheckReport> {
    let mut rng = crate::training::rng(seed);
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let params = QlstmParams::init(3, &mut rng);
        let seq = random_inputs(3, 3, &mut rng);
        let target: f64 = rng.gen_range(-1.0..1.0);
        let objective = |p: &QlstmParams, xs: &[Vec<f64>]| -> Result<f64> {
            let d = qlstm_forward(p, xs)?.output - target;
            Ok(d * d)
        };
        let fwd = qlstm_forward(&params, &seq)?;
        let g = qlstm_backward(&params, &fwd, 2.0 * (fwd.output - target))?;
        let numeric = central(&params, &|p| objective(p, &seq))?;
        let analytic: Vec<&[f64]> = g.params.tensors().iter().map(|t| t.values).collect();
        let (n, e) = compare(&analytic, &numeric, false);
        let numeric_x = central_inputs(&seq, &|xs| objective(&params, xs))?;
        let analytic_x: Vec<&[f64]> = g.inputs.iter().map(Vec::as_slice).collect();
        let (m, e2) = compare(&analytic_x, &numeric_x, false);
        compared += n + m;
        worst = worst.max(e).max(e2);
    }
    Ok(CheckReport {
        name: "qlstm".into(),
        compared,
        max_error: worst,
        tolerance: QLSTM_TOLERANCE,
    })
}
