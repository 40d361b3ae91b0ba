//! Classical numerics: the LSTM cell, backpropagation through time, losses
//! and the Adam optimizer.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::{abs, exp, ln, ln_1p, sigmoid, sqrt, tanh};
use crate::tensor::{check_congruent, dot, Matrix, Parameters, Tensor, TensorMut};
use crate::{Error, Result};

pub const DEFAULT_HIDDEN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub hidden: usize,
    pub d_in: usize,
    /// Gate matrices, each hidden × (hidden + d_in), acting on `[h_{t-1}, x_t]`.
    pub w_f: Matrix,
    pub w_i: Matrix,
    pub w_c: Matrix,
    pub w_o: Matrix,
    pub b_f: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_c: Vec<f64>,
    pub b_o: Vec<f64>,
    pub head_w: Vec<f64>,
    pub head_b: f64,
}

impl LstmParams {
    pub fn zeros(hidden: usize, d_in: usize) -> Self {
        let cols = hidden + d_in;
        Self {
            hidden,
            d_in,
            w_f: Matrix::zeros(hidden, cols),
            w_i: Matrix::zeros(hidden, cols),
            w_c: Matrix::zeros(hidden, cols),
            w_o: Matrix::zeros(hidden, cols),
            b_f: vec![0.0; hidden],
            b_i: vec![0.0; hidden],
            b_c: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
            head_w: vec![0.0; hidden],
            head_b: 0.0,
        }
    }

    /// Gate matrices from uniform(−k, k), k = 1/√(hidden + d_in); biases zero
    /// except the forget bias, which starts at 1.
    pub fn init<R: Rng + ?Sized>(hidden: usize, d_in: usize, rng: &mut R) -> Self {
        let cols = hidden + d_in;
        let k = 1.0 / sqrt(cols as f64);
        let head_k = 1.0 / sqrt(hidden as f64);
        Self {
            hidden,
            d_in,
            w_f: Matrix::uniform(hidden, cols, k, rng),
            w_i: Matrix::uniform(hidden, cols, k, rng),
            w_c: Matrix::uniform(hidden, cols, k, rng),
            w_o: Matrix::uniform(hidden, cols, k, rng),
            b_f: vec![1.0; hidden],
            b_i: vec![0.0; hidden],
            b_c: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
            head_w: (0..hidden).map(|_| rng.gen_range(-head_k..head_k)).collect(),
            head_b: 0.0,
        }
    }

    /// 4·(hidden·(hidden + d_in) + hidden) + hidden + 1.
    pub fn census(hidden: usize, d_in: usize) -> usize {
        4 * (hidden * (hidden + d_in) + hidden) + hidden + 1
    }
}

impl Parameters for LstmParams {
    fn tensors(&self) -> Vec<Tensor<'_>> {
        vec![
            Tensor { name: "lstm.w_f".into(), values: self.w_f.as_slice() },
            Tensor { name: "lstm.w_i".into(), values: self.w_i.as_slice() },
            Tensor { name: "lstm.w_c".into(), values: self.w_c.as_slice() },
            Tensor { name: "lstm.w_o".into(), values: self.w_o.as_slice() },
            Tensor { name: "lstm.b_f".into(), values: &self.b_f },
            Tensor { name: "lstm.b_i".into(), values: &self.b_i },
            Tensor { name: "lstm.b_c".into(), values: &self.b_c },
            Tensor { name: "lstm.b_o".into(), values: &self.b_o },
            Tensor { name: "lstm.head_w".into(), values: &self.head_w },
            Tensor { name: "lstm.head_b".into(), values: core::slice::from_ref(&self.head_b) },
        ]
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        vec![
            TensorMut { name: "lstm.w_f".into(), values: self.w_f.as_mut_slice() },
            TensorMut { name: "lstm.w_i".into(), values: self.w_i.as_mut_slice() },
            TensorMut { name: "lstm.w_c".into(), values: self.w_c.as_mut_slice() },
            TensorMut { name: "lstm.w_o".into(), values: self.w_o.as_mut_slice() },
            TensorMut { name: "lstm.b_f".into(), values: &mut self.b_f },
            TensorMut { name: "lstm.b_i".into(), values: &mut self.b_i },
            TensorMut { name: "lstm.b_c".into(), values: &mut self.b_c },
            TensorMut { name: "lstm.b_o".into(), values: &mut self.b_o },
            TensorMut { name: "lstm.head_w".into(), values: &mut self.head_w },
            TensorMut { name: "lstm.head_b".into(), values: core::slice::from_mut(&mut self.head_b) },
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Values kept from one forward step for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmStepCache {
    pub v: Vec<f64>,
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

pub fn lstm_cell_step(params: &LstmParams, x_t: &[f64], prev: &LstmState) -> Result<(LstmState, LstmStepCache)> {
    if x_t.len() != params.d_in {
        return Err(Error::Dimension {
            expected: params.d_in,
            actual: x_t.len(),
        });
    }
    if prev.h.len() != params.hidden || prev.c.len() != params.hidden {
        return Err(Error::Dimension {
            expected: params.hidden,
            actual: prev.h.len(),
        });
    }
    let mut v = Vec::with_capacity(params.hidden + params.d_in);
    v.extend_from_slice(&prev.h);
    v.extend_from_slice(x_t);

    let f: Vec<f64> = params.w_f.affine(&v, &params.b_f).into_iter().map(sigmoid).collect();
    let i: Vec<f64> = params.w_i.affine(&v, &params.b_i).into_iter().map(sigmoid).collect();
    let g: Vec<f64> = params.w_c.affine(&v, &params.b_c).into_iter().map(tanh).collect();
    let o: Vec<f64> = params.w_o.affine(&v, &params.b_o).into_iter().map(sigmoid).collect();

    let c: Vec<f64> = (0..params.hidden)
        .map(|k| prev.c[k] * f[k] + g[k] * i[k])
        .collect();
    let tanh_c: Vec<f64> = c.iter().map(|&x| tanh(x)).collect();
    let h: Vec<f64> = o.iter().zip(&tanh_c).map(|(o, t)| o * t).collect();

    let cache = LstmStepCache {
        v,
        f,
        i,
        g,
        o,
        c_prev: prev.c.clone(),
        tanh_c,
    };
    Ok((LstmState { h, c }, cache))
}

#[derive(Debug, Clone)]
pub struct LstmForward {
    /// `head_w · h_T + head_b`: the logit for classification, the prediction
    /// for regression.
    pub output: f64,
    pub last: LstmState,
    pub caches: Vec<LstmStepCache>,
}

impl LstmForward {
    pub fn probability(&self) -> f64 {
        sigmoid(self.output)
    }
}

pub fn lstm_forward(params: &LstmParams, sequence: &[Vec<f64>]) -> Result<LstmForward> {
    if sequence.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut state = LstmState::zeros(params.hidden);
    let mut caches = Vec::with_capacity(sequence.len());
    for x in sequence {
        let (next, cache) = lstm_cell_step(params, x, &state)?;
        caches.push(cache);
        state = next;
    }
    let output = dot(&params.head_w, &state.h) + params.head_b;
    Ok(LstmForward {
        output,
        last: state,
        caches,
    })
}

#[derive(Debug, Clone)]
pub struct LstmGradients {
    pub params: LstmParams,
    /// Gradient with respect to each input vector of the sequence.
    pub inputs: Vec<Vec<f64>>,
}

/// Backpropagation through time for a loss whose derivative with respect to
/// the head output is `upstream`.
pub fn lstm_backward(params: &LstmParams, forward: &LstmForward, upstream: f64) -> Result<LstmGradients> {
    let hidden = params.hidden;
    if forward.last.h.len() != hidden
        || forward.caches.iter().any(|c| c.v.len() != hidden + params.d_in)
    {
        return Err(Error::Dimension {
            expected: hidden + params.d_in,
            actual: forward.caches.first().map_or(0, |c| c.v.len()),
        });
    }
    let mut grads = LstmParams::zeros(hidden, params.d_in);
    grads.head_b = upstream;
    for (g, &h) in grads.head_w.iter_mut().zip(&forward.last.h) {
        *g = upstream * h;
    }

    let mut dh: Vec<f64> = params.head_w.iter().map(|w| w * upstream).collect();
    let mut dc = vec![0.0; hidden];
    let mut inputs = vec![Vec::new(); forward.caches.len()];
    let (mut dzf, mut dzi, mut dzg, mut dzo) =
        (vec![0.0; hidden], vec![0.0; hidden], vec![0.0; hidden], vec![0.0; hidden]);

    for (t, cache) in forward.caches.iter().enumerate().rev() {
        for k in 0..hidden {
            let tc = cache.tanh_c[k];
            let d_o = dh[k] * tc;
            dc[k] += dh[k] * cache.o[k] * (1.0 - tc * tc);
            let d_f = dc[k] * cache.c_prev[k];
            let d_i = dc[k] * cache.g[k];
            let d_g = dc[k] * cache.i[k];
            dc[k] *= cache.f[k];
            dzf[k] = d_f * cache.f[k] * (1.0 - cache.f[k]);
            dzi[k] = d_i * cache.i[k] * (1.0 - cache.i[k]);
            dzg[k] = d_g * (1.0 - cache.g[k] * cache.g[k]);
            dzo[k] = d_o * cache.o[k] * (1.0 - cache.o[k]);
        }
        let mut dv = vec![0.0; hidden + params.d_in];
        for (w, gw, gb, dz) in [
            (&params.w_f, &mut grads.w_f, &mut grads.b_f, &dzf),
            (&params.w_i, &mut grads.w_i, &mut grads.b_i, &dzi),
            (&params.w_c, &mut grads.w_c, &mut grads.b_c, &dzg),
            (&params.w_o, &mut grads.w_o, &mut grads.b_o, &dzo),
        ] {
            gw.add_outer(dz, &cache.v);
            for (b, d) in gb.iter_mut().zip(dz.iter()) {
                *b += d;
            }
            w.add_transpose_mul(dz, &mut dv);
        }
        dh.copy_from_slice(&dv[..hidden]);
        inputs[t] = dv.split_off(hidden);
    }

    Ok(LstmGradients {
        params: grads,
        inputs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Bce,
    Mse,
}

/// Loss value and its derivative with respect to `prediction`.
///
/// For `Bce`, `prediction` is a probability in (0, 1) and `target` must be
/// 0 or 1. Training uses [`bce_with_logit`] instead, which is stable for
/// saturated probabilities.
pub fn loss(kind: LossKind, prediction: f64, target: f64) -> Result<(f64, f64)> {
    match kind {
        LossKind::Mse => {
            let d = prediction - target;
            Ok((d * d, 2.0 * d))
        }
        LossKind::Bce => {
            check_binary(target)?;
            if !(prediction > 0.0 && prediction < 1.0) {
                return Err(Error::Invalid(alloc::format!(
                    "bce prediction {prediction} outside (0, 1)"
                )));
            }
            let value = -(target * ln(prediction) + (1.0 - target) * ln(1.0 - prediction));
            let grad = -target / prediction + (1.0 - target) / (1.0 - prediction);
            Ok((value, grad))
        }
    }
}

/// Binary cross-entropy of `σ(logit)` against `target`, and its derivative
/// with respect to the logit.
pub fn bce_with_logit(logit: f64, target: f64) -> Result<(f64, f64)> {
    check_binary(target)?;
    let value = logit.max(0.0) - logit * target + ln_1p(exp(-abs(logit)));
    Ok((value, sigmoid(logit) - target))
}

fn check_binary(target: f64) -> Result<()> {
    if target != 0.0 && target != 1.0 {
        return Err(Error::Invalid(alloc::format!(
            "bce target {target} is not 0 or 1"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam moment accumulators, keyed by the canonical tensor order of the
/// parameters they were first used with.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub step: u64,
    names: Vec<String>,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn new(config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            names: Vec::new(),
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn first_moments(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn second_moments(&self) -> &[Vec<f64>] {
        &self.v
    }
}

/// One bias-corrected Adam update of `params` along `grads`.
pub fn adam_step<P: Parameters>(opt: &mut OptimizerState, params: &mut P, grads: &P) -> Result<()> {
    let g = grads.tensors();
    let mut p = params.tensors_mut();
    check_congruent(&p, &g)?;
    if opt.names.is_empty() {
        opt.names = p.iter().map(|t| t.name.clone()).collect();
        opt.m = p.iter().map(|t| vec![0.0; t.values.len()]).collect();
        opt.v = opt.m.clone();
    } else {
        if opt.names.len() != p.len() {
            return Err(Error::Shape {
                name: String::from("<optimizer state>"),
                expected: opt.names.len(),
                actual: p.len(),
            });
        }
        for ((name, m), t) in opt.names.iter().zip(&opt.m).zip(&p) {
            if *name != t.name || m.len() != t.values.len() {
                return Err(Error::Shape {
                    name: t.name.clone(),
                    expected: m.len(),
                    actual: t.values.len(),
                });
            }
        }
    }

    opt.step += 1;
    let AdamConfig { lr, beta1, beta2, eps } = opt.config;
    let t = opt.step as f64;
    let bc1 = 1.0 - libm::pow(beta1, t);
    let bc2 = 1.0 - libm::pow(beta2, t);
    for (((pt, gt), m), v) in p.iter_mut().zip(&g).zip(&mut opt.m).zip(&mut opt.v) {
        for k in 0..gt.values.len() {
            let grad = gt.values[k];
            m[k] = beta1 * m[k] + (1.0 - beta1) * grad;
            v[k] = beta2 * v[k] + (1.0 - beta2) * grad * grad;
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            pt.values[k] -= lr * m_hat / (sqrt(v_hat) + eps);
        }
    }
    Ok(())
}
