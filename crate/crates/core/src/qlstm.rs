//! Quantum LSTM cell: the classical gate networks of an LSTM replaced by six
//! variational circuits.
//!
//! ```text
//! v_t = [h_{t-1}, x_t]
//! f_t = σ(VQC1(v_t))    i_t = σ(VQC2(v_t))    c̃_t = tanh(VQC3(v_t))
//! c_t = f_t ⊙ c_{t-1} + i_t ⊙ c̃_t
//! o_t = σ(VQC4(v_t))
//! h_t = σ(VQC5(o_t ⊙ tanh c_t))
//! y_t = VQC6(o_t ⊙ tanh c_t)
//! ```
//!
//! The hidden size equals the qubit count (4).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math::{sigmoid, tanh};
use crate::tensor::{dot, Parameters, Tensor, TensorMut};
use crate::vqc::{vqc_forward, vqc_gradients, VqcParams, N_QUBITS};
use crate::{Error, Result};

pub const HIDDEN: usize = N_QUBITS;
pub const N_VQCS: usize = 6;

/// Post-processing of VQC5 when forming `h_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HiddenActivation {
    /// `h_t = σ(VQC5(…))`.
    #[default]
    Sigmoid,
    /// `h_t = VQC5(…)`.
    Identity,
}

impl HiddenActivation {
    pub fn as_str(&self) -> &'static str {
        match self {
            HiddenActivation::Sigmoid => "sigmoid",
            HiddenActivation::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sigmoid" => Some(Self::Sigmoid),
            "identity" => Some(Self::Identity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QlstmParams {
    pub d_x: usize,
    /// VQC1 forget, VQC2 input, VQC3 candidate, VQC4 output,
    /// VQC5 hidden projection, VQC6 output projection.
    pub vqcs: Vec<VqcParams>,
    pub head_w: Vec<f64>,
    pub head_b: f64,
    pub hidden_activation: HiddenActivation,
}

impl QlstmParams {
    pub fn zeros(d_x: usize) -> Self {
        let vqcs = (0..N_VQCS)
            .map(|k| VqcParams::zeros(if k < 4 { HIDDEN + d_x } else { HIDDEN }))
            .collect();
        Self {
            d_x,
            vqcs,
            head_w: vec![0.0; HIDDEN],
            head_b: 0.0,
            hidden_activation: HiddenActivation::default(),
        }
    }

    pub fn init<R: Rng + ?Sized>(d_x: usize, rng: &mut R) -> Self {
        let vqcs = (0..N_VQCS)
            .map(|k| VqcParams::random(if k < 4 { HIDDEN + d_x } else { HIDDEN }, rng))
            .collect();
        let k = 0.5;
        Self {
            d_x,
            vqcs,
            head_w: (0..HIDDEN).map(|_| rng.gen_range(-k..k)).collect(),
            head_b: 0.0,
            hidden_activation: HiddenActivation::default(),
        }
    }

    /// Σ over the six circuits of (4·d_in + 4 + 24 + 2), plus the 4 + 1 head.
    pub fn census(d_x: usize) -> usize {
        4 * VqcParams::census(HIDDEN + d_x) + 2 * VqcParams::census(HIDDEN) + HIDDEN + 1
    }
}

impl Parameters for QlstmParams {
    fn tensors(&self) -> Vec<Tensor<'_>> {
        let mut out = Vec::new();
        for (k, v) in self.vqcs.iter().enumerate() {
            out.extend(v.tensors_prefixed(&format!("qlstm.vqc{}", k + 1)));
        }
        out.push(Tensor { name: "qlstm.head_w".into(), values: &self.head_w });
        out.push(Tensor { name: "qlstm.head_b".into(), values: core::slice::from_ref(&self.head_b) });
        out
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = Vec::new();
        for (k, v) in self.vqcs.iter_mut().enumerate() {
            out.extend(v.tensors_mut_prefixed(&format!("qlstm.vqc{}", k + 1)));
        }
        out.push(TensorMut { name: "qlstm.head_w".into(), values: &mut self.head_w });
        out.push(TensorMut { name: "qlstm.head_b".into(), values: core::slice::from_mut(&mut self.head_b) });
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QlstmState {
    pub h: [f64; HIDDEN],
    pub c: [f64; HIDDEN],
    pub y: [f64; HIDDEN],
}

impl QlstmState {
    /// h = σ(0) = 0.5, c = 0, y = 0.
    pub fn initial() -> Self {
        Self {
            h: [0.5; HIDDEN],
            c: [0.0; HIDDEN],
            y: [0.0; HIDDEN],
        }
    }
}

#[derive(Debug, Clone)]
pub struct QlstmStepCache {
    pub v: Vec<f64>,
    pub f: [f64; HIDDEN],
    pub i: [f64; HIDDEN],
    pub g: [f64; HIDDEN],
    pub o: [f64; HIDDEN],
    pub c_prev: [f64; HIDDEN],
    pub tanh_c: [f64; HIDDEN],
    /// `o_t ⊙ tanh c_t`, the input of VQC5 and VQC6.
    pub m: Vec<f64>,
    pub h: [f64; HIDDEN],
}

fn map4(a: [f64; HIDDEN], f: impl Fn(f64) -> f64) -> [f64; HIDDEN] {
    a.map(f)
}

/// One cell step; the returned count is the number of circuit evaluations (6).
pub fn qlstm_cell_step(
    params: &QlstmParams,
    x_t: &[f64],
    prev: &QlstmState,
) -> Result<(QlstmState, QlstmStepCache, usize)> {
    if x_t.len() != params.d_x {
        return Err(Error::Dimension {
            expected: params.d_x,
            actual: x_t.len(),
        });
    }
    let mut v = Vec::with_capacity(HIDDEN + params.d_x);
    v.extend_from_slice(&prev.h);
    v.extend_from_slice(x_t);

    let mut evals = 0;
    let mut run = |k: usize, input: &[f64]| -> Result<[f64; HIDDEN]> {
        let out = vqc_forward(&params.vqcs[k], input)?;
        evals += out.evaluations;
        Ok(out.values)
    };
    let f = map4(run(0, &v)?, sigmoid);
    let i = map4(run(1, &v)?, sigmoid);
    let g = map4(run(2, &v)?, tanh);
    let o = map4(run(3, &v)?, sigmoid);

    let mut c = [0.0; HIDDEN];
    for k in 0..HIDDEN {
        c[k] = f[k] * prev.c[k] + i[k] * g[k];
    }
    let tanh_c = map4(c, tanh);
    let m: Vec<f64> = (0..HIDDEN).map(|k| o[k] * tanh_c[k]).collect();
    let h = match params.hidden_activation {
        HiddenActivation::Sigmoid => map4(run(4, &m)?, sigmoid),
        HiddenActivation::Identity => run(4, &m)?,
    };
    let y = run(5, &m)?;

    let cache = QlstmStepCache {
        v,
        f,
        i,
        g,
        o,
        c_prev: prev.c,
        tanh_c,
        m,
        h,
    };
    Ok((QlstmState { h, c, y }, cache, evals))
}

#[derive(Debug, Clone)]
pub struct QlstmForward {
    /// `head_w · y_T + head_b`.
    pub output: f64,
    pub last: QlstmState,
    pub caches: Vec<QlstmStepCache>,
    pub evaluations: usize,
}

impl QlstmForward {
    pub fn probability(&self) -> f64 {
        sigmoid(self.output)
    }
}

pub fn qlstm_forward(params: &QlstmParams, sequence: &[Vec<f64>]) -> Result<QlstmForward> {
    if sequence.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut state = QlstmState::initial();
    let mut caches = Vec::with_capacity(sequence.len());
    let mut evaluations = 0;
    for x in sequence {
        let (next, cache, evals) = qlstm_cell_step(params, x, &state)?;
        caches.push(cache);
        evaluations += evals;
        state = next;
    }
    let output = dot(&params.head_w, &state.y) + params.head_b;
    Ok(QlstmForward {
        output,
        last: state,
        caches,
        evaluations,
    })
}

#[derive(Debug, Clone)]
pub struct QlstmGradients {
    pub params: QlstmParams,
    pub inputs: Vec<Vec<f64>>,
    pub evaluations: usize,
}

/// Reverse pass through time. Circuits whose upstream gradient is exactly
/// zero are skipped.
pub fn qlstm_backward(params: &QlstmParams, forward: &QlstmForward, upstream: f64) -> Result<QlstmGradients> {
    if forward
        .caches
        .iter()
        .any(|c| c.v.len() != HIDDEN + params.d_x)
    {
        return Err(Error::Dimension {
            expected: HIDDEN + params.d_x,
            actual: forward.caches.first().map_or(0, |c| c.v.len()),
        });
    }
    let mut grads = QlstmParams::zeros(params.d_x);
    grads.hidden_activation = params.hidden_activation;
    for g in &mut grads.vqcs {
        g.out_scale = 0.0;
    }
    grads.head_b = upstream;
    for (g, &y) in grads.head_w.iter_mut().zip(&forward.last.y) {
        *g = upstream * y;
    }
    let mut evaluations = 0;
    let mut inputs = vec![Vec::new(); forward.caches.len()];

    let mut dy = [0.0; HIDDEN];
    for (d, w) in dy.iter_mut().zip(&params.head_w) {
        *d = upstream * w;
    }
    let mut dh = [0.0; HIDDEN];
    let mut dc = [0.0; HIDDEN];

    // Accumulates one circuit's gradient and returns its input gradient.
    let mut through = |k: usize, input: &[f64], up: &[f64; HIDDEN], grads: &mut QlstmParams| -> Result<Vec<f64>> {
        if up.iter().all(|&u| u == 0.0) {
            return Ok(vec![0.0; input.len()]);
        }
        let g = vqc_gradients(&params.vqcs[k], input, up)?;
        evaluations += g.evaluations;
        grads.vqcs[k].add_scaled(&g.params, 1.0)?;
        Ok(g.input)
    };

    for (t, cache) in forward.caches.iter().enumerate().rev() {
        let mut dm = through(5, &cache.m, &dy, &mut grads)?;
        let dz5 = match params.hidden_activation {
            HiddenActivation::Sigmoid => {
                let mut d = [0.0; HIDDEN];
                for k in 0..HIDDEN {
                    d[k] = dh[k] * cache.h[k] * (1.0 - cache.h[k]);
                }
                d
            }
            HiddenActivation::Identity => dh,
        };
        for (a, b) in dm.iter_mut().zip(through(4, &cache.m, &dz5, &mut grads)?) {
            *a += b;
        }

        let (mut dz1, mut dz2, mut dz3, mut dz4) = ([0.0; HIDDEN], [0.0; HIDDEN], [0.0; HIDDEN], [0.0; HIDDEN]);
        for k in 0..HIDDEN {
            let tc = cache.tanh_c[k];
            let d_o = dm[k] * tc;
            dc[k] += dm[k] * cache.o[k] * (1.0 - tc * tc);
            let d_f = dc[k] * cache.c_prev[k];
            let d_i = dc[k] * cache.g[k];
            let d_g = dc[k] * cache.i[k];
            dc[k] *= cache.f[k];
            dz1[k] = d_f * cache.f[k] * (1.0 - cache.f[k]);
            dz2[k] = d_i * cache.i[k] * (1.0 - cache.i[k]);
            dz3[k] = d_g * (1.0 - cache.g[k] * cache.g[k]);
            dz4[k] = d_o * cache.o[k] * (1.0 - cache.o[k]);
        }
        let mut dv = vec![0.0; cache.v.len()];
        for (k, dz) in [dz1, dz2, dz3, dz4].iter().enumerate() {
            for (a, b) in dv.iter_mut().zip(through(k, &cache.v, dz, &mut grads)?) {
                *a += b;
            }
        }
        dh.copy_from_slice(&dv[..HIDDEN]);
        inputs[t] = dv.split_off(HIDDEN);
        // y_t only reaches the loss at the final step.
        dy = [0.0; HIDDEN];
    }

    Ok(QlstmGradients {
        params: grads,
        inputs,
        evaluations,
    })
}
