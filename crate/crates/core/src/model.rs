//! A trainable model: recurrent network, optional embedding, and the task
//! that decides how its scalar output is read.

use alloc::string::String;
use alloc::vec::Vec;

use crate::embedding::{embed, EmbeddingMatrix};
use crate::neural::{bce_with_logit, loss, lstm_backward, lstm_forward, LossKind, LstmParams};
use crate::qlstm::{qlstm_backward, qlstm_forward, QlstmParams};
use crate::tensor::{Parameters, Tensor, TensorMut};
use crate::text::EncodedSequence;
use crate::{sigmoid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Lstm,
    Qlstm,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Lstm => "lstm",
            ModelKind::Qlstm => "qlstm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lstm" => Some(Self::Lstm),
            "qlstm" => Some(Self::Qlstm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    /// Binary classification: sigmoid of the head output, BCE loss.
    Classify,
    /// Regression: the head output is the prediction, MSE loss.
    Sine,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::Sine => "sine",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "classify" => Some(Self::Classify),
            "sine" => Some(Self::Sine),
            _ => None,
        }
    }
}

/// Loss value and its derivative for a given head output.
type Upstream = dyn Fn(f64) -> Result<(f64, f64)>;
/// Parameter gradient plus one gradient vector per input step.
type NetworkGradients = (Network, Vec<Vec<f64>>);

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum Network {
    Lstm(LstmParams),
    Qlstm(QlstmParams),
}

impl Network {
    pub fn kind(&self) -> ModelKind {
        match self {
            Network::Lstm(_) => ModelKind::Lstm,
            Network::Qlstm(_) => ModelKind::Qlstm,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Network::Lstm(p) => p.d_in,
            Network::Qlstm(p) => p.d_x,
        }
    }

    fn zeros_like(&self) -> Self {
        match self {
            Network::Lstm(p) => Network::Lstm(LstmParams::zeros(p.hidden, p.d_in)),
            Network::Qlstm(p) => {
                let mut z = QlstmParams::zeros(p.d_x);
                z.hidden_activation = p.hidden_activation;
                z.fill(0.0);
                Network::Qlstm(z)
            }
        }
    }

    /// Head output and the gradient of `upstream · output` with respect to
    /// the network parameters and each input vector.
    fn forward_backward(&self, inputs: &[Vec<f64>], upstream: Option<&Upstream>) -> Result<(f64, f64, Option<NetworkGradients>)> {
        match self {
            Network::Lstm(p) => {
                let fwd = lstm_forward(p, inputs)?;
                let Some(up) = upstream else { return Ok((fwd.output, 0.0, None)) };
                let (value, d) = up(fwd.output)?;
                let g = lstm_backward(p, &fwd, d)?;
                Ok((fwd.output, value, Some((Network::Lstm(g.params), g.inputs))))
            }
            Network::Qlstm(p) => {
                let fwd = qlstm_forward(p, inputs)?;
                let Some(up) = upstream else { return Ok((fwd.output, 0.0, None)) };
                let (value, d) = up(fwd.output)?;
                let g = qlstm_backward(p, &fwd, d)?;
                Ok((fwd.output, value, Some((Network::Qlstm(g.params), g.inputs))))
            }
        }
    }
}

impl Parameters for Network {
    fn tensors(&self) -> Vec<Tensor<'_>> {
        match self {
            Network::Lstm(p) => p.tensors(),
            Network::Qlstm(p) => p.tensors(),
        }
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        match self {
            Network::Lstm(p) => p.tensors_mut(),
            Network::Qlstm(p) => p.tensors_mut(),
        }
    }
}

/// Model input: token indices (looked up in the embedding) or raw vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Tokens(EncodedSequence),
    Vectors(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: Input,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub task: Task,
    pub network: Network,
    pub embedding: Option<EmbeddingMatrix>,
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        self.network.kind()
    }

    fn vectors(&self, input: &Input) -> Result<Vec<Vec<f64>>> {
        match input {
            Input::Vectors(v) => Ok(v.clone()),
            Input::Tokens(seq) => {
                let m = self
                    .embedding
                    .as_ref()
                    .ok_or_else(|| Error::Invalid("token input requires an embedding".into()))?;
                embed(seq, m)
            }
        }
    }

    /// Raw head output (logit for classification, value for regression).
    pub fn output(&self, input: &Input) -> Result<f64> {
        let xs = self.vectors(input)?;
        Ok(self.network.forward_backward(&xs, None)?.0)
    }

    /// Probability of the positive class, or the regression value.
    pub fn predict(&self, input: &Input) -> Result<f64> {
        let out = self.output(input)?;
        Ok(match self.task {
            Task::Classify => sigmoid(out),
            Task::Sine => out,
        })
    }

    /// Per-sample loss and its gradient, shaped like `self`.
    pub fn loss_and_gradient(&self, example: &Example) -> Result<(f64, Model)> {
        let xs = self.vectors(&example.input)?;
        let target = example.target;
        let task = self.task;
        let upstream = move |out: f64| match task {
            Task::Classify => bce_with_logit(out, target),
            Task::Sine => loss(LossKind::Mse, out, target),
        };
        let (_, value, grads) = self.network.forward_backward(&xs, Some(&upstream))?;
        let (network, input_grads) = grads.expect("gradients requested");
        let embedding = match (&self.embedding, &example.input) {
            (Some(m), Input::Tokens(seq)) if m.trainable => {
                let mut g = EmbeddingMatrix::zeros(m.rows(), m.dim(), true, m.source);
                for (&idx, dx) in seq.indices.iter().zip(&input_grads) {
                    if idx != 0 {
                        for (a, b) in g.row_mut(idx as usize).iter_mut().zip(dx) {
                            *a += b;
                        }
                    }
                }
                Some(g)
            }
            (Some(m), _) if m.trainable => Some(EmbeddingMatrix::zeros(m.rows(), m.dim(), true, m.source)),
            _ => None,
        };
        Ok((
            value,
            Model {
                task: self.task,
                network,
                embedding,
            },
        ))
    }

    /// All-zero gradient accumulator congruent with `self`.
    pub fn zero_gradient(&self) -> Model {
        Model {
            task: self.task,
            network: self.network.zeros_like(),
            embedding: self
                .embedding
                .as_ref()
                .filter(|m| m.trainable)
                .map(|m| EmbeddingMatrix::zeros(m.rows(), m.dim(), true, m.source)),
        }
    }

    /// Closed-form count of trainable scalars.
    pub fn analytic_census(&self) -> usize {
        let net = match &self.network {
            Network::Lstm(p) => LstmParams::census(p.hidden, p.d_in),
            Network::Qlstm(p) => QlstmParams::census(p.d_x),
        };
        let emb = match &self.embedding {
            Some(m) if m.trainable => (m.rows() - 1) * m.dim(),
            _ => 0,
        };
        net + emb
    }
}

impl Parameters for Model {
    fn tensors(&self) -> Vec<Tensor<'_>> {
        let mut out = self.network.tensors();
        if let Some(m) = self.embedding.as_ref().filter(|m| m.trainable) {
            out.push(Tensor {
                name: String::from("embedding"),
                values: m.non_padding(),
            });
        }
        out
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = self.network.tensors_mut();
        if let Some(m) = self.embedding.as_mut().filter(|m| m.trainable) {
            out.push(TensorMut {
                name: String::from("embedding"),
                values: m.non_padding_mut(),
            });
        }
        out
    }
}
