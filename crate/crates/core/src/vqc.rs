//! Four-qubit variational quantum circuit with a trainable classical
//! compression in front and a scale/shift readout behind.
//!
//! Circuit, per evaluation:
//!
//! ```text
//! a = in_proj · x + bias
//! |0000⟩ → per qubit i: H, RY(atan a_i), RZ(atan a_i²)
//!        → 2 × [ CNOT ring 0→1, 1→2, 2→3, 3→0 ; per qubit RZ(α) RY(β) RZ(γ) ]
//! value_i = out_scale · ⟨Z_i⟩ + out_shift
//! ```
//!
//! Every rotation angle (8 encoding, 24 variational) sits in exactly one
//! Pauli rotation, so the parameter-shift rule gives exact derivatives.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::math::{atan, sqrt};
use crate::qsim::{Gate, StateVector};
use crate::tensor::{prefixed, Matrix, Parameters, Tensor, TensorMut};
use crate::{Error, Result};

pub const N_QUBITS: usize = 4;
pub const DEPTH: usize = 2;
pub const ROTATIONS_PER_QUBIT: usize = 3;
/// Variational angles: depth × qubits × rotations.
pub const N_ANGLES: usize = DEPTH * N_QUBITS * ROTATIONS_PER_QUBIT;
/// Encoding angles: one RY and one RZ per qubit.
pub const N_ENCODING: usize = 2 * N_QUBITS;
/// Circuit evaluations for one gradient: two per shifted angle plus the
/// unshifted forward.
pub const GRADIENT_EVALUATIONS: usize = 2 * (N_ANGLES + N_ENCODING) + 1;

const RING: [(usize, usize); N_QUBITS] = [(0, 1), (1, 2), (2, 3), (3, 0)];

#[derive(Debug, Clone, PartialEq)]
pub struct VqcParams {
    /// 4 × d_in classical compression.
    pub in_proj: Matrix,
    pub bias: Vec<f64>,
    /// Indexed `layer * 12 + qubit * 3 + k` with k = 0 (RZ α), 1 (RY β), 2 (RZ γ).
    pub angles: Vec<f64>,
    pub out_scale: f64,
    pub out_shift: f64,
}

impl VqcParams {
    /// All-zero compression and angles, unit scale, zero shift.
    pub fn zeros(d_in: usize) -> Self {
        Self {
            in_proj: Matrix::zeros(N_QUBITS, d_in),
            bias: vec![0.0; N_QUBITS],
            angles: vec![0.0; N_ANGLES],
            out_scale: 1.0,
            out_shift: 0.0,
        }
    }

    /// Compression drawn from uniform(−1/√d_in, 1/√d_in), angles from
    /// uniform(−π, π), unit scale, zero shift.
    pub fn random<R: Rng + ?Sized>(d_in: usize, rng: &mut R) -> Self {
        let k = 1.0 / sqrt(d_in.max(1) as f64);
        Self {
            in_proj: Matrix::uniform(N_QUBITS, d_in, k, rng),
            bias: vec![0.0; N_QUBITS],
            angles: (0..N_ANGLES)
                .map(|_| rng.gen_range(-core::f64::consts::PI..core::f64::consts::PI))
                .collect(),
            out_scale: 1.0,
            out_shift: 0.0,
        }
    }

    pub fn d_in(&self) -> usize {
        self.in_proj.cols()
    }

    /// Analytic number of trainable scalars for a given input width.
    pub fn census(d_in: usize) -> usize {
        N_QUBITS * d_in + N_QUBITS + N_ANGLES + 2
    }

    pub(crate) fn tensors_prefixed<'a>(&'a self, prefix: &str) -> Vec<Tensor<'a>> {
        vec![
            Tensor { name: prefixed(prefix, "in_proj"), values: self.in_proj.as_slice() },
            Tensor { name: prefixed(prefix, "bias"), values: &self.bias },
            Tensor { name: prefixed(prefix, "angles"), values: &self.angles },
            Tensor { name: prefixed(prefix, "out_scale"), values: core::slice::from_ref(&self.out_scale) },
            Tensor { name: prefixed(prefix, "out_shift"), values: core::slice::from_ref(&self.out_shift) },
        ]
    }

    pub(crate) fn tensors_mut_prefixed<'a>(&'a mut self, prefix: &str) -> Vec<TensorMut<'a>> {
        vec![
            TensorMut { name: prefixed(prefix, "in_proj"), values: self.in_proj.as_mut_slice() },
            TensorMut { name: prefixed(prefix, "bias"), values: &mut self.bias },
            TensorMut { name: prefixed(prefix, "angles"), values: &mut self.angles },
            TensorMut { name: prefixed(prefix, "out_scale"), values: core::slice::from_mut(&mut self.out_scale) },
            TensorMut { name: prefixed(prefix, "out_shift"), values: core::slice::from_mut(&mut self.out_shift) },
        ]
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.d_in() {
            return Err(Error::Dimension {
                expected: self.d_in(),
                actual: input.len(),
            });
        }
        Ok(())
    }

    /// Projected values `a` and the full circuit angle vector
    /// `[atan a_i (4), atan a_i² (4), variational (24)]`.
    fn circuit_angles(&self, input: &[f64]) -> (Vec<f64>, [f64; N_ENCODING + N_ANGLES]) {
        let projected = self.in_proj.affine(input, &self.bias);
        let mut angles = [0.0; N_ENCODING + N_ANGLES];
        for (i, &a) in projected.iter().enumerate() {
            angles[i] = atan(a);
            angles[N_QUBITS + i] = atan(a * a);
        }
        angles[N_ENCODING..].copy_from_slice(&self.angles);
        (projected, angles)
    }
}

impl Parameters for VqcParams {
    fn tensors(&self) -> Vec<Tensor<'_>> {
        self.tensors_prefixed("vqc")
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        self.tensors_mut_prefixed("vqc")
    }
}

/// Runs the fixed circuit for a full angle vector and returns ⟨Z_i⟩.
pub fn run_circuit(angles: &[f64; N_ENCODING + N_ANGLES]) -> [f64; N_QUBITS] {
    let mut state = StateVector::new(N_QUBITS).expect("4 qubits");
    let apply = |s: &mut StateVector, g: Gate| s.apply(&g).expect("valid gate");
    for q in 0..N_QUBITS {
        apply(&mut state, Gate::H(q));
        apply(&mut state, Gate::Ry(q, angles[q]));
        apply(&mut state, Gate::Rz(q, angles[N_QUBITS + q]));
    }
    for layer in 0..DEPTH {
        for (control, target) in RING {
            apply(&mut state, Gate::Cnot { control, target });
        }
        for q in 0..N_QUBITS {
            let base = N_ENCODING + layer * N_QUBITS * ROTATIONS_PER_QUBIT + q * ROTATIONS_PER_QUBIT;
            apply(&mut state, Gate::Rz(q, angles[base]));
            apply(&mut state, Gate::Ry(q, angles[base + 1]));
            apply(&mut state, Gate::Rz(q, angles[base + 2]));
        }
    }
    let mut out = [0.0; N_QUBITS];
    for (q, e) in out.iter_mut().enumerate() {
        *e = state.expect_z(q).expect("qubit in range");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqcOutput {
    /// `out_scale · ⟨Z_i⟩ + out_shift`.
    pub values: [f64; N_QUBITS],
    /// Unscaled ⟨Z_i⟩, each in [−1, 1].
    pub expectations: [f64; N_QUBITS],
    /// `in_proj · x + bias`.
    pub projected: Vec<f64>,
    /// Circuit evaluations spent (always 1).
    pub evaluations: usize,
}

pub fn vqc_forward(params: &VqcParams, input: &[f64]) -> Result<VqcOutput> {
    params.check_input(input)?;
    let (projected, angles) = params.circuit_angles(input);
    let expectations = run_circuit(&angles);
    let values = expectations.map(|e| params.out_scale * e + params.out_shift);
    Ok(VqcOutput {
        values,
        expectations,
        projected,
        evaluations: 1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqcGradients {
    /// Upstream-weighted gradient for every parameter.
    pub params: VqcParams,
    /// Upstream-weighted gradient with respect to the input vector.
    pub input: Vec<f64>,
    pub evaluations: usize,
}

/// Gradients of `Σ_i upstream_i · value_i` by the parameter-shift rule,
/// chained through the arctan encodings and the affine compression.
pub fn vqc_gradients(params: &VqcParams, input: &[f64], upstream: &[f64; N_QUBITS]) -> Result<VqcGradients> {
    params.check_input(input)?;
    let (projected, angles) = params.circuit_angles(input);
    let expectations = run_circuit(&angles);
    let mut evaluations = 1;

    // dL/d⟨Z_i⟩
    let weights = upstream.map(|u| u * params.out_scale);
    let mut angle_grads = [0.0; N_ENCODING + N_ANGLES];
    let mut shifted = angles;
    for k in 0..angles.len() {
        shifted[k] = angles[k] + FRAC_PI_2;
        let plus = run_circuit(&shifted);
        shifted[k] = angles[k] - FRAC_PI_2;
        let minus = run_circuit(&shifted);
        shifted[k] = angles[k];
        evaluations += 2;
        angle_grads[k] = (0..N_QUBITS)
            .map(|i| weights[i] * (plus[i] - minus[i]) / 2.0)
            .sum();
    }

    let mut grads = VqcParams::zeros(params.d_in());
    grads.out_scale = (0..N_QUBITS).map(|i| upstream[i] * expectations[i]).sum();
    grads.out_shift = upstream.iter().sum();
    grads.angles.copy_from_slice(&angle_grads[N_ENCODING..]);

    // d atan(u)/du = 1/(1+u²) with u = a (RY) and u = a² (RZ, extra factor 2a).
    let d_projected: Vec<f64> = projected
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let a2 = a * a;
            angle_grads[i] / (1.0 + a2) + angle_grads[N_QUBITS + i] * 2.0 * a / (1.0 + a2 * a2)
        })
        .collect();
    grads.bias.copy_from_slice(&d_projected);
    grads.in_proj.add_outer(&d_projected, input);
    let mut input_grads = vec![0.0; input.len()];
    params.in_proj.add_transpose_mul(&d_projected, &mut input_grads);

    Ok(VqcGradients {
        params: grads,
        input: input_grads,
        evaluations,
    })
}
