//! Dense complex statevector simulation for a handful of qubits.
//!
//! Basis index `b` stores qubit 0 in its least-significant bit, so the
//! amplitude of `|q3 q2 q1 q0⟩ = |0010⟩` lives at index 2.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::math::{abs, cos, sin};
use crate::{Error, Result};

pub const MAX_QUBITS: usize = 24;

const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps caller-supplied amplitudes; they must have power-of-two length
    /// and unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::AmplitudeCount(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        let state = Self {
            n_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if abs(norm - 1.0) > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Σ|amplitude|².
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Resets to `|0…0⟩` without reallocating.
    pub fn reset(&mut self) {
        self.amplitudes.fill(Complex64::new(0.0, 0.0));
        self.amplitudes[0] = Complex64::new(1.0, 0.0);
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::Cnot { control, target } => {
                self.check_qubit(control)?;
                self.check_qubit(target)?;
                if control == target {
                    return Err(Error::RepeatedQubit(control));
                }
                self.apply_cnot(control, target);
            }
            Gate::Rz(q, theta) => {
                self.check_qubit(q)?;
                self.apply_rz(q, theta);
            }
            _ => {
                let q = gate.qubits()[0];
                self.check_qubit(q)?;
                let m = gate.single_qubit_matrix().expect("single-qubit gate");
                self.apply_single(q, &m);
            }
        }
        Ok(())
    }

    fn apply_single(&mut self, q: usize, m: &[[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        let len = self.amplitudes.len();
        // Walk blocks of 2·bit; within each block, index i pairs with i | bit.
        let mut base = 0;
        while base < len {
            for i in base..base + bit {
                let a = self.amplitudes[i];
                let b = self.amplitudes[i | bit];
                self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
                self.amplitudes[i | bit] = m[1][0] * a + m[1][1] * b;
            }
            base += bit << 1;
        }
    }

    fn apply_rz(&mut self, q: usize, theta: f64) {
        let bit = 1usize << q;
        let (s, c) = (sin(theta / 2.0), cos(theta / 2.0));
        let lo = Complex64::new(c, -s);
        let hi = Complex64::new(c, s);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a *= if i & bit == 0 { lo } else { hi };
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amplitudes.swap(i, i | tbit);
            }
        }
    }

    /// ⟨Z⟩ on `qubit`: Σ_b |amp_b|² · (+1 if bit clear, −1 if set).
    pub fn expect_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = a.norm_sqr();
                if i & bit == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    /// Same gate with the rotation angle negated (H and CNOT are self-inverse).
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx(q, t) => Gate::Rx(q, -t),
            Gate::Ry(q, t) => Gate::Ry(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            g => g,
        }
    }

    /// The 2×2 unitary of a single-qubit gate; `None` for CNOT.
    pub fn single_qubit_matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        Some(match *self {
            Gate::H(_) => [
                [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
                [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
            ],
            Gate::Rx(_, t) => {
                let (s, co) = (sin(t / 2.0), cos(t / 2.0));
                [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
            }
            Gate::Ry(_, t) => {
                let (s, co) = (sin(t / 2.0), cos(t / 2.0));
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            Gate::Rz(_, t) => {
                let (s, co) = (sin(t / 2.0), cos(t / 2.0));
                [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]]
            }
            Gate::Cnot { .. } => return None,
        })
    }

    /// The 4×4 CNOT matrix in the local basis `(target, control)` with the
    /// control as the high bit; `None` for single-qubit gates.
    pub fn two_qubit_matrix(&self) -> Option<[[Complex64; 4]; 4]> {
        match self {
            Gate::Cnot { .. } => {
                let z = Complex64::new(0.0, 0.0);
                let o = Complex64::new(1.0, 0.0);
                Some([[o, z, z, z], [z, o, z, z], [z, z, z, o], [z, z, o, z]])
            }
            _ => None,
        }
    }
}
