//! Windowed next-value regression on one period of sin(x).

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::sin;
use crate::{Error, Result};

pub const DEFAULT_POINTS: usize = 100;
pub const DEFAULT_WINDOW: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SineSample {
    /// x_j of the target.
    pub x: f64,
    /// `window` one-dimensional inputs: sin x_{j−window} … sin x_{j−1}.
    pub inputs: Vec<Vec<f64>>,
    pub target: f64,
}

/// x_j = 2πj/n for j in 0..n; sample j predicts sin x_j from the previous
/// `window` values, wrapping cyclically.
pub fn sine_task(n_points: usize, window: usize) -> Result<Vec<SineSample>> {
    if window == 0 || n_points <= window {
        return Err(Error::Invalid(alloc::format!(
            "sine task needs n_points > window >= 1 (got {n_points}, {window})"
        )));
    }
    let xs: Vec<f64> = (0..n_points).map(|j| 2.0 * PI * j as f64 / n_points as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| sin(x)).collect();
    Ok((0..n_points)
        .map(|j| SineSample {
            x: xs[j],
            inputs: (0..window)
                .map(|k| alloc::vec![ys[(j + n_points - window + k) % n_points]])
                .collect(),
            target: ys[j],
        })
        .collect())
}
