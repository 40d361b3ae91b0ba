//! The metrics report document and prediction-curve dumps.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub task: String,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tp: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fp: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tn: Option<u64>,
    #[serde(rename = "fn", skip_serializing_if = "Option::is_none", default)]
    pub fn_: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mse: Option<f64>,
    pub wall_time_seconds: f64,
    pub parameter_count: usize,
    pub loss_curve: Vec<f64>,
    /// Metrics reported as 0 because their denominator was 0.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub undefined: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predictions: Option<Vec<CurvePoint>>,
}

impl MetricsReport {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.line(), e.to_string()))
    }
}

/// One predicted-vs-actual point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub actual: f64,
    pub predicted: f64,
    pub epoch: usize,
}

pub const CURVE_HEADER: &str = "x,actual,predicted,epoch";

pub fn write_curve(path: &Path, points: &[CurvePoint]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{CURVE_HEADER}").map_err(io)?;
    for p in points {
        writeln!(out, "{:?},{:?},{:?},{}", p.x, p.actual, p.predicted, p.epoch).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_curve(path: &Path) -> Result<Vec<CurvePoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CURVE_HEADER => {}
        _ => return Err(Error::format(path, 1, format!("expected header `{CURVE_HEADER}`"))),
    }
    lines
        .map(|(k, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::format(path, k + 1, "expected x,actual,predicted,epoch");
            if f.len() != 4 {
                return Err(bad());
            }
            Ok(CurvePoint {
                x: f[0].parse().map_err(|_| bad())?,
                actual: f[1].parse().map_err(|_| bad())?,
                predicted: f[2].parse().map_err(|_| bad())?,
                epoch: f[3].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// Mean squared error of a curve.
pub fn curve_mse(points: &[CurvePoint]) -> f64 {
    points.iter().map(|p| (p.predicted - p.actual).powi(2)).sum::<f64>() / points.len().max(1) as f64
}
