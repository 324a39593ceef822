//! Decay curves and their exponential fit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{summarize, weighted_line_fit, Num};

pub const CSV_HEADER: &str = "n_or_t,mean,stderr,trials";

/// Floor on the standard error of `ln y`, so exact curves still get finite weights.
pub const LOG_SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Sequence length or time.
    pub x: f64,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl CurvePoint {
    /// Point from per-trial estimates; the error is the spread of those estimates.
    pub fn from_trials(x: f64, values: &[f64]) -> Self {
        let s = summarize(values);
        Self { x, mean: s.mean, stderr: s.stderr, trials: s.count }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub points: Vec<CurvePoint>,
}

impl DecayCurve {
    pub fn new(points: Vec<CurvePoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.points.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            writeln!(out, "{},{},{},{}", Num(p.x), Num(p.mean), Num(p.stderr), p.trials).expect("writing to a String");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CSV_HEADER) {
            return Err(Error::Config(format!("curve CSV must start with `{CSV_HEADER}`")));
        }
        let mut points = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Config(format!("curve CSV line {}: cannot parse `{line}`", i + 2));
            if fields.len() != 4 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            points.push(CurvePoint {
                x: num(fields[0])?,
                mean: num(fields[1])?,
                stderr: num(fields[2])?,
                trials: fields[3].parse().map_err(|_| bad())?,
            });
        }
        Ok(Self { points })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Per-step strength (or `e^{-γ}` per unit time), clamped to `[0, 1]`.
    pub p_hat: f64,
    pub stderr: f64,
    /// Fitted amplitude of the decaying part; 1 for an ideal experiment.
    pub amplitude: f64,
    /// Euclidean norm of the residuals of `ln y`.
    pub residual_norm: f64,
    pub points_used: usize,
}

impl FitResult {
    /// Rate `γ = -ln p_hat` for curves indexed by time.
    pub fn rate(&self) -> f64 {
        -self.p_hat.ln()
    }
}

/// Fits `F = A pⁿ (purity - 1/D) + 1/D` by weighted regression of `ln y` on `n`,
/// `y = (F - 1/D) / (purity - 1/D)`.
///
/// Points with `y <= 3 σ_y` are dropped.
pub fn fit_decay(curve: &DecayCurve, dim: usize, purity: f64) -> Result<FitResult> {
    let floor = 1.0 / dim as f64;
    let span = purity - floor;
    if !(span > 0.0) {
        return Err(Error::InvalidParameter { name: "purity", value: purity, reason: "must exceed 1/D" });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for p in &curve.points {
        let y = (p.mean - floor) / span;
        let sy = p.stderr / span;
        if !(y > 3.0 * sy) || !(y > 0.0) {
            continue;
        }
        let s_ln = (sy / y).max(LOG_SIGMA_FLOOR);
        xs.push(p.x);
        ys.push(y.ln());
        ws.push(1.0 / (s_ln * s_ln));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientSignal(format!(
            "{} point(s) above the noise floor, need 2",
            xs.len()
        )));
    }
    let line = weighted_line_fit(&xs, &ys, &ws)?;
    let raw = line.slope.exp();
    let stderr = raw * line.slope_stderr;
    if (1.0 - raw).abs() <= 3.0 * stderr {
        return Err(Error::InsufficientSignal(format!(
            "no resolvable decay: p = {raw} ± {stderr:e}"
        )));
    }
    let residual_norm = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - line.intercept - line.slope * x).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(FitResult {
        p_hat: raw.clamp(0.0, 1.0),
        stderr,
        amplitude: line.intercept.exp(),
        residual_norm,
        points_used: xs.len(),
    })
}
