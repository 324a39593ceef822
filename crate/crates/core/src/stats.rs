//! Small statistics helpers: summaries and straight-line fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Unbiased sample variance; zero for fewer than two samples.
    pub variance: f64,
    /// `sqrt(variance / count)`.
    pub stderr: f64,
    pub count: usize,
}

pub fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len();
    if n == 0 {
        return Summary { mean: f64::NAN, variance: 0.0, stderr: 0.0, count: 0 };
    }
    let mean = pairwise_sum(xs) / n as f64;
    let variance = if n > 1 {
        let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        pairwise_sum(&sq) / (n - 1) as f64
    } else {
        0.0
    };
    Summary { mean, variance, stderr: (variance / n as f64).sqrt(), count: n }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Weighted sum of squared residuals.
    pub chi2: f64,
    pub points: usize,
}

/// Weighted least squares fit of `y = intercept + slope * x`.
///
/// With weights `1/sigma^2` the slope error is the textbook one; it is inflated
/// by `sqrt(chi2 / (n - 2))` when the scatter exceeds the stated errors.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n || w.len() != n {
        return Err(Error::InsufficientSignal(format!("line fit needs at least 2 points, got {n}")));
    }
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let xm = sx / sw;
    let ym = sy / sw;
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * (x - xm) * (x - xm)).sum();
    let sxy: f64 = w.iter().zip(x.iter().zip(y)).map(|(w, (x, y))| w * (x - xm) * (y - ym)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientSignal("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2: f64 =
        w.iter().zip(x.iter().zip(y)).map(|(w, (x, y))| w * (y - intercept - slope * x).powi(2)).sum();
    let mut slope_var = 1.0 / sxx;
    if n > 2 {
        let birge = chi2 / (n - 2) as f64;
        if birge > 1.0 {
            slope_var *= birge;
        }
    }
    Ok(LineFit { slope, intercept, slope_stderr: slope_var.sqrt(), chi2, points: n })
}

/// Ordinary least squares; the slope error comes from the residual scatter.
pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let w = vec![1.0; x.len()];
    let mut fit = weighted_line_fit(x, y, &w)?;
    let n = x.len();
    let xm = x.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|x| (x - xm) * (x - xm)).sum();
    fit.slope_stderr = if n > 2 { (fit.chi2 / (n - 2) as f64 / sxx).sqrt() } else { 0.0 };
    Ok(fit)
}

/// Slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Numeric("log-log fit needs strictly positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Ok(line_fit(&lx, &ly)?.slope)
}

/// Shortest round-trip form; exponent notation outside `[1e-5, 1e16)`.
pub(crate) struct Num(pub f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_constant_data() {
        let s = summarize(&[0.5; 10]);
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.stderr, 0.0);
    }

    #[test]
    fn summary_matches_hand_values() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_line_is_recovered() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|x| 1.5 - 0.25 * x).collect();
        let fit = line_fit(&x, &y).unwrap();
        assert!((fit.slope + 0.25).abs() < 1e-14 && (fit.intercept - 1.5).abs() < 1e-14);
        assert!(fit.slope_stderr < 1e-14);
    }

    #[test]
    fn power_law_slope() {
        let x = [4.0, 8.0, 16.0, 32.0];
        let y: Vec<f64> = x.iter().map(|d: &f64| 3.0 / d).collect();
        assert!((loglog_slope(&x, &y).unwrap() + 1.0).abs() < 1e-14);
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }
}
