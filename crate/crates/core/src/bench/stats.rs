use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation over `sqrt(count)`.
    pub sdom: f64,
}

pub fn aggregate(values: &[f64]) -> Aggregate {
    let n = values.len();
    if n == 0 {
        return Aggregate {
            count: 0,
            mean: f64::NAN,
            sdom: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    Aggregate {
        count: n,
        mean,
        sdom: var.sqrt() / (n as f64).sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope·x + intercept`. A constant `y` is
/// fitted exactly and reports `R² = 1`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    let n = points.len() as f64;
    let first = points.first().ok_or(Error::DegenerateFit)?.0;
    if points.iter().all(|p| p.0 == first) {
        return Err(Error::DegenerateFit);
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        points: points.len(),
    })
}

/// 3-point running median; the endpoints are kept.
pub fn median3(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    for i in 1..values.len().saturating_sub(1) {
        let mut w = [values[i - 1], values[i], values[i + 1]];
        w.sort_by(f64::total_cmp);
        out[i] = w[1];
    }
    out
}

pub fn is_non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

pub fn is_strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}
