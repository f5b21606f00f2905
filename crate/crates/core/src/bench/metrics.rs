use super::BenchError;
use crate::solver::ScfTrace;
use serde::{Deserialize, Serialize};

/// Signed area between log-accuracy curves, normalized per term by the
/// pointwise larger log:
/// Σ(ln x_i − ln y_i) / Σ|max(ln x_i, ln y_i)| over the common prefix.
/// Positive when the learned series `y` lies below the baseline `x`.
pub fn s_auc(baseline: &[f64], learned: &[f64]) -> Result<f64, BenchError> {
    if baseline.is_empty() || learned.is_empty() {
        return Err(BenchError::Metric("empty accuracy series".into()));
    }
    let n = baseline.len().min(learned.len());
    let (mut num, mut den) = (0.0, 0.0);
    for (&x, &y) in baseline[..n].iter().zip(&learned[..n]) {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(BenchError::Metric(format!("accuracy must be positive, got {x} and {y}")));
        }
        let (lx, ly) = (x.ln(), y.ln());
        num += lx - ly;
        den += lx.max(ly).abs();
    }
    if den == 0.0 {
        return Err(BenchError::Metric("s-AUC undefined: every accuracy equals 1".into()));
    }
    Ok(num / den)
}

/// Percentage of iterations saved at convergence; ±100 when only one side
/// converged, `None` when neither did.
pub fn iteration_savings(baseline: &ScfTrace, learned: &ScfTrace) -> Option<f64> {
    match (baseline.iterations_to_converge, learned.iterations_to_converge) {
        (Some(nb), Some(nl)) => Some(100.0 * (nb as f64 - nl as f64) / nb as f64),
        (None, Some(_)) => Some(100.0),
        (Some(_), None) => Some(-100.0),
        (None, None) => None,
    }
}

/// Element at position ⌊(n−1)/2⌋ of the sorted values.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsSummary {
    pub split: String,
    pub n: usize,
    pub n_plus: usize,
    pub pct_positive: f64,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
}

impl SavingsSummary {
    /// Summary of `values`; NaN statistics when empty.
    pub fn from_values(split: &str, values: &[f64]) -> Self {
        let n = values.len();
        let n_plus = values.iter().filter(|&&v| v > 0.0).count();
        let nan = f64::NAN;
        SavingsSummary {
            split: split.to_string(),
            n,
            n_plus,
            pct_positive: if n == 0 { nan } else { 100.0 * n_plus as f64 / n as f64 },
            mean: if n == 0 { nan } else { values.iter().sum::<f64>() / n as f64 },
            median: lower_median(values).unwrap_or(nan),
            max: values.iter().copied().reduce(f64::max).unwrap_or(nan),
            min: values.iter().copied().reduce(f64::min).unwrap_or(nan),
        }
    }
}
