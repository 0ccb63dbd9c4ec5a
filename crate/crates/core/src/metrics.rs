//! Deviation metrics and small summary statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Cmat;

/// Relative variation distance between a target weight matrix and its
/// realized counterpart: the entrywise absolute deviation summed over the
/// matrix, normalized by the summed magnitude of the target.
pub fn rvd(target: &Cmat, realized: &Cmat) -> Result<f64> {
    if target.dim() != realized.dim() {
        return Err(Error::InvalidParameter(format!(
            "shape mismatch: {:?} vs {:?}",
            target.dim(),
            realized.dim()
        )));
    }
    let denom: f64 = target.iter().map(|z| z.norm()).sum();
    if denom == 0.0 {
        return Err(Error::Domain("target matrix has zero magnitude".into()));
    }
    let num: f64 = target
        .iter()
        .zip(realized.iter())
        .map(|(a, b)| (a - b).norm())
        .sum();
    Ok(num / denom)
}

/// Five-number summary with Tukey whiskers (most extreme samples within
/// 1.5·IQR of the quartiles) plus the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
}

/// Linearly interpolated quantile of sorted data (the common "type 7" rule).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

pub fn box_stats(samples: &[f64]) -> Result<BoxStats> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let whisker_low = *sorted.iter().find(|&&v| v >= lo_fence).unwrap_or(&sorted[0]);
    let whisker_high = *sorted
        .iter()
        .rev()
        .find(|&&v| v <= hi_fence)
        .unwrap_or(sorted.last().unwrap());
    Ok(BoxStats {
        n: sorted.len(),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        median,
        q1,
        q3,
        whisker_low,
        whisker_high,
    })
}

/// Ordinary least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("x/y length mismatch".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least 2 points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Domain("degenerate fit: zero variance".into()));
    }
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared: (sxy * sxy) / (sxx * syy),
        n,
    })
}
