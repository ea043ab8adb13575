use super::trial::TrialRecord;
use crate::error::{Error, Result};

/// Least-squares line through `(ln n, ln err)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `ln err = intercept + slope · ln n` by ordinary least squares.
///
/// Two points already determine a line (r² = 1 trivially); three or more are
/// needed for r² to carry information.
pub fn fit_rate_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(Error::validation(format!("need at least 2 points, got {}", points.len())));
    }
    if let Some(&(n, e)) = points.iter().find(|&&(n, e)| !(n > 0.0 && e > 0.0 && n.is_finite() && e.is_finite())) {
        return Err(Error::validation(format!("point ({n}, {e}) is not positive and finite")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::validation("all n values are equal; slope is undefined"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
    })
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len();
    Some(if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    })
}

/// Median of `metric` per `n` over successful, finite rows; sorted by `n`.
pub fn median_by_n(records: &[TrialRecord], metric: &str) -> Vec<(usize, f64)> {
    let mut groups: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    for rec in records.iter().filter(|r| r.is_ok()) {
        if let Some(v) = rec.metric(metric).filter(|v| v.is_finite()) {
            groups.entry(rec.n).or_default().push(v);
        }
    }
    groups
        .into_iter()
        .filter_map(|(n, mut vs)| median(&mut vs).map(|m| (n, m)))
        .collect()
}

/// Slope of the per-`n` medians of `metric`.
pub fn fit_metric_slope(records: &[TrialRecord], metric: &str) -> Result<(Vec<(usize, f64)>, SlopeFit)> {
    let medians = median_by_n(records, metric);
    let points: Vec<(f64, f64)> = medians.iter().map(|&(n, v)| (n as f64, v)).collect();
    let fit = fit_rate_slope(&points)?;
    Ok((medians, fit))
}
