//! Closed-form sample-complexity bounds and log-log scaling fits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimax lower bound `(1/16)·√(m/N)` on the expected reconstruction error.
pub fn lower_bound_risk(m: u64, n: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if n < m {
        return Err(Error::HypothesisViolated(format!("N = {n} < m = {m}")));
    }
    Ok((m as f64 / n as f64).sqrt() / 16.0)
}

/// Symbols of the masked-modeling sample bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsInput {
    pub m: u64,
    pub kappa: f64,
    #[serde(rename = "L")]
    pub l: u64,
    pub c_pi: f64,
    #[serde(rename = "C_pi")]
    pub big_c_pi: u64,
    pub epsilon: f64,
    pub delta: f64,
    /// Dataset size, only used for the lower bound.
    #[serde(default)]
    pub n: Option<u64>,
}

impl BoundsInput {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.m < 1 {
            return bad("m must be at least 1");
        }
        if self.kappa.is_nan() || self.kappa < 1.0 {
            return bad("kappa must be at least 1");
        }
        if self.l < 1 {
            return bad("L must be at least 1");
        }
        if !(self.c_pi > 0.0 && self.c_pi <= 1.0) {
            return bad("c_pi must lie in (0, 1]");
        }
        if self.big_c_pi < 1 {
            return bad("C_pi must be at least 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Sufficient pre-training sizes; `k_min` and `n_min` are ceilings of the
/// raw thresholds, which are kept for inspection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBounds {
    pub k_min: f64,
    pub n_min: f64,
    pub k_raw: f64,
    /// The two terms whose maximum is the dataset-size threshold.
    pub n_raw: [f64; 2],
}

pub fn mm_sample_bounds(b: &BoundsInput) -> Result<SampleBounds> {
    b.validate()?;
    let m = b.m as f64;
    let c = b.big_c_pi as f64;
    let l = b.l as f64;
    let k_raw = 2f64.powi(14) * m * m * b.kappa * b.kappa * l * l / (b.c_pi * b.c_pi * b.epsilon * b.epsilon)
        * (6.0 * m * c / b.delta).ln();
    let n_cover = 2.0 * m * b.kappa / b.c_pi * (3.0 * m * c / b.delta).ln();
    let n_freq = 8.0 * m / (b.epsilon * b.epsilon) * (6.0 * m / b.delta).ln();
    Ok(SampleBounds {
        k_min: k_raw.ceil(),
        n_min: n_cover.max(n_freq).ceil(),
        k_raw,
        n_raw: [n_cover, n_freq],
    })
}

/// Extreme probabilities of a normalized distribution over `m0` outcomes with
/// range ratio `kappa0`: `min ≥ 1/(m0·κ0)` and `max ≤ κ0/(m0+κ0−1)`.
pub fn lemma_rr_bounds(m0: u64, kappa0: f64) -> (f64, f64) {
    let m0 = m0 as f64;
    (1.0 / (m0 * kappa0), kappa0 / (m0 + kappa0 - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Distinct x values used.
    pub points: usize,
}

/// Least squares of `ln ȳ` on `ln x`, where `ȳ` is the mean of the y values
/// sharing each x.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<LogFit> {
    let mut groups: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for &(x, y) in points {
        if x.is_nan() || x <= 0.0 || !y.is_finite() {
            return Err(Error::InvalidForLogFit(format!("point ({x}, {y})")));
        }
        let g = groups.entry(x.to_bits()).or_insert((x, 0.0, 0));
        g.1 += y;
        g.2 += 1;
    }
    if groups.len() < 3 {
        return Err(Error::InvalidForLogFit(format!("{} distinct x values, need at least 3", groups.len())));
    }
    let mut xs = Vec::with_capacity(groups.len());
    let mut ys = Vec::with_capacity(groups.len());
    for (x, sum, count) in groups.into_values() {
        let mean = sum / count as f64;
        if mean.is_nan() || mean <= 0.0 {
            return Err(Error::InvalidForLogFit(format!("mean y {mean} at x = {x}")));
        }
        xs.push(x.ln());
        ys.push(mean.ln());
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(LogFit { slope, intercept: my - slope * mx, points: xs.len() })
}
