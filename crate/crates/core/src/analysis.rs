//! Regional predictions, error metrics, histograms and the linear baseline.
//!
//! Rates are fractions throughout; histograms and CSV reports use percent.

use std::io::Write;

use rand::seq::index;

use crate::decimal::fraction_to_percent;
use crate::dynamics::OpinionMatrix;
use crate::population::{AgentAllocation, RegionTable};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RegionPrediction {
    pub region_id: String,
    pub n_agents: usize,
    /// `None` for regions that received no agents.
    pub predicted_rate: Option<f64>,
    pub measured_rate: Option<f64>,
}

/// Mean of opinion column 0 over each region's agents.
pub fn region_means(state: &OpinionMatrix, alloc: &AgentAllocation, table: &RegionTable) -> Result<Vec<RegionPrediction>> {
    if alloc.n_total() != state.n_agents() {
        return Err(Error::param(format!(
            "allocation covers {} agents, state has {}",
            alloc.n_total(),
            state.n_agents()
        )));
    }
    if alloc.n_regions() != table.len() {
        return Err(Error::param(format!("allocation has {} regions, table has {}", alloc.n_regions(), table.len())));
    }
    Ok(alloc
        .ranges()
        .iter()
        .zip(table.records())
        .map(|(range, rec)| {
            let n = range.len();
            let predicted_rate = (n > 0).then(|| {
                let sum: f64 = range.clone().map(|i| state.row(i)[0]).sum();
                (sum / n as f64).clamp(0.0, 1.0)
            });
            RegionPrediction {
                region_id: rec.region_id.clone(),
                n_agents: n,
                predicted_rate,
                measured_rate: rec.outcome_rate,
            }
        })
        .collect())
}

/// Writes `region_id,n_agents,predicted_pct,measured_pct`; missing values are empty.
pub fn write_predictions<W: Write>(predictions: &[RegionPrediction], mut out: W) -> Result<()> {
    writeln!(out, "region_id,n_agents,predicted_pct,measured_pct")?;
    for p in predictions {
        writeln!(
            out,
            "{},{},{},{}",
            p.region_id,
            p.n_agents,
            p.predicted_rate.map(fraction_to_percent).unwrap_or_default(),
            p.measured_rate.map(fraction_to_percent).unwrap_or_default()
        )?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub mse: f64,
    pub rmse: f64,
    pub n_pairs: usize,
    /// Pairs where either side was missing.
    pub n_skipped: usize,
}

/// Mean squared error over the pairs where both values are present.
pub fn error_metrics<I>(pairs: I) -> Result<ErrorMetrics>
where
    I: IntoIterator<Item = (Option<f64>, Option<f64>)>,
{
    let mut sum = 0.0;
    let mut n_pairs = 0;
    let mut n_skipped = 0;
    for pair in pairs {
        match pair {
            (Some(a), Some(b)) => {
                let d = a - b;
                sum += d * d;
                n_pairs += 1;
            }
            _ => n_skipped += 1,
        }
    }
    if n_pairs == 0 {
        return Err(Error::Input("no comparable prediction/measurement pairs".into()));
    }
    let mse = sum / n_pairs as f64;
    Ok(ErrorMetrics {
        mse,
        rmse: mse.sqrt(),
        n_pairs,
        n_skipped,
    })
}

pub fn mse(predictions: &[f64], measurements: &[f64]) -> Result<f64> {
    if predictions.len() != measurements.len() {
        return Err(Error::param("prediction and measurement lists differ in length"));
    }
    error_metrics(predictions.iter().zip(measurements).map(|(&a, &b)| (Some(a), Some(b)))).map(|m| m.mse)
}

pub fn rmse(predictions: &[f64], measurements: &[f64]) -> Result<f64> {
    mse(predictions, measurements).map(f64::sqrt)
}

/// Model predictions against measured outcomes.
pub fn prediction_metrics(predictions: &[RegionPrediction]) -> Result<ErrorMetrics> {
    error_metrics(predictions.iter().map(|p| (p.predicted_rate, p.measured_rate)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Values outside `[lo, hi]`, including NaN.
    pub out_of_range: u64,
}

/// Bins every `1.25` percent points across `[0, 100]`.
pub const DEFAULT_BINS: usize = 80;

/// Equal-width bins, left-closed and right-open except the last, which is closed.
pub fn histogram(values: &[f64], n_bins: usize, lo: f64, hi: f64) -> Result<Histogram> {
    if n_bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param(format!("histogram needs n_bins >= 1 and finite lo < hi, got {n_bins}, [{lo}, {hi}]")));
    }
    let width = hi - lo;
    let bin_edges: Vec<f64> = (0..=n_bins)
        .map(|i| if i == n_bins { hi } else { lo + width * i as f64 / n_bins as f64 })
        .collect();
    let mut counts = vec![0u64; n_bins];
    let mut out_of_range = 0;
    for &v in values {
        if !(lo..=hi).contains(&v) {
            out_of_range += 1;
            continue;
        }
        let mut b = (((v - lo) * n_bins as f64 / width) as usize).min(n_bins - 1);
        // Keep the bin consistent with the published edges.
        while b > 0 && v < bin_edges[b] {
            b -= 1;
        }
        while b + 1 < n_bins && v >= bin_edges[b + 1] {
            b += 1;
        }
        counts[b] += 1;
    }
    Ok(Histogram {
        bin_edges,
        counts,
        out_of_range,
    })
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Writes `bin_lo,bin_hi,count`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin_lo,bin_hi,count")?;
        for (b, c) in self.counts.iter().enumerate() {
            writeln!(out, "{},{},{}", self.bin_edges[b], self.bin_edges[b + 1], c)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionModel {
    pub slope: f64,
    pub intercept: f64,
    pub n_train: usize,
}

/// Ordinary least squares for one predictor, from centered sums.
pub fn fit_linear(train: &[(f64, f64)]) -> Result<RegressionModel> {
    if train.len() < 2 {
        return Err(Error::Input(format!("need at least two training points, got {}", train.len())));
    }
    let n = train.len() as f64;
    let x_mean = train.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = train.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in train {
        let dx = x - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_mean);
    }
    if sxx == 0.0 {
        return Err(Error::Input("all training x values are identical; the fit is degenerate".into()));
    }
    let slope = sxy / sxx;
    Ok(RegressionModel {
        slope,
        intercept: y_mean - slope * x_mean,
        n_train: train.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPrediction {
    pub value: f64,
    pub clamped: bool,
}

pub fn predict_linear(model: &RegressionModel, x: f64) -> LinearPrediction {
    let raw = model.slope * x + model.intercept;
    let value = raw.clamp(0.0, 1.0);
    LinearPrediction {
        value,
        clamped: value != raw,
    }
}

/// Disjoint train and evaluation index sets drawn uniformly without
/// replacement from `0..n`. With `eval_size = None` every index not used
/// for training is evaluated. Both lists come back sorted.
pub fn train_eval_split(n: usize, train_size: usize, eval_size: Option<usize>, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if train_size >= n {
        return Err(Error::Input(format!("train size {train_size} must be below the {n} available points")));
    }
    let eval_size = eval_size.unwrap_or(n - train_size);
    if eval_size == 0 || train_size + eval_size > n {
        return Err(Error::Input(format!(
            "train size {train_size} plus eval size {eval_size} must fit within {n} points"
        )));
    }
    let mut rng = rng::seeded(seed);
    let drawn = index::sample(&mut rng, n, train_size + eval_size).into_vec();
    let mut train = drawn[..train_size].to_vec();
    let mut eval = drawn[train_size..].to_vec();
    train.sort_unstable();
    eval.sort_unstable();
    Ok((train, eval))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSummary {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Summary statistics of regional predicted rates; quantiles interpolate
/// linearly between order statistics.
pub fn dispersion_report(values: &[f64]) -> Result<DispersionSummary> {
    if values.is_empty() {
        return Err(Error::Input("no predictions to summarise".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let q = |p: f64| {
        let pos = p * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    };
    Ok(DispersionSummary {
        count: sorted.len(),
        mean,
        stddev: var.sqrt(),
        min: sorted[0],
        q25: q(0.25),
        median: q(0.5),
        q75: q(0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// Predicted rates of the regions that have one.
pub fn predicted_rates(predictions: &[RegionPrediction]) -> Vec<f64> {
    predictions.iter().filter_map(|p| p.predicted_rate).collect()
}
