//! Feature-agnostic forecasting baselines over per-job daily count series:
//! simple exponential smoothing, the Croston family, TSB, ADIDA, IMAPA,
//! window average, and an autoregressive model fit by least squares.
//!
//! All level methods produce flat forecasts (the same value at every step
//! of the horizon); only the autoregressive model feeds its own predictions
//! back. Series must be gapless daily values starting at day 1; corpus
//! forecasting skips and reports jobs whose history does not satisfy that.
//!
//! Every forecaster is a pure function: no state survives a call.

use std::collections::BTreeMap;
use std::fmt;

use crate::datamodel::{Dataset, Split};
use crate::error::{Error, Result};
use crate::evalreport::Prediction;

/// Daily cumulative application counts for one job: `values[0]` is day 1,
/// with no missing interior days.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSeries {
    pub job_id: String,
    pub values: Vec<f64>,
}

impl CountSeries {
    pub fn new(job_id: impl Into<String>, values: Vec<f64>) -> Result<CountSeries> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Invalid(
                "count series values must be finite and non-negative".into(),
            ));
        }
        Ok(CountSeries {
            job_id: job_id.into(),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Flat-or-recursive forecast over a horizon, tagged with the method
/// spelling that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub values: Vec<f64>,
    pub method: String,
}

impl Forecast {
    /// Value at the last step of the horizon.
    pub fn final_step(&self) -> f64 {
        *self.values.last().expect("forecast horizon >= 1")
    }

    /// Clamps every step at 0 (counts are non-negative).
    pub fn clamped(mut self) -> Forecast {
        for v in &mut self.values {
            *v = v.max(0.0);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrostonVariant {
    Classic,
    Sba,
    Optimized,
}

/// A forecasting method with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Ses { alpha: f64 },
    Croston { alpha: f64, variant: CrostonVariant },
    Tsb { alpha_demand: f64, alpha_probability: f64 },
    Adida { bucket: usize, alpha: f64 },
    Imapa { alpha: f64 },
    WindowAverage { window: usize },
    AutoRegressive { lags: Vec<usize> },
}

impl Method {
    pub fn forecast(&self, series: &[f64], horizon: usize) -> Result<Forecast> {
        match self {
            Method::Ses { alpha } => ses(series, *alpha, horizon),
            Method::Croston { alpha, variant } => croston(series, *alpha, *variant, horizon),
            Method::Tsb { alpha_demand, alpha_probability } => {
                tsb(series, *alpha_demand, *alpha_probability, horizon)
            }
            Method::Adida { bucket, alpha } => adida(series, *bucket, *alpha, horizon),
            Method::Imapa { alpha } => imapa(series, *alpha, horizon),
            Method::WindowAverage { window } => window_average(series, *window, horizon),
            Method::AutoRegressive { lags } => autoregressive(series, lags, horizon),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Ses { alpha } => write!(f, "SES(alpha={alpha})"),
            Method::Croston { alpha, variant } => match variant {
                CrostonVariant::Classic => write!(f, "CrostonClassic(alpha={alpha})"),
                CrostonVariant::Sba => write!(f, "CrostonSBA(alpha={alpha})"),
                CrostonVariant::Optimized => write!(f, "CrostonOptimized"),
            },
            Method::Tsb { alpha_demand, alpha_probability } => {
                write!(f, "TSB({alpha_demand},{alpha_probability})")
            }
            Method::Adida { bucket, alpha } => write!(f, "ADIDA(bucket={bucket},alpha={alpha})"),
            Method::Imapa { alpha } => write!(f, "IMAPA(alpha={alpha})"),
            Method::WindowAverage { window } => write!(f, "WindowAverage(window_size={window})"),
            Method::AutoRegressive { lags } => write!(f, "AutoRegressive(lags={lags:?})"),
        }
    }
}

fn check_series(series: &[f64]) -> Result<()> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(())
}

fn check_alpha(alpha: f64, what: &'static str) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha > 1.0 {
        return Err(Error::InvalidConfig {
            what,
            message: format!("smoothing rate must be in (0, 1], got {alpha}"),
        });
    }
    Ok(())
}

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::InvalidConfig {
            what: "horizon",
            message: "must be >= 1".into(),
        });
    }
    Ok(())
}

/// Level recursion `l_1 = y_1; l_t = a*y_t + (1-a)*l_{t-1}`.
fn ses_level(series: &[f64], alpha: f64) -> f64 {
    let mut level = series[0];
    for &y in &series[1..] {
        level = alpha * y + (1.0 - alpha) * level;
    }
    level
}

fn flat(value: f64, horizon: usize, method: String) -> Forecast {
    Forecast {
        values: vec![value; horizon],
        method,
    }
}

/// Simple exponential smoothing; forecast is the final level, flat over
/// the horizon.
pub fn ses(series: &[f64], alpha: f64, horizon: usize) -> Result<Forecast> {
    check_series(series)?;
    check_alpha(alpha, "ses alpha")?;
    check_horizon(horizon)?;
    Ok(flat(
        ses_level(series, alpha),
        horizon,
        Method::Ses { alpha }.to_string(),
    ))
}

/// Nonzero demand sizes and the 1-based inter-demand intervals (the first
/// interval is the position of the first nonzero value).
fn demand_decomposition(series: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut sizes = Vec::new();
    let mut intervals = Vec::new();
    let mut last_position: Option<usize> = None;
    for (i, &y) in series.iter().enumerate() {
        if y > 0.0 {
            sizes.push(y);
            intervals.push(match last_position {
                None => (i + 1) as f64,
                Some(prev) => (i - prev) as f64,
            });
            last_position = Some(i);
        }
    }
    (sizes, intervals)
}

/// Croston's method: smooths demand sizes and inter-demand intervals
/// separately (same rate, first-value initialization) and forecasts their
/// ratio. `Sba` multiplies by `1 - alpha/2`; `Optimized` grid-searches the
/// rate in {0.05, 0.10, ..., 0.95} minimizing in-sample one-step squared
/// error of the reconstructed demand-rate forecast.
pub fn croston(series: &[f64], alpha: f64, variant: CrostonVariant, horizon: usize) -> Result<Forecast> {
    check_series(series)?;
    check_horizon(horizon)?;
    let method = Method::Croston { alpha, variant }.to_string();
    let rate = match variant {
        CrostonVariant::Classic => {
            check_alpha(alpha, "croston alpha")?;
            croston_rate(series, alpha)
        }
        CrostonVariant::Sba => {
            check_alpha(alpha, "croston alpha")?;
            croston_rate(series, alpha) * (1.0 - alpha / 2.0)
        }
        CrostonVariant::Optimized => {
            let mut best = (f64::INFINITY, 0.05);
            for step in 1..=19 {
                let candidate = step as f64 * 0.05;
                let sse = croston_one_step_sse(series, candidate);
                if sse < best.0 {
                    best = (sse, candidate);
                }
            }
            croston_rate(series, best.1)
        }
    };
    Ok(flat(rate, horizon, method))
}

fn croston_rate(series: &[f64], alpha: f64) -> f64 {
    let (sizes, intervals) = demand_decomposition(series);
    if sizes.is_empty() {
        return 0.0;
    }
    ses_level(&sizes, alpha) / ses_level(&intervals, alpha)
}

/// In-sample one-step squared error of the demand-rate forecast under the
/// classic recursion with the given rate.
fn croston_one_step_sse(series: &[f64], alpha: f64) -> f64 {
    let mut size_level: f64 = 0.0;
    let mut interval_level: f64 = 0.0;
    let mut initialized = false;
    let mut last_position: Option<usize> = None;
    let mut rate: Option<f64> = None;
    let mut sse = 0.0;
    for (i, &y) in series.iter().enumerate() {
        if let Some(r) = rate {
            sse += (y - r) * (y - r);
        }
        if y > 0.0 {
            let interval = match last_position {
                None => (i + 1) as f64,
                Some(prev) => (i - prev) as f64,
            };
            if initialized {
                size_level = alpha * y + (1.0 - alpha) * size_level;
                interval_level = alpha * interval + (1.0 - alpha) * interval_level;
            } else {
                size_level = y;
                interval_level = interval;
                initialized = true;
            }
            last_position = Some(i);
        }
        if initialized {
            rate = Some(size_level / interval_level);
        }
    }
    sse
}

/// Teunter-Syntetos-Babai: the demand probability is smoothed every period
/// (initialized from the first occurrence flag), the demand size only on
/// demand periods (initialized from the first nonzero value); the forecast
/// is their product.
pub fn tsb(series: &[f64], alpha_demand: f64, alpha_probability: f64, horizon: usize) -> Result<Forecast> {
    check_series(series)?;
    check_alpha(alpha_demand, "tsb demand rate")?;
    check_alpha(alpha_probability, "tsb probability rate")?;
    check_horizon(horizon)?;
    let mut probability = if series[0] > 0.0 { 1.0 } else { 0.0 };
    let mut size = if series[0] > 0.0 { series[0] } else { 0.0 };
    let mut size_initialized = series[0] > 0.0;
    for &y in &series[1..] {
        let occurrence = if y > 0.0 { 1.0 } else { 0.0 };
        probability = alpha_probability * occurrence + (1.0 - alpha_probability) * probability;
        if y > 0.0 {
            if size_initialized {
                size = alpha_demand * y + (1.0 - alpha_demand) * size;
            } else {
                size = y;
                size_initialized = true;
            }
        }
    }
    Ok(flat(
        probability * size,
        horizon,
        Method::Tsb { alpha_demand, alpha_probability }.to_string(),
    ))
}

/// Aggregate-disaggregate: sums the series into non-overlapping buckets
/// (dropping the oldest remainder), smooths the bucketed series, and
/// spreads the bucket-level forecast back per day.
pub fn adida(series: &[f64], bucket: usize, alpha: f64, horizon: usize) -> Result<Forecast> {
    check_series(series)?;
    check_alpha(alpha, "adida alpha")?;
    check_horizon(horizon)?;
    if bucket == 0 {
        return Err(Error::InvalidConfig {
            what: "adida bucket",
            message: "must be >= 1".into(),
        });
    }
    if series.len() < bucket {
        return Err(Error::SeriesTooShort {
            needed: bucket,
            got: series.len(),
        });
    }
    let n_buckets = series.len() / bucket;
    let start = series.len() - n_buckets * bucket;
    let aggregated: Vec<f64> = series[start..]
        .chunks_exact(bucket)
        .map(|chunk| chunk.iter().sum())
        .collect();
    let per_day = ses_level(&aggregated, alpha) / bucket as f64;
    Ok(flat(
        per_day,
        horizon,
        Method::Adida { bucket, alpha }.to_string(),
    ))
}

/// Multiple-aggregation prediction: averages the ADIDA per-day forecast
/// over aggregation levels 1..=max(1, T/2).
pub fn imapa(series: &[f64], alpha: f64, horizon: usize) -> Result<Forecast> {
    check_series(series)?;
    check_alpha(alpha, "imapa alpha")?;
    check_horizon(horizon)?;
    let max_level = (series.len() / 2).max(1);
    let mut sum = 0.0;
    for level in 1..=max_level {
        sum += adida(series, level, alpha, 1)?.final_step();
    }
    Ok(flat(
        sum / max_level as f64,
        horizon,
        Method::Imapa { alpha }.to_string(),
    ))
}

/// Flat forecast equal to the mean of the last `window` values.
pub fn window_average(series: &[f64], window: usize, horizon: usize) -> Result<Forecast> {
    check_series(series)?;
    check_horizon(horizon)?;
    if window == 0 {
        return Err(Error::InvalidConfig {
            what: "window",
            message: "must be >= 1".into(),
        });
    }
    if series.len() < window {
        return Err(Error::SeriesTooShort {
            needed: window,
            got: series.len(),
        });
    }
    let tail = &series[series.len() - window..];
    Ok(flat(
        tail.iter().sum::<f64>() / window as f64,
        horizon,
        Method::WindowAverage { window }.to_string(),
    ))
}

/// Least-squares fit of `y_t = c + sum_j phi_j * y_{t-lag_j}` over every
/// valid `t`. Returns `[c, phi_1, ..]`; singular normal equations fall
/// back to the least-norm solution.
pub fn autoregressive_fit(series: &[f64], lags: &[usize]) -> Result<Vec<f64>> {
    check_series(series)?;
    if lags.is_empty() || lags.contains(&0) {
        return Err(Error::InvalidConfig {
            what: "ar lags",
            message: "need a non-empty list of lags >= 1".into(),
        });
    }
    let max_lag = *lags.iter().max().unwrap();
    if series.len() < max_lag + 2 {
        return Err(Error::SeriesTooShort {
            needed: max_lag + 2,
            got: series.len(),
        });
    }
    let k = lags.len() + 1;
    // normal equations: a = X'X, b = X'y with X rows [1, y_{t-lag_1}, ...]
    let mut a = vec![0.0; k * k];
    let mut b = vec![0.0; k];
    let mut x_row = vec![0.0; k];
    for t in max_lag..series.len() {
        x_row[0] = 1.0;
        for (j, &lag) in lags.iter().enumerate() {
            x_row[j + 1] = series[t - lag];
        }
        for i in 0..k {
            for j in 0..k {
                a[i * k + j] += x_row[i] * x_row[j];
            }
            b[i] += x_row[i] * series[t];
        }
    }
    solve_symmetric(&a, &b, k)
}

/// Fits the autoregression and forecasts recursively, feeding predictions
/// back for steps beyond the observed series.
pub fn autoregressive(series: &[f64], lags: &[usize], horizon: usize) -> Result<Forecast> {
    check_horizon(horizon)?;
    let beta = autoregressive_fit(series, lags)?;

    let mut extended = series.to_vec();
    for _ in 0..horizon {
        let mut value = beta[0];
        for (j, &lag) in lags.iter().enumerate() {
            value += beta[j + 1] * extended[extended.len() - lag];
        }
        extended.push(value);
    }
    Ok(Forecast {
        values: extended[series.len()..].to_vec(),
        method: Method::AutoRegressive { lags: lags.to_vec() }.to_string(),
    })
}

/// Solves `a x = b` for symmetric positive semi-definite `a` (k x k,
/// row-major). Uses Gaussian elimination with partial pivoting; when `a`
/// is (near-)singular, returns the least-norm solution via a Jacobi
/// eigendecomposition.
fn solve_symmetric(a: &[f64], b: &[f64], k: usize) -> Result<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let tol = 1e-12 * scale;

    // Gaussian elimination attempt
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let mut singular = false;
    let mut perm: Vec<usize> = (0..k).collect();
    'elim: for col in 0..k {
        let mut pivot_row = col;
        let mut pivot_val = m[perm[col] * k + col].abs();
        for (row, &p) in perm.iter().enumerate().skip(col + 1) {
            let v = m[p * k + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val < tol {
            singular = true;
            break 'elim;
        }
        perm.swap(col, pivot_row);
        let p = perm[col];
        for &r in &perm[col + 1..] {
            let factor = m[r * k + col] / m[p * k + col];
            for j in col..k {
                m[r * k + j] -= factor * m[p * k + j];
            }
            rhs[r] -= factor * rhs[p];
        }
    }
    if !singular {
        let mut x = vec![0.0; k];
        for col in (0..k).rev() {
            let p = perm[col];
            let mut acc = rhs[p];
            for j in col + 1..k {
                acc -= m[p * k + j] * x[j];
            }
            x[col] = acc / m[p * k + col];
        }
        return Ok(x);
    }

    // least-norm solution: pseudo-inverse through eigenpairs of a
    let (eigenvalues, eigenvectors) = jacobi_eigen(a, k);
    let eig_tol = 1e-10 * eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut x = vec![0.0; k];
    for (idx, &lambda) in eigenvalues.iter().enumerate() {
        if lambda.abs() <= eig_tol {
            continue;
        }
        let u: Vec<f64> = (0..k).map(|i| eigenvectors[i * k + idx]).collect();
        let coeff = u.iter().zip(b).map(|(ui, bi)| ui * bi).sum::<f64>() / lambda;
        for i in 0..k {
            x[i] += coeff * u[i];
        }
    }
    Ok(x)
}

/// Classic Jacobi rotation eigendecomposition for a small symmetric
/// matrix; returns (eigenvalues, column eigenvectors).
fn jacobi_eigen(a: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..k {
            for j in i + 1..k {
                off += m[i * k + j] * m[i * k + j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..k {
            for q in p + 1..k {
                let apq = m[p * k + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * k + q] - m[p * k + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..k {
                    let mip = m[i * k + p];
                    let miq = m[i * k + q];
                    m[i * k + p] = c * mip - s * miq;
                    m[i * k + q] = s * mip + c * miq;
                }
                for j in 0..k {
                    let mpj = m[p * k + j];
                    let mqj = m[q * k + j];
                    m[p * k + j] = c * mpj - s * mqj;
                    m[q * k + j] = s * mpj + c * mqj;
                }
                for i in 0..k {
                    let vip = v[i * k + p];
                    let viq = v[i * k + q];
                    v[i * k + p] = c * vip - s * viq;
                    v[i * k + q] = s * vip + c * viq;
                }
            }
        }
    }
    let eigenvalues = (0..k).map(|i| m[i * k + i]).collect();
    (eigenvalues, v)
}

/// A job that could not be forecast, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipReport {
    pub job_id: String,
    pub reason: String,
}

/// Forecasts every job's count at `target_day` from its own observed days
/// strictly before `target_day`. The history must be gapless daily values
/// starting at day 1; jobs that violate that (or are too short for the
/// method) are skipped and reported. Predictions are clamped at 0.
pub fn forecast_corpus(
    dataset: &Dataset,
    split: Option<Split>,
    method: &Method,
    target_day: u32,
) -> Result<(Vec<Prediction>, Vec<SkipReport>)> {
    if target_day < 2 {
        return Err(Error::InvalidConfig {
            what: "target_day",
            message: "must be >= 2 so at least one prior day can exist".into(),
        });
    }
    let mut history: BTreeMap<&str, BTreeMap<u32, f64>> = BTreeMap::new();
    for obs in dataset.observations() {
        if obs.t < target_day {
            history
                .entry(obs.job_id.as_str())
                .or_default()
                .insert(obs.t, f64::from(obs.jac));
        }
    }
    let mut predictions = Vec::new();
    let mut skips = Vec::new();
    for job in dataset.jobs() {
        if let Some(wanted) = split {
            if dataset.split_of(&job.job_id) != Some(wanted) {
                continue;
            }
        }
        let Some(days) = history.get(job.job_id.as_str()) else {
            skips.push(SkipReport {
                job_id: job.job_id.clone(),
                reason: "no history before target day".into(),
            });
            continue;
        };
        let last_day = *days.keys().last().unwrap() as usize;
        if days.len() != last_day || *days.keys().next().unwrap() != 1 {
            skips.push(SkipReport {
                job_id: job.job_id.clone(),
                reason: "history is not gapless daily values starting at day 1".into(),
            });
            continue;
        }
        let series: Vec<f64> = days.values().copied().collect();
        let horizon = (target_day as usize) - last_day;
        match method.forecast(&series, horizon) {
            Ok(forecast) => predictions.push(Prediction {
                job_id: job.job_id.clone(),
                t: target_day,
                value: forecast.final_step().max(0.0),
            }),
            Err(e) => skips.push(SkipReport {
                job_id: job.job_id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    Ok((predictions, skips))
}
