//! MAE and MALE metrics with per-day, per-count, and overall groupings,
//! plus prediction/report/series CSV emission.
//!
//! Predictions are clamped at 0 before scoring, since counts are
//! non-negative. MALE is MAE after casting predictions to integer labels
//! (round half up), so the two agree exactly whenever predictions are
//! already non-negative integers.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::datamodel::{csv_error, Dataset};
use crate::error::{Error, Result};

/// One model output for a `(job, day)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub job_id: String,
    pub t: u32,
    pub value: f64,
}

/// A prediction joined with its true label.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredInstance {
    pub job_id: String,
    pub t: u32,
    pub label: u32,
    pub prediction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Day,
    Jac,
    Overall,
}

impl GroupBy {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupBy::Day => "day",
            GroupBy::Jac => "jac",
            GroupBy::Overall => "overall",
        }
    }

    pub fn parse(s: &str) -> Result<GroupBy> {
        match s {
            "day" => Ok(GroupBy::Day),
            "jac" => Ok(GroupBy::Jac),
            "overall" => Ok(GroupBy::Overall),
            other => Err(Error::Invalid(format!(
                "unknown grouping {other:?} (expected day/jac/overall)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mae,
    Male,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Mae => "mae",
            Metric::Male => "male",
        }
    }
}

/// One row of a grouped evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub group_by: GroupBy,
    pub group: String,
    pub metric: Metric,
    pub value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn value_of(&self, group: &str, metric: Metric) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.group == group && r.metric == metric)
            .map(|r| r.value)
    }
}

fn check_lengths(predictions: &[f64], labels: &[f64]) -> Result<()> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("predictions"));
    }
    Ok(())
}

/// Mean absolute error; predictions are clamped at 0 first.
pub fn mae(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    check_lengths(predictions, labels)?;
    let sum: f64 = predictions
        .iter()
        .zip(labels)
        .map(|(&p, &y)| (p.max(0.0) - y).abs())
        .sum();
    Ok(sum / predictions.len() as f64)
}

/// Casts a raw prediction to an integer label: clamp at 0, round half up.
pub fn cast_to_label(prediction: f64) -> f64 {
    (prediction.max(0.0) + 0.5).floor()
}

/// Mean absolute label error: MAE after casting predictions to integer
/// labels.
pub fn male(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    check_lengths(predictions, labels)?;
    let sum: f64 = predictions
        .iter()
        .zip(labels)
        .map(|(&p, &y)| (cast_to_label(p) - y).abs())
        .sum();
    Ok(sum / predictions.len() as f64)
}

fn mae_of(instances: &[&ScoredInstance]) -> f64 {
    let sum: f64 = instances
        .iter()
        .map(|i| (i.prediction.max(0.0) - f64::from(i.label)).abs())
        .sum();
    sum / instances.len() as f64
}

fn male_of(instances: &[&ScoredInstance]) -> f64 {
    let sum: f64 = instances
        .iter()
        .map(|i| (cast_to_label(i.prediction) - f64::from(i.label)).abs())
        .sum();
    sum / instances.len() as f64
}

/// Grouped evaluation: one MAE row and one MALE row per non-empty group
/// (day ascending or count ascending), followed by overall rows. The
/// overall value is the n-weighted mean of the group values, which makes
/// the aggregation identity exact.
pub fn evaluate_grouped(instances: &[ScoredInstance], group_by: GroupBy) -> Result<EvalReport> {
    if instances.is_empty() {
        return Err(Error::EmptyInput("predictions"));
    }
    let mut rows = Vec::new();
    match group_by {
        GroupBy::Overall => {
            let all: Vec<&ScoredInstance> = instances.iter().collect();
            push_pair(&mut rows, group_by, "overall", &all);
        }
        GroupBy::Day | GroupBy::Jac => {
            let mut groups: BTreeMap<u32, Vec<&ScoredInstance>> = BTreeMap::new();
            for instance in instances {
                let key = match group_by {
                    GroupBy::Day => instance.t,
                    _ => instance.label,
                };
                groups.entry(key).or_default().push(instance);
            }
            for (key, members) in &groups {
                push_pair(&mut rows, group_by, &key.to_string(), members);
            }
            let n_total = instances.len();
            for metric in [Metric::Mae, Metric::Male] {
                let weighted: f64 = rows
                    .iter()
                    .filter(|r| r.metric == metric)
                    .map(|r| r.n as f64 * r.value)
                    .sum();
                rows.push(ReportRow {
                    group_by,
                    group: "overall".to_string(),
                    metric,
                    value: weighted / n_total as f64,
                    n: n_total,
                });
            }
        }
    }
    Ok(EvalReport { rows })
}

fn push_pair(rows: &mut Vec<ReportRow>, group_by: GroupBy, group: &str, members: &[&ScoredInstance]) {
    rows.push(ReportRow {
        group_by,
        group: group.to_string(),
        metric: Metric::Mae,
        value: mae_of(members),
        n: members.len(),
    });
    rows.push(ReportRow {
        group_by,
        group: group.to_string(),
        metric: Metric::Male,
        value: male_of(members),
        n: members.len(),
    });
}

/// Joins raw predictions with the dataset's observations to obtain labels.
/// Every prediction must match an observed `(job_id, t)` pair.
pub fn score_against(dataset: &Dataset, predictions: &[Prediction]) -> Result<Vec<ScoredInstance>> {
    let mut labels: HashMap<(&str, u32), u32> = HashMap::new();
    for obs in dataset.observations() {
        labels.entry((obs.job_id.as_str(), obs.t)).or_insert(obs.jac);
    }
    predictions
        .iter()
        .map(|p| {
            let label = labels.get(&(p.job_id.as_str(), p.t)).copied().ok_or_else(|| {
                Error::Invalid(format!(
                    "no observation for (job_id {:?}, t {})",
                    p.job_id, p.t
                ))
            })?;
            Ok(ScoredInstance {
                job_id: p.job_id.clone(),
                t: p.t,
                label,
                prediction: p.value,
            })
        })
        .collect()
}

/// Writes `report.csv`: columns {group_by, group, metric, value, n}, values
/// printed with 3 decimal places.
pub fn write_report_csv(path: impl AsRef<Path>, report: &EvalReport) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["group_by", "group", "metric", "value", "n"])
        .map_err(|e| csv_error(path, e))?;
    for row in &report.rows {
        w.write_record([
            row.group_by.as_str(),
            &row.group,
            row.metric.as_str(),
            &format!("{:.3}", row.value),
            &row.n.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes predictions as CSV with header `job_id,t,prediction`.
pub fn write_predictions(path: impl AsRef<Path>, predictions: &[Prediction]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["job_id", "t", "prediction"])
        .map_err(|e| csv_error(path, e))?;
    for p in predictions {
        w.write_record([p.job_id.as_str(), &p.t.to_string(), &p.value.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads a predictions CSV written by [`write_predictions`].
pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut predictions = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line_no = i + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != 3 {
            return Err(Error::malformed(
                path,
                line_no,
                format!("expected 3 columns, got {}", record.len()),
            ));
        }
        predictions.push(Prediction {
            job_id: record[0].to_string(),
            t: record[1]
                .parse()
                .map_err(|_| Error::malformed(path, line_no, format!("bad t {:?}", &record[1])))?,
            value: record[2].parse().map_err(|_| {
                Error::malformed(path, line_no, format!("bad prediction {:?}", &record[2]))
            })?,
        });
    }
    Ok(predictions)
}

/// Writes `series.csv` for the requested jobs: {job_id, t, actual,
/// predicted} sorted by (job_id, t). Rows cover the union of observed and
/// predicted day values; a missing side leaves its cell empty.
pub fn emit_series_csv(
    job_ids: &[String],
    dataset: &Dataset,
    predictions: &[Prediction],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    for job_id in job_ids {
        if !dataset.contains_job(job_id) {
            return Err(Error::UnknownJob {
                job_id: job_id.clone(),
            });
        }
    }
    let requested: std::collections::HashSet<&str> = job_ids.iter().map(String::as_str).collect();
    let mut cells: BTreeMap<(String, u32), (Option<u32>, Option<f64>)> = BTreeMap::new();
    for obs in dataset.observations() {
        if requested.contains(obs.job_id.as_str()) {
            cells.entry((obs.job_id.clone(), obs.t)).or_default().0 = Some(obs.jac);
        }
    }
    for p in predictions {
        if requested.contains(p.job_id.as_str()) {
            cells.entry((p.job_id.clone(), p.t)).or_default().1 = Some(p.value);
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["job_id", "t", "actual", "predicted"])
        .map_err(|e| csv_error(path, e))?;
    for ((job_id, t), (actual, predicted)) in &cells {
        w.write_record([
            job_id.as_str(),
            &t.to_string(),
            &actual.map_or(String::new(), |a| a.to_string()),
            &predicted.map_or(String::new(), |p| p.to_string()),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
