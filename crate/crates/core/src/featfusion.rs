//! Feature fusion: per-modality embeddings concatenated into one vector per
//! `(job, day)` pair.
//!
//! The fused vector is laid out as text || categorical || skills || location
//! || numeric (|| day one-hot), with the spans recorded so downstream
//! consumers can recover the modality blocks. Text uses deterministic hashed
//! streams (character trigrams for the company name, word unigrams for title
//! and description), each L2-normalized; categoricals are one-hot with an
//! explicit trailing unknown slot per field; skills are the mean of their
//! embedding vectors with a hashed unit-vector fallback for skills missing
//! from the table; location is the unit-sphere transform of latitude and
//! longitude; the numeric block is the z-normalized salary plus a presence
//! flag.
//!
//! Every operation here is a pure function of its inputs.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::{csv_error, Dataset, JobPosting, SkillEmbeddingTable};
use crate::error::{Error, Result};
use crate::hashing::{fnv1a64, splitmix64};

/// Ordered value list for one categorical field. Encoding appends one extra
/// slot at the end that catches values absent from the list, so every field
/// always one-hots to exactly one slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalSchema {
    values: Vec<String>,
}

impl CategoricalSchema {
    pub fn new(values: Vec<String>) -> Result<CategoricalSchema> {
        let mut seen = std::collections::HashSet::new();
        for v in &values {
            if !seen.insert(v) {
                return Err(Error::InvalidConfig {
                    what: "categorical schema",
                    message: format!("duplicate value {v:?}"),
                });
            }
        }
        Ok(CategoricalSchema { values })
    }

    /// Number of slots including the unknown slot.
    pub fn width(&self) -> usize {
        self.values.len() + 1
    }

    /// Slot index for a value; unlisted values land in the last slot.
    pub fn slot_of(&self, value: &str) -> usize {
        self.values
            .iter()
            .position(|v| v == value)
            .unwrap_or(self.values.len())
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }
}

/// Schemas for the four categorical fields, in their fixed encoding order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalSchemas {
    pub job_type: CategoricalSchema,
    pub state: CategoricalSchema,
    pub channel: CategoricalSchema,
    pub job_level: CategoricalSchema,
}

impl CategoricalSchemas {
    /// Builds schemas from the distinct values seen in `jobs` (sorted).
    /// Typically called on the training split only, so unseen values in
    /// other splits route to the unknown slot.
    pub fn from_jobs<'a>(jobs: impl IntoIterator<Item = &'a JobPosting>) -> CategoricalSchemas {
        let mut job_type = std::collections::BTreeSet::new();
        let mut state = std::collections::BTreeSet::new();
        let mut channel = std::collections::BTreeSet::new();
        let mut job_level = std::collections::BTreeSet::new();
        for job in jobs {
            job_type.insert(job.job_type.clone());
            state.insert(job.state.clone());
            channel.insert(job.channel.clone());
            job_level.insert(job.job_level.clone());
        }
        let schema = |set: std::collections::BTreeSet<String>| CategoricalSchema {
            values: set.into_iter().collect(),
        };
        CategoricalSchemas {
            job_type: schema(job_type),
            state: schema(state),
            channel: schema(channel),
            job_level: schema(job_level),
        }
    }

    pub fn width(&self) -> usize {
        self.job_type.width() + self.state.width() + self.channel.width() + self.job_level.width()
    }
}

/// Salary normalization statistics, frozen from the training split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SalaryStats {
    pub mean: f64,
    pub std: f64,
}

impl Default for SalaryStats {
    fn default() -> Self {
        SalaryStats { mean: 0.0, std: 1.0 }
    }
}

impl SalaryStats {
    /// Mean and standard deviation over the salaries present in `jobs`.
    pub fn from_jobs<'a>(jobs: impl IntoIterator<Item = &'a JobPosting>) -> SalaryStats {
        let salaries: Vec<f64> = jobs.into_iter().filter_map(|j| j.salary).collect();
        if salaries.is_empty() {
            return SalaryStats::default();
        }
        let n = salaries.len() as f64;
        let mean = salaries.iter().sum::<f64>() / n;
        let var = salaries.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        SalaryStats {
            mean,
            std: if std > 1e-12 { std } else { 1.0 },
        }
    }

    /// Returns `(z_normalized_salary, presence_flag)`; a missing salary is
    /// (0, 0), which keeps "unknown" distinct from a legal zero salary.
    pub fn encode(&self, salary: Option<f64>) -> (f64, f64) {
        match salary {
            Some(s) => ((s - self.mean) / self.std, 1.0),
            None => (0.0, 0.0),
        }
    }
}

/// Configuration of the fused representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    /// Character-trigram stream width for the company name.
    pub d_company: usize,
    /// Word stream width for the title.
    pub d_title: usize,
    /// Word stream width for the description.
    pub d_desc: usize,
    pub schemas: CategoricalSchemas,
    /// Dimension of skill embeddings (and of the hashed fallback vectors).
    pub skill_dim: usize,
    pub salary_stats: SalaryStats,
    /// When set, a day one-hot block is appended and `fuse` requires a day
    /// from this list.
    pub day_values: Option<Vec<u32>>,
}

impl FusionConfig {
    pub fn new(schemas: CategoricalSchemas, skill_dim: usize) -> FusionConfig {
        FusionConfig {
            d_company: 64,
            d_title: 128,
            d_desc: 256,
            schemas,
            skill_dim,
            salary_stats: SalaryStats::default(),
            day_values: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, d) in [
            ("d_company", self.d_company),
            ("d_title", self.d_title),
            ("d_desc", self.d_desc),
            ("skill_dim", self.skill_dim),
        ] {
            if d == 0 {
                return Err(Error::InvalidConfig {
                    what: "fusion dimension",
                    message: format!("{what} must be >= 1"),
                });
            }
        }
        if let Some(days) = &self.day_values {
            if days.is_empty() || days.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidConfig {
                    what: "day_values",
                    message: "must be a non-empty strictly increasing list".into(),
                });
            }
        }
        Ok(())
    }

    pub fn text_len(&self) -> usize {
        self.d_company + self.d_title + self.d_desc
    }

    /// Total fused vector length.
    pub fn feature_len(&self) -> usize {
        self.text_len()
            + self.schemas.width()
            + self.skill_dim
            + 3
            + 2
            + self.day_values.as_ref().map_or(0, Vec::len)
    }

    pub fn layout(&self) -> FeatureLayout {
        let mut cursor = 0usize;
        let mut span = |len: usize| {
            let s = Span { start: cursor, end: cursor + len };
            cursor += len;
            s
        };
        FeatureLayout {
            text: span(self.text_len()),
            categorical: span(self.schemas.width()),
            skills: span(self.skill_dim),
            location: span(3),
            numeric: span(2),
            day: self.day_values.as_ref().map(|d| span(d.len())),
        }
    }
}

/// Half-open index range of one modality block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Recorded spans of the fused vector, in concatenation order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub text: Span,
    pub categorical: Span,
    pub skills: Span,
    pub location: Span,
    pub numeric: Span,
    pub day: Option<Span>,
}

impl FeatureLayout {
    pub fn total_len(&self) -> usize {
        self.day.map_or(self.numeric.end, |d| d.end)
    }

    /// True when the spans are contiguous from 0 and cover `len` exactly.
    pub fn tiles_exactly(&self, len: usize) -> bool {
        let mut spans = vec![self.text, self.categorical, self.skills, self.location, self.numeric];
        if let Some(day) = self.day {
            spans.push(day);
        }
        let mut cursor = 0usize;
        for span in spans {
            if span.start != cursor || span.end < span.start {
                return false;
            }
            cursor = span.end;
        }
        cursor == len
    }

    fn sections(&self) -> Vec<(&'static str, Span)> {
        let mut v = vec![
            ("text", self.text),
            ("cat", self.categorical),
            ("skill", self.skills),
            ("loc", self.location),
            ("num", self.numeric),
        ];
        if let Some(day) = self.day {
            v.push(("day", day));
        }
        v
    }
}

/// One fused vector with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedFeatureVector {
    pub values: Vec<f64>,
    pub layout: FeatureLayout,
}

/// Maps latitude/longitude (degrees) onto the unit sphere:
/// `(cos θ · cos φ, cos θ · sin φ, sin θ)`.
pub fn embed_location(latitude: f64, longitude: f64) -> Result<[f64; 3]> {
    if !latitude.is_finite() || !(-90.0..=90.0).contains(&latitude) {
        return Err(Error::Invalid(format!(
            "latitude out of range: {latitude} (expected [-90, 90])"
        )));
    }
    if !longitude.is_finite() || longitude <= -180.0 || longitude > 180.0 {
        return Err(Error::Invalid(format!(
            "longitude out of range: {longitude} (expected (-180, 180])"
        )));
    }
    let theta = latitude.to_radians();
    let phi = longitude.to_radians();
    Ok([
        theta.cos() * phi.cos(),
        theta.cos() * phi.sin(),
        theta.sin(),
    ])
}

/// One-hot encodes the four categorical fields, concatenated in schema
/// order. Unlisted values light the trailing unknown slot of their field.
pub fn encode_categorical(job: &JobPosting, schemas: &CategoricalSchemas) -> Vec<f64> {
    let mut out = Vec::with_capacity(schemas.width());
    for (schema, value) in [
        (&schemas.job_type, &job.job_type),
        (&schemas.state, &job.state),
        (&schemas.channel, &job.channel),
        (&schemas.job_level, &job.job_level),
    ] {
        let mut block = vec![0.0; schema.width()];
        block[schema.slot_of(value)] = 1.0;
        out.extend(block);
    }
    out
}

/// Deterministic unit vector for a skill missing from the embedding table.
fn hashed_skill_vector(skill: &str, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(fnv1a64(skill.as_bytes())));
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    } else {
        v[0] = 1.0;
    }
    v
}

/// Mean pooling of the skills' embedding vectors. Skills absent from the
/// table contribute a hashed unit vector; an empty skill list gives the
/// zero vector.
pub fn embed_skills(skills: &[String], table: &SkillEmbeddingTable) -> Vec<f64> {
    let dim = table.dim();
    let mut sum = vec![0.0; dim];
    if skills.is_empty() {
        return sum;
    }
    for skill in skills {
        match table.get(skill) {
            Some(v) => {
                for (acc, x) in sum.iter_mut().zip(v) {
                    *acc += x;
                }
            }
            None => {
                for (acc, x) in sum.iter_mut().zip(hashed_skill_vector(skill, dim)) {
                    *acc += x;
                }
            }
        }
    }
    for x in &mut sum {
        *x /= skills.len() as f64;
    }
    sum
}

fn l2_normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v {
            *x /= norm;
        }
    }
}

/// Term-frequency bucket counts of character trigrams, over the lowercased
/// string padded with `^`/`$` boundary markers.
pub(crate) fn char_trigram_counts(s: &str, dim: usize) -> Vec<f64> {
    let mut counts = vec![0.0; dim];
    if s.is_empty() {
        return counts;
    }
    let chars: Vec<char> = std::iter::once('^')
        .chain(s.to_lowercase().chars())
        .chain(std::iter::once('$'))
        .collect();
    for gram in chars.windows(3) {
        let key: String = gram.iter().collect();
        counts[(fnv1a64(key.as_bytes()) % dim as u64) as usize] += 1.0;
    }
    counts
}

/// Term-frequency bucket counts of lowercased word unigrams.
pub(crate) fn word_counts(s: &str, dim: usize) -> Vec<f64> {
    let mut counts = vec![0.0; dim];
    for token in s.to_lowercase().split(|c: char| !c.is_alphanumeric()) {
        if token.is_empty() {
            continue;
        }
        counts[(fnv1a64(token.as_bytes()) % dim as u64) as usize] += 1.0;
    }
    counts
}

/// Three hashed text streams, each L2-normalized when nonzero, concatenated
/// as (company, title, description).
pub fn embed_text(company: &str, title: &str, description: &str, config: &FusionConfig) -> Vec<f64> {
    let mut company_stream = char_trigram_counts(company, config.d_company);
    let mut title_stream = word_counts(title, config.d_title);
    let mut desc_stream = word_counts(description, config.d_desc);
    l2_normalize(&mut company_stream);
    l2_normalize(&mut title_stream);
    l2_normalize(&mut desc_stream);
    let mut out = Vec::with_capacity(config.text_len());
    out.extend(company_stream);
    out.extend(title_stream);
    out.extend(desc_stream);
    out
}

/// Concatenates all modality blocks for one job at an optional day.
pub fn fuse(
    job: &JobPosting,
    t: Option<u32>,
    table: &SkillEmbeddingTable,
    config: &FusionConfig,
) -> Result<FusedFeatureVector> {
    if table.dim() != config.skill_dim {
        return Err(Error::DimensionMismatch {
            context: "skill table",
            expected: config.skill_dim,
            got: table.dim(),
        });
    }
    let layout = config.layout();
    let mut values = Vec::with_capacity(config.feature_len());
    values.extend(embed_text(&job.company, &job.title, &job.description, config));
    values.extend(encode_categorical(job, &config.schemas));
    values.extend(embed_skills(&job.skills, table));
    values.extend(embed_location(job.latitude, job.longitude)?);
    let (salary_z, presence) = config.salary_stats.encode(job.salary);
    values.push(salary_z);
    values.push(presence);
    if let Some(days) = &config.day_values {
        let day = t.ok_or_else(|| {
            Error::Invalid("day feature is enabled but no day was provided".into())
        })?;
        let slot = days
            .iter()
            .position(|&d| d == day)
            .ok_or(Error::UnlistedDay { day })?;
        let mut block = vec![0.0; days.len()];
        block[slot] = 1.0;
        values.extend(block);
    }
    debug_assert_eq!(values.len(), config.feature_len());
    Ok(FusedFeatureVector { values, layout })
}

/// One featurized observation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub job_id: String,
    pub t: u32,
    pub label: f64,
    pub values: Vec<f64>,
}

/// A feature matrix with row keys and labels; the common input format for
/// the regression trainer, whether built here or imported from an external
/// encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub dim: usize,
    pub layout: Option<FeatureLayout>,
    pub rows: Vec<FeatureRow>,
}

/// Fuses every observation in the dataset: one row per `(job, t)` pair, in
/// observation order.
pub fn featurize_corpus(
    dataset: &Dataset,
    table: &SkillEmbeddingTable,
    config: &FusionConfig,
) -> Result<FeatureSet> {
    config.validate()?;
    let layout = config.layout();
    let mut rows = Vec::with_capacity(dataset.observations().len());
    for obs in dataset.observations() {
        let job = dataset.job(&obs.job_id).ok_or_else(|| Error::UnknownJob {
            job_id: obs.job_id.clone(),
        })?;
        let fused = fuse(job, Some(obs.t), table, config)?;
        rows.push(FeatureRow {
            job_id: obs.job_id.clone(),
            t: obs.t,
            label: f64::from(obs.jac),
            values: fused.values,
        });
    }
    Ok(FeatureSet {
        dim: config.feature_len(),
        layout: Some(layout),
        rows,
    })
}

/// Writes a feature matrix as CSV. The header records the layout spans via
/// column names: `job_id,t,label,text_0..,cat_0..,skill_0..,loc_0..,num_0..
/// (,day_0..)`.
pub fn write_feature_csv(path: impl AsRef<Path>, features: &FeatureSet) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec!["job_id".to_string(), "t".to_string(), "label".to_string()];
    match &features.layout {
        Some(layout) => {
            for (name, span) in layout.sections() {
                for i in 0..span.len() {
                    header.push(format!("{name}_{i}"));
                }
            }
        }
        None => {
            for i in 0..features.dim {
                header.push(format!("f_{i}"));
            }
        }
    }
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    let mut record = Vec::with_capacity(header.len());
    for row in &features.rows {
        record.clear();
        record.push(row.job_id.clone());
        record.push(row.t.to_string());
        record.push(row.label.to_string());
        record.extend(row.values.iter().map(|v| v.to_string()));
        w.write_record(&record).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a feature matrix written by [`write_feature_csv`], reconstructing
/// the layout from the header when the section prefixes are present.
pub fn load_feature_csv(path: impl AsRef<Path>) -> Result<FeatureSet> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.len() < 4 || &header[0] != "job_id" || &header[1] != "t" || &header[2] != "label" {
        return Err(Error::malformed(
            path,
            1,
            "expected header starting with job_id,t,label",
        ));
    }
    let dim = header.len() - 3;
    let layout = layout_from_header(header.iter().skip(3), dim);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line_no = i + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != header.len() {
            return Err(Error::malformed(
                path,
                line_no,
                format!("expected {} columns, got {}", header.len(), record.len()),
            ));
        }
        let t: u32 = record[1]
            .parse()
            .map_err(|_| Error::malformed(path, line_no, format!("bad t {:?}", &record[1])))?;
        let label: f64 = record[2]
            .parse()
            .map_err(|_| Error::malformed(path, line_no, format!("bad label {:?}", &record[2])))?;
        let mut values = Vec::with_capacity(dim);
        for field in record.iter().skip(3) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::malformed(path, line_no, format!("bad value {field:?}")))?;
            values.push(v);
        }
        rows.push(FeatureRow {
            job_id: record[0].to_string(),
            t,
            label,
            values,
        });
    }
    Ok(FeatureSet { dim, layout, rows })
}

fn layout_from_header<'a>(columns: impl Iterator<Item = &'a str>, dim: usize) -> Option<FeatureLayout> {
    let mut spans: Vec<(String, Span)> = Vec::new();
    for (cursor, col) in columns.enumerate() {
        let (prefix, _) = col.rsplit_once('_')?;
        match spans.last_mut() {
            Some((last, span)) if last == prefix => span.end += 1,
            _ => {
                spans.push((prefix.to_string(), Span { start: cursor, end: cursor + 1 }));
            }
        }
    }
    let names: Vec<&str> = spans.iter().map(|(n, _)| n.as_str()).collect();
    let day = match names.as_slice() {
        ["text", "cat", "skill", "loc", "num"] => None,
        ["text", "cat", "skill", "loc", "num", "day"] => Some(spans[5].1),
        _ => return None,
    };
    let layout = FeatureLayout {
        text: spans[0].1,
        categorical: spans[1].1,
        skills: spans[2].1,
        location: spans[3].1,
        numeric: spans[4].1,
        day,
    };
    layout.tiles_exactly(dim).then_some(layout)
}
