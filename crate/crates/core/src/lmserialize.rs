//! Text casting for language-model consumption: every modality of a job is
//! rendered as a sentence and the sentences are concatenated into one
//! paragraph per `(job, day)` instance.
//!
//! The modality order is fixed: raw text first (title, company,
//! description), then categorical, skills, location, numeric, and, in
//! joint mode, the day. Fields with empty payloads are omitted. Sentence
//! wording lives in a versioned [`TemplateConfig`] so that externally
//! computed embeddings stay reproducible.
//!
//! The embeddings that external encoders produce come back through
//! [`import_embeddings`] keyed by `(job_id, t)`.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datamodel::{Dataset, JobPosting, Split};
use crate::error::{Error, Result};
use crate::featfusion::{FeatureRow, FeatureSet};

/// One rendered paragraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph {
    pub job_id: String,
    pub t: Option<u32>,
    pub text: String,
}

/// Sentence templates per modality. `{}` marks the payload slot; rendered
/// sentences are joined with `delimiter` and the paragraph ends with a
/// period. The field order of a paragraph never changes; only wording is
/// configurable, and `version` tags it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateConfig {
    pub version: u32,
    pub delimiter: String,
    pub title: String,
    pub company: String,
    pub job_type: String,
    pub state: String,
    pub channel: String,
    pub job_level: String,
    pub skills: String,
    pub location: String,
    pub salary: String,
    pub day: String,
}

impl Default for TemplateConfig {
    fn default() -> Self {
        TemplateConfig {
            version: 1,
            delimiter: ". ".to_string(),
            title: "Job title: {}".to_string(),
            company: "Company: {}".to_string(),
            job_type: "The job type is {}".to_string(),
            state: "The state is {}".to_string(),
            channel: "The channel is {}".to_string(),
            job_level: "The job level is {}".to_string(),
            skills: "Required skills: {}".to_string(),
            location: "The job is located in {}".to_string(),
            salary: "The salary is {}".to_string(),
            day: "This job has been posted for {} days".to_string(),
        }
    }
}

/// Modalities that [`text_cast`] can render.
#[derive(Debug, Clone, PartialEq)]
pub enum ModalityValue<'a> {
    Categorical { field: CategoricalField, value: &'a str },
    Skills(&'a [String]),
    Location { city: &'a str, state: &'a str },
    Numeric { salary: Option<f64> },
    Day(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CategoricalField {
    JobType,
    State,
    Channel,
    JobLevel,
}

fn apply(template: &str, payload: &str) -> String {
    template.replacen("{}", payload, 1)
}

/// Numbers render as plain digit strings; integral values drop the
/// fractional part entirely.
fn format_number(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{value:.0}")
    } else {
        value.to_string()
    }
}

/// Sentence body (no terminal period) for one modality, or `None` when the
/// payload is absent/empty and the sentence is omitted from the paragraph.
fn cast_body(value: &ModalityValue<'_>, template: &TemplateConfig) -> Option<String> {
    match value {
        ModalityValue::Categorical { field, value } => {
            if value.is_empty() {
                return None;
            }
            let tpl = match field {
                CategoricalField::JobType => &template.job_type,
                CategoricalField::State => &template.state,
                CategoricalField::Channel => &template.channel,
                CategoricalField::JobLevel => &template.job_level,
            };
            Some(apply(tpl, value))
        }
        ModalityValue::Skills(skills) => {
            if skills.is_empty() {
                return None;
            }
            Some(apply(&template.skills, &skills.join(", ")))
        }
        ModalityValue::Location { city, state } => {
            let place = match (city.is_empty(), state.is_empty()) {
                (true, true) => return None,
                (false, true) => (*city).to_string(),
                (true, false) => (*state).to_string(),
                (false, false) => format!("{city}, {state}"),
            };
            Some(apply(&template.location, &place))
        }
        ModalityValue::Numeric { salary } => salary.map(|s| apply(&template.salary, &format_number(s))),
        ModalityValue::Day(day) => Some(apply(&template.day, &day.to_string())),
    }
}

/// Renders one modality as a full sentence (terminated with a period), or
/// an empty string when the payload is absent.
pub fn text_cast(value: &ModalityValue<'_>, template: &TemplateConfig) -> String {
    match cast_body(value, template) {
        Some(body) => format!("{body}."),
        None => String::new(),
    }
}

/// Renders one job as a paragraph: raw text sentences first, then the cast
/// categorical, skills, location, and numeric sentences, and the day
/// sentence when `t` is given. Deterministic and total.
pub fn serialize_job(job: &JobPosting, t: Option<u32>, template: &TemplateConfig) -> Paragraph {
    let mut bodies: Vec<String> = Vec::new();
    let mut push = |body: Option<String>| {
        if let Some(body) = body {
            let trimmed = body.trim_end_matches('.').trim_end().to_string();
            if !trimmed.is_empty() {
                bodies.push(trimmed);
            }
        }
    };
    push((!job.title.is_empty()).then(|| apply(&template.title, &job.title)));
    push((!job.company.is_empty()).then(|| apply(&template.company, &job.company)));
    push((!job.description.is_empty()).then(|| job.description.clone()));
    for field in [
        CategoricalField::JobType,
        CategoricalField::State,
        CategoricalField::Channel,
        CategoricalField::JobLevel,
    ] {
        let value = match field {
            CategoricalField::JobType => &job.job_type,
            CategoricalField::State => &job.state,
            CategoricalField::Channel => &job.channel,
            CategoricalField::JobLevel => &job.job_level,
        };
        push(cast_body(&ModalityValue::Categorical { field, value }, template));
    }
    push(cast_body(&ModalityValue::Skills(&job.skills), template));
    push(cast_body(
        &ModalityValue::Location { city: &job.city, state: &job.state },
        template,
    ));
    push(cast_body(&ModalityValue::Numeric { salary: job.salary }, template));
    if let Some(day) = t {
        push(cast_body(&ModalityValue::Day(day), template));
    }
    let text = if bodies.is_empty() {
        String::new()
    } else {
        format!("{}.", bodies.join(&template.delimiter))
    };
    Paragraph {
        job_id: job.job_id.clone(),
        t,
        text,
    }
}

/// One line of an exported language-model dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LmRecord {
    pub job_id: String,
    pub t: u32,
    pub paragraph: String,
    pub label: u32,
}

/// Exports `lm_dataset.{train,test,val}.jsonl` into `dir`: one line per
/// observation, ordered by `(job_id, t)`, labels from the observations.
/// In joint mode the paragraph carries the day sentence. Every observation
/// must belong to a split-tagged job. Returns per-split line counts.
pub fn export_lm_dataset(
    dataset: &Dataset,
    template: &TemplateConfig,
    joint: bool,
    dir: impl AsRef<Path>,
) -> Result<BTreeMap<Split, usize>> {
    let dir = dir.as_ref();
    let mut writers: BTreeMap<Split, BufWriter<std::fs::File>> = BTreeMap::new();
    for split in Split::ALL {
        let path = dir.join(format!("lm_dataset.{split}.jsonl"));
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        writers.insert(split, BufWriter::new(file));
    }
    let mut order: Vec<usize> = (0..dataset.observations().len()).collect();
    order.sort_by(|&a, &b| {
        let oa = &dataset.observations()[a];
        let ob = &dataset.observations()[b];
        (&oa.job_id, oa.t).cmp(&(&ob.job_id, ob.t))
    });
    let mut counts: BTreeMap<Split, usize> = Split::ALL.iter().map(|&s| (s, 0)).collect();
    for idx in order {
        let obs = &dataset.observations()[idx];
        let split = dataset.split_of(&obs.job_id).ok_or_else(|| {
            Error::Invalid(format!("job {:?} has no split tag", obs.job_id))
        })?;
        let job = dataset.job(&obs.job_id).expect("dataset validated");
        let paragraph = serialize_job(job, joint.then_some(obs.t), template);
        let record = LmRecord {
            job_id: obs.job_id.clone(),
            t: obs.t,
            paragraph: paragraph.text,
            label: obs.jac,
        };
        let w = writers.get_mut(&split).unwrap();
        serde_json::to_writer(&mut *w, &record)
            .map_err(|e| Error::io(dir.join(format!("lm_dataset.{split}.jsonl")), e.into()))?;
        w.write_all(b"\n")
            .map_err(|e| Error::io(dir.join(format!("lm_dataset.{split}.jsonl")), e))?;
        *counts.get_mut(&split).unwrap() += 1;
    }
    for (split, mut w) in writers {
        w.flush()
            .map_err(|e| Error::io(dir.join(format!("lm_dataset.{split}.jsonl")), e))?;
    }
    Ok(counts)
}

/// Reads one exported JSONL split file back.
pub fn load_lm_dataset(path: impl AsRef<Path>) -> Result<Vec<LmRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let record: LmRecord = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(path, i + 1, e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

/// Externally produced embeddings keyed by `(job_id, t)`; the bridge back
/// from language-model encoders into the regression trainer.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    entries: BTreeMap<(String, u32), Vec<f64>>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, job_id: &str, t: u32) -> Option<&[f64]> {
        self.entries
            .get(&(job_id.to_string(), t))
            .map(Vec::as_slice)
    }

    /// Joins the embeddings with a dataset's observations into a trainer
    /// input: one row per observation, labels from the observations. Every
    /// observation must have an embedding.
    pub fn feature_set(&self, dataset: &Dataset) -> Result<FeatureSet> {
        let mut rows = Vec::with_capacity(dataset.observations().len());
        for obs in dataset.observations() {
            let values = self
                .entries
                .get(&(obs.job_id.clone(), obs.t))
                .ok_or_else(|| {
                    Error::Invalid(format!(
                        "no embedding for (job_id {:?}, t {})",
                        obs.job_id, obs.t
                    ))
                })?;
            rows.push(FeatureRow {
                job_id: obs.job_id.clone(),
                t: obs.t,
                label: f64::from(obs.jac),
                values: values.clone(),
            });
        }
        Ok(FeatureSet {
            dim: self.dim,
            layout: None,
            rows,
        })
    }
}

/// Loads `embeddings.tsv`: `job_id<TAB>t<TAB>v1..vk`, uniform `k`, one row
/// per `(job_id, t)` key.
pub fn import_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut dim: Option<usize> = None;
    let mut entries = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut fields = line.split('\t');
        let job_id = fields.next().unwrap_or("").to_string();
        if job_id.is_empty() {
            return Err(Error::malformed(path, line_no, "empty job_id"));
        }
        let t: u32 = fields
            .next()
            .ok_or_else(|| Error::malformed(path, line_no, "missing t column"))?
            .parse()
            .map_err(|_| Error::malformed(path, line_no, "bad t column"))?;
        let mut values = Vec::new();
        for field in fields {
            let v: f64 = field.parse().map_err(|_| {
                Error::malformed(path, line_no, format!("non-numeric component {field:?}"))
            })?;
            values.push(v);
        }
        if values.is_empty() {
            return Err(Error::malformed(path, line_no, "row has no components"));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::malformed(
                    path,
                    line_no,
                    format!("ragged row: expected {} components, got {}", d, values.len()),
                ));
            }
            Some(_) => {}
        }
        if entries.insert((job_id.clone(), t), values).is_some() {
            return Err(Error::malformed(
                path,
                line_no,
                format!("duplicate key (job_id {job_id:?}, t {t})"),
            ));
        }
    }
    match dim {
        None => Err(Error::EmptyTable { path: path.into() }),
        Some(dim) => Ok(EmbeddingTable { dim, entries }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::Observation;

    fn full_job() -> JobPosting {
        JobPosting {
            job_id: "j1".into(),
            title: "welder".into(),
            company: "Acme Staffing".into(),
            description: "We are hiring a welder to join Acme Staffing.".into(),
            skills: vec!["welding".into(), "forklift".into()],
            job_type: "full_time".into(),
            state: "AZ".into(),
            channel: "web".into(),
            job_level: "mid".into(),
            city: "Tucson".into(),
            latitude: 32.2,
            longitude: -110.9,
            salary: Some(85_000.0),
        }
    }

    fn empty_job() -> JobPosting {
        JobPosting {
            job_id: "j0".into(),
            title: String::new(),
            company: String::new(),
            description: String::new(),
            skills: vec![],
            job_type: String::new(),
            state: String::new(),
            channel: String::new(),
            job_level: String::new(),
            city: String::new(),
            latitude: 0.0,
            longitude: 0.0,
            salary: None,
        }
    }

    #[test]
    fn cast_salary_sentence() {
        let t = TemplateConfig::default();
        assert_eq!(
            text_cast(&ModalityValue::Numeric { salary: Some(85_000.0) }, &t),
            "The salary is 85000."
        );
        assert_eq!(text_cast(&ModalityValue::Numeric { salary: None }, &t), "");
    }

    #[test]
    fn cast_skills_sentence() {
        let t = TemplateConfig::default();
        let skills = vec!["welding".to_string(), "forklift".to_string()];
        assert_eq!(
            text_cast(&ModalityValue::Skills(&skills), &t),
            "Required skills: welding, forklift."
        );
        assert_eq!(text_cast(&ModalityValue::Skills(&[]), &t), "");
    }

    #[test]
    fn cast_location_sentence() {
        let t = TemplateConfig::default();
        assert_eq!(
            text_cast(&ModalityValue::Location { city: "Tucson", state: "AZ" }, &t),
            "The job is located in Tucson, AZ."
        );
        assert_eq!(
            text_cast(&ModalityValue::Location { city: "Tucson", state: "" }, &t),
            "The job is located in Tucson."
        );
        assert_eq!(
            text_cast(&ModalityValue::Location { city: "", state: "" }, &t),
            ""
        );
    }

    #[test]
    fn cast_day_sentence() {
        let t = TemplateConfig::default();
        assert_eq!(
            text_cast(&ModalityValue::Day(7), &t),
            "This job has been posted for 7 days."
        );
    }

    #[test]
    fn empty_job_gives_empty_paragraph() {
        let p = serialize_job(&empty_job(), None, &TemplateConfig::default());
        assert_eq!(p.text, "");
    }

    #[test]
    fn serialization_is_deterministic() {
        let t = TemplateConfig::default();
        let a = serialize_job(&full_job(), Some(7), &t);
        let b = serialize_job(&full_job(), Some(7), &t);
        assert_eq!(a, b);
    }

    #[test]
    fn sentences_appear_once_in_modality_order() {
        let template = TemplateConfig::default();
        let job = full_job();
        let paragraph = serialize_job(&job, Some(7), &template).text;
        let expected = [
            "Job title: welder.",
            "Company: Acme Staffing.",
            "We are hiring a welder to join Acme Staffing.",
            "The job type is full_time.",
            "The state is AZ.",
            "The channel is web.",
            "The job level is mid.",
            "Required skills: welding, forklift.",
            "The job is located in Tucson, AZ.",
            "The salary is 85000.",
            "This job has been posted for 7 days.",
        ];
        let mut cursor = 0;
        for sentence in expected {
            let count = paragraph.matches(sentence).count();
            assert_eq!(count, 1, "{sentence:?} occurs {count} times in {paragraph:?}");
            let pos = paragraph[cursor..].find(sentence).unwrap_or_else(|| {
                panic!("{sentence:?} out of order in {paragraph:?}")
            });
            cursor += pos + sentence.len();
        }
    }

    #[test]
    fn separate_mode_omits_day_sentence() {
        let template = TemplateConfig::default();
        let paragraph = serialize_job(&full_job(), None, &template).text;
        assert!(!paragraph.contains("posted for"));
    }

    fn tagged_dataset() -> Dataset {
        let mut job1 = full_job();
        job1.job_id = "j1".into();
        let mut job2 = full_job();
        job2.job_id = "j2".into();
        let mut job3 = full_job();
        job3.job_id = "j3".into();
        let observations = vec![
            Observation { job_id: "j1".into(), t: 1, jac: 0 },
            Observation { job_id: "j1".into(), t: 7, jac: 4 },
            Observation { job_id: "j2".into(), t: 7, jac: 2 },
            Observation { job_id: "j3".into(), t: 7, jac: 1 },
        ];
        let mut ds = Dataset::new(vec![job1, job2, job3], observations).unwrap();
        let mut splits = BTreeMap::new();
        splits.insert("j1".to_string(), Split::Train);
        splits.insert("j2".to_string(), Split::Test);
        splits.insert("j3".to_string(), Split::Val);
        ds.set_splits(splits).unwrap();
        ds
    }

    #[test]
    fn export_writes_one_line_per_observation() {
        let ds = tagged_dataset();
        let dir = tempfile::tempdir().unwrap();
        let counts = export_lm_dataset(&ds, &TemplateConfig::default(), true, dir.path()).unwrap();
        assert_eq!(counts[&Split::Train], 2);
        assert_eq!(counts[&Split::Test], 1);
        assert_eq!(counts[&Split::Val], 1);
        let train = load_lm_dataset(dir.path().join("lm_dataset.train.jsonl")).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(train[0].job_id, "j1");
        assert_eq!(train[0].t, 1);
        assert_eq!(train[0].label, 0);
        assert!(train[1].paragraph.contains("posted for 7 days"));
    }

    #[test]
    fn export_empty_dataset_writes_empty_files() {
        let ds = Dataset::new(vec![], vec![]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let counts = export_lm_dataset(&ds, &TemplateConfig::default(), false, dir.path()).unwrap();
        assert!(counts.values().all(|&c| c == 0));
        for split in Split::ALL {
            let text =
                std::fs::read_to_string(dir.path().join(format!("lm_dataset.{split}.jsonl")))
                    .unwrap();
            assert_eq!(text, "");
        }
    }

    #[test]
    fn export_reproduces_serialize_job_per_line() {
        let ds = tagged_dataset();
        let template = TemplateConfig::default();
        let dir = tempfile::tempdir().unwrap();
        export_lm_dataset(&ds, &template, true, dir.path()).unwrap();
        for split in Split::ALL {
            let records =
                load_lm_dataset(dir.path().join(format!("lm_dataset.{split}.jsonl"))).unwrap();
            for record in records {
                let job = ds.job(&record.job_id).unwrap();
                let expected = serialize_job(job, Some(record.t), &template);
                assert_eq!(record.paragraph, expected.text);
            }
        }
    }

    #[test]
    fn import_embeddings_uniform_k() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "j1\t7\t0.1\t0.2\t0.3\t0.4\nj2\t7\t1\t2\t3\t4\n").unwrap();
        let table = import_embeddings(f.path()).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table.dim(), 4);
        assert_eq!(table.get("j2", 7), Some(&[1.0, 2.0, 3.0, 4.0][..]));
    }

    #[test]
    fn import_embeddings_rejects_duplicate_key() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "j1\t7\t0.1\nj1\t7\t0.2\n").unwrap();
        let err = import_embeddings(f.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate key"), "{err}");
        assert!(err.to_string().contains("j1"), "{err}");
    }

    #[test]
    fn import_embeddings_rejects_ragged_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "j1\t7\t0.1\t0.2\nj2\t7\t0.1\n").unwrap();
        let err = import_embeddings(f.path()).unwrap_err();
        assert!(err.to_string().contains("ragged row"), "{err}");
    }

    #[test]
    fn embedding_table_becomes_feature_set() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "j1\t1\t0.5\t0.5\nj1\t7\t1.0\t0.0\nj2\t7\t0.0\t1.0\nj3\t7\t0.25\t0.25\n").unwrap();
        let table = import_embeddings(f.path()).unwrap();
        let ds = tagged_dataset();
        let features = table.feature_set(&ds).unwrap();
        assert_eq!(features.dim, 2);
        assert_eq!(features.rows.len(), 4);
        assert_eq!(features.rows[1].label, 4.0);
    }
}
