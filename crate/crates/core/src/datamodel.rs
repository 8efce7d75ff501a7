//! Domain types plus file ingestion and validation for jobs, observations,
//! skill-embedding tables, and split assignments.
//!
//! File formats are line-oriented: JSONL for jobs and observations, TSV for
//! skill embeddings, CSV for split tags. Every malformed line produces a
//! diagnostic carrying its 1-based line number; nothing is silently dropped.
//! Loaded corpora are immutable and safe to share across threads.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One job posting with its multimodal fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobPosting {
    pub job_id: String,
    pub title: String,
    pub company: String,
    pub description: String,
    pub skills: Vec<String>,
    pub job_type: String,
    pub state: String,
    pub channel: String,
    pub job_level: String,
    pub city: String,
    /// Degrees in [-90, 90].
    pub latitude: f64,
    /// Degrees in (-180, 180]; normalized into that range on load.
    pub longitude: f64,
    /// Currency units per year. Absent key means unknown; 0 is a legal salary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub salary: Option<f64>,
}

impl JobPosting {
    /// Checks the per-record invariants. Longitude is expected to already be
    /// normalized (see [`normalize_longitude`]).
    pub fn validate(&self) -> Result<()> {
        if self.job_id.is_empty() {
            return Err(Error::Invalid("job_id must be non-empty".into()));
        }
        if !self.latitude.is_finite() || !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::Invalid(format!(
                "latitude out of range: {} (expected [-90, 90])",
                self.latitude
            )));
        }
        if !self.longitude.is_finite()
            || self.longitude <= -180.0
            || self.longitude > 180.0
        {
            return Err(Error::Invalid(format!(
                "longitude out of range: {} (expected (-180, 180])",
                self.longitude
            )));
        }
        if let Some(salary) = self.salary {
            if !salary.is_finite() || salary < 0.0 {
                return Err(Error::Invalid(format!(
                    "salary must be non-negative, got {salary}"
                )));
            }
        }
        Ok(())
    }
}

/// Maps any finite longitude into (-180, 180]. Values already in range
/// pass through bit-identically.
pub fn normalize_longitude(lon: f64) -> f64 {
    if !lon.is_finite() || (lon > -180.0 && lon <= 180.0) {
        return lon;
    }
    let r = lon.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Cumulative applicant count for one job at horizon `t` (days).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Observation {
    pub job_id: String,
    pub t: u32,
    pub jac: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservation {
    job_id: String,
    t: i64,
    jac: i64,
}

/// Split tag for a job and all of its observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Test,
    Val,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Test, Split::Val];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Val => "val",
        }
    }

    pub fn parse(s: &str) -> Result<Split> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            "val" => Ok(Split::Val),
            other => Err(Error::Invalid(format!(
                "unknown split tag {other:?} (expected train/test/val)"
            ))),
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A validated corpus: jobs, their observations, and optional split tags.
#[derive(Debug, Clone)]
pub struct Dataset {
    jobs: Vec<JobPosting>,
    observations: Vec<Observation>,
    splits: BTreeMap<String, Split>,
    index: HashMap<String, usize>,
}

impl Dataset {
    /// Builds a dataset, checking that every observation resolves to a job
    /// and that per-job counts are non-decreasing in `t`.
    pub fn new(jobs: Vec<JobPosting>, observations: Vec<Observation>) -> Result<Dataset> {
        let mut index = HashMap::with_capacity(jobs.len());
        for (i, job) in jobs.iter().enumerate() {
            if index.insert(job.job_id.clone(), i).is_some() {
                return Err(Error::Invalid(format!(
                    "duplicate job_id {:?}",
                    job.job_id
                )));
            }
        }
        for obs in &observations {
            if !index.contains_key(&obs.job_id) {
                return Err(Error::UnknownJob {
                    job_id: obs.job_id.clone(),
                });
            }
        }
        if let Some(v) = find_monotonicity_violation(&observations) {
            return Err(Error::Invalid(format!(
                "jac decreases for job {:?}: {} at t={} but {} at t={}",
                v.job_id, v.jac_earlier, v.t_earlier, v.jac_later, v.t_later
            )));
        }
        Ok(Dataset {
            jobs,
            observations,
            splits: BTreeMap::new(),
            index,
        })
    }

    pub fn jobs(&self) -> &[JobPosting] {
        &self.jobs
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// Number of observations (instances), not jobs.
    pub fn size(&self) -> usize {
        self.observations.len()
    }

    pub fn job(&self, job_id: &str) -> Option<&JobPosting> {
        self.index.get(job_id).map(|&i| &self.jobs[i])
    }

    pub fn contains_job(&self, job_id: &str) -> bool {
        self.index.contains_key(job_id)
    }

    /// Installs split tags. Every tagged id must resolve to a job.
    pub fn set_splits(&mut self, splits: BTreeMap<String, Split>) -> Result<()> {
        for job_id in splits.keys() {
            if !self.index.contains_key(job_id) {
                return Err(Error::UnknownJob {
                    job_id: job_id.clone(),
                });
            }
        }
        self.splits = splits;
        Ok(())
    }

    pub fn splits(&self) -> &BTreeMap<String, Split> {
        &self.splits
    }

    pub fn split_of(&self, job_id: &str) -> Option<Split> {
        self.splits.get(job_id).copied()
    }

    pub fn jobs_in_split(&self, split: Split) -> impl Iterator<Item = &JobPosting> {
        self.jobs
            .iter()
            .filter(move |j| self.split_of(&j.job_id) == Some(split))
    }

    /// Observations whose job carries the given split tag.
    pub fn observations_in_split(&self, split: Split) -> impl Iterator<Item = &Observation> {
        self.observations
            .iter()
            .filter(move |o| self.split_of(&o.job_id) == Some(split))
    }
}

struct MonotonicityViolation {
    job_id: String,
    t_earlier: u32,
    jac_earlier: u32,
    t_later: u32,
    jac_later: u32,
    obs_index: usize,
}

/// Returns the first (in sorted order) pair t1 < t2 with jac(t1) > jac(t2).
fn find_monotonicity_violation(observations: &[Observation]) -> Option<MonotonicityViolation> {
    let mut per_job: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, obs) in observations.iter().enumerate() {
        per_job.entry(obs.job_id.as_str()).or_default().push(i);
    }
    let mut job_ids: Vec<&str> = per_job.keys().copied().collect();
    job_ids.sort_unstable();
    for job_id in job_ids {
        let mut idxs = per_job.remove(job_id).unwrap();
        idxs.sort_by_key(|&i| (observations[i].t, observations[i].jac));
        // max jac over all horizons strictly before the current one
        let mut max_before: Option<(u32, u32)> = None;
        let mut cur_t = 0u32;
        let mut cur_max = 0u32;
        for &i in &idxs {
            let obs = &observations[i];
            if obs.t != cur_t {
                if cur_t != 0 {
                    let best = max_before.map_or(0, |(_, jac)| jac);
                    if cur_max >= best {
                        max_before = Some((cur_t, cur_max));
                    }
                }
                cur_t = obs.t;
                cur_max = 0;
            }
            if let Some((t_earlier, jac_earlier)) = max_before {
                if obs.jac < jac_earlier {
                    return Some(MonotonicityViolation {
                        job_id: job_id.to_string(),
                        t_earlier,
                        jac_earlier,
                        t_later: obs.t,
                        jac_later: obs.jac,
                        obs_index: i,
                    });
                }
            }
            cur_max = cur_max.max(obs.jac);
        }
    }
    None
}

/// Uniform-dimension map from skill id to embedding vector.
#[derive(Debug, Clone)]
pub struct SkillEmbeddingTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl SkillEmbeddingTable {
    /// An empty table with a fixed dimension; lookups all miss, so consumers
    /// fall back to hashed vectors.
    pub fn empty(dim: usize) -> SkillEmbeddingTable {
        SkillEmbeddingTable {
            dim,
            entries: HashMap::new(),
        }
    }

    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<SkillEmbeddingTable> {
        let mut map = HashMap::new();
        for (skill, vector) in entries {
            if vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "skill embedding",
                    expected: dim,
                    got: vector.len(),
                });
            }
            map.insert(skill, vector);
        }
        Ok(SkillEmbeddingTable { dim, entries: map })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, skill: &str) -> Option<&[f64]> {
        self.entries.get(skill).map(Vec::as_slice)
    }
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = std::io::Result<String>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file).lines())
}

/// Loads `jobs.jsonl`: one JSON object per line with exactly the
/// [`JobPosting`] keys. Order is preserved; longitude is normalized into
/// (-180, 180]; duplicate ids are rejected.
pub fn load_jobs(path: impl AsRef<Path>) -> Result<Vec<JobPosting>> {
    let path = path.as_ref();
    let mut jobs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in open_lines(path)?.enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut job: JobPosting = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        job.longitude = normalize_longitude(job.longitude);
        job.validate()
            .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        if !seen.insert(job.job_id.clone()) {
            return Err(Error::malformed(
                path,
                line_no,
                format!("duplicate job_id {:?}", job.job_id),
            ));
        }
        jobs.push(job);
    }
    Ok(jobs)
}

/// Loads `observations.jsonl` ({job_id, t, jac} per line) against an already
/// loaded set of job ids. Enforces t >= 1, jac >= 0, resolvable job_id, and
/// per-job monotonicity of jac in t.
pub fn load_observations(
    path: impl AsRef<Path>,
    known_jobs: &HashSet<String>,
) -> Result<Vec<Observation>> {
    let path = path.as_ref();
    let mut observations = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in open_lines(path)?.enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let raw: RawObservation = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        if raw.t < 1 {
            return Err(Error::malformed(
                path,
                line_no,
                format!("horizon t must be >= 1, got {}", raw.t),
            ));
        }
        if raw.jac < 0 {
            return Err(Error::malformed(
                path,
                line_no,
                format!("jac must be non-negative, got {}", raw.jac),
            ));
        }
        if !known_jobs.contains(&raw.job_id) {
            return Err(Error::malformed(
                path,
                line_no,
                format!("unknown job_id {:?}", raw.job_id),
            ));
        }
        observations.push(Observation {
            job_id: raw.job_id,
            t: u32::try_from(raw.t).map_err(|_| {
                Error::malformed(path, line_no, format!("horizon t out of range: {}", raw.t))
            })?,
            jac: u32::try_from(raw.jac).map_err(|_| {
                Error::malformed(path, line_no, format!("jac out of range: {}", raw.jac))
            })?,
        });
        lines.push(line_no);
    }
    if let Some(v) = find_monotonicity_violation(&observations) {
        return Err(Error::malformed(
            path,
            lines[v.obs_index],
            format!(
                "jac decreases for job {:?}: {} at t={} but {} at t={}",
                v.job_id, v.jac_earlier, v.t_earlier, v.jac_later, v.t_later
            ),
        ));
    }
    Ok(observations)
}

/// Loads `skills.tsv`: `skill<TAB>v1<TAB>...<TAB>vd`. The dimension is
/// inferred from the first row and every row must conform.
pub fn load_skill_table(path: impl AsRef<Path>) -> Result<SkillEmbeddingTable> {
    let path = path.as_ref();
    let mut dim: Option<usize> = None;
    let mut entries: HashMap<String, Vec<f64>> = HashMap::new();
    for (i, line) in open_lines(path)?.enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut fields = line.split('\t');
        let skill = fields.next().unwrap_or("");
        if skill.is_empty() {
            return Err(Error::malformed(path, line_no, "empty skill id"));
        }
        let mut vector = Vec::new();
        for field in fields {
            let value: f64 = field.parse().map_err(|_| {
                Error::malformed(path, line_no, format!("non-numeric component {field:?}"))
            })?;
            vector.push(value);
        }
        if vector.is_empty() {
            return Err(Error::malformed(path, line_no, "row has no components"));
        }
        match dim {
            None => dim = Some(vector.len()),
            Some(d) if d != vector.len() => {
                return Err(Error::malformed(
                    path,
                    line_no,
                    format!("ragged row: expected {} components, got {}", d, vector.len()),
                ));
            }
            Some(_) => {}
        }
        if entries.insert(skill.to_string(), vector).is_some() {
            return Err(Error::malformed(
                path,
                line_no,
                format!("duplicate skill {skill:?}"),
            ));
        }
    }
    match dim {
        None => Err(Error::EmptyTable { path: path.into() }),
        Some(dim) => Ok(SkillEmbeddingTable { dim, entries }),
    }
}

/// Writes jobs as JSONL, one compact object per line, LF endings.
pub fn write_jobs(path: impl AsRef<Path>, jobs: &[JobPosting]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for job in jobs {
        serde_json::to_writer(&mut w, job).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes observations as JSONL.
pub fn write_observations(path: impl AsRef<Path>, observations: &[Observation]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for obs in observations {
        serde_json::to_writer(&mut w, obs).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `splits.csv` with header `job_id,split`, ordered by job_id.
pub fn write_splits(path: impl AsRef<Path>, splits: &BTreeMap<String, Split>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["job_id", "split"])
        .map_err(|e| csv_error(path, e))?;
    for (job_id, split) in splits {
        w.write_record([job_id.as_str(), split.as_str()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads `splits.csv` (header `job_id,split`).
pub fn load_splits(path: impl AsRef<Path>) -> Result<BTreeMap<String, Split>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut splits = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let line_no = i + 2; // header occupies line 1
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != 2 {
            return Err(Error::malformed(
                path,
                line_no,
                format!("expected 2 columns, got {}", record.len()),
            ));
        }
        let split = Split::parse(&record[1])
            .map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        if splits.insert(record[0].to_string(), split).is_some() {
            return Err(Error::malformed(
                path,
                line_no,
                format!("duplicate job_id {:?}", &record[0]),
            ));
        }
    }
    Ok(splits)
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Invalid(format!("{}: {other:?}", path.display())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn job_line(id: &str, lat: f64, lon: f64) -> String {
        format!(
            r#"{{"job_id":"{id}","title":"welder","company":"Acme","description":"join us","skills":["welding"],"job_type":"full_time","state":"AZ","channel":"web","job_level":"mid","city":"Tucson","latitude":{lat},"longitude":{lon},"salary":52000.0}}"#
        )
    }

    #[test]
    fn load_jobs_empty_file_gives_empty_list() {
        let f = write_temp("");
        let jobs = load_jobs(f.path()).unwrap();
        assert!(jobs.is_empty());
    }

    #[test]
    fn load_jobs_latitude_out_of_range_reports_line() {
        let f = write_temp(&(job_line("j1", 91.0, 10.0) + "\n"));
        let err = load_jobs(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("latitude out of range"), "{msg}");
        assert!(msg.contains(":1:"), "{msg}");
    }

    #[test]
    fn load_jobs_duplicate_id_names_the_id() {
        let two = format!("{}\n{}\n", job_line("j1", 10.0, 10.0), job_line("j1", 11.0, 11.0));
        let f = write_temp(&two);
        let err = load_jobs(f.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate job_id \"j1\""), "{err}");
    }

    #[test]
    fn load_jobs_normalizes_longitude() {
        let f = write_temp(&(job_line("j1", 10.0, -180.0) + "\n" + &job_line("j2", 10.0, 270.0) + "\n"));
        let jobs = load_jobs(f.path()).unwrap();
        assert_eq!(jobs[0].longitude, 180.0);
        assert_eq!(jobs[1].longitude, -90.0);
    }

    #[test]
    fn load_jobs_rejects_unknown_keys() {
        let line = job_line("j1", 10.0, 10.0).replace("\"salary\"", "\"extra\":1,\"salary\"");
        let f = write_temp(&(line + "\n"));
        assert!(load_jobs(f.path()).is_err());
    }

    fn known(ids: &[&str]) -> HashSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn load_observations_accepts_valid_line() {
        let f = write_temp("{\"job_id\":\"j1\",\"t\":1,\"jac\":0}\n");
        let obs = load_observations(f.path(), &known(&["j1"])).unwrap();
        assert_eq!(obs, vec![Observation { job_id: "j1".into(), t: 1, jac: 0 }]);
    }

    #[test]
    fn load_observations_rejects_dangling_reference() {
        let f = write_temp("{\"job_id\":\"zz\",\"t\":1,\"jac\":0}\n");
        let err = load_observations(f.path(), &known(&["j1"])).unwrap_err();
        assert!(err.to_string().contains("unknown job_id \"zz\""), "{err}");
    }

    #[test]
    fn load_observations_rejects_zero_horizon() {
        let f = write_temp("{\"job_id\":\"j1\",\"t\":0,\"jac\":2}\n");
        let err = load_observations(f.path(), &known(&["j1"])).unwrap_err();
        assert!(err.to_string().contains("horizon t must be >= 1"), "{err}");
    }

    #[test]
    fn load_observations_rejects_negative_jac() {
        let f = write_temp("{\"job_id\":\"j1\",\"t\":1,\"jac\":-3}\n");
        let err = load_observations(f.path(), &known(&["j1"])).unwrap_err();
        assert!(err.to_string().contains("jac must be non-negative"), "{err}");
    }

    #[test]
    fn load_observations_rejects_decreasing_jac() {
        let f = write_temp(concat!(
            "{\"job_id\":\"j1\",\"t\":7,\"jac\":5}\n",
            "{\"job_id\":\"j1\",\"t\":14,\"jac\":3}\n",
        ));
        let err = load_observations(f.path(), &known(&["j1"])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("jac decreases"), "{msg}");
        assert!(msg.contains(":2:"), "{msg}");
    }

    #[test]
    fn load_skill_table_infers_dimension() {
        let f = write_temp("welding\t1.0\t0.5\t-0.25\nforklift\t0.0\t1.0\t2.0\n");
        let table = load_skill_table(f.path()).unwrap();
        assert_eq!(table.dim(), 3);
        assert_eq!(table.get("welding"), Some(&[1.0, 0.5, -0.25][..]));
    }

    #[test]
    fn load_skill_table_rejects_ragged_rows() {
        let f = write_temp("a\t1\t2\t3\nb\t1\t2\t3\t4\n");
        let err = load_skill_table(f.path()).unwrap_err();
        assert!(err.to_string().contains("ragged row"), "{err}");
    }

    #[test]
    fn load_skill_table_rejects_empty_file() {
        let f = write_temp("");
        let err = load_skill_table(f.path()).unwrap_err();
        assert!(err.to_string().contains("empty table"), "{err}");
    }

    #[test]
    fn load_skill_table_rejects_non_numeric() {
        let f = write_temp("a\t1\tx\n");
        let err = load_skill_table(f.path()).unwrap_err();
        assert!(err.to_string().contains("non-numeric component"), "{err}");
    }

    #[test]
    fn jobs_roundtrip_through_jsonl() {
        let f = write_temp(&(job_line("j1", 33.5, -111.9) + "\n" + &job_line("j2", 40.0, 170.0) + "\n"));
        let jobs = load_jobs(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_jobs(out.path(), &jobs).unwrap();
        let reloaded = load_jobs(out.path()).unwrap();
        assert_eq!(jobs, reloaded);
    }

    #[test]
    fn observations_roundtrip_through_jsonl() {
        let obs = vec![
            Observation { job_id: "j1".into(), t: 1, jac: 0 },
            Observation { job_id: "j1".into(), t: 7, jac: 4 },
        ];
        let out = tempfile::NamedTempFile::new().unwrap();
        write_observations(out.path(), &obs).unwrap();
        let reloaded = load_observations(out.path(), &known(&["j1"])).unwrap();
        assert_eq!(obs, reloaded);
    }

    #[test]
    fn splits_roundtrip_through_csv() {
        let mut splits = BTreeMap::new();
        splits.insert("j1".to_string(), Split::Train);
        splits.insert("j2".to_string(), Split::Val);
        let out = tempfile::NamedTempFile::new().unwrap();
        write_splits(out.path(), &splits).unwrap();
        assert_eq!(load_splits(out.path()).unwrap(), splits);
    }

    #[test]
    fn dataset_resolves_jobs_and_rejects_dangling() {
        let jobs = load_jobs(write_temp(&(job_line("j1", 1.0, 2.0) + "\n")).path()).unwrap();
        let obs = vec![Observation { job_id: "j2".into(), t: 1, jac: 0 }];
        assert!(matches!(
            Dataset::new(jobs, obs),
            Err(Error::UnknownJob { .. })
        ));
    }

    #[test]
    fn dataset_split_filters() {
        let jobs = load_jobs(
            write_temp(&(job_line("j1", 1.0, 2.0) + "\n" + &job_line("j2", 1.0, 2.0) + "\n")).path(),
        )
        .unwrap();
        let obs = vec![
            Observation { job_id: "j1".into(), t: 1, jac: 0 },
            Observation { job_id: "j2".into(), t: 1, jac: 2 },
        ];
        let mut ds = Dataset::new(jobs, obs).unwrap();
        let mut splits = BTreeMap::new();
        splits.insert("j1".to_string(), Split::Train);
        splits.insert("j2".to_string(), Split::Test);
        ds.set_splits(splits).unwrap();
        assert_eq!(ds.observations_in_split(Split::Train).count(), 1);
        assert_eq!(ds.jobs_in_split(Split::Test).next().unwrap().job_id, "j2");
    }
}
