//! Deterministic synthetic corpus generator.
//!
//! Reproduces the qualitative shape of a production job-application corpus:
//! counts follow a long tail (most jobs collect 1-2 applications, a handful
//! collect many, none exceed the cap), per-job counts grow with days on
//! site, day 7 has the widest observation coverage, and splits come out in
//! an 8:2:2 ratio. A latent score computed from the job's own features
//! drives expected counts with configurable strength, so supervised models
//! have something real to learn.
//!
//! Everything is a pure function of the config: per-job randomness derives
//! only from `(seed, job index)`, and the count distribution is laid down as
//! an exact quantile staircase rather than sampled, which keeps the marginal
//! histogram stable at any corpus size.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datamodel::{Dataset, JobPosting, Observation, Split};
use crate::error::{Error, Result};
use crate::hashing::{fnv1a64, golden_fraction, mix_seed, splitmix64};

/// Configuration for [`generate_corpus`].
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub n_jobs: usize,
    /// Strictly increasing day values at which counts may be observed.
    pub horizons: Vec<u32>,
    /// (train, test, val) proportions.
    pub split_ratio: (u32, u32, u32),
    /// Largest count a job can ever reach.
    pub max_jac: u32,
    pub seed: u64,
    pub n_titles: usize,
    pub n_companies: usize,
    pub n_skills: usize,
    /// In [0, 1]: 0 makes counts independent of features, 1 makes the
    /// feature score fully determine a job's rank in the count distribution.
    pub signal_strength: f64,
}

impl GenConfig {
    pub fn new(n_jobs: usize, seed: u64) -> GenConfig {
        GenConfig {
            n_jobs,
            horizons: vec![1, 3, 7, 14, 30],
            split_ratio: (8, 2, 2),
            max_jac: 75,
            seed,
            n_titles: 32,
            n_companies: 24,
            n_skills: 32,
            signal_strength: 0.6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_jobs == 0 {
            return Err(Error::InvalidConfig {
                what: "n_jobs",
                message: "must be positive".into(),
            });
        }
        if self.horizons.is_empty() {
            return Err(Error::InvalidConfig {
                what: "horizons",
                message: "must be non-empty".into(),
            });
        }
        if self.horizons[0] < 1 || self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig {
                what: "horizons",
                message: "must be strictly increasing day values >= 1".into(),
            });
        }
        let (a, b, c) = self.split_ratio;
        if a == 0 || b == 0 || c == 0 {
            return Err(Error::InvalidConfig {
                what: "split_ratio",
                message: "all components must be positive".into(),
            });
        }
        if self.max_jac < 1 {
            return Err(Error::InvalidConfig {
                what: "max_jac",
                message: "must be >= 1".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.signal_strength) {
            return Err(Error::InvalidConfig {
                what: "signal_strength",
                message: format!("must be in [0, 1], got {}", self.signal_strength),
            });
        }
        if self.n_titles == 0 || self.n_companies == 0 || self.n_skills == 0 {
            return Err(Error::InvalidConfig {
                what: "vocab size",
                message: "must be positive".into(),
            });
        }
        Ok(())
    }
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig::new(1000, 13)
    }
}

const ROLES: &[&str] = &[
    "welder",
    "nurse",
    "accountant",
    "software developer",
    "electrician",
    "barista",
    "warehouse associate",
    "delivery driver",
    "teacher",
    "plumber",
    "cashier",
    "line cook",
    "security guard",
    "data analyst",
    "project manager",
    "receptionist",
    "machinist",
    "pharmacist",
    "paralegal",
    "carpenter",
    "dispatcher",
    "estimator",
    "groundskeeper",
    "housekeeper",
    "lab technician",
    "bookkeeper",
    "forklift operator",
    "sales associate",
    "customer service representative",
    "maintenance technician",
    "graphic designer",
    "physical therapist",
];

const COMPANIES: &[&str] = &[
    "Acme Staffing",
    "Blue Ridge Logistics",
    "Cardinal Health Partners",
    "Desert Sun Retail",
    "Evergreen Foods",
    "Falcon Manufacturing",
    "Granite Peak Construction",
    "Harbor Light Hospitality",
    "Iron Gate Security",
    "Juniper Analytics",
    "Keystone Transport",
    "Lakeshore Medical Group",
    "Maple and Main Cafe",
    "Northwind Software",
    "Oakfield Schools",
    "Prairie Grain Co",
    "Quarry Hill Materials",
    "Redstone Energy",
    "Summit Care Clinics",
    "Timberline Outfitters",
    "Union Square Legal",
    "Vista Del Sol Resorts",
    "Westbrook Plumbing",
    "Zephyr Airlines",
];

const SKILLS: &[&str] = &[
    "welding",
    "forklift",
    "phlebotomy",
    "bookkeeping",
    "python",
    "sql",
    "javascript",
    "customer service",
    "inventory management",
    "food safety",
    "cpr certification",
    "electrical wiring",
    "blueprint reading",
    "scheduling",
    "payroll",
    "data entry",
    "crm software",
    "cold calling",
    "merchandising",
    "osha compliance",
    "route planning",
    "patient care",
    "medication administration",
    "spanish",
    "carpentry",
    "hvac repair",
    "drywall",
    "project planning",
    "quality assurance",
    "machine operation",
    "autocad",
    "copywriting",
];

const CITIES: &[(&str, &str, f64, f64)] = &[
    ("Atlanta", "GA", 33.749, -84.388),
    ("Tucson", "AZ", 32.2226, -110.9747),
    ("Denver", "CO", 39.7392, -104.9903),
    ("Chicago", "IL", 41.8781, -87.6298),
    ("Boston", "MA", 42.3601, -71.0589),
    ("Seattle", "WA", 47.6062, -122.3321),
    ("Austin", "TX", 30.2672, -97.7431),
    ("Portland", "OR", 45.5152, -122.6784),
    ("Nashville", "TN", 36.1627, -86.7816),
    ("Columbus", "OH", 39.9612, -82.9988),
    ("Phoenix", "AZ", 33.4484, -112.074),
    ("Miami", "FL", 25.7617, -80.1918),
    ("Minneapolis", "MN", 44.9778, -93.265),
    ("Raleigh", "NC", 35.7796, -78.6382),
    ("Omaha", "NE", 41.2565, -95.9345),
    ("Salt Lake City", "UT", 40.7608, -111.891),
    ("Pittsburgh", "PA", 40.4406, -79.9959),
    ("St. Louis", "MO", 38.627, -90.1994),
    ("New Orleans", "LA", 29.9511, -90.0715),
    ("Las Vegas", "NV", 36.1699, -115.1398),
    ("Louisville", "KY", 38.2527, -85.7585),
    ("Albuquerque", "NM", 35.0844, -106.6504),
    ("Boise", "ID", 43.615, -116.2023),
    ("Richmond", "VA", 37.5407, -77.436),
];

const JOB_TYPES: &[&str] = &["full_time", "part_time", "contract", "temporary"];
const CHANNELS: &[&str] = &["web", "mobile", "referral", "agency"];
const JOB_LEVELS: &[&str] = &["entry", "mid", "senior", "lead"];

/// Cumulative growth fraction at day `t`: an early burst that decays
/// geometrically plus a slow linear drip, approaching 1 around day 30.
/// A forecaster that only extrapolates the first two weeks of a series
/// systematically misses the drip, which mirrors how history-only methods
/// behave on this kind of data.
pub(crate) fn growth_fraction(t: u32) -> f64 {
    const BURST_SHARE: f64 = 0.58;
    const BURST_DECAY: f64 = 0.74;
    const DRIP_HORIZON: f64 = 30.0;
    let drip_t = f64::from(t.min(30));
    BURST_SHARE * (1.0 - BURST_DECAY.powi(t as i32)) + (1.0 - BURST_SHARE) * (drip_t / DRIP_HORIZON)
}

/// Day at which the count staircase is anchored; also the day every
/// generated job is observed on (when listed among the horizons).
const ANCHOR_DAY: u32 = 7;

fn weibull_cdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - (-(x / scale).powf(shape)).exp()
    }
}

fn lomax_cdf(x: f64, alpha: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - (1.0 + x / scale).powf(-alpha)
    }
}

/// Long-tailed size distribution at the anchor day: a Weibull body that puts
/// the mode at 1-2 applications plus a heavy Lomax tail for the rare hot job.
fn size_cdf(x: f64) -> f64 {
    const BODY_WEIGHT: f64 = 0.955;
    BODY_WEIGHT * weibull_cdf(x, 1.5, 2.3) + (1.0 - BODY_WEIGHT) * lomax_cdf(x, 1.1, 3.0)
}

/// Probability masses for anchor-day values 0..=k_max, truncated and
/// renormalized.
fn anchor_masses(k_max: usize) -> Vec<f64> {
    let total = size_cdf((k_max + 1) as f64);
    (0..=k_max)
        .map(|k| (size_cdf((k + 1) as f64) - size_cdf(k as f64)) / total)
        .collect()
}

/// Largest-remainder apportionment of `n` items over `masses`.
fn apportion(n: usize, masses: &[f64]) -> Vec<usize> {
    let mut counts: Vec<usize> = masses.iter().map(|m| (m * n as f64).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = masses[a] * n as f64 - (masses[a] * n as f64).floor();
        let fb = masses[b] * n as f64 - (masses[b] * n as f64).floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &k in order.iter().take(n - assigned) {
        counts[k] += 1;
    }
    counts
}

/// Forces the histogram to be non-increasing from bin 3 upward; any excess
/// moves to bin 1 so the total and the mode are preserved.
fn enforce_tail_monotone(counts: &mut [usize]) {
    if counts.len() < 5 {
        return;
    }
    for k in 3..counts.len() - 1 {
        if counts[k + 1] > counts[k] {
            let excess = counts[k + 1] - counts[k];
            counts[k + 1] = counts[k];
            counts[1] += excess;
        }
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &'a [String]) -> &'a str {
    &items[rng.random_range(0..items.len())]
}

/// Expands a base word list to `n` entries, suffixing wrapped entries.
fn vocab(base: &[&str], n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < base.len() {
                base[i].to_string()
            } else {
                format!("{} {}", base[i % base.len()], i / base.len() + 1)
            }
        })
        .collect()
}

/// Latent score in [0, 1] computed from a job's own fields. Generated
/// corpora rank jobs by a blend of this score and seeded noise, so the score
/// is exactly what a supervised model can hope to recover.
pub fn feature_score(job: &JobPosting) -> f64 {
    fn word_effect(word: &str) -> f64 {
        golden_fraction(splitmix64(fnv1a64(word.as_bytes())))
    }
    let level = match job.job_level.as_str() {
        "entry" => 0.15,
        "mid" => 0.4,
        "senior" => 0.75,
        "lead" => 1.0,
        _ => 0.5,
    };
    let job_type = match job.job_type.as_str() {
        "full_time" => 1.0,
        "contract" => 0.55,
        "part_time" => 0.35,
        "temporary" => 0.1,
        _ => 0.5,
    };
    let channel = match job.channel.as_str() {
        "referral" => 0.9,
        "web" => 0.65,
        "agency" => 0.4,
        "mobile" => 0.2,
        _ => 0.5,
    };
    let salary = match job.salary {
        Some(s) => (s / 150_000.0).clamp(0.0, 1.0),
        None => 0.3,
    };
    let role = job
        .title
        .split_whitespace()
        .next()
        .map_or(0.5, word_effect);
    let latitude = ((job.latitude - 25.0) / 24.0).clamp(0.0, 1.0);
    let skills = if job.skills.is_empty() {
        0.5
    } else {
        job.skills.iter().map(|s| word_effect(s)).sum::<f64>() / job.skills.len() as f64
    };
    0.20 * level
        + 0.12 * job_type
        + 0.14 * channel
        + 0.17 * salary
        + 0.17 * role
        + 0.06 * latitude
        + 0.08 * skills
        + 0.06 * (level * channel)
}

fn generate_job(config: &GenConfig, titles: &[String], companies: &[String], skills: &[String], idx: usize) -> JobPosting {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, "job", idx as u64));
    let title = pick(&mut rng, titles).to_string();
    let company = pick(&mut rng, companies).to_string();
    let (city, state, lat, lon) = CITIES[rng.random_range(0..CITIES.len())];
    let latitude = lat + rng.random_range(-0.15..0.15);
    let longitude = lon + rng.random_range(-0.15..0.15);
    let n_skills = if rng.random::<f64>() < 0.08 {
        0
    } else {
        rng.random_range(1..=5usize)
    };
    let mut job_skills: Vec<String> = rand::seq::index::sample(&mut rng, skills.len(), n_skills.min(skills.len()))
        .iter()
        .map(|i| skills[i].clone())
        .collect();
    job_skills.sort();
    let job_type = JOB_TYPES[rng.random_range(0..JOB_TYPES.len())].to_string();
    let channel = CHANNELS[rng.random_range(0..CHANNELS.len())].to_string();
    let job_level = JOB_LEVELS[rng.random_range(0..JOB_LEVELS.len())].to_string();
    let salary = if rng.random::<f64>() < 0.72 {
        let r: f64 = rng.random();
        Some(((30_000.0 + 140_000.0 * r * r * r) / 500.0).round() * 500.0)
    } else {
        None
    };
    let skills_text = if job_skills.is_empty() {
        "a willingness to learn".to_string()
    } else {
        job_skills.join(", ")
    };
    let description = match rng.random_range(0..3u8) {
        0 => format!(
            "We are hiring a {title} to join {company} in {city}. This is a {job_type} position at the {job_level} level. Key skills: {skills_text}."
        ),
        1 => format!(
            "{company} is looking for a {job_type} {title}. Candidates in {city} preferred. Experience with {skills_text} is a plus."
        ),
        _ => format!(
            "Join {company} as a {title}. The position is {job_type}, {job_level} level, based in {city}."
        ),
    };
    JobPosting {
        job_id: format!("job-{idx:06}"),
        title,
        company,
        description,
        skills: job_skills,
        job_type,
        state: state.to_string(),
        channel: channel.clone(),
        job_level,
        city: city.to_string(),
        latitude,
        longitude,
        salary,
    }
}

/// Observation window for one job: first and last day it is tracked.
/// Chosen to mirror per-day corpus coverage that peaks at day 7: 36% of
/// jobs are seen from day 1, 88% by day 3, all by day 7; 78% survive to
/// day 14 and 22% to day 30.
fn observation_window(config: &GenConfig, idx: usize, last_horizon: u32) -> (u32, u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, "window", idx as u64));
    let u: f64 = rng.random();
    let start = if u < 0.36 {
        1
    } else if u < 0.62 {
        2
    } else if u < 0.88 {
        3
    } else {
        4 + (((u - 0.88) / 0.03) as u32).min(3)
    };
    let v: f64 = rng.random();
    let end = if v < 0.22 {
        7 + ((v / 0.22) * 7.0) as u32
    } else if v < 0.78 {
        14 + (((v - 0.22) / 0.56) * 16.0) as u32
    } else {
        last_horizon.max(30)
    };
    (start, end.min(last_horizon.max(30)))
}

/// Generates a full corpus: jobs, observations, and split tags. Identical
/// configs produce identical corpora.
pub fn generate_corpus(config: &GenConfig) -> Result<Dataset> {
    config.validate()?;
    let n = config.n_jobs;

    let titles = vocab(ROLES, config.n_titles);
    let companies = vocab(COMPANIES, config.n_companies);
    let skills = vocab(SKILLS, config.n_skills);

    let jobs: Vec<JobPosting> = (0..n)
        .map(|idx| generate_job(config, &titles, &companies, &skills, idx))
        .collect();

    // Rank jobs by a blend of feature score and seeded noise. The blend
    // weight is the signal strength: 0 leaves a pure random permutation,
    // 1 ranks purely by score.
    let scores: Vec<f64> = jobs.iter().map(feature_score).collect();
    let mut by_score: Vec<usize> = (0..n).collect();
    by_score.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)));
    let mut score_rank = vec![0usize; n];
    for (pos, &i) in by_score.iter().enumerate() {
        score_rank[i] = pos;
    }
    let mut noise_order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, "rank-noise", 0));
    noise_order.shuffle(&mut rng);
    let mut noise_rank = vec![0usize; n];
    for (pos, &i) in noise_order.iter().enumerate() {
        noise_rank[i] = pos;
    }
    let w = config.signal_strength;
    let blended: Vec<f64> = (0..n)
        .map(|i| {
            w * (score_rank[i] as f64 + 0.5) + (1.0 - w) * (noise_rank[i] as f64 + 0.5)
        })
        .collect();
    let mut by_blend: Vec<usize> = (0..n).collect();
    by_blend.sort_by(|&a, &b| blended[a].partial_cmp(&blended[b]).unwrap().then(a.cmp(&b)));
    let mut final_rank = vec![0usize; n];
    for (pos, &i) in by_blend.iter().enumerate() {
        final_rank[i] = pos;
    }

    // Lay the anchor-day histogram down exactly, then give each rank a
    // continuous size and phase consistent with its bin.
    let anchor_fraction = growth_fraction(ANCHOR_DAY);
    let final_fraction = growth_fraction(30);
    let k_max = ((f64::from(config.max_jac) * anchor_fraction / final_fraction).floor() as usize)
        .saturating_sub(1);
    let mut bin_counts = apportion(n, &anchor_masses(k_max));
    enforce_tail_monotone(&mut bin_counts);

    let mut rank_to_bin = Vec::with_capacity(n);
    for (k, &count) in bin_counts.iter().enumerate() {
        for pos in 0..count {
            rank_to_bin.push((k, pos, count));
        }
    }
    debug_assert_eq!(rank_to_bin.len(), n);

    let last_horizon = *config.horizons.last().unwrap();
    let mut observations = Vec::new();
    for (idx, job) in jobs.iter().enumerate() {
        let rank = final_rank[idx];
        let (k, pos, count) = rank_to_bin[rank];
        let within = (pos as f64 + 0.5) / count as f64;
        let size = (k as f64 + within) / anchor_fraction;
        let phase = 0.999 * (1.0 - within) * golden_fraction(rank as u64 + 1);
        let (start, end) = observation_window(config, idx, last_horizon);
        for &t in &config.horizons {
            if t < start || t > end {
                continue;
            }
            let jac = ((size * growth_fraction(t) + phase).floor() as u32).min(config.max_jac);
            observations.push(Observation {
                job_id: job.job_id.clone(),
                t,
                jac,
            });
        }
    }

    let mut dataset = Dataset::new(jobs, observations)?;
    split(&mut dataset, config.split_ratio, config.seed)?;
    Ok(dataset)
}

/// Assigns split tags per job (never per observation, so no job leaks
/// across splits). Quotas are exact largest-remainder shares of the ratio;
/// assignment order is a seeded shuffle of the job list.
pub fn split(dataset: &mut Dataset, ratio: (u32, u32, u32), seed: u64) -> Result<()> {
    let (ra, rb, rc) = ratio;
    if ra == 0 || rb == 0 || rc == 0 {
        return Err(Error::InvalidConfig {
            what: "split_ratio",
            message: "all components must be positive".into(),
        });
    }
    let n = dataset.jobs().len();
    if n < 3 {
        return Err(Error::Invalid(format!(
            "cannot populate all splits: need at least 3 jobs, got {n}"
        )));
    }
    let total = u64::from(ra) + u64::from(rb) + u64::from(rc);
    let parts = [u64::from(ra), u64::from(rb), u64::from(rc)];
    let mut quotas: Vec<usize> = parts
        .iter()
        .map(|&p| ((n as u64 * p) / total) as usize)
        .collect();
    let mut remainders: Vec<(u64, usize)> = parts
        .iter()
        .enumerate()
        .map(|(i, &p)| ((n as u64 * p) % total, i))
        .collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let left = n - quotas.iter().sum::<usize>();
    for &(_, i) in remainders.iter().take(left) {
        quotas[i] += 1;
    }
    // Guarantee every split is populated.
    while let Some(empty) = quotas.iter().position(|&q| q == 0) {
        let largest = (0..3).max_by_key(|&i| quotas[i]).unwrap();
        quotas[largest] -= 1;
        quotas[empty] += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, "split", 0));
    order.shuffle(&mut rng);

    let mut splits = BTreeMap::new();
    let mut cursor = 0usize;
    for (quota, split) in quotas.iter().zip(Split::ALL) {
        for &job_idx in &order[cursor..cursor + quota] {
            splits.insert(dataset.jobs()[job_idx].job_id.clone(), split);
        }
        cursor += quota;
    }
    dataset.set_splits(splits)
}

/// Writes a deterministic embedding table covering the generator's skill
/// vocabulary: one unit vector of the given dimension per skill, TSV rows
/// sorted by skill id.
pub fn write_skill_table(
    path: impl AsRef<std::path::Path>,
    config: &GenConfig,
    dim: usize,
) -> Result<()> {
    use std::io::Write;
    if dim == 0 {
        return Err(Error::InvalidConfig {
            what: "skill embedding dimension",
            message: "must be positive".into(),
        });
    }
    let path = path.as_ref();
    let mut skills = vocab(SKILLS, config.n_skills);
    skills.sort();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for skill in &skills {
        let mut rng =
            ChaCha8Rng::seed_from_u64(mix_seed(config.seed, "skill-table", fnv1a64(skill.as_bytes())));
        let mut vector: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut vector {
                *v /= norm;
            }
        }
        write!(w, "{skill}").map_err(|e| Error::io(path, e))?;
        for v in &vector {
            write!(w, "\t{v}").map_err(|e| Error::io(path, e))?;
        }
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
