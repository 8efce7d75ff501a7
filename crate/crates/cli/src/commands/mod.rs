pub mod evaluate;
pub mod featurize;
pub mod forecast;
pub mod generate;
pub mod predict;
pub mod serialize;
pub mod series;
pub mod train;

use anyhow::Result;

use crate::config::Overrides;
use crate::Command;

pub fn dispatch(command: Command, overrides: &Overrides) -> Result<serde_json::Value> {
    match command {
        Command::Generate(args) => generate::run(args, overrides),
        Command::Featurize(args) => featurize::run(args, overrides),
        Command::Serialize(args) => serialize::run(args, overrides),
        Command::Train(args) => train::run(args, overrides),
        Command::Predict(args) => predict::run(args, overrides),
        Command::ForecastTs(args) => forecast::run(args, overrides),
        Command::Evaluate(args) => evaluate::run(args, overrides),
        Command::ReportSeries(args) => series::run(args, overrides),
    }
}

/// Loads jobs + observations (+ optional splits) into a validated dataset.
pub(crate) fn load_dataset(
    jobs_path: &std::path::Path,
    obs_path: &std::path::Path,
    splits_path: Option<&std::path::Path>,
) -> Result<jobcast_core::datamodel::Dataset> {
    let jobs = jobcast_core::datamodel::load_jobs(jobs_path)?;
    let known = jobs.iter().map(|j| j.job_id.clone()).collect();
    let observations = jobcast_core::datamodel::load_observations(obs_path, &known)?;
    let mut dataset = jobcast_core::datamodel::Dataset::new(jobs, observations)?;
    if let Some(path) = splits_path {
        let splits = jobcast_core::datamodel::load_splits(path)?;
        dataset.set_splits(splits)?;
    }
    Ok(dataset)
}
