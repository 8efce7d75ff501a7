use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::{Args, Subcommand};
use serde_json::json;

use jobcast_core::datamodel::Split;
use jobcast_core::evalreport::write_predictions;
use jobcast_core::tsforecast::{forecast_corpus, CrostonVariant, Method};

use crate::config::Overrides;

#[derive(Args)]
pub struct ForecastArgs {
    #[arg(long, value_name = "FILE")]
    pub jobs: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub obs: Option<PathBuf>,

    /// Needed only with --split.
    #[arg(long, value_name = "FILE")]
    pub splits: Option<PathBuf>,

    /// Restrict forecasting to jobs in one split (train/test/val).
    #[arg(long, value_name = "SPLIT")]
    pub split: Option<String>,

    /// Day to forecast; history uses the job's days strictly before it.
    #[arg(long, value_name = "DAY", default_value_t = 30)]
    pub target_day: u32,

    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub method: MethodArg,
}

#[derive(Subcommand)]
pub enum MethodArg {
    /// Simple exponential smoothing.
    Ses {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Croston's method, classic recursion.
    CrostonClassic {
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
    },
    /// Croston with the Syntetos-Boylan bias correction.
    CrostonSba {
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
    },
    /// Croston with the smoothing rate chosen by grid search.
    CrostonOptimized,
    /// Teunter-Syntetos-Babai.
    Tsb {
        #[arg(long = "alpha-d", default_value_t = 0.3)]
        alpha_d: f64,
        #[arg(long = "alpha-p", default_value_t = 0.2)]
        alpha_p: f64,
    },
    /// Aggregate-disaggregate over fixed buckets.
    Adida {
        #[arg(long, default_value_t = 2)]
        bucket: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Mean of ADIDA forecasts over multiple aggregation levels.
    Imapa {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Mean of the last `window` values.
    WindowAverage {
        #[arg(long, default_value_t = 3)]
        window: usize,
    },
    /// Autoregression on the given lags, fit by least squares.
    Ar {
        #[arg(long, value_delimiter = ',', default_value = "2")]
        lags: Vec<usize>,
    },
}

impl From<&MethodArg> for Method {
    fn from(arg: &MethodArg) -> Method {
        match arg {
            MethodArg::Ses { alpha } => Method::Ses { alpha: *alpha },
            MethodArg::CrostonClassic { alpha } => Method::Croston {
                alpha: *alpha,
                variant: CrostonVariant::Classic,
            },
            MethodArg::CrostonSba { alpha } => Method::Croston {
                alpha: *alpha,
                variant: CrostonVariant::Sba,
            },
            MethodArg::CrostonOptimized => Method::Croston {
                alpha: 0.1,
                variant: CrostonVariant::Optimized,
            },
            MethodArg::Tsb { alpha_d, alpha_p } => Method::Tsb {
                alpha_demand: *alpha_d,
                alpha_probability: *alpha_p,
            },
            MethodArg::Adida { bucket, alpha } => Method::Adida {
                bucket: *bucket,
                alpha: *alpha,
            },
            MethodArg::Imapa { alpha } => Method::Imapa { alpha: *alpha },
            MethodArg::WindowAverage { window } => Method::WindowAverage { window: *window },
            MethodArg::Ar { lags } => Method::AutoRegressive { lags: lags.clone() },
        }
    }
}

fn skips_path(out: &Path) -> PathBuf {
    match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => out.with_extension(format!("skips.{ext}")),
        None => out.with_extension("skips"),
    }
}

pub fn run(args: ForecastArgs, _overrides: &Overrides) -> Result<serde_json::Value> {
    let jobs_path = args.jobs.unwrap_or_else(|| crate::default_file("jobs.jsonl"));
    let obs_path = args.obs.unwrap_or_else(|| crate::default_file("observations.jsonl"));
    let out = args
        .out
        .unwrap_or_else(|| crate::default_file("ts_predictions.csv"));

    let split = match &args.split {
        Some(s) => Some(Split::parse(s)?),
        None => None,
    };
    let splits_path = if split.is_some() {
        Some(args.splits.unwrap_or_else(|| crate::default_file("splits.csv")))
    } else {
        args.splits
    };
    let dataset = super::load_dataset(&jobs_path, &obs_path, splits_path.as_deref())?;

    let method = Method::from(&args.method);
    let (predictions, skips) = forecast_corpus(&dataset, split, &method, args.target_day)?;
    write_predictions(&out, &predictions)?;

    let skips_file = skips_path(&out);
    {
        let mut w = csv::WriterBuilder::new().from_path(&skips_file)?;
        w.write_record(["job_id", "reason"])?;
        for skip in &skips {
            w.write_record([skip.job_id.as_str(), skip.reason.as_str()])?;
        }
        w.flush()?;
    }

    Ok(json!({
        "command": "forecast-ts",
        "method": method.to_string(),
        "target_day": args.target_day,
        "predictions": predictions.len(),
        "skipped": skips.len(),
        "out": out,
        "skips": skips_file,
    }))
}
