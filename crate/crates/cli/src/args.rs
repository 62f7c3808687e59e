use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use lindet_core::experiments::{
    Experiment, SimConfig, DEFAULT_BER_TRIALS, DEFAULT_CDF_TRIALS, DEFAULT_COND_TRIALS, DEFAULT_DIMS,
    DEFAULT_GAIN_TRIALS, DEFAULT_TABLE1_TRIALS,
};

pub const SEED_ENV: &str = "LINDET_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "lindet", version, about = "Linear ZF/MMSE MIMO detector experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean minimum singular value and condition number of normalized channels
    Table1(RunArgs),
    /// MMSE-over-ZF post-processing SNR gain versus receive SNR
    Gain(RunArgs),
    /// CDF of the minimum singular value and its scaled tail
    Cdf(RunArgs),
    /// Paired ZF/MMSE QPSK bit error rate sweep
    Ber(RunArgs),
    /// Exact versus approximate filter condition-number ratio
    Condratio(RunArgs),
    /// Run the numerical property suite
    Props(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Table1(_) => "table1",
            Command::Gain(_) => "gain",
            Command::Cdf(_) => "cdf",
            Command::Ber(_) => "ber",
            Command::Condratio(_) => "condratio",
            Command::Props(_) => "props",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Table1(a)
            | Command::Gain(a)
            | Command::Cdf(a)
            | Command::Ber(a)
            | Command::Condratio(a)
            | Command::Props(a) => a,
        }
    }

    pub fn experiment(&self) -> Option<Experiment> {
        match self {
            Command::Table1(_) => Some(Experiment::Table1),
            Command::Gain(_) => Some(Experiment::Gain),
            Command::Cdf(_) => Some(Experiment::Cdf),
            Command::Ber(_) => Some(Experiment::Ber),
            Command::Condratio(_) => Some(Experiment::CondRatio),
            Command::Props(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Channel dimensions, comma separated
    #[arg(long)]
    pub dims: Option<String>,
    /// Single channel dimension
    #[arg(long)]
    pub n: Option<usize>,
    /// SNR grid in dB: `min:max:step` or a comma-separated list
    #[arg(long)]
    pub snr: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed (falls back to the config file, then LINDET_SEED)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Minimum singular value: a floor for `ber`, a grid for `condratio`
    #[arg(long = "sigma-min")]
    pub sigma_min: Option<String>,
    /// Target condition number for synthesized channels
    #[arg(long)]
    pub cond: Option<f64>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Maximum worker threads
    #[arg(long)]
    pub workers: Option<usize>,
    /// File of `key = value` lines using the long flag names
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write a gnuplot script that plots the CSV output
    #[arg(long = "emit-plot")]
    pub emit_plot: Option<PathBuf>,
}

/// A malformed or out-of-range invocation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

const CONFIG_KEYS: [&str; 11] = [
    "dims",
    "n",
    "snr",
    "trials",
    "seed",
    "sigma-min",
    "cond",
    "out",
    "format",
    "workers",
    "emit-plot",
];

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(usage(format!("config line {}: unknown key `{key}`", lineno + 1)));
        }
        map.insert(key, value.trim().to_owned());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, UsageError> {
    value
        .parse()
        .map_err(|_| usage(format!("invalid value `{value}` for {key}")))
}

/// Fills every unset flag from the config file.
fn merge_config(args: &RunArgs, config: &BTreeMap<String, String>) -> Result<RunArgs, UsageError> {
    let mut merged = args.clone();
    for (key, value) in config {
        match key.as_str() {
            "dims" if args.dims.is_none() && args.n.is_none() => merged.dims = Some(value.clone()),
            "n" if args.dims.is_none() && args.n.is_none() => merged.n = Some(parse_value(key, value)?),
            "snr" => merged.snr = merged.snr.take().or_else(|| Some(value.clone())),
            "trials" if merged.trials.is_none() => merged.trials = Some(parse_value(key, value)?),
            "seed" if merged.seed.is_none() => merged.seed = Some(parse_value(key, value)?),
            "sigma-min" => merged.sigma_min = merged.sigma_min.take().or_else(|| Some(value.clone())),
            "cond" if merged.cond.is_none() => merged.cond = Some(parse_value(key, value)?),
            "out" => merged.out = merged.out.take().or_else(|| Some(PathBuf::from(value))),
            "format" if merged.format.is_none() => {
                merged.format =
                    Some(Format::from_str(value, true).map_err(|_| usage(format!("invalid format `{value}`")))?)
            }
            "workers" if merged.workers.is_none() => merged.workers = Some(parse_value(key, value)?),
            "emit-plot" => merged.emit_plot = merged.emit_plot.take().or_else(|| Some(PathBuf::from(value))),
            _ => {}
        }
    }
    Ok(merged)
}

fn round_grid(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// Parses `min:max:step` (endpoints inclusive within half a step), a
/// comma-separated list, or a single value.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, UsageError> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let grid = match parts.as_slice() {
        [min, max, step] => {
            let (min, max, step): (f64, f64, f64) = (
                parse_value("grid", min)?,
                parse_value("grid", max)?,
                parse_value("grid", step)?,
            );
            if step.is_nan() || step <= 0.0 || max.is_nan() || max < min || !min.is_finite() || !max.is_finite() {
                return Err(usage(format!("invalid range `{text}`: need min <= max and step > 0")));
            }
            let count = ((max - min) / step + 0.5).floor() as usize;
            (0..=count).map(|k| round_grid(min + k as f64 * step)).collect()
        }
        [_] => text
            .split(',')
            .map(|v| parse_value::<f64>("grid", v.trim()))
            .collect::<Result<Vec<_>, _>>()?,
        _ => return Err(usage(format!("invalid grid `{text}`: use min:max:step or a list"))),
    };
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(usage(format!("grid `{text}` has non-finite values")));
    }
    Ok(grid)
}

pub fn parse_dims(text: &str) -> Result<Vec<usize>, UsageError> {
    text.split(',').map(|v| parse_value("--dims", v.trim())).collect()
}

/// Fully resolved invocation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: &'static str,
    pub experiment: Option<Experiment>,
    pub config: SimConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: Option<usize>,
    pub emit_plot: Option<PathBuf>,
}

fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64, UsageError> {
    match (flag, env) {
        (Some(seed), _) => Ok(seed),
        (None, Some(value)) => parse_value(SEED_ENV, value.trim()),
        (None, None) => Ok(DEFAULT_SEED),
    }
}

fn format_for(path: Option<&Path>) -> Format {
    match path.and_then(Path::extension).and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
        _ => Format::Csv,
    }
}

pub fn resolve(command: &Command, seed_env: Option<&str>) -> Result<Resolved, UsageError> {
    let raw = command.args();
    let args = match &raw.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            merge_config(raw, &parse_config(&text)?)?
        }
        None => raw.clone(),
    };
    let experiment = command.experiment();
    let single_dim = matches!(experiment, Some(Experiment::Ber | Experiment::CondRatio));

    let dims = match (&args.dims, args.n) {
        (Some(_), Some(_)) => return Err(usage("give either --dims or --n, not both")),
        (Some(d), None) => parse_dims(d)?,
        (None, Some(n)) => vec![n],
        (None, None) => match experiment {
            Some(Experiment::Ber) => vec![4],
            Some(Experiment::CondRatio) => vec![2],
            Some(Experiment::Cdf) => vec![2, 4, 8, 64],
            _ => DEFAULT_DIMS.to_vec(),
        },
    };
    if single_dim && dims.len() != 1 {
        return Err(usage(format!("{} takes a single dimension (--n)", command.name())));
    }

    let default_snr = match experiment {
        Some(Experiment::Gain) => "0:50:5",
        Some(Experiment::Ber) => "0:30:2",
        Some(Experiment::CondRatio) => "10",
        _ => "0",
    };
    let snr_grid_db = parse_grid(args.snr.as_deref().unwrap_or(default_snr))?;

    let trials = args.trials.unwrap_or(match experiment {
        Some(Experiment::Table1) => DEFAULT_TABLE1_TRIALS,
        Some(Experiment::Gain) => DEFAULT_GAIN_TRIALS,
        Some(Experiment::Cdf) => DEFAULT_CDF_TRIALS,
        Some(Experiment::Ber) => DEFAULT_BER_TRIALS,
        Some(Experiment::CondRatio) => DEFAULT_COND_TRIALS,
        None => 0,
    });

    let (sigma_min_floor, sigma_min_grid) = match experiment {
        Some(Experiment::Ber) => {
            let floor = match &args.sigma_min {
                Some(v) => parse_value::<f64>("--sigma-min", v)?,
                None => 0.0,
            };
            (Some(floor), None)
        }
        Some(Experiment::CondRatio) => (
            None,
            Some(parse_grid(args.sigma_min.as_deref().unwrap_or("0.1:1.5:0.1"))?),
        ),
        _ if args.sigma_min.is_some() => {
            return Err(usage(format!("--sigma-min does not apply to {}", command.name())))
        }
        _ => (None, None),
    };
    let cond_target = match experiment {
        Some(Experiment::CondRatio) => Some(args.cond.unwrap_or(15.0)),
        _ if args.cond.is_some() => return Err(usage(format!("--cond does not apply to {}", command.name()))),
        _ => None,
    };

    if args.workers == Some(0) {
        return Err(usage("--workers must be >= 1"));
    }
    let format = args.format.unwrap_or_else(|| format_for(args.out.as_deref()));
    if args.emit_plot.is_some() && (args.out.is_none() || format != Format::Csv) {
        return Err(usage("--emit-plot needs CSV output written with --out"));
    }

    let config = SimConfig {
        dims,
        snr_grid_db,
        trials,
        master_seed: resolve_seed(args.seed, seed_env)?,
        sigma_min_floor,
        cond_target,
        sigma_min_grid,
    };
    if let Some(e) = experiment {
        config.validate(e).map_err(|err| usage(err.to_string()))?;
    }
    Ok(Resolved {
        command: command.name(),
        experiment,
        config,
        out: args.out,
        format,
        workers: args.workers,
        emit_plot: args.emit_plot,
    })
}
