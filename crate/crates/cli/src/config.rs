use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use mabfuzz_core::dut::BugConfig;
use mabfuzz_core::fuzzer::{CampaignConfig, Strategy};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_TRIALS: u32 = 3;
pub const DEFAULT_OUT: &str = "mabfuzz-out";

/// Command-line flags. Every flag overrides the same key of `--config`.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "mabfuzz",
    version,
    about = "Bandit-scheduled processor fuzzing experiments"
)]
pub struct Args {
    /// TOML file with the same keys as the flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Scheduler to run; repeat or comma-separate for several. Default: all four.
    #[arg(long, value_delimiter = ',')]
    pub algo: Vec<String>,
    #[arg(long)]
    pub arms: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<u32>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Tests simulated per campaign.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Campaigns per algorithm, seeded `seed`, `seed + 1`, ...
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `all`, `none`, or a comma list such as `B1,B7`.
    #[arg(long)]
    pub bugs: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads. Default: available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Keys accepted in a config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    algo: Option<AlgoList>,
    arms: Option<usize>,
    alpha: Option<f64>,
    gamma: Option<u32>,
    eta: Option<f64>,
    epsilon: Option<f64>,
    budget: Option<u64>,
    trials: Option<u32>,
    seed: Option<u64>,
    bugs: Option<String>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    test_length: Option<usize>,
    mutants: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AlgoList {
    One(String),
    Many(Vec<String>),
}

/// A grid of campaigns: every algorithm × `trials` seeds, sharing `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Parameters shared by all campaigns; `strategy` and `rng_seed` are
    /// overwritten per campaign.
    pub base: CampaignConfig,
    pub algorithms: Vec<Strategy>,
    pub trials: u32,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            base: CampaignConfig::default(),
            algorithms: Strategy::ALL.to_vec(),
            trials: DEFAULT_TRIALS,
            seed: 0,
            out: PathBuf::from(DEFAULT_OUT),
            jobs: None,
        }
    }
}

impl ExperimentSpec {
    pub fn trial_seed(&self, trial: u32) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }

    pub fn campaign(&self, strategy: Strategy, trial: u32) -> CampaignConfig {
        CampaignConfig {
            strategy,
            rng_seed: self.trial_seed(trial),
            ..self.base.clone()
        }
    }

    /// Every campaign of the grid, algorithm-major.
    pub fn campaigns(&self) -> Vec<(Strategy, u32)> {
        self.algorithms
            .iter()
            .flat_map(|a| (0..self.trials).map(move |t| (*a, t)))
            .collect()
    }
}

/// Parses flags, layering them over `--config` when given.
pub fn parse_config<I, T>(argv: I) -> Result<ExperimentSpec, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Help(e.to_string())
        }
        _ => CliError::Usage(first_line(&e.to_string())),
    })?;
    spec_from_args(&args)
}

pub fn spec_from_args(args: &Args) -> Result<ExperimentSpec, CliError> {
    let file = match &args.config {
        Some(path) => read_file(path)?,
        None => FileConfig::default(),
    };

    let mut spec = ExperimentSpec::default();
    let base = &mut spec.base;

    let algos = if !args.algo.is_empty() {
        Some(args.algo.clone())
    } else {
        file.algo.map(|a| match a {
            AlgoList::One(s) => s.split(',').map(str::to_string).collect(),
            AlgoList::Many(v) => v,
        })
    };
    if let Some(names) = algos {
        let mut algorithms = Vec::new();
        for name in names {
            let s: Strategy = name.parse().map_err(|e| CliError::invalid("algo", e))?;
            if !algorithms.contains(&s) {
                algorithms.push(s);
            }
        }
        if algorithms.is_empty() {
            return Err(CliError::invalid("algo", "no algorithm given"));
        }
        spec.algorithms = algorithms;
    }

    if let Some(v) = args.arms.or(file.arms) {
        base.num_arms = v;
    }
    if let Some(v) = args.alpha.or(file.alpha) {
        base.alpha = v;
    }
    if let Some(v) = args.gamma.or(file.gamma) {
        base.gamma = v;
    }
    if let Some(v) = args.eta.or(file.eta) {
        base.eta = v;
    }
    if let Some(v) = args.epsilon.or(file.epsilon) {
        base.epsilon = v;
    }
    if let Some(v) = args.budget.or(file.budget) {
        base.budget = v;
    }
    if let Some(v) = file.test_length {
        base.test_length = v;
    }
    if let Some(v) = file.mutants {
        base.mutation.mutants_per_interesting = v;
    }
    if let Some(bugs) = args.bugs.as_ref().or(file.bugs.as_ref()) {
        base.bugs = bugs
            .parse::<BugConfig>()
            .map_err(|e| CliError::invalid("bugs", e))?;
    }
    if let Some(v) = args.trials.or(file.trials) {
        if v == 0 {
            return Err(CliError::invalid("trials", "must be at least 1"));
        }
        spec.trials = v;
    }
    if let Some(v) = args.seed.or(file.seed) {
        spec.seed = v;
    }
    if let Some(v) = args.out.clone().or(file.out) {
        spec.out = v;
    }
    if let Some(v) = args.jobs.or(file.jobs) {
        if v == 0 {
            return Err(CliError::invalid("jobs", "must be at least 1"));
        }
        spec.jobs = Some(v);
    }

    spec.base.validate().map_err(|e| match e {
        mabfuzz_core::Error::Config { key, reason } => CliError::invalid(key, reason),
        other => CliError::Campaign(other),
    })?;
    Ok(spec)
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    toml::from_str(&text).map_err(|e| {
        let reason = first_line(e.message());
        match unknown_key(&reason) {
            Some(key) => CliError::invalid(&key, format!("unknown key in {}", path.display())),
            None => CliError::Usage(format!("{}: {reason}", path.display())),
        }
    })
}

/// Pulls `foo` out of serde's "unknown field `foo`, expected ..." message.
fn unknown_key(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or_default().trim().to_string()
}
