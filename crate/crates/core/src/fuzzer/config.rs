use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bandit::Algorithm;
use crate::coverage::RewardParams;
use crate::dut::BugConfig;
use crate::error::{Error, Result};
use crate::testgen::{MutationConfig, DEFAULT_MUTANTS, DEFAULT_TEST_LENGTH};

/// Seed scheduler of a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Egreedy,
    Ucb,
    Exp3,
    /// Single global FIFO queue, no bandit.
    Fifo,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Egreedy,
        Strategy::Ucb,
        Strategy::Exp3,
        Strategy::Fifo,
    ];
    pub const BANDITS: [Strategy; 3] = [Strategy::Egreedy, Strategy::Ucb, Strategy::Exp3];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Egreedy => "egreedy",
            Strategy::Ucb => "ucb",
            Strategy::Exp3 => "exp3",
            Strategy::Fifo => "fifo",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|a| a.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected egreedy, ucb, exp3 or fifo)"))
    }
}

/// Which tests get mutated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterestingRule {
    /// New coverage for the test's own arm.
    LocalNew,
    /// Coverage nobody had before.
    GlobalNew,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub strategy: Strategy,
    pub num_arms: usize,
    pub alpha: f64,
    pub gamma: u32,
    pub eta: f64,
    pub epsilon: f64,
    /// Number of test simulations.
    pub budget: u64,
    pub rng_seed: u64,
    pub bugs: BugConfig,
    pub test_length: usize,
    pub mutation: MutationConfig,
    pub interesting: InterestingRule,
    /// Reward `α·|L∖G| + (1−α)·|G|` instead of `α·|L| + (1−α)·|G|`.
    pub disjoint_reward: bool,
    /// Replace arms flagged by the saturation monitor.
    pub saturation_resets: bool,
    /// Baseline only: inject a fresh seed when the queue runs dry instead of
    /// stopping.
    pub reseed_on_empty: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            strategy: Strategy::Ucb,
            num_arms: 10,
            alpha: 0.25,
            gamma: 3,
            eta: 0.1,
            epsilon: 0.1,
            budget: 50_000,
            rng_seed: 0,
            bugs: BugConfig::all(),
            test_length: DEFAULT_TEST_LENGTH,
            mutation: MutationConfig {
                mutants_per_interesting: DEFAULT_MUTANTS,
                ..MutationConfig::default()
            },
            interesting: InterestingRule::LocalNew,
            disjoint_reward: false,
            saturation_resets: true,
            reseed_on_empty: true,
        }
    }
}

impl CampaignConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        CampaignConfig {
            strategy,
            ..Self::default()
        }
    }

    pub fn algorithm(&self) -> Option<Algorithm> {
        match self.strategy {
            Strategy::Egreedy => Some(Algorithm::EpsilonGreedy {
                epsilon: self.epsilon,
            }),
            Strategy::Ucb => Some(Algorithm::Ucb),
            Strategy::Exp3 => Some(Algorithm::Exp3 { eta: self.eta }),
            Strategy::Fifo => None,
        }
    }

    pub fn reward_params(&self) -> Result<RewardParams> {
        let mut params = RewardParams::new(self.alpha)?;
        params.disjoint = self.disjoint_reward;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        self.reward_params()?;
        if let Some(algorithm) = self.algorithm() {
            algorithm.validate()?;
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config(
                "epsilon",
                format!("{} is not in [0, 1]", self.epsilon),
            ));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::config(
                "eta",
                format!("{} is not in (0, 1]", self.eta),
            ));
        }
        if self.num_arms < 2 {
            return Err(Error::config(
                "arms",
                format!("need at least 2 arms, got {}", self.num_arms),
            ));
        }
        if self.gamma == 0 {
            return Err(Error::config("gamma", "must be at least 1"));
        }
        if self.budget == 0 {
            return Err(Error::config("budget", "must be at least 1"));
        }
        if self.test_length == 0 {
            return Err(Error::config("test_length", "must be at least 1"));
        }
        self.mutation.validate()
    }
}
