//! Campaign loops: bandit-scheduled arms with resets, and the FIFO
//! baseline. Both drive the same [`Engine`], so they differ only in which
//! test runs next.

mod config;
mod report;
mod speedup;
mod target;

use std::collections::BTreeMap;

pub use config::{CampaignConfig, InterestingRule, Strategy};
pub use report::{CampaignReport, Detection, IterationRecord, ResetReason};
pub use speedup::{speedup, BugSpeedup, Speedup};
pub use target::{DutTarget, Execution, Target};

use crate::bandit::Bandit;
use crate::coverage::{
    compute_reward, CoverageLedger, NewCoverage, RewardParams, SaturationMonitor,
};
use crate::dut::BugId;
use crate::error::Result;
use crate::testgen::{Test, TestGen, TestPool};
use crate::{rng_stream, STREAM_TESTGEN};

/// Runs `config` against the toy core with `config.bugs` injected.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    run_campaign_with(config, DutTarget::new(config.bugs))
}

/// Runs `config` against any target, dispatching on the strategy.
pub fn run_campaign_with<T: Target>(config: &CampaignConfig, target: T) -> Result<CampaignReport> {
    match config.strategy {
        Strategy::Fifo => run_baseline_with(config, target),
        _ => {
            let mut campaign = MabCampaign::new(config.clone(), target)?;
            while campaign.tests_run() < config.budget {
                campaign.step()?;
            }
            Ok(campaign.finish())
        }
    }
}

/// Runs the FIFO baseline against the toy core.
pub fn run_baseline(config: &CampaignConfig) -> Result<CampaignReport> {
    run_baseline_with(config, DutTarget::new(config.bugs))
}

pub fn run_baseline_with<T: Target>(config: &CampaignConfig, target: T) -> Result<CampaignReport> {
    let mut campaign = BaselineCampaign::new(config.clone(), target)?;
    while campaign.tests_run() < config.budget {
        if !campaign.step()? {
            break;
        }
    }
    Ok(campaign.finish())
}

/// Result of simulating one test and accounting for it.
#[derive(Debug, Clone)]
pub struct Executed {
    pub new: NewCoverage,
    pub reward: f64,
}

/// Test execution and bookkeeping shared by every scheduler.
#[derive(Debug)]
struct Engine<T> {
    config: CampaignConfig,
    target: T,
    testgen: TestGen,
    ledger: CoverageLedger,
    reward: RewardParams,
    records: Vec<IterationRecord>,
    detections: BTreeMap<BugId, Detection>,
    resets: u64,
}

impl<T: Target> Engine<T> {
    fn new(config: CampaignConfig, target: T, ledger_arms: usize) -> Result<Self> {
        config.validate()?;
        let testgen = TestGen::new(
            rng_stream(config.rng_seed, STREAM_TESTGEN),
            config.mutation.clone(),
        )?;
        let ledger = CoverageLedger::new(target.universe_size(), ledger_arms);
        Ok(Engine {
            reward: config.reward_params()?,
            config,
            target,
            testgen,
            ledger,
            records: Vec::new(),
            detections: BTreeMap::new(),
            resets: 0,
        })
    }

    fn t(&self) -> u64 {
        self.records.len() as u64
    }

    fn execute(&mut self, ledger_arm: usize, test: &Test) -> Result<Executed> {
        let execution = self.target.execute(test);
        let new = self
            .ledger
            .record_execution(ledger_arm, &execution.coverage)?;
        let reward = compute_reward(&new, &self.reward)?;

        // the first mismatch of a run decides which bug gets the credit
        let t = self.t() + 1;
        if let Some(bug) = execution.mismatches.first().and_then(|m| m.bug) {
            self.detections.entry(bug).or_insert_with(|| Detection {
                test_index: t,
                test: test.clone(),
                mismatches: execution.mismatches.clone(),
            });
        }
        Ok(Executed { new, reward })
    }

    fn is_interesting(&self, rule: InterestingRule, new: &NewCoverage) -> bool {
        match rule {
            InterestingRule::LocalNew => !new.local.is_empty(),
            InterestingRule::GlobalNew => !new.global.is_empty(),
        }
    }

    fn record(
        &mut self,
        arm_id: usize,
        test: &Test,
        executed: &Executed,
        resets: Vec<ResetReason>,
    ) {
        self.resets += resets.len() as u64;
        self.records.push(IterationRecord {
            t: self.t() + 1,
            arm_id,
            test_id: test.id,
            reward: executed.reward,
            new_local: executed.new.local.len(),
            new_global: executed.new.global.len(),
            cum_cov: self.ledger.global().len(),
            resets,
            bugs_detected: self.detections.len(),
        });
    }

    fn finish(self) -> CampaignReport {
        CampaignReport {
            strategy: self.config.strategy,
            rng_seed: self.config.rng_seed,
            bugs: self.config.bugs,
            budget: self.config.budget,
            universe_size: self.ledger.universe_size(),
            records: self.records,
            detections: self.detections,
            resets: self.resets,
        }
    }
}

/// One bandit arm: a seed and the FIFO pool of its descendants.
#[derive(Debug, Clone, Default)]
pub struct Arm {
    /// Materialized on first selection.
    pub seed: Option<Test>,
    pub pool: TestPool,
}

/// Bandit-scheduled campaign with saturation and pool-empty resets.
#[derive(Debug)]
pub struct MabCampaign<T> {
    engine: Engine<T>,
    bandit: Bandit,
    monitor: SaturationMonitor,
    arms: Vec<Arm>,
}

impl<T: Target> MabCampaign<T> {
    pub fn new(config: CampaignConfig, target: T) -> Result<Self> {
        let algorithm = config
            .algorithm()
            .ok_or_else(|| crate::Error::config("algorithm", "fifo is not a bandit strategy"))?;
        let bandit = Bandit::new(
            algorithm,
            config.num_arms,
            target.universe_size(),
            config.rng_seed,
        )?;
        let monitor = SaturationMonitor::new(config.gamma, config.num_arms)?;
        let arms = vec![Arm::default(); config.num_arms];
        let engine = Engine::new(config, target, arms.len())?;
        Ok(MabCampaign {
            engine,
            bandit,
            monitor,
            arms,
        })
    }

    pub fn config(&self) -> &CampaignConfig {
        &self.engine.config
    }

    pub fn tests_run(&self) -> u64 {
        self.engine.t()
    }

    pub fn bandit(&self) -> &Bandit {
        &self.bandit
    }

    pub fn ledger(&self) -> &CoverageLedger {
        &self.engine.ledger
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.engine.records
    }

    pub fn target(&self) -> &T {
        &self.engine.target
    }

    /// One full iteration with the bandit choosing the arm.
    pub fn step(&mut self) -> Result<&IterationRecord> {
        let arm = self.bandit.select_arm();
        self.pull(arm)
    }

    /// One iteration on a caller-chosen arm, still counted as a bandit
    /// cycle. Used to replay a known history before handing control to the
    /// bandit.
    pub fn force_pull(&mut self, arm: usize) -> Result<&IterationRecord> {
        self.bandit.select_arm();
        self.pull(arm)
    }

    fn pull(&mut self, arm: usize) -> Result<&IterationRecord> {
        let mut resets = Vec::new();
        if self.arms[arm].seed.is_none() {
            self.plant_seed(arm);
        }
        let test = match self.arms[arm].pool.pop() {
            Some(test) => test,
            None => {
                self.reset(arm);
                resets.push(ResetReason::Empty);
                self.arms[arm]
                    .pool
                    .pop()
                    .expect("fresh seed was just planted")
            }
        };

        let executed = self.engine.execute(arm, &test)?;
        self.bandit.update(arm, executed.reward)?;

        if self
            .engine
            .is_interesting(self.engine.config.interesting, &executed.new)
        {
            for mutant in self.engine.testgen.mutate(&test) {
                self.arms[arm].pool.push(mutant);
            }
        }

        let depleted = self.monitor.observe(arm, executed.new.local.len());
        if depleted && self.engine.config.saturation_resets {
            self.reset(arm);
            resets.push(ResetReason::Sat);
        }

        self.engine.record(arm, &test, &executed, resets);
        Ok(self.engine.records.last().expect("just recorded"))
    }

    fn plant_seed(&mut self, arm: usize) {
        let seed = self
            .engine
            .testgen
            .gen_seed(arm, self.engine.config.test_length);
        let slot = &mut self.arms[arm];
        slot.pool.clear();
        slot.pool.push(seed.clone());
        slot.seed = Some(seed);
    }

    /// Replaces the arm with a fresh one: new seed, pool holding only that
    /// seed, per-arm coverage and streak cleared, bandit statistics reset.
    fn reset(&mut self, arm: usize) {
        self.plant_seed(arm);
        self.engine.ledger.clear_arm(arm);
        self.monitor.clear_arm(arm);
        self.bandit.reset_arm(arm);
    }

    pub fn finish(self) -> CampaignReport {
        self.engine.finish()
    }
}

/// Single global FIFO queue: run tests in arrival order, mutate the ones
/// that reach globally new coverage.
#[derive(Debug)]
pub struct BaselineCampaign<T> {
    engine: Engine<T>,
    pool: TestPool,
}

impl<T: Target> BaselineCampaign<T> {
    pub fn new(config: CampaignConfig, target: T) -> Result<Self> {
        let mut engine = Engine::new(config, target, 1)?;
        let mut pool = TestPool::new();
        for _ in 0..engine.config.num_arms {
            pool.push(engine.testgen.gen_seed(0, engine.config.test_length));
        }
        Ok(BaselineCampaign { engine, pool })
    }

    pub fn tests_run(&self) -> u64 {
        self.engine.t()
    }

    pub fn pool(&self) -> &TestPool {
        &self.pool
    }

    pub fn ledger(&self) -> &CoverageLedger {
        &self.engine.ledger
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.engine.records
    }

    /// Runs one test; returns false when the queue is dry and reseeding is
    /// off.
    pub fn step(&mut self) -> Result<bool> {
        let test = match self.pool.pop() {
            Some(test) => test,
            None if self.engine.config.reseed_on_empty => self
                .engine
                .testgen
                .gen_seed(0, self.engine.config.test_length),
            None => return Ok(false),
        };
        let executed = self.engine.execute(0, &test)?;
        if self
            .engine
            .is_interesting(InterestingRule::GlobalNew, &executed.new)
        {
            for mutant in self.engine.testgen.mutate(&test) {
                self.pool.push(mutant);
            }
        }
        self.engine.record(0, &test, &executed, Vec::new());
        Ok(true)
    }

    pub fn finish(self) -> CampaignReport {
        self.engine.finish()
    }
}
