use std::collections::{BTreeMap, HashMap};

use mabfuzz_core::coverage::CoverageSet;
use mabfuzz_core::dut::{BugConfig, BugId};
use mabfuzz_core::fuzzer::{
    run_campaign, run_campaign_with, speedup, BaselineCampaign, BugSpeedup, CampaignConfig,
    CampaignReport, DutTarget, Execution, IterationRecord, MabCampaign, ResetReason, Strategy,
    Target,
};
use mabfuzz_core::testgen::{MutationConfig, Test, TestGen};
use mabfuzz_core::{rng_stream, STREAM_TESTGEN};

/// Wraps the toy core and remembers every test it was given.
struct Recorder {
    inner: DutTarget,
    seen: Vec<Test>,
}

impl Recorder {
    fn new(bugs: BugConfig) -> Self {
        Recorder {
            inner: DutTarget::new(bugs),
            seen: Vec::new(),
        }
    }
}

impl Target for Recorder {
    fn universe_size(&self) -> usize {
        self.inner.universe_size()
    }

    fn execute(&mut self, test: &Test) -> Execution {
        self.seen.push(test.clone());
        self.inner.execute(test)
    }
}

/// Returns preprogrammed coverage for the n-th execution on each arm.
struct Scripted {
    universe: usize,
    script: Vec<Vec<usize>>,
    calls: HashMap<usize, usize>,
}

impl Target for Scripted {
    fn universe_size(&self) -> usize {
        self.universe
    }

    fn execute(&mut self, test: &Test) -> Execution {
        let k = self.calls.entry(test.arm_id).or_default();
        let points = self.script.get(*k).cloned().unwrap_or_default();
        *k += 1;
        Execution {
            coverage: CoverageSet::from_points(self.universe, points),
            mismatches: Vec::new(),
        }
    }
}

fn small(strategy: Strategy, budget: u64, seed: u64) -> CampaignConfig {
    CampaignConfig {
        strategy,
        budget,
        rng_seed: seed,
        ..CampaignConfig::default()
    }
}

#[test]
fn greedy_hand_simulation() {
    let config = CampaignConfig {
        strategy: Strategy::Egreedy,
        num_arms: 2,
        epsilon: 0.0,
        alpha: 0.5,
        gamma: 2,
        budget: 5,
        ..CampaignConfig::default()
    };
    let target = Scripted {
        universe: 10,
        script: vec![
            vec![0, 1, 2, 3],
            vec![0, 1],
            vec![0, 1, 2, 3, 4],
            vec![],
            vec![],
        ],
        calls: HashMap::new(),
    };
    let mut campaign = MabCampaign::new(config, target).unwrap();

    // step 1: tie between two fresh arms, whichever wins is `a`
    let a = campaign.step().unwrap().arm_id;
    // 4 new local and global points: 0.5·4 + 0.5·4
    let expected_q = [4.0, 2.0, 5.0 / 3.0, 1.25];
    let expected_reward = [4.0, 0.0, 1.0, 0.0, 0.0];
    assert_eq!(campaign.bandit().arms()[a].q_value, expected_q[0]);
    for q in &expected_q[1..] {
        assert_eq!(campaign.step().unwrap().arm_id, a);
        assert!((campaign.bandit().arms()[a].q_value - q).abs() < 1e-12);
    }
    // step 5: second zero in a row saturates the arm after the update
    let last = campaign.step().unwrap().clone();
    assert_eq!(last.arm_id, a);
    assert_eq!(last.resets, vec![ResetReason::Sat]);

    let records = campaign.records();
    let rewards: Vec<f64> = records.iter().map(|r| r.reward).collect();
    assert_eq!(rewards, expected_reward);
    let ids: Vec<u64> = records.iter().map(|r| r.test_id).collect();
    // seed 0, mutants 1..=5 from step 1, 6..=10 from step 3
    assert_eq!(ids, vec![0, 1, 2, 3, 4]);
    assert_eq!(
        records.iter().map(|r| r.cum_cov).collect::<Vec<_>>(),
        vec![4, 4, 5, 5, 5]
    );

    let arm = &campaign.bandit().arms()[a];
    assert_eq!((arm.q_value, arm.pull_count), (0.0, 0));
    assert_eq!(campaign.bandit().time_step(), 5);
    assert!(campaign.ledger().arm(a).is_empty());
    assert_eq!(campaign.ledger().global().len(), 5);
    let slot = &campaign.arms()[a];
    assert_eq!(slot.pool.len(), 1);
    assert_eq!(slot.seed.as_ref().unwrap().id, 11);
    assert!(campaign.arms()[1 - a].seed.is_none());
}

#[test]
fn budget_is_spent_exactly() {
    for strategy in Strategy::ALL {
        let report = run_campaign(&small(strategy, 300, 4)).unwrap();
        assert_eq!(report.tests_run(), 300, "{strategy}");
        let ts: Vec<u64> = report.records.iter().map(|r| r.t).collect();
        assert_eq!(ts, (1..=300).collect::<Vec<_>>());
    }
}

#[test]
fn one_bandit_cycle_per_test() {
    for strategy in Strategy::BANDITS {
        let config = small(strategy, 400, 8);
        let mut campaign = MabCampaign::new(config.clone(), DutTarget::new(config.bugs)).unwrap();
        for t in 1..=400u64 {
            campaign.step().unwrap();
            assert_eq!(campaign.bandit().time_step(), t);
            let pulls: u64 = campaign.bandit().arms().iter().map(|a| a.pull_count).sum();
            assert!(pulls <= t);
        }
    }
}

#[test]
fn baseline_runs_initial_seeds_in_order() {
    let config = small(Strategy::Fifo, 3, 6);
    let mut recorder = Recorder::new(config.bugs);
    run_campaign_with(&config, &mut recorder).unwrap();

    let mut gen = TestGen::new(rng_stream(6, STREAM_TESTGEN), MutationConfig::default()).unwrap();
    let expected: Vec<Vec<u32>> = (0..3).map(|_| gen.gen_seed(0, 20).words).collect();
    let seen: Vec<Vec<u32>> = recorder.seen.iter().map(|t| t.words.clone()).collect();
    assert_eq!(seen, expected);
}

#[test]
fn baseline_and_bandits_share_the_first_test() {
    let mut first = Vec::new();
    for strategy in Strategy::ALL {
        let config = small(strategy, 1, 10);
        let mut recorder = Recorder::new(config.bugs);
        run_campaign_with(&config, &mut recorder).unwrap();
        first.push(recorder.seen[0].words.clone());
    }
    assert!(first.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn baseline_never_resets() {
    let report = run_campaign(&small(Strategy::Fifo, 2_000, 1)).unwrap();
    assert_eq!(report.resets, 0);
    assert!(report
        .records
        .iter()
        .all(|r| r.resets.is_empty() && r.arm_id == 0));
}

#[test]
fn baseline_without_reseeding_stops_when_dry() {
    let config = CampaignConfig {
        reseed_on_empty: false,
        ..small(Strategy::Fifo, 50_000, 2)
    };
    let mut campaign = BaselineCampaign::new(config.clone(), DutTarget::new(config.bugs)).unwrap();
    let mut steps = 0;
    while campaign.step().unwrap() {
        steps += 1;
    }
    assert!(steps < 50_000);
    assert!(campaign.pool().is_empty());
    assert_eq!(campaign.tests_run(), steps);
}

#[test]
fn mutants_stay_with_their_arm() {
    for strategy in Strategy::BANDITS {
        let config = small(strategy, 1_500, 3);
        let mut recorder = Recorder::new(config.bugs);
        let report = run_campaign_with(&config, &mut recorder).unwrap();
        let mut owner: HashMap<u64, usize> = HashMap::new();
        for (test, record) in recorder.seen.iter().zip(&report.records) {
            assert_eq!(test.arm_id, record.arm_id);
            assert_eq!(test.id, record.test_id);
            if let Some(parent) = test.parent_id {
                assert_eq!(owner[&parent], test.arm_id, "{strategy}");
            }
            owner.insert(test.id, test.arm_id);
        }
    }
}

/// Replays the saturation streaks from the records and checks that every
/// reset has a cause and every cause leads to a reset.
fn check_reset_causes(report: &CampaignReport, gamma: u32, arms: usize) {
    let mut streak = vec![0u32; arms];
    for r in &report.records {
        let mut expected = Vec::new();
        if r.resets.first() == Some(&ResetReason::Empty) {
            expected.push(ResetReason::Empty);
            streak[r.arm_id] = 0;
        }
        if r.new_local > 0 {
            streak[r.arm_id] = 0;
        } else {
            streak[r.arm_id] += 1;
        }
        if streak[r.arm_id] == gamma {
            expected.push(ResetReason::Sat);
            streak[r.arm_id] = 0;
        }
        assert_eq!(r.resets, expected, "t = {}", r.t);
    }
    let total: usize = report.records.iter().map(|r| r.resets.len()).sum();
    assert_eq!(total as u64, report.resets);
}

#[test]
fn resets_only_on_saturation_or_empty_pool() {
    for strategy in Strategy::BANDITS {
        let config = small(strategy, 3_000, 5);
        let report = run_campaign(&config).unwrap();
        check_reset_causes(&report, config.gamma, config.num_arms);
    }
}

#[test]
fn campaigns_are_deterministic() {
    for strategy in Strategy::ALL {
        let a = run_campaign(&small(strategy, 1_000, 77)).unwrap();
        let b = run_campaign(&small(strategy, 1_000, 77)).unwrap();
        assert_eq!(a, b);
        let c = run_campaign(&small(strategy, 1_000, 78)).unwrap();
        assert_ne!(a.records, c.records);
    }
}

#[test]
fn disabled_bugs_are_never_detected() {
    let config = CampaignConfig {
        bugs: BugConfig::none(),
        ..small(Strategy::Ucb, 2_000, 9)
    };
    assert!(run_campaign(&config).unwrap().detections.is_empty());

    let config = CampaignConfig {
        bugs: BugConfig::only(BugId::B7),
        ..small(Strategy::Exp3, 2_000, 9)
    };
    let report = run_campaign(&config).unwrap();
    assert!(report.detections.keys().all(|b| *b == BugId::B7));
    assert!(report.detection_index(BugId::B7).is_some());
}

#[test]
fn detections_carry_the_exposing_test() {
    let report = run_campaign(&small(Strategy::Egreedy, 2_000, 12)).unwrap();
    for (bug, detection) in &report.detections {
        let record = &report.records[detection.test_index as usize - 1];
        assert_eq!(record.test_id, detection.test.id);
        assert_eq!(detection.mismatches[0].bug, Some(*bug));
        assert!(record.bugs_detected >= 1);
    }
}

fn report_with(detections: &[(BugId, u64)], curve: &[usize]) -> CampaignReport {
    let records: Vec<IterationRecord> = curve
        .iter()
        .enumerate()
        .map(|(i, cov)| IterationRecord {
            t: i as u64 + 1,
            arm_id: 0,
            test_id: i as u64,
            reward: 0.0,
            new_local: 0,
            new_global: 0,
            cum_cov: *cov,
            resets: Vec::new(),
            bugs_detected: 0,
        })
        .collect();
    let test = Test {
        id: 0,
        arm_id: 0,
        parent_id: None,
        words: vec![0],
    };
    CampaignReport {
        strategy: Strategy::Fifo,
        rng_seed: 0,
        bugs: BugConfig::all(),
        budget: 1000,
        universe_size: 100,
        records,
        detections: detections
            .iter()
            .map(|(b, i)| {
                (
                    *b,
                    mabfuzz_core::fuzzer::Detection {
                        test_index: *i,
                        test: test.clone(),
                        mismatches: Vec::new(),
                    },
                )
            })
            .collect::<BTreeMap<_, _>>(),
        resets: 0,
    }
}

#[test]
fn speedup_of_identical_reports_is_one() {
    let r = report_with(&[(BugId::B1, 600), (BugId::B7, 3)], &[1, 5, 5, 9]);
    let s = speedup(&r, &r).unwrap();
    assert_eq!(s.per_bug[&BugId::B1].ratio(), Some(1.0));
    assert_eq!(s.per_bug[&BugId::B7].ratio(), Some(1.0));
    assert_eq!(s.per_bug[&BugId::B2], BugSpeedup::Neither);
    assert_eq!(s.coverage, Some(1.0));
    assert_eq!(s.coverage_increment, 0.0);
}

#[test]
fn speedup_ratio_and_missing_detections() {
    let base = report_with(&[(BugId::B1, 600), (BugId::B3, 10)], &[2, 4, 6, 8]);
    let treatment = report_with(&[(BugId::B1, 46)], &[4, 8, 9, 9]);
    let s = speedup(&base, &treatment).unwrap();
    let ratio = s.per_bug[&BugId::B1].ratio().unwrap();
    assert_eq!(format!("{ratio:.2}"), "13.04");
    assert_eq!(s.per_bug[&BugId::B3], BugSpeedup::BaseOnly { base: 10 });
    assert_eq!(s.per_bug[&BugId::B3].ratio(), None);
    // common level 8: baseline needs 4 tests, treatment 2
    assert_eq!(s.coverage, Some(2.0));
    assert!((s.coverage_increment - 1.0).abs() < 1e-12);
}

#[test]
fn speedup_rejects_different_setups() {
    let base = report_with(&[], &[1]);
    let mut other = base.clone();
    other.budget = 5;
    assert!(speedup(&base, &other).is_err());
    let mut other = base.clone();
    other.bugs = BugConfig::only(BugId::B1);
    assert!(speedup(&base, &other).is_err());
}
