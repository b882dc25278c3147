use std::collections::BTreeSet;

use mabfuzz_core::coverage::{
    compute_reward, CoverageLedger, CoverageSet, RewardParams, SaturationMonitor,
};
use proptest::prelude::*;

const UNIVERSE: usize = 40;
const ARMS: usize = 3;

#[derive(Debug, Clone)]
enum Event {
    Run(usize, BTreeSet<usize>),
    Clear(usize),
}

fn events() -> impl Strategy<Value = Vec<Event>> {
    let run = (0..ARMS, prop::collection::btree_set(0..UNIVERSE, 0..12))
        .prop_map(|(arm, pts)| Event::Run(arm, pts));
    let clear = (0..ARMS).prop_map(Event::Clear);
    prop::collection::vec(prop_oneof![4 => run, 1 => clear], 1..80)
}

proptest! {
    #[test]
    fn ledger_agrees_with_brute_force(events in events(), alpha in 0.0..=1.0f64) {
        let params = RewardParams::new(alpha).unwrap();
        let mut ledger = CoverageLedger::new(UNIVERSE, ARMS);
        // history since each arm's last clear, and the full history
        let mut since_clear: Vec<Vec<BTreeSet<usize>>> = vec![Vec::new(); ARMS];
        let mut all: Vec<BTreeSet<usize>> = Vec::new();
        for event in events {
            match event {
                Event::Clear(arm) => {
                    ledger.clear_arm(arm);
                    since_clear[arm].clear();
                }
                Event::Run(arm, pts) => {
                    let arm_seen: BTreeSet<usize> = since_clear[arm].iter().flatten().copied().collect();
                    let seen: BTreeSet<usize> = all.iter().flatten().copied().collect();
                    let local: BTreeSet<usize> = pts.difference(&arm_seen).copied().collect();
                    let global: BTreeSet<usize> = pts.difference(&seen).copied().collect();
                    let reward = alpha * local.len() as f64 + (1.0 - alpha) * global.len() as f64;

                    let covered = CoverageSet::from_points(UNIVERSE, pts.iter().copied());
                    let new = ledger.record_execution(arm, &covered).unwrap();
                    prop_assert_eq!(new.local.iter().collect::<BTreeSet<_>>(), local);
                    prop_assert_eq!(new.global.iter().collect::<BTreeSet<_>>(), global);
                    prop_assert_eq!(compute_reward(&new, &params).unwrap(), reward);
                    prop_assert!(new.global.is_subset(&new.local));

                    since_clear[arm].push(pts.clone());
                    all.push(pts);
                }
            }
            for arm in 0..ARMS {
                prop_assert!(ledger.arm(arm).is_subset(ledger.global()));
            }
        }
    }

    #[test]
    fn monitor_fires_only_on_the_gamma_th_zero(
        gamma in 1u32..6,
        picks in prop::collection::vec((0..ARMS, 0usize..3), 1..200),
    ) {
        let mut monitor = SaturationMonitor::new(gamma, ARMS).unwrap();
        let mut zeros = [0u32; ARMS];
        for (arm, new_local) in picks {
            let expected = if new_local > 0 {
                zeros[arm] = 0;
                false
            } else {
                zeros[arm] += 1;
                zeros[arm] == gamma
            };
            if expected {
                zeros[arm] = 0;
            }
            prop_assert_eq!(monitor.observe(arm, new_local), expected);
            prop_assert_eq!(monitor.streak(arm), zeros[arm]);
        }
    }
}

#[test]
fn interleaved_schedule_with_gamma_three() {
    let mut monitor = SaturationMonitor::new(3, 2).unwrap();
    let schedule = [
        (0, 0, false),
        (1, 0, false),
        (0, 0, false),
        (1, 4, false),
        (0, 0, true),
        (1, 0, false),
        (0, 0, false),
        (1, 0, false),
        (1, 0, true),
        (0, 1, false),
        (0, 0, false),
    ];
    for (i, (arm, count, fires)) in schedule.into_iter().enumerate() {
        assert_eq!(monitor.observe(arm, count), fires, "pick {i}");
    }
}
