//! Coverage bookkeeping: fixed-universe point sets, the global/per-arm
//! ledger, the local/global reward, and the saturation monitor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of coverage point ids drawn from `[0, universe_size)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoverageSet {
    universe_size: usize,
    words: Vec<u64>,
}

impl CoverageSet {
    pub fn new(universe_size: usize) -> Self {
        CoverageSet {
            universe_size,
            words: vec![0; universe_size.div_ceil(64)],
        }
    }

    pub fn from_points(universe_size: usize, points: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::new(universe_size);
        for p in points {
            set.insert(p);
        }
        set
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    /// Inserts `point`; returns true if it was absent.
    ///
    /// Panics when `point` is outside the universe.
    pub fn insert(&mut self, point: usize) -> bool {
        assert!(
            point < self.universe_size,
            "coverage point {point} outside universe of {}",
            self.universe_size
        );
        let (w, b) = (point / 64, point % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn contains(&self, point: usize) -> bool {
        point < self.universe_size && self.words[point / 64] & (1 << (point % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            (0..64)
                .filter(move |b| word & (1 << b) != 0)
                .map(move |b| i * 64 + b)
        })
    }

    /// `self ∖ other`
    pub fn difference(&self, other: &CoverageSet) -> CoverageSet {
        debug_assert_eq!(self.universe_size, other.universe_size);
        CoverageSet {
            universe_size: self.universe_size,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn union_with(&mut self, other: &CoverageSet) {
        debug_assert_eq!(self.universe_size, other.universe_size);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &CoverageSet) -> bool {
        self.universe_size == other.universe_size
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }
}

/// New coverage produced by one execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewCoverage {
    /// Points the arm had not covered before.
    pub local: CoverageSet,
    /// Points no arm had covered before; always a subset of `local`.
    pub global: CoverageSet,
}

/// Global coverage plus one set per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageLedger {
    global: CoverageSet,
    per_arm: Vec<CoverageSet>,
}

impl CoverageLedger {
    pub fn new(universe_size: usize, num_arms: usize) -> Self {
        CoverageLedger {
            global: CoverageSet::new(universe_size),
            per_arm: vec![CoverageSet::new(universe_size); num_arms],
        }
    }

    pub fn universe_size(&self) -> usize {
        self.global.universe_size()
    }

    pub fn global(&self) -> &CoverageSet {
        &self.global
    }

    pub fn arm(&self, arm: usize) -> &CoverageSet {
        &self.per_arm[arm]
    }

    /// Splits `covered` into locally- and globally-new points for `arm`, then
    /// merges it into the arm's set and the global set.
    pub fn record_execution(&mut self, arm: usize, covered: &CoverageSet) -> Result<NewCoverage> {
        if covered.universe_size() != self.universe_size() {
            return Err(Error::UniverseMismatch {
                expected: self.universe_size(),
                found: covered.universe_size(),
            });
        }
        let local = covered.difference(&self.per_arm[arm]);
        let global = local.difference(&self.global);
        self.per_arm[arm].union_with(covered);
        self.global.union_with(covered);
        Ok(NewCoverage { local, global })
    }

    /// Forgets what `arm` has covered; global coverage stays.
    pub fn clear_arm(&mut self, arm: usize) {
        self.per_arm[arm].clear();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub alpha: f64,
    /// Count locally-new points that are also globally new only once, in the
    /// global term: `α·|L∖G| + (1−α)·|G|`.
    pub disjoint: bool,
}

impl RewardParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::config("alpha", format!("{alpha} is not in [0, 1]")));
        }
        Ok(RewardParams {
            alpha,
            disjoint: false,
        })
    }
}

/// `α·|L| + (1−α)·|G|` (or the disjoint variant).
pub fn compute_reward(new: &NewCoverage, params: &RewardParams) -> Result<f64> {
    if !new.global.is_subset(&new.local) {
        return Err(Error::InconsistentCoverage);
    }
    let local = new.local.len() as f64;
    let global = new.global.len() as f64;
    let local_term = if params.disjoint {
        local - global
    } else {
        local
    };
    Ok(params.alpha * local_term + (1.0 - params.alpha) * global)
}

/// Flags an arm once it has gone `gamma` consecutive picks without new local
/// coverage.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationMonitor {
    gamma: u32,
    zero_streak: Vec<u32>,
}

impl SaturationMonitor {
    pub fn new(gamma: u32, num_arms: usize) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::config("gamma", "must be at least 1"));
        }
        Ok(SaturationMonitor {
            gamma,
            zero_streak: vec![0; num_arms],
        })
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn streak(&self, arm: usize) -> u32 {
        self.zero_streak[arm]
    }

    /// Records one pick of `arm`; returns true when the arm is depleted.
    pub fn observe(&mut self, arm: usize, new_local_count: usize) -> bool {
        let streak = &mut self.zero_streak[arm];
        if new_local_count > 0 {
            *streak = 0;
            return false;
        }
        *streak += 1;
        if *streak >= self.gamma {
            *streak = 0;
            true
        } else {
            false
        }
    }

    pub fn clear_arm(&mut self, arm: usize) {
        self.zero_streak[arm] = 0;
    }
}
