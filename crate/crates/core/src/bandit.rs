//! Seed-scheduling bandits with arm resets.
//!
//! Three policies share one state type: ε-greedy and UCB keep an incremental
//! mean `Q(a)` and a pull count `N(a)`; EXP3 keeps exponential weights `W(a)`
//! mixed with a uniform floor. Every policy supports [`Bandit::reset_arm`],
//! which turns a depleted arm back into a fresh one without touching the
//! others.
//!
//! Random draws come from a single ChaCha stream owned by the bandit. The
//! consumption order is part of the determinism contract:
//!
//! * ε-greedy: one `f64` against ε, then one arm index if exploring, else one
//!   index among tied maximizers (only when there is more than one).
//! * UCB: one index among unpulled arms (only when more than one), otherwise
//!   one index among tied maximizers (only when more than one).
//! * EXP3: one `f64` inverted through the cumulative mixing distribution.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng_stream;

/// Weights are rescaled once the largest one passes this bound. The mixing
/// distribution and the reset rule are both scale-invariant.
const WEIGHT_RESCALE_LIMIT: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Algorithm {
    EpsilonGreedy { epsilon: f64 },
    Ucb,
    Exp3 { eta: f64 },
}

impl Algorithm {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Algorithm::EpsilonGreedy { epsilon } => {
                if !(0.0..=1.0).contains(&epsilon) {
                    return Err(Error::config(
                        "epsilon",
                        format!("{epsilon} is not in [0, 1]"),
                    ));
                }
            }
            Algorithm::Ucb => {}
            Algorithm::Exp3 { eta } => {
                if !(eta > 0.0 && eta <= 1.0) {
                    return Err(Error::config("eta", format!("{eta} is not in (0, 1]")));
                }
            }
        }
        Ok(())
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            Algorithm::EpsilonGreedy { .. } => "egreedy",
            Algorithm::Ucb => "ucb",
            Algorithm::Exp3 { .. } => "exp3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmStats {
    pub arm_id: usize,
    /// Mean raw reward since the arm's last reset.
    pub q_value: f64,
    pub pull_count: u64,
    /// EXP3 weight; stays 1 for the other policies.
    pub weight: f64,
    /// EXP3 selection probability at the most recent `select_arm`.
    pub last_prob: f64,
}

impl ArmStats {
    fn fresh(arm_id: usize, last_prob: f64) -> Self {
        ArmStats {
            arm_id,
            q_value: 0.0,
            pull_count: 0,
            weight: 1.0,
            last_prob,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bandit {
    algorithm: Algorithm,
    arms: Vec<ArmStats>,
    time_step: u64,
    total_points: usize,
    rng: ChaCha8Rng,
}

impl Bandit {
    /// Creates a bandit whose random stream is derived from `rng_seed`.
    pub fn new(
        algorithm: Algorithm,
        num_arms: usize,
        total_points: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        Self::with_rng(
            algorithm,
            num_arms,
            total_points,
            rng_stream(rng_seed, crate::STREAM_BANDIT),
        )
    }

    pub fn with_rng(
        algorithm: Algorithm,
        num_arms: usize,
        total_points: usize,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        algorithm.validate()?;
        if num_arms < 2 {
            return Err(Error::config(
                "arms",
                format!("need at least 2 arms, got {num_arms}"),
            ));
        }
        if total_points < 1 {
            return Err(Error::config("total_points", "coverage universe is empty"));
        }
        let uniform = 1.0 / num_arms as f64;
        Ok(Bandit {
            algorithm,
            arms: (0..num_arms).map(|a| ArmStats::fresh(a, uniform)).collect(),
            time_step: 0,
            total_points,
            rng,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn arms(&self) -> &[ArmStats] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn time_step(&self) -> u64 {
        self.time_step
    }

    pub fn total_points(&self) -> usize {
        self.total_points
    }

    /// The EXP3 mixing distribution for the current weights:
    /// `(1 − η)·W(a)/ΣW + η/|A|`. For the other policies this is uniform.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.arms.len() as f64;
        match self.algorithm {
            Algorithm::Exp3 { eta } => {
                let total: f64 = self.arms.iter().map(|a| a.weight).sum();
                self.arms
                    .iter()
                    .map(|a| (1.0 - eta) * a.weight / total + eta / n)
                    .collect()
            }
            _ => vec![1.0 / n; self.arms.len()],
        }
    }

    /// Starts a new cycle (`t ← t + 1`) and picks an arm.
    pub fn select_arm(&mut self) -> usize {
        self.time_step += 1;
        match self.algorithm {
            Algorithm::EpsilonGreedy { epsilon } => {
                let explore: f64 = self.rng.gen();
                if explore < epsilon {
                    self.rng.gen_range(0..self.arms.len())
                } else {
                    let q: Vec<f64> = self.arms.iter().map(|a| a.q_value).collect();
                    self.argmax(&q)
                }
            }
            Algorithm::Ucb => {
                let unpulled: Vec<usize> = self
                    .arms
                    .iter()
                    .filter(|a| a.pull_count == 0)
                    .map(|a| a.arm_id)
                    .collect();
                if !unpulled.is_empty() {
                    return self.pick_among(&unpulled);
                }
                let ln_t = (self.time_step as f64).ln();
                let index: Vec<f64> = self
                    .arms
                    .iter()
                    .map(|a| a.q_value + (2.0 * ln_t / a.pull_count as f64).sqrt())
                    .collect();
                self.argmax(&index)
            }
            Algorithm::Exp3 { .. } => {
                let probs = self.probabilities();
                for (arm, p) in self.arms.iter_mut().zip(&probs) {
                    arm.last_prob = *p;
                }
                let u: f64 = self.rng.gen();
                sample_index(&probs, u)
            }
        }
    }

    /// Feeds back the raw (unnormalized) reward of the arm just selected.
    pub fn update(&mut self, arm: usize, raw_reward: f64) -> Result<()> {
        if !(raw_reward >= 0.0 && raw_reward.is_finite()) {
            return Err(Error::InvalidReward(raw_reward));
        }
        let n_arms = self.arms.len() as f64;
        let total_points = self.total_points as f64;
        let stats = &mut self.arms[arm];
        stats.pull_count += 1;
        stats.q_value += (raw_reward - stats.q_value) / stats.pull_count as f64;

        if let Algorithm::Exp3 { eta } = self.algorithm {
            let normalized = raw_reward / total_points;
            let estimate = normalized / stats.last_prob;
            stats.weight *= (eta * estimate / n_arms).exp();
            self.rescale_weights();
        }
        Ok(())
    }

    /// Turns `arm` into a fresh arm. ε-greedy/UCB zero `Q` and `N`; EXP3
    /// additionally sets the weight to the mean weight of the other arms.
    pub fn reset_arm(&mut self, arm: usize) {
        if let Algorithm::Exp3 { .. } = self.algorithm {
            let others: f64 = self
                .arms
                .iter()
                .filter(|a| a.arm_id != arm)
                .map(|a| a.weight)
                .sum();
            self.arms[arm].weight = others / (self.arms.len() - 1) as f64;
        }
        let stats = &mut self.arms[arm];
        stats.q_value = 0.0;
        stats.pull_count = 0;
    }

    /// Overwrites the weight vector. Used to start EXP3 from a known state.
    pub fn set_weights(&mut self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.arms.len() {
            return Err(Error::config("weights", "length differs from arm count"));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::config(
                "weights",
                "weights must be positive and finite",
            ));
        }
        for (arm, w) in self.arms.iter_mut().zip(weights) {
            arm.weight = *w;
        }
        Ok(())
    }

    fn rescale_weights(&mut self) {
        let max = self.arms.iter().map(|a| a.weight).fold(0.0, f64::max);
        if max > WEIGHT_RESCALE_LIMIT {
            for arm in &mut self.arms {
                arm.weight /= max;
                // keep the floor strictly positive
                if arm.weight < f64::MIN_POSITIVE {
                    arm.weight = f64::MIN_POSITIVE;
                }
            }
        }
    }

    fn argmax(&mut self, values: &[f64]) -> usize {
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == best)
            .map(|(i, _)| i)
            .collect();
        self.pick_among(&ties)
    }

    fn pick_among(&mut self, candidates: &[usize]) -> usize {
        if candidates.len() == 1 {
            candidates[0]
        } else {
            candidates[self.rng.gen_range(0..candidates.len())]
        }
    }
}

/// Inverts a cumulative distribution at `u ∈ [0, 1)`.
fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left the tail short of 1
    probs.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bandit(algorithm: Algorithm, arms: usize) -> Bandit {
        Bandit::new(algorithm, arms, 100, 7).unwrap()
    }

    #[test]
    fn exp3_init_is_uniform() {
        let b = bandit(Algorithm::Exp3 { eta: 0.1 }, 10);
        assert!(b.arms().iter().all(|a| a.weight == 1.0));
        for p in b.probabilities() {
            assert!((p - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn ucb_init_is_zeroed() {
        let b = bandit(Algorithm::Ucb, 10);
        assert!(b
            .arms()
            .iter()
            .all(|a| a.q_value == 0.0 && a.pull_count == 0));
        assert_eq!(b.time_step(), 0);
    }

    #[test]
    fn rejects_bad_configuration() {
        let err = Bandit::new(Algorithm::EpsilonGreedy { epsilon: 1.5 }, 10, 100, 0).unwrap_err();
        assert!(matches!(err, Error::Config { key: "epsilon", .. }));
        assert!(Bandit::new(Algorithm::Ucb, 1, 100, 0).is_err());
        assert!(Bandit::new(Algorithm::Ucb, 2, 0, 0).is_err());
        assert!(Bandit::new(Algorithm::Exp3 { eta: 0.0 }, 2, 10, 0).is_err());
        assert!(Bandit::new(Algorithm::Exp3 { eta: 1.0 }, 2, 10, 0).is_ok());
    }

    #[test]
    fn pure_greedy_picks_argmax() {
        let mut b = bandit(Algorithm::EpsilonGreedy { epsilon: 0.0 }, 3);
        for (arm, r) in [(0, 0.2), (1, 0.7), (2, 0.1)] {
            b.update(arm, r).unwrap();
        }
        for _ in 0..50 {
            assert_eq!(b.select_arm(), 1);
        }
    }

    #[test]
    fn ucb_prefers_unpulled_arms() {
        let mut b = bandit(Algorithm::Ucb, 4);
        b.update(0, 10.0).unwrap();
        b.update(2, 10.0).unwrap();
        for _ in 0..20 {
            let mut probe = b.clone();
            let arm = probe.select_arm();
            assert!(arm == 1 || arm == 3);
            b.select_arm();
        }
    }

    #[test]
    fn greedy_update_is_incremental_mean() {
        let mut b = bandit(Algorithm::EpsilonGreedy { epsilon: 0.1 }, 3);
        b.update(0, 1.25).unwrap();
        assert_eq!(b.arms()[0].q_value, 1.25);
        assert_eq!(b.arms()[0].pull_count, 1);

        let mut b = bandit(Algorithm::EpsilonGreedy { epsilon: 0.1 }, 3);
        b.update(0, 0.5).unwrap();
        b.update(0, 1.0).unwrap();
        assert_eq!(b.arms()[0].pull_count, 2);
        assert_eq!(b.arms()[0].q_value, 0.75);
    }

    #[test]
    fn exp3_weight_update() {
        // |C| = 100, raw 5 -> normalized 0.05; P = 0.1 -> x = 0.5; η·x/|A| = 0.005
        let mut b = bandit(Algorithm::Exp3 { eta: 0.1 }, 10);
        let arm = b.select_arm();
        assert!((b.arms()[arm].last_prob - 0.1).abs() < 1e-15);
        b.update(arm, 5.0).unwrap();
        assert!((b.arms()[arm].weight - 1.005_012_520_859_401).abs() < 1e-12);
        for other in b.arms().iter().filter(|a| a.arm_id != arm) {
            assert_eq!(other.weight, 1.0);
        }
    }

    #[test]
    fn rejects_negative_reward() {
        let mut b = bandit(Algorithm::Ucb, 3);
        assert_eq!(b.update(0, -1.0), Err(Error::InvalidReward(-1.0)));
        assert!(b.update(0, f64::NAN).is_err());
        assert_eq!(b.arms()[0].pull_count, 0);
    }

    #[test]
    fn greedy_reset_zeroes_and_is_idempotent() {
        let mut b = bandit(Algorithm::EpsilonGreedy { epsilon: 0.1 }, 3);
        for _ in 0..7 {
            b.update(1, 0.9).unwrap();
        }
        assert_eq!(b.arms()[1].pull_count, 7);
        b.reset_arm(1);
        assert_eq!((b.arms()[1].q_value, b.arms()[1].pull_count), (0.0, 0));
        b.reset_arm(1);
        assert_eq!((b.arms()[1].q_value, b.arms()[1].pull_count), (0.0, 0));
    }

    #[test]
    fn exp3_reset_takes_mean_of_other_weights() {
        let mut b = bandit(Algorithm::Exp3 { eta: 0.1 }, 4);
        b.set_weights(&[2.0, 4.0, 6.0, 8.0]).unwrap();
        let t = b.time_step();
        b.reset_arm(0);
        let w: Vec<f64> = b.arms().iter().map(|a| a.weight).collect();
        assert_eq!(w, vec![6.0, 4.0, 6.0, 8.0]);
        assert_eq!(b.time_step(), t);
    }

    #[test]
    fn huge_weights_are_rescaled() {
        let mut b = Bandit::new(Algorithm::Exp3 { eta: 1.0 }, 2, 1, 3).unwrap();
        for _ in 0..5000 {
            let arm = b.select_arm();
            b.update(arm, if arm == 0 { 1.0 } else { 0.0 }).unwrap();
        }
        for a in b.arms() {
            assert!(a.weight > 0.0 && a.weight.is_finite());
        }
        let p = b.probabilities();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sample_index_handles_short_tail() {
        assert_eq!(
            sample_index(&[0.5, 0.5 - 1e-17], 0.999_999_999_999_999_9),
            1
        );
        assert_eq!(sample_index(&[0.25, 0.75], 0.0), 0);
        assert_eq!(sample_index(&[0.25, 0.75], 0.25), 1);
    }
}
