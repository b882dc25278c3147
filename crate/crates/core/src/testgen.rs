//! Tests, random seed generation, mutation, and per-arm FIFO pools.

use std::collections::VecDeque;
use std::io::{self, Read, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dut::isa::{encode_fields, Field, Opcode};
use crate::error::{Error, Result};

pub const DEFAULT_TEST_LENGTH: usize = 20;
pub const DEFAULT_MUTANTS: usize = 5;
/// Probability that a generated word is a well-formed legal instruction.
pub const VALID_WORD_BIAS: f64 = 0.9;

pub type TestId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Test {
    pub id: TestId,
    pub arm_id: usize,
    pub parent_id: Option<TestId>,
    pub words: Vec<u32>,
}

impl Test {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Writes the words as little-endian `u32`s.
    pub fn write_binary<W: Write>(&self, mut out: W) -> io::Result<()> {
        for w in &self.words {
            out.write_all(&w.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_words<R: Read>(mut input: R) -> io::Result<Vec<u32>> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if bytes.len() % 4 != 0 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{} bytes is not a whole number of words", bytes.len()),
            ));
        }
        Ok(bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MutationOp {
    BitFlip,
    ByteFlip,
    ReplaceWord,
    FieldMutate,
}

impl MutationOp {
    pub const ALL: [MutationOp; 4] = [
        MutationOp::BitFlip,
        MutationOp::ByteFlip,
        MutationOp::ReplaceWord,
        MutationOp::FieldMutate,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationConfig {
    pub mutants_per_interesting: usize,
    /// Probabilities in the order of [`MutationOp::ALL`].
    pub operator_weights: [f64; 4],
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            mutants_per_interesting: DEFAULT_MUTANTS,
            operator_weights: [0.25; 4],
        }
    }
}

impl MutationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mutants_per_interesting == 0 {
            return Err(Error::config("mutants_per_interesting", "must be positive"));
        }
        let sum: f64 = self.operator_weights.iter().sum();
        if self.operator_weights.iter().any(|w| w.is_nan() || *w < 0.0) || (sum - 1.0).abs() > 1e-9
        {
            return Err(Error::config(
                "operator_weights",
                format!("{:?} is not a probability vector", self.operator_weights),
            ));
        }
        Ok(())
    }
}

/// One random word: a legal instruction with probability
/// [`VALID_WORD_BIAS`], otherwise 32 uniform bits.
pub fn random_word(rng: &mut ChaCha8Rng) -> u32 {
    if rng.gen_bool(VALID_WORD_BIAS) {
        let op = Opcode::ALL[rng.gen_range(0..Opcode::ALL.len())];
        encode_fields(op.bits(), rng.gen(), rng.gen(), rng.gen(), rng.gen())
    } else {
        rng.gen()
    }
}

pub fn random_words(rng: &mut ChaCha8Rng, length: usize) -> Vec<u32> {
    (0..length).map(|_| random_word(rng)).collect()
}

/// Applies `op` to one word of `words` in place.
pub fn apply_operator(op: MutationOp, words: &mut [u32], rng: &mut ChaCha8Rng) {
    let idx = rng.gen_range(0..words.len());
    let word = &mut words[idx];
    match op {
        MutationOp::BitFlip => *word ^= 1 << rng.gen_range(0..32),
        MutationOp::ByteFlip => *word ^= 0xFF << (8 * rng.gen_range(0..4)),
        MutationOp::ReplaceWord => *word = random_word(rng),
        MutationOp::FieldMutate => {
            let field = Field::ALL[rng.gen_range(0..Field::ALL.len())];
            // nonzero xor so the field always changes
            let delta = rng.gen_range(1..(1u32 << field.width()));
            *word ^= delta << field.shift();
        }
    }
}

/// Source of fresh seeds and mutants, with unique ids.
#[derive(Debug, Clone)]
pub struct TestGen {
    rng: ChaCha8Rng,
    next_id: TestId,
    config: MutationConfig,
    op_dist: WeightedIndex<f64>,
}

impl TestGen {
    pub fn new(rng: ChaCha8Rng, config: MutationConfig) -> Result<Self> {
        config.validate()?;
        let op_dist = WeightedIndex::new(config.operator_weights)
            .map_err(|e| Error::config("operator_weights", e.to_string()))?;
        Ok(TestGen {
            rng,
            next_id: 0,
            config,
            op_dist,
        })
    }

    pub fn config(&self) -> &MutationConfig {
        &self.config
    }

    fn fresh_id(&mut self) -> TestId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn gen_seed(&mut self, arm_id: usize, length: usize) -> Test {
        assert!(length >= 1, "tests hold at least one instruction");
        let words = random_words(&mut self.rng, length);
        Test {
            id: self.fresh_id(),
            arm_id,
            parent_id: None,
            words,
        }
    }

    pub fn draw_operator(&mut self) -> MutationOp {
        MutationOp::ALL[self.op_dist.sample(&mut self.rng)]
    }

    /// `mutants_per_interesting` children of `parent`, one operator each.
    pub fn mutate(&mut self, parent: &Test) -> Vec<Test> {
        (0..self.config.mutants_per_interesting)
            .map(|_| {
                let op = self.draw_operator();
                let mut words = parent.words.clone();
                apply_operator(op, &mut words, &mut self.rng);
                Test {
                    id: self.fresh_id(),
                    arm_id: parent.arm_id,
                    parent_id: Some(parent.id),
                    words,
                }
            })
            .collect()
    }
}

/// First-in-first-out queue of tests for one arm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TestPool {
    queue: VecDeque<Test>,
}

impl TestPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, test: Test) {
        self.queue.push_back(test);
    }

    /// `None` signals an exhausted pool.
    pub fn pop(&mut self) -> Option<Test> {
        self.queue.pop_front()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn clear(&mut self) {
        self.queue.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dut::isa::{decode, Decoded};
    use crate::rng_stream;

    fn testgen(seed: u64) -> TestGen {
        TestGen::new(rng_stream(seed, 0), MutationConfig::default()).unwrap()
    }

    #[test]
    fn seeds_are_deterministic() {
        let a = testgen(5).gen_seed(0, 20);
        let b = testgen(5).gen_seed(0, 20);
        assert_eq!(a, b);
        assert_ne!(a.words, testgen(6).gen_seed(0, 20).words);
        assert_eq!(testgen(5).gen_seed(3, 1).len(), 1);
    }

    #[test]
    fn bit_flip_changes_one_bit() {
        let mut rng = rng_stream(1, 0);
        for _ in 0..200 {
            let parent = random_words(&mut rng, 20);
            let mut child = parent.clone();
            apply_operator(MutationOp::BitFlip, &mut child, &mut rng);
            let flipped: u32 = parent
                .iter()
                .zip(&child)
                .map(|(a, b)| (a ^ b).count_ones())
                .sum();
            assert_eq!(flipped, 1);
        }
    }

    #[test]
    fn byte_flip_changes_one_byte() {
        let mut rng = rng_stream(2, 0);
        let parent = random_words(&mut rng, 8);
        let mut child = parent.clone();
        apply_operator(MutationOp::ByteFlip, &mut child, &mut rng);
        let diffs: Vec<u32> = parent
            .iter()
            .zip(&child)
            .map(|(a, b)| a ^ b)
            .filter(|d| *d != 0)
            .collect();
        assert_eq!(diffs.len(), 1);
        assert!([0xFF, 0xFF00, 0xFF_0000, 0xFF00_0000].contains(&diffs[0]));
    }

    #[test]
    fn field_mutation_stays_inside_one_field() {
        let mut rng = rng_stream(3, 0);
        for _ in 0..500 {
            let parent = random_words(&mut rng, 4);
            let mut child = parent.clone();
            apply_operator(MutationOp::FieldMutate, &mut child, &mut rng);
            let delta: Vec<u32> = parent
                .iter()
                .zip(&child)
                .map(|(a, b)| a ^ b)
                .filter(|d| *d != 0)
                .collect();
            assert_eq!(delta.len(), 1);
            let fields: Vec<Field> = Field::ALL
                .into_iter()
                .filter(|f| delta[0] & f.mask() != 0)
                .collect();
            assert_eq!(
                fields.len(),
                1,
                "delta {:#x} spans several fields",
                delta[0]
            );
        }
    }

    #[test]
    fn mutants_keep_length_and_lineage() {
        let mut gen = testgen(9);
        let parent = gen.gen_seed(4, 20);
        let batch = gen.mutate(&parent);
        assert_eq!(batch.len(), DEFAULT_MUTANTS);
        for m in &batch {
            assert_eq!(m.len(), 20);
            assert_eq!(m.parent_id, Some(parent.id));
            assert_eq!(m.arm_id, 4);
            assert_ne!(m.words, parent.words);
        }
        let mut ids: Vec<_> = batch.iter().map(|m| m.id).collect();
        ids.dedup();
        assert_eq!(ids.len(), DEFAULT_MUTANTS);

        let mut again = testgen(9);
        let p2 = again.gen_seed(4, 20);
        assert_eq!(again.mutate(&p2), batch);
    }

    #[test]
    fn pool_is_fifo() {
        let mut gen = testgen(0);
        let (a, b, c) = (gen.gen_seed(0, 1), gen.gen_seed(0, 1), gen.gen_seed(0, 1));
        let mut pool = TestPool::new();
        assert_eq!(pool.pop(), None);
        pool.push(a.clone());
        pool.push(b.clone());
        assert_eq!(pool.pop(), Some(a));
        pool.push(c.clone());
        assert_eq!(pool.pop(), Some(b));
        assert_eq!(pool.pop(), Some(c));
        assert!(pool.pop().is_none());
    }

    #[test]
    fn binary_round_trip() {
        let t = testgen(1).gen_seed(0, 5);
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 20);
        assert_eq!(Test::read_words(&buf[..]).unwrap(), t.words);
        assert!(Test::read_words(&buf[..3]).is_err());
    }

    #[test]
    fn rejects_bad_weights() {
        let cfg = MutationConfig {
            operator_weights: [0.5, 0.5, 0.5, 0.0],
            ..MutationConfig::default()
        };
        assert!(TestGen::new(rng_stream(0, 0), cfg).is_err());
        let cfg = MutationConfig {
            mutants_per_interesting: 0,
            ..MutationConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn illegal_fraction_matches_encoding_table() {
        // raw words decode illegally when their 6-bit opcode is one of the
        // 64 - 18 unused values
        let legal_opcodes = (0..64).filter(|b| Opcode::from_bits(*b).is_some()).count();
        assert_eq!(legal_opcodes, 18);
        let expected = (1.0 - VALID_WORD_BIAS) * (64 - legal_opcodes) as f64 / 64.0;
        assert!((expected - 0.071875).abs() < 1e-12);

        let n = 10_000;
        let mut gen = testgen(11);
        let illegal = gen
            .gen_seed(0, n)
            .words
            .iter()
            .filter(|w| matches!(decode(**w), Decoded::Illegal { .. }))
            .count();
        let frac = illegal as f64 / n as f64;
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((0.05..=0.15).contains(&frac), "{frac}");
        assert!(
            (frac - expected).abs() < 4.0 * sigma,
            "{frac} vs {expected}"
        );
    }

    #[test]
    fn operator_frequencies_follow_weights() {
        let weights = [0.1, 0.2, 0.3, 0.4];
        let cfg = MutationConfig {
            operator_weights: weights,
            ..MutationConfig::default()
        };
        let mut gen = TestGen::new(rng_stream(21, 0), cfg).unwrap();
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[gen.draw_operator() as usize] += 1;
        }
        for (count, w) in counts.iter().zip(weights) {
            let sigma = (n as f64 * w * (1.0 - w)).sqrt();
            assert!(
                (*count as f64 - n as f64 * w).abs() < 3.0 * sigma,
                "{counts:?}"
            );
        }
    }
}
