use crate::coverage::CoverageSet;
use crate::dut::{self, BugConfig, Mismatch, COVERAGE_POINTS};
use crate::testgen::Test;

/// What the fuzzer learns from simulating one test.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub coverage: CoverageSet,
    /// Differential-testing mismatches; empty when the target agrees with
    /// its reference.
    pub mismatches: Vec<Mismatch>,
}

/// Anything the campaign loop can simulate tests on.
pub trait Target {
    /// `|C|`, the number of coverage points.
    fn universe_size(&self) -> usize;

    fn execute(&mut self, test: &Test) -> Execution;
}

/// The toy core with injected bugs, diffed against the golden model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DutTarget {
    pub bugs: BugConfig,
}

impl DutTarget {
    pub fn new(bugs: BugConfig) -> Self {
        DutTarget { bugs }
    }
}

impl Target for DutTarget {
    fn universe_size(&self) -> usize {
        COVERAGE_POINTS
    }

    fn execute(&mut self, test: &Test) -> Execution {
        let outcome = dut::run_test(&test.words, self.bugs);
        let mismatches = outcome.mismatches();
        Execution {
            coverage: outcome.coverage,
            mismatches,
        }
    }
}

impl<T: Target + ?Sized> Target for &mut T {
    fn universe_size(&self) -> usize {
        (**self).universe_size()
    }

    fn execute(&mut self, test: &Test) -> Execution {
        (**self).execute(test)
    }
}
