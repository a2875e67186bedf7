//! Adversarial server models and the entanglement-based reduction.
//!
//! The prepare-and-measure protocol with an untrusted server is analyzed
//! through an equivalent entanglement-based protocol. This module builds
//! both joint states for a given attack, checks that conditioning on the
//! test outcome maps one onto the other, and derives the observable
//! statistics any attack induces.

mod collective;
mod format;
mod general;
mod reduction;

pub use collective::CollectiveAttack;
pub use general::{accept_and_condition, sample_random_attack, GeneralAttack};
pub use reduction::{verify_reduction, ReductionReport};

use crate::bits::{count_bits, BitString};
use crate::error::{Error, Result};

/// Alice's per-round choices for one protocol run. Bit 1 at position i
/// means round i is measure-resend (contributes a raw bit); bit 0 means
/// the round is a reflect (test) round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperationSchedule {
    theta: BitString,
}

impl OperationSchedule {
    pub fn new(theta: BitString) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidConfig(
                "schedule must cover at least one round".into(),
            ));
        }
        Ok(OperationSchedule { theta })
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::new(BitString::parse(s)?)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one round
    }

    pub fn theta(&self) -> &BitString {
        &self.theta
    }

    /// Number of reflect (test) rounds.
    pub fn reflect_count(&self) -> usize {
        count_bits(&self.theta, 0)
    }

    /// Number of measure-resend (generation) rounds.
    pub fn measure_count(&self) -> usize {
        count_bits(&self.theta, 1)
    }

    pub fn is_reflect(&self, round: usize) -> bool {
        self.theta.get(round) == 0
    }

    pub fn reflect_positions(&self) -> Vec<usize> {
        self.theta.positions_of(0)
    }

    pub fn measure_positions(&self) -> Vec<usize> {
        self.theta.positions_of(1)
    }

    /// Big-endian mask integer; AND-ing a round-outcome index with this
    /// zeroes the reflect positions.
    pub fn mask(&self) -> usize {
        self.theta.to_index()
    }

    /// Probability 2^(-reflect_count) that all test rounds pass in the
    /// entanglement-based protocol.
    pub fn expected_accept(&self) -> f64 {
        0.5f64.powi(self.reflect_count() as i32)
    }
}
