//! Simulation and security analysis of a semi-quantum randomness
//! expansion protocol.
//!
//! A client limited to computational-basis measurements and reflection
//! extracts certified random bits from an untrusted server that claims
//! to send |+> states and measure returns in the X basis. The crate
//! covers the whole chain:
//!
//! - [`protocol`]: round simulation against a depolarizing channel,
//!   transcripts, observed statistics.
//! - [`attack`]: adversarial server models (collective and general),
//!   plus numerical verification that acceptance filtering reduces the
//!   protocol to an entanglement-based one.
//! - [`rate`]: the asymptotic secure-rate bound from observed
//!   statistics, and the closed form it collapses to on depolarizing
//!   channels.
//! - [`postprocess`]: output-length selection and Toeplitz hashing.
//! - [`quantum`]: the small dense linear-algebra layer underneath.

pub mod attack;
pub mod bits;
pub mod error;
pub mod postprocess;
pub mod protocol;
pub mod quantum;
pub mod rate;
pub mod seeding;

pub use attack::{
    accept_and_condition, sample_random_attack, verify_reduction, CollectiveAttack, GeneralAttack,
    OperationSchedule, ReductionReport,
};
pub use bits::{BitString, MessageBit};
pub use error::{Error, Result};
pub use postprocess::{
    extract, select_length, toeplitz_hash, AbortReason, ExtractionConfig, ExtractionResult,
    HashSeedSource,
};
pub use protocol::{
    estimate_stats, run_protocol, ProtocolConfig, RoundChoice, RoundRecord, Transcript,
};
pub use quantum::{binary_entropy, DensityMatrix, MeasBasis, StateVector};
pub use rate::{
    asymptotic_output_length, closed_form_rate, depolarization_stats, entropy_bound, rate_curve,
    write_curve_csv, ChannelMode, ChannelModel, CurveRow, ObservedStats, RateReport,
};
pub use seeding::substream;
