//! Privacy amplification: two-universal hashing of the raw string.
//!
//! The hash family is Toeplitz matrices over GF(2): T[i][j] =
//! seed[i - j + n - 1] for an ell x n matrix, keyed by a seed of
//! n + ell - 1 bits. Distinct inputs collide with probability exactly
//! 2^(-ell) over the seed draw.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{BitString, MessageBit};
use crate::error::{Error, Result};
use crate::protocol::Transcript;
use crate::rate::{asymptotic_output_length, entropy_bound, RateReport};
use crate::seeding::{random_bits, substream, LABEL_HASH_SEED};

/// Multiplies the Toeplitz matrix defined by `seed` with `raw`,
/// producing `ell` output bits.
///
/// Output bit i is the GF(2) inner product of matrix row i with the
/// input: out[i] = XOR over j of seed[i - j + n - 1] AND raw[j].
/// Implemented word-packed: every set input bit XORs a shifted seed
/// window into the accumulator, so cost scales with n·ell/64.
pub fn toeplitz_hash(raw: &BitString, seed: &BitString, ell: usize) -> Result<BitString> {
    if ell == 0 {
        return Ok(BitString::zeros(0));
    }
    let n = raw.len();
    let need = n + ell - 1;
    if seed.len() != need {
        return Err(Error::SeedLengthMismatch {
            expected: need,
            got: seed.len(),
        });
    }
    if n == 0 {
        return Ok(BitString::zeros(ell));
    }
    // Seed bits packed LSB-first per word, padded with one guard word so
    // window extraction never reads out of bounds.
    let seed_words = pack_lsb(seed, 1);
    let out_words_len = ell.div_ceil(64);
    let mut out = vec![0u64; out_words_len];
    for j in 0..n {
        if raw.get(j) == 0 {
            continue;
        }
        // Row structure: input bit j sees seed window starting at n-1-j.
        let start = n - 1 - j;
        let idx = start / 64;
        let off = start % 64;
        if off == 0 {
            for (w, o) in out.iter_mut().enumerate() {
                *o ^= seed_words[idx + w];
            }
        } else {
            for (w, o) in out.iter_mut().enumerate() {
                *o ^= (seed_words[idx + w] >> off) | (seed_words[idx + w + 1] << (64 - off));
            }
        }
    }
    Ok(unpack_lsb(&out, ell))
}

fn pack_lsb(bits: &BitString, guard_words: usize) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64) + guard_words];
    for (j, b) in bits.iter().enumerate() {
        words[j / 64] |= (b as u64) << (j % 64);
    }
    words
}

fn unpack_lsb(words: &[u64], len: usize) -> BitString {
    let mut out = BitString::zeros(0);
    for j in 0..len {
        out.push(((words[j / 64] >> (j % 64)) & 1) as u8);
    }
    out
}

/// Where the extractor's hash seed comes from.
#[derive(Debug, Clone)]
pub enum HashSeedSource {
    /// Caller-provided seed of exactly n + ell - 1 bits.
    Explicit(BitString),
    /// Derive the seed deterministically from this master seed.
    Derive(u64),
}

#[derive(Debug, Clone)]
pub struct ExtractionConfig {
    /// Rate safety margin subtracted from the entropy bound, in bits
    /// per raw bit.
    pub margin: f64,
    /// Abort when the observed flip rate P(-|acc) exceeds this.
    pub threshold_qfr: Option<f64>,
    pub hash_seed: HashSeedSource,
}

/// Protocol-level reasons extraction refuses to emit bits. These are
/// outcomes, not errors: the run completed and the answer is "nothing
/// can be extracted safely".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbortReason {
    #[serde(rename = "noise-too-high")]
    NoiseTooHigh,
    #[serde(rename = "inconsistent-statistics")]
    InconsistentStatistics,
    #[serde(rename = "insufficient-test-rounds")]
    InsufficientTestRounds,
}

impl AbortReason {
    /// The wire name, identical to the serde rename.
    pub fn as_str(self) -> &'static str {
        match self {
            AbortReason::NoiseTooHigh => "noise-too-high",
            AbortReason::InconsistentStatistics => "inconsistent-statistics",
            AbortReason::InsufficientTestRounds => "insufficient-test-rounds",
        }
    }
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct ExtractionResult {
    /// Extracted bits; empty when aborted.
    pub output: BitString,
    pub ell: usize,
    /// Effective rate used for length selection: bound minus margin,
    /// clamped at 0.
    pub rate_used: f64,
    pub aborted: Option<AbortReason>,
    /// The hash seed that was used, when extraction ran.
    pub hash_seed: Option<BitString>,
}

impl ExtractionResult {
    fn aborted(reason: AbortReason) -> Self {
        ExtractionResult {
            output: BitString::zeros(0),
            ell: 0,
            rate_used: 0.0,
            aborted: Some(reason),
            hash_seed: None,
        }
    }
}

/// Output length for a rate report: zero when the report aborts, when
/// the observed flip rate exceeds the configured threshold, or when the
/// margin eats the whole bound.
pub fn select_length(
    n_raw: usize,
    report: &RateReport,
    config: &ExtractionConfig,
    observed_qfr: Option<f64>,
) -> usize {
    if report.abort {
        return 0;
    }
    if let (Some(threshold), Some(qfr)) = (config.threshold_qfr, observed_qfr) {
        if qfr > threshold {
            return 0;
        }
    }
    asymptotic_output_length(n_raw, report.bound, config.margin)
}

/// Runs the full post-processing chain on a transcript: statistics
/// check, rate bound, length selection, Toeplitz hashing.
///
/// Protocol-level refusals (noise, inconsistency, missing tests) come
/// back as a result with `aborted` set; structural problems (bad
/// margin, wrong explicit seed length) are errors.
pub fn extract(transcript: &Transcript, config: &ExtractionConfig) -> Result<ExtractionResult> {
    if !(0.0..=1.0).contains(&config.margin) {
        return Err(Error::Domain {
            name: "margin",
            value: config.margin,
            domain: "[0, 1]",
        });
    }
    if let Some(t) = config.threshold_qfr {
        if !(0.0..=0.5).contains(&t) {
            return Err(Error::Domain {
                name: "threshold_qfr",
                value: t,
                domain: "[0, 0.5]",
            });
        }
    }
    let Some(stats) = transcript.stats() else {
        return Ok(ExtractionResult::aborted(
            AbortReason::InsufficientTestRounds,
        ));
    };
    let report = match entropy_bound(stats) {
        Ok(report) => report,
        Err(Error::InconsistentStatistics(_)) => {
            return Ok(ExtractionResult::aborted(
                AbortReason::InconsistentStatistics,
            ));
        }
        Err(e) => return Err(e),
    };
    let observed_qfr = stats.p_cond_acc(MessageBit::Minus);
    let n_raw = transcript.raw().len();
    let ell = select_length(n_raw, &report, config, Some(observed_qfr));
    if ell == 0 {
        return Ok(ExtractionResult::aborted(AbortReason::NoiseTooHigh));
    }
    let seed_len = n_raw + ell - 1;
    let seed = match &config.hash_seed {
        HashSeedSource::Explicit(seed) => {
            if seed.len() != seed_len {
                return Err(Error::SeedLengthMismatch {
                    expected: seed_len,
                    got: seed.len(),
                });
            }
            seed.clone()
        }
        HashSeedSource::Derive(master) => {
            random_bits(&mut substream(*master, LABEL_HASH_SEED), seed_len)
        }
    };
    let output = toeplitz_hash(transcript.raw(), &seed, ell)?;
    Ok(ExtractionResult {
        output,
        ell,
        rate_used: (report.bound - config.margin).max(0.0),
        aborted: None,
        hash_seed: Some(seed),
    })
}

/// Renders bits in the two-line output-file format:
/// `ell=<count>` then lowercase hex, MSB-first packed.
pub fn to_output_format(bits: &BitString) -> String {
    format!("ell={}\n{}\n", bits.len(), bits.to_hex())
}

/// Parses the two-line output-file format back into bits.
pub fn from_output_format(text: &str) -> Result<BitString> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.trim().strip_prefix("ell="))
        .ok_or_else(|| Error::Parse("missing ell= header".into()))?;
    let len: usize = header
        .parse()
        .map_err(|e| Error::Parse(format!("bad ell value: {e}")))?;
    let hex = lines.next().unwrap_or("").trim();
    BitString::from_hex(hex, len)
}
