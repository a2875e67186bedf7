//! Monte-Carlo simulation of the prepare-and-measure protocol with an
//! honest server behind a depolarizing line.
//!
//! Only classical laws survive after collapsing the honest quantum
//! mechanics: on a measure-resend round Alice's bit and the server's
//! message are independent fair coins regardless of the noise, and a
//! reflected round returns "-" with probability Q_FR.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attack::OperationSchedule;
use crate::bits::{BitString, MessageBit};
use crate::error::{Error, Result};
use crate::rate::{ChannelModel, ObservedStats};
use crate::seeding::{substream, LABEL_ROUNDS, LABEL_SCHEDULE};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr", into = "ConfigRepr")]
pub struct ProtocolConfig {
    n_rounds: usize,
    n_test: usize,
    channel: ChannelModel,
    rng_seed: u64,
}

#[derive(Serialize, Deserialize, Clone)]
struct ConfigRepr {
    n_rounds: usize,
    n_test: usize,
    channel: ChannelModel,
    rng_seed: u64,
}

impl TryFrom<ConfigRepr> for ProtocolConfig {
    type Error = Error;
    fn try_from(r: ConfigRepr) -> Result<Self> {
        ProtocolConfig::new(r.n_rounds, r.n_test, r.channel, r.rng_seed)
    }
}

impl From<ProtocolConfig> for ConfigRepr {
    fn from(c: ProtocolConfig) -> Self {
        ConfigRepr {
            n_rounds: c.n_rounds,
            n_test: c.n_test,
            channel: c.channel,
            rng_seed: c.rng_seed,
        }
    }
}

impl ProtocolConfig {
    pub fn new(
        n_rounds: usize,
        n_test: usize,
        channel: ChannelModel,
        rng_seed: u64,
    ) -> Result<Self> {
        if n_rounds == 0 {
            return Err(Error::InvalidConfig("need at least one round".into()));
        }
        if n_test > n_rounds {
            return Err(Error::InvalidConfig(format!(
                "{n_test} test rounds exceed {n_rounds} total rounds"
            )));
        }
        Ok(ProtocolConfig {
            n_rounds,
            n_test,
            channel,
            rng_seed,
        })
    }

    pub fn n_rounds(&self) -> usize {
        self.n_rounds
    }

    pub fn n_test(&self) -> usize {
        self.n_test
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundChoice {
    MeasureResend,
    Reflect,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundRecord {
    pub index: usize,
    pub choice: RoundChoice,
    /// Alice's Z outcome; present exactly on measure-resend rounds.
    pub alice_bit: Option<u8>,
    pub server_message: MessageBit,
}

/// Draws which rounds are test (reflect) rounds: a uniform
/// `n_test`-subset of positions via a partial Fisher-Yates shuffle.
pub fn choose_schedule(config: &ProtocolConfig, rng: &mut impl Rng) -> Result<OperationSchedule> {
    let n = config.n_rounds;
    let m = config.n_test;
    let mut positions: Vec<u32> = (0..n as u32).collect();
    for k in 0..m {
        let j = rng.random_range(k..n);
        positions.swap(k, j);
    }
    let mut bits = vec![1u8; n];
    for &p in &positions[..m] {
        bits[p as usize] = 0;
    }
    OperationSchedule::new(BitString::new(bits)?)
}

/// Simulates one round. Measure-resend rounds draw Alice's bit first,
/// then the message; reflect rounds draw only the flip event.
pub fn simulate_round(
    index: usize,
    choice: RoundChoice,
    channel: &ChannelModel,
    rng: &mut impl Rng,
) -> RoundRecord {
    match choice {
        RoundChoice::MeasureResend => {
            let alice = rng.random::<bool>() as u8;
            let message = if rng.random::<bool>() {
                MessageBit::Minus
            } else {
                MessageBit::Plus
            };
            RoundRecord {
                index,
                choice,
                alice_bit: Some(alice),
                server_message: message,
            }
        }
        RoundChoice::Reflect => {
            let flipped = rng.random_bool(channel.q_fr());
            RoundRecord {
                index,
                choice,
                alice_bit: None,
                server_message: if flipped {
                    MessageBit::Minus
                } else {
                    MessageBit::Plus
                },
            }
        }
    }
}

#[derive(Default)]
struct StatsAccumulator {
    meas: [[u64; 2]; 2],
    reflect: [u64; 2],
}

impl StatsAccumulator {
    fn record(&mut self, rec: &RoundRecord) -> Result<()> {
        match (rec.choice, rec.alice_bit) {
            (RoundChoice::MeasureResend, Some(a)) if a <= 1 => {
                self.meas[a as usize][rec.server_message.index()] += 1;
                Ok(())
            }
            (RoundChoice::Reflect, None) => {
                self.reflect[rec.server_message.index()] += 1;
                Ok(())
            }
            _ => Err(Error::InvalidConfig(format!(
                "round {} has a bit/choice mismatch",
                rec.index
            ))),
        }
    }

    fn finish(&self) -> Result<ObservedStats> {
        let n_meas: u64 = self.meas.iter().flatten().sum();
        let n_reflect: u64 = self.reflect.iter().sum();
        if n_meas == 0 {
            return Err(Error::MissingStatistics {
                category: "measure-resend",
            });
        }
        if n_reflect == 0 {
            return Err(Error::MissingStatistics {
                category: "reflect",
            });
        }
        let mut p_ac = [[0.0; 2]; 2];
        for (a, row) in p_ac.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.meas[a][c] as f64 / n_meas as f64;
            }
        }
        let p_plus = self.reflect[0] as f64 / n_reflect as f64;
        // Finite-sample tolerance for the later consistency checks: a
        // few standard deviations of the involved frequencies.
        let slack = 5.0 / (n_meas.min(n_reflect) as f64).sqrt();
        ObservedStats::new(p_ac, p_plus, 1.0 - p_plus, slack)
    }
}

/// Empirical statistics from per-round records. Fails with a
/// missing-statistics error when either round category is absent.
pub fn estimate_stats(rounds: &[RoundRecord]) -> Result<ObservedStats> {
    let mut acc = StatsAccumulator::default();
    for rec in rounds {
        acc.record(rec)?;
    }
    acc.finish()
}

/// Everything one protocol run produces.
#[derive(Debug, Clone)]
pub struct Transcript {
    config: ProtocolConfig,
    rounds: Option<Vec<RoundRecord>>,
    raw: BitString,
    stats: Option<ObservedStats>,
    seed_cost_bits: f64,
}

impl Transcript {
    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    /// Per-round records when the run kept them.
    pub fn rounds(&self) -> Option<&[RoundRecord]> {
        self.rounds.as_deref()
    }

    /// Alice's raw bits, one per measure-resend round, in round order.
    pub fn raw(&self) -> &BitString {
        &self.raw
    }

    /// `None` when a round category was empty (no tests, or all tests).
    pub fn stats(&self) -> Option<&ObservedStats> {
        self.stats.as_ref()
    }

    /// log2 of the number of possible schedules: the randomness spent
    /// selecting test positions.
    pub fn seed_cost_bits(&self) -> f64 {
        self.seed_cost_bits
    }
}

/// Runs the protocol. Per-round records are stored only when
/// `keep_rounds` is set; statistics are accumulated either way.
pub fn run_protocol(config: &ProtocolConfig, keep_rounds: bool) -> Result<Transcript> {
    let schedule = choose_schedule(config, &mut substream(config.rng_seed, LABEL_SCHEDULE))?;
    let mut rng = substream(config.rng_seed, LABEL_ROUNDS);
    let mut acc = StatsAccumulator::default();
    let mut raw = BitString::zeros(0);
    let mut rounds = keep_rounds.then(|| Vec::with_capacity(config.n_rounds));
    for index in 0..config.n_rounds {
        let choice = if schedule.is_reflect(index) {
            RoundChoice::Reflect
        } else {
            RoundChoice::MeasureResend
        };
        let rec = simulate_round(index, choice, &config.channel, &mut rng);
        acc.record(&rec)?;
        if let Some(bit) = rec.alice_bit {
            raw.push(bit);
        }
        if let Some(list) = rounds.as_mut() {
            list.push(rec);
        }
    }
    let stats = match acc.finish() {
        Ok(stats) => Some(stats),
        Err(Error::MissingStatistics { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(Transcript {
        config: *config,
        rounds,
        raw,
        stats,
        seed_cost_bits: schedule_cost_bits(config.n_rounds, config.n_test),
    })
}

/// log2(C(n, m)), accumulated in log space.
pub fn schedule_cost_bits(n: usize, m: usize) -> f64 {
    assert!(m <= n, "cannot choose {m} of {n}");
    (1..=m)
        .map(|k| (((n - m + k) as f64) / k as f64).log2())
        .sum()
}

// Serialized form: raw bits as hex plus explicit markers for what is
// absent, so a consumer can tell "no stats" from "forgot stats".
#[derive(Serialize, Deserialize)]
struct TranscriptRepr {
    config: ProtocolConfig,
    rounds: Option<Vec<RoundRecord>>,
    raw_len: usize,
    raw_hex: String,
    stats: Option<ObservedStats>,
    missing_stats: Vec<String>,
    seed_cost_bits: f64,
}

impl Transcript {
    pub fn to_json(&self) -> Result<String> {
        let mut missing = Vec::new();
        if self.stats.is_none() {
            if self.raw.is_empty() {
                missing.push("measure-resend".to_string());
            }
            if self.config.n_test == 0 {
                missing.push("reflect".to_string());
            }
        }
        let repr = TranscriptRepr {
            config: self.config,
            rounds: self.rounds.clone(),
            raw_len: self.raw.len(),
            raw_hex: self.raw.to_hex(),
            stats: self.stats.clone(),
            missing_stats: missing,
            seed_cost_bits: self.seed_cost_bits,
        };
        Ok(serde_json::to_string_pretty(&repr)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: TranscriptRepr = serde_json::from_str(text)?;
        let raw = BitString::from_hex(&repr.raw_hex, repr.raw_len)?;
        if repr.raw_len != repr.config.n_rounds - repr.config.n_test {
            return Err(Error::DimensionMismatch {
                context: "raw length vs rounds minus tests",
                expected: repr.config.n_rounds - repr.config.n_test,
                got: repr.raw_len,
            });
        }
        if let Some(rounds) = &repr.rounds {
            if rounds.len() != repr.config.n_rounds {
                return Err(Error::DimensionMismatch {
                    context: "round record count",
                    expected: repr.config.n_rounds,
                    got: rounds.len(),
                });
            }
            let mut raw_iter = raw.iter();
            for (i, rec) in rounds.iter().enumerate() {
                if rec.index != i {
                    return Err(Error::Parse(format!(
                        "round records out of order at position {i}"
                    )));
                }
                match (rec.choice, rec.alice_bit) {
                    (RoundChoice::MeasureResend, Some(bit)) if bit <= 1 => {
                        if raw_iter.next() != Some(bit) {
                            return Err(Error::Parse(format!("raw bit mismatch at round {i}")));
                        }
                    }
                    (RoundChoice::Reflect, None) => {}
                    _ => {
                        return Err(Error::Parse(format!("round {i} has a bit/choice mismatch")));
                    }
                }
            }
            if raw_iter.next().is_some() {
                return Err(Error::Parse("raw string longer than records imply".into()));
            }
        }
        Ok(Transcript {
            config: repr.config,
            rounds: repr.rounds,
            raw,
            stats: repr.stats,
            seed_cost_bits: repr.seed_cost_bits,
        })
    }
}
