//! Secure-rate computation from observed protocol statistics.
//!
//! The observed quantities are the joint probabilities P(a, c) of Alice's
//! raw bit `a` and the server message `c` on measure-resend rounds, plus
//! the message distribution P(c | accept) on reflected (test) rounds.
//! From these the adversary's per-message coherence is recovered and a
//! lower bound on the conditional entropy of the raw bit is formed; the
//! bound equals the asymptotic secure bits per raw bit.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bits::MessageBit;
use crate::error::{Error, Result};
use crate::quantum::binary_entropy;

/// Statistics with this slack are treated as exact up to float noise.
pub const EXACT_SLACK: f64 = 1e-9;

const PROB_TOL: f64 = 1e-9;

/// Observed protocol statistics.
///
/// `p_ac[a][c]` is the joint probability of raw bit `a` and message `c`
/// over measure-resend rounds (message index: 0 = "+", 1 = "-").
/// `p_plus_acc` / `p_minus_acc` are message frequencies over accepted
/// test rounds. `slack` is the statistical tolerance granted to
/// consistency checks; estimators set it from their sample sizes, exact
/// constructions use [`EXACT_SLACK`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "StatsRepr", into = "StatsRepr")]
pub struct ObservedStats {
    p_ac: [[f64; 2]; 2],
    p_plus_acc: f64,
    p_minus_acc: f64,
    slack: f64,
}

#[derive(Serialize, Deserialize, Clone)]
struct StatsRepr {
    p_ac: [[f64; 2]; 2],
    p_plus_acc: f64,
    p_minus_acc: f64,
    #[serde(default = "default_slack")]
    slack: f64,
}

fn default_slack() -> f64 {
    EXACT_SLACK
}

impl TryFrom<StatsRepr> for ObservedStats {
    type Error = Error;
    fn try_from(r: StatsRepr) -> Result<Self> {
        ObservedStats::new(r.p_ac, r.p_plus_acc, r.p_minus_acc, r.slack)
    }
}

impl From<ObservedStats> for StatsRepr {
    fn from(s: ObservedStats) -> Self {
        StatsRepr {
            p_ac: s.p_ac,
            p_plus_acc: s.p_plus_acc,
            p_minus_acc: s.p_minus_acc,
            slack: s.slack,
        }
    }
}

impl ObservedStats {
    pub fn new(p_ac: [[f64; 2]; 2], p_plus_acc: f64, p_minus_acc: f64, slack: f64) -> Result<Self> {
        if !slack.is_finite() || slack < 0.0 {
            return Err(Error::Domain {
                name: "slack",
                value: slack,
                domain: "[0, inf)",
            });
        }
        let mut all = vec![p_plus_acc, p_minus_acc];
        all.extend(p_ac.iter().flatten());
        for &p in &all {
            if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
                return Err(Error::Domain {
                    name: "probability",
                    value: p,
                    domain: "[0, 1]",
                });
            }
        }
        let joint_sum: f64 = p_ac.iter().flatten().sum();
        if (joint_sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InconsistentStatistics(format!(
                "joint probabilities sum to {joint_sum}, not 1"
            )));
        }
        if (p_plus_acc + p_minus_acc - 1.0).abs() > PROB_TOL {
            return Err(Error::InconsistentStatistics(format!(
                "accepted-message probabilities sum to {}, not 1",
                p_plus_acc + p_minus_acc
            )));
        }
        let clamp = |p: f64| p.clamp(0.0, 1.0);
        Ok(ObservedStats {
            p_ac: [
                [clamp(p_ac[0][0]), clamp(p_ac[0][1])],
                [clamp(p_ac[1][0]), clamp(p_ac[1][1])],
            ],
            p_plus_acc: clamp(p_plus_acc),
            p_minus_acc: clamp(p_minus_acc),
            slack,
        })
    }

    /// Statistics known exactly (analytic constructions).
    pub fn exact(p_ac: [[f64; 2]; 2], p_plus_acc: f64, p_minus_acc: f64) -> Result<Self> {
        Self::new(p_ac, p_plus_acc, p_minus_acc, EXACT_SLACK)
    }

    pub fn p_ac(&self, a: u8, c: MessageBit) -> f64 {
        self.p_ac[a as usize][c.index()]
    }

    /// Total measure-resend probability mass on message `c`.
    pub fn q_c(&self, c: MessageBit) -> f64 {
        self.p_ac[0][c.index()] + self.p_ac[1][c.index()]
    }

    /// Message frequency on accepted test rounds.
    pub fn p_cond_acc(&self, c: MessageBit) -> f64 {
        match c {
            MessageBit::Plus => self.p_plus_acc,
            MessageBit::Minus => self.p_minus_acc,
        }
    }

    pub fn slack(&self) -> f64 {
        self.slack
    }
}

/// Per-message breakdown of the entropy bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    /// λ_c per message; `None` for a message with no measure-resend mass.
    pub lambda: [Option<f64>; 2],
    /// Recovered coherence 2·Re<e_{0,c}|e_{1,c}> per message.
    pub inner2re: [f64; 2],
    /// Per-message entropy contribution q_c (h(P_{0,c}/q_c) − h(λ_c)).
    pub term: [f64; 2],
    /// Secure bits per raw bit, clamped to ≥ 0.
    pub bound: f64,
    /// True when the unclamped bound is ≤ 0 (no extractable randomness).
    pub abort: bool,
}

/// Recovers 2·Re<e_{0,c}|e_{1,c}> for c ∈ {+, -} from the statistics.
///
/// On accepted test rounds the message-c probability decomposes as
/// P(c|acc) = P_{0,c} + P_{1,c} + 2·Re<e_{0,c}|e_{1,c}>, so the coherence
/// is the gap between the test-round and measure-round message masses.
/// Cauchy-Schwarz caps its magnitude at 2·sqrt(P_{0,c}·P_{1,c}); a gap
/// beyond that plus the statistical slack cannot come from any physical
/// state and is rejected.
pub fn recover_inner_products(stats: &ObservedStats) -> Result<(f64, f64)> {
    let mut out = [0.0; 2];
    for c in [MessageBit::Plus, MessageBit::Minus] {
        let x = stats.p_cond_acc(c) - stats.q_c(c);
        let cs = 2.0 * (stats.p_ac(0, c) * stats.p_ac(1, c)).sqrt();
        if x.abs() > cs + stats.slack() {
            return Err(Error::InconsistentStatistics(format!(
                "recovered coherence {x:.6} for message '{c}' exceeds the \
                 Cauchy-Schwarz cap {cs:.6} beyond slack {:.3e}",
                stats.slack()
            )));
        }
        out[c.index()] = x;
    }
    Ok((out[0], out[1]))
}

/// λ_c: the larger eigenvalue weight controlling the adversary's guessing
/// advantage on message c. Always in [1/2, 1].
pub fn lambda_c(stats: &ObservedStats, c: MessageBit) -> Result<f64> {
    let q_c = stats.q_c(c);
    if q_c <= 0.0 {
        return Err(Error::Domain {
            name: "q_c",
            value: q_c,
            domain: "(0, 1]",
        });
    }
    let x = match c {
        MessageBit::Plus => recover_inner_products(stats)?.0,
        MessageBit::Minus => recover_inner_products(stats)?.1,
    };
    let (p0, p1) = (stats.p_ac(0, c), stats.p_ac(1, c));
    // Clamp the coherence into the physical interval before use; the
    // consistency gate above already bounded the excess by the slack.
    let cs = 2.0 * (p0 * p1).sqrt();
    let x = x.clamp(-cs, cs);
    let lambda = 0.5 * (1.0 + ((p0 - p1).powi(2) + x * x).sqrt() / q_c);
    if lambda > 1.0 + 1e-12 {
        return Err(Error::InconsistentStatistics(format!(
            "lambda = {lambda} exceeds 1 beyond float tolerance"
        )));
    }
    Ok(lambda.clamp(0.5, 1.0))
}

/// Entropy lower bound on the raw bit given the adversary's side
/// information, per raw bit, from observed statistics alone.
pub fn entropy_bound(stats: &ObservedStats) -> Result<RateReport> {
    let (x_plus, x_minus) = recover_inner_products(stats)?;
    let inner2re = [x_plus, x_minus];
    let mut lambda = [None; 2];
    let mut term = [0.0; 2];
    for c in [MessageBit::Plus, MessageBit::Minus] {
        let q_c = stats.q_c(c);
        if q_c <= 0.0 {
            continue; // no mass on this message: it contributes nothing
        }
        let l = lambda_c(stats, c)?;
        lambda[c.index()] = Some(l);
        let ratio = (stats.p_ac(0, c) / q_c).clamp(0.0, 1.0);
        term[c.index()] = q_c * (binary_entropy(ratio)? - binary_entropy(l)?);
    }
    let raw = term[0] + term[1];
    Ok(RateReport {
        lambda,
        inner2re,
        term,
        bound: raw.max(0.0),
        abort: raw <= 0.0,
    })
}

/// Noise model of the transmission line: a depolarizing qubit channel
/// applied on the forward and return legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    /// Return leg reproduces the forward disturbance: Q_FR = Q.
    Dependent,
    /// Independent legs: Q_FR = 2Q(1-Q).
    Independent,
}

impl std::fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChannelMode::Dependent => "dependent",
            ChannelMode::Independent => "independent",
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChannelModel {
    q: f64,
    mode: ChannelMode,
}

impl ChannelModel {
    pub fn new(q: f64, mode: ChannelMode) -> Result<Self> {
        if !(0.0..=0.5).contains(&q) {
            return Err(Error::Domain {
                name: "Q",
                value: q,
                domain: "[0, 0.5]",
            });
        }
        Ok(ChannelModel { q, mode })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mode(&self) -> ChannelMode {
        self.mode
    }

    /// Probability that a reflected qubit returns flipped to "-".
    pub fn q_fr(&self) -> f64 {
        match self.mode {
            ChannelMode::Dependent => self.q,
            ChannelMode::Independent => 2.0 * self.q * (1.0 - self.q),
        }
    }
}

/// Exact statistics of the honest server over a depolarizing line:
/// raw bits and messages are uniform and independent on measure-resend
/// rounds, and a reflected round returns "-" with probability Q_FR.
pub fn depolarization_stats(channel: &ChannelModel) -> ObservedStats {
    let q_fr = channel.q_fr();
    ObservedStats::exact([[0.25, 0.25], [0.25, 0.25]], 1.0 - q_fr, q_fr)
        .expect("depolarization statistics are always consistent")
}

/// Closed-form depolarizing-channel rate max(0, 1 − h(1 − Q_FR)).
pub fn closed_form_rate(q_fr: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&q_fr) {
        return Err(Error::Domain {
            name: "q_fr",
            value: q_fr,
            domain: "[0, 0.5]",
        });
    }
    Ok((1.0 - binary_entropy(1.0 - q_fr)?).max(0.0))
}

/// One row of a rate-vs-noise table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurveRow {
    pub q: f64,
    pub q_fr: f64,
    pub rate: f64,
}

/// Rate at each grid point, computed through the full statistics
/// pipeline (not the closed form). The grid must be ascending.
pub fn rate_curve(q_grid: &[f64], mode: ChannelMode) -> Result<Vec<CurveRow>> {
    if q_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig("Q grid must be ascending".into()));
    }
    q_grid
        .iter()
        .map(|&q| {
            let channel = ChannelModel::new(q, mode)?;
            let report = entropy_bound(&depolarization_stats(&channel))?;
            Ok(CurveRow {
                q,
                q_fr: channel.q_fr(),
                rate: report.bound,
            })
        })
        .collect()
}

/// Evenly spaced grid of `steps` points over [lo, hi], endpoints included.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect()
}

/// Writes rows as CSV with header `Q,Q_FR,rate` and full-precision values.
pub fn write_curve_csv<W: Write>(rows: &[CurveRow], mut w: W) -> Result<()> {
    if rows.windows(2).any(|p| p[0].q > p[1].q) {
        return Err(Error::InvalidConfig(
            "CSV rows must be ascending in Q".into(),
        ));
    }
    writeln!(w, "Q,Q_FR,rate")?;
    for r in rows {
        writeln!(w, "{:.14e},{:.14e},{:.14e}", r.q, r.q_fr, r.rate)?;
    }
    Ok(())
}

/// Secure output length floor(n_raw · (bound − margin)), at least 0.
/// A tiny relative nudge keeps decimal inputs on the real-arithmetic
/// floor (e.g. 10⁶ · 0.521004 counts as the integer it represents).
pub fn asymptotic_output_length(n_raw: usize, bound: f64, margin: f64) -> usize {
    let effective = (bound - margin).clamp(0.0, 1.0);
    let v = n_raw as f64 * effective;
    let nearest = v.round();
    let ell = if (v - nearest).abs() <= 1e-6 * nearest.max(1.0) {
        nearest
    } else {
        v.floor()
    };
    (ell as usize).min(n_raw)
}
