//! Transmission policies: centralized max-weight, stabilized slotted
//! ALOHA, adaptive and stationary age-based thinning, the generalized
//! thinning front end for other access technologies, and a fixed-rate
//! randomized baseline.
//!
//! Policies see only what a real transmitter would: its own age state and
//! the broadcast collision feedback. `decide` fills the slot's transmit
//! (or active) set; `observe` consumes the slot outcome.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::age::SourceState;
use crate::channel::SlotOutcome;
use crate::rng::{bernoulli_bits, SimRng};
use crate::thinning::{propagate_step, thin_tail_step, threshold_from_tail};

/// `1 / (e - 2)`, the collision increment of the pseudo-Bayesian backlog
/// estimate.
const INV_E_MINUS_2: f64 = 1.0 / (std::f64::consts::E - 2.0);

/// Policy selector as it appears in configs and CSV output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    MaxWeight,
    Aloha,
    Aat,
    Sat,
    Gsat,
    Randomized,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::MaxWeight,
        PolicyKind::Aloha,
        PolicyKind::Aat,
        PolicyKind::Sat,
        PolicyKind::Gsat,
        PolicyKind::Randomized,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::MaxWeight => "maxweight",
            PolicyKind::Aloha => "aloha",
            PolicyKind::Aat => "aat",
            PolicyKind::Sat => "sat",
            PolicyKind::Gsat => "gsat",
            PolicyKind::Randomized => "randomized",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "maxweight" => Ok(PolicyKind::MaxWeight),
            "aloha" => Ok(PolicyKind::Aloha),
            "aat" => Ok(PolicyKind::Aat),
            "sat" => Ok(PolicyKind::Sat),
            "gsat" => Ok(PolicyKind::Gsat),
            "randomized" => Ok(PolicyKind::Randomized),
            other => Err(format!("unknown policy '{other}'")),
        }
    }
}

// ---------------------------------------------------------------------------
// Stabilized slotted ALOHA backlog estimate
// ---------------------------------------------------------------------------

/// Pseudo-Bayesian backlog estimate driving the backoff probability.
/// `load` is the per-slot expected-arrival term of the update (the sum
/// arrival rate, or `1/e` for thinning policies); `cap` bounds the
/// estimate by the number of sources (unit buffers hold at most M
/// backlogged packets).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlohaState {
    pub n: f64,
    pub p_b: f64,
    pub load: f64,
    pub cap: f64,
}

impl AlohaState {
    pub fn new(load: f64, cap: f64) -> Self {
        AlohaState { n: 0.0, p_b: 1.0, load, cap }
    }

    /// One feedback step: collisions grow the estimate by
    /// `load + 1/(e-2)`, quiet slots shrink it by `1 - load` (floored at
    /// `load`), and the backoff probability tracks `min(1, 1/n)`.
    pub fn update(&mut self, collision: bool) {
        self.n = if collision {
            (self.n + self.load + INV_E_MINUS_2).min(self.cap)
        } else {
            (self.n + self.load - 1.0).max(self.load).min(self.cap)
        };
        self.p_b = if self.n <= 1.0 { 1.0 } else { 1.0 / self.n };
    }
}

/// Pure form of the backlog update.
pub fn aloha_update(state: &AlohaState, collision: bool) -> AlohaState {
    let mut next = *state;
    next.update(collision);
    next
}

// ---------------------------------------------------------------------------
// Decision rules
// ---------------------------------------------------------------------------

/// Gate-and-backoff decision shared by ALOHA-style policies: every source
/// holding a packet with age-gain at least `min_gain` flips an independent
/// coin of probability `p`; winners land in `out` in source order.
/// Returns the number of gated (coin-eligible) sources. Exactly one draw
/// is consumed per gated source, so policies that gate the same set
/// produce the same stream.
pub fn gated_transmit(
    states: &[SourceState],
    min_gain: u64,
    p: f64,
    rng: &mut SimRng,
    out: &mut Vec<u32>,
) -> u32 {
    out.clear();
    let bits = bernoulli_bits(p.min(1.0));
    let certain = p >= 1.0;
    let mut gated = 0u32;
    for (i, s) in states.iter().enumerate() {
        if s.has_packet && s.age_gain() >= min_gain {
            gated += 1;
            if rng.bernoulli_bits_draw(bits, certain) {
                out.push(i as u32);
            }
        }
    }
    gated
}

/// Active set of a threshold policy without any coin: every nonempty
/// source at or above the gain threshold.
pub fn gated_active(states: &[SourceState], min_gain: u64, out: &mut Vec<u32>) -> u32 {
    out.clear();
    for (i, s) in states.iter().enumerate() {
        if s.has_packet && s.age_gain() >= min_gain {
            out.push(i as u32);
        }
    }
    out.len() as u32
}

/// Backoff decision of stabilized slotted ALOHA: all arrivals are treated
/// as backlogged, every nonempty source transmits with `p_b`.
pub fn aloha_decide(states: &[SourceState], aloha: &AlohaState, rng: &mut SimRng, out: &mut Vec<u32>) -> u32 {
    gated_transmit(states, 0, aloha.p_b, rng, out)
}

/// Stationary thinning decision: nonempty sources at or above the fixed
/// threshold transmit with the backoff probability.
pub fn sat_decide(
    states: &[SourceState],
    threshold_star: u64,
    aloha: &AlohaState,
    rng: &mut SimRng,
    out: &mut Vec<u32>,
) -> u32 {
    gated_transmit(states, threshold_star, aloha.p_b, rng, out)
}

/// Fixed-probability baseline: every nonempty source transmits with `p`.
pub fn randomized_stationary_decide(states: &[SourceState], p: f64, rng: &mut SimRng, out: &mut Vec<u32>) -> u32 {
    gated_transmit(states, 0, p, rng, out)
}

/// Centralized max-weight selection: the lowest-index nonempty source
/// with the largest age-gain, or nobody when no nonempty source offers a
/// positive gain (scheduling a zero-gain source cannot reduce age).
pub fn maxweight_select(states: &[SourceState]) -> Option<usize> {
    let mut best: Option<(usize, u64)> = None;
    for (i, s) in states.iter().enumerate() {
        if !s.has_packet {
            continue;
        }
        let gain = s.age_gain();
        if gain > 0 && best.map_or(true, |(_, g)| gain > g) {
            best = Some((i, gain));
        }
    }
    best.map(|(i, _)| i)
}

// ---------------------------------------------------------------------------
// Adaptive age-based thinning
// ---------------------------------------------------------------------------

/// Adaptive thinning state: the common estimate of the age-gain
/// distribution, the slot threshold derived from it, and the backlog
/// estimate run at the thinned arrival rate `1/e`.
pub struct AatPolicy {
    theta: f64,
    sources: usize,
    /// Tail-mass target of the threshold rule, `1/(eM)`.
    target: f64,
    /// Estimated node distribution over gain orders 0..=N.
    dist: Vec<f64>,
    arrival_mass: Vec<f64>,
    /// Upper bound on the live support of `dist`.
    hi: usize,
    threshold: u64,
    pub aloha: AlohaState,
}

impl AatPolicy {
    pub fn new(sources: usize, theta: f64, truncation: usize) -> Self {
        let m = sources as f64;
        let mut dist = vec![0.0; truncation + 1];
        dist[0] = 1.0; // cold start: every source synchronized fresh
        AatPolicy {
            theta,
            sources,
            target: 1.0 / (std::f64::consts::E * m),
            dist,
            arrival_mass: vec![0.0; truncation + 1],
            hi: 0,
            threshold: 1,
            aloha: AlohaState::new(1.0 / std::f64::consts::E, m),
        }
    }

    pub fn distribution(&self) -> &[f64] {
        &self.dist
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    /// One decision: propagate the estimate through this slot's expected
    /// arrivals, pick the largest threshold that keeps the effective
    /// arrival rate at the channel's sustainable throughput, then let
    /// gated sources back off like ALOHA.
    pub fn decide(&mut self, states: &[SourceState], rng: &mut SimRng, out: &mut Vec<u32>) -> u32 {
        self.hi = propagate_step(&mut self.dist, &mut self.arrival_mass, self.theta, self.hi);
        self.threshold = threshold_from_tail(&self.arrival_mass, self.hi, self.target) as u64;
        gated_transmit(states, self.threshold, self.aloha.p_b, rng, out)
    }

    /// Feedback step: collisions leave the estimate untouched; quiet
    /// slots remove the expected delivered mass from the tail. The
    /// backlog estimate always updates.
    pub fn observe(&mut self, outcome: &SlotOutcome) {
        if !outcome.collision {
            thin_tail_step(
                &mut self.dist,
                self.threshold as usize,
                1.0 / (2.0 * self.sources as f64),
                self.hi,
            );
        }
        self.aloha.update(outcome.collision);
    }
}

// ---------------------------------------------------------------------------
// Policy driver
// ---------------------------------------------------------------------------

/// Random access technology a thinning front end hands its active set to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Technology {
    /// Slotted ALOHA backoff over the active set (recovers the stationary
    /// thinning policy).
    Aloha(AlohaState),
    /// Idealized technology delivering one active source per slot with
    /// the given probability.
    Idealized { success_prob: f64 },
}

/// How the channel resolves what `decide` produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelKind {
    /// `out` holds transmitters; lone transmitter delivers.
    Collision,
    /// `out` holds the active set; the technology picks a winner.
    Idealized { success_prob: f64 },
}

/// Per-slot information reported by a policy.
#[derive(Clone, Copy, Debug, Default)]
pub struct SlotInfo {
    /// Sources that passed the policy's gate this slot.
    pub gated: u32,
    /// Gain threshold in force, for threshold policies.
    pub threshold: Option<u64>,
}

/// A configured transmission policy with its evolving state.
pub enum Policy {
    MaxWeight,
    Aloha(AlohaState),
    Sat { threshold: u64, aloha: AlohaState },
    Aat(Box<AatPolicy>),
    Gsat { threshold: u64, technology: Technology },
    Randomized { p: f64 },
}

impl Policy {
    pub fn channel_kind(&self) -> ChannelKind {
        match self {
            Policy::Gsat { technology: Technology::Idealized { success_prob }, .. } => {
                ChannelKind::Idealized { success_prob: *success_prob }
            }
            _ => ChannelKind::Collision,
        }
    }

    /// Fill `out` with this slot's transmitters (or active set, for an
    /// idealized technology).
    pub fn decide(&mut self, states: &[SourceState], rng: &mut SimRng, out: &mut Vec<u32>) -> SlotInfo {
        match self {
            Policy::MaxWeight => {
                out.clear();
                if let Some(i) = maxweight_select(states) {
                    out.push(i as u32);
                }
                SlotInfo { gated: out.len() as u32, threshold: None }
            }
            Policy::Aloha(aloha) => {
                let gated = aloha_decide(states, aloha, rng, out);
                SlotInfo { gated, threshold: None }
            }
            Policy::Sat { threshold, aloha } => {
                let gated = sat_decide(states, *threshold, aloha, rng, out);
                SlotInfo { gated, threshold: Some(*threshold) }
            }
            Policy::Aat(aat) => {
                let gated = aat.decide(states, rng, out);
                SlotInfo { gated, threshold: Some(aat.threshold()) }
            }
            Policy::Gsat { threshold, technology } => match technology {
                Technology::Aloha(aloha) => {
                    let gated = sat_decide(states, *threshold, aloha, rng, out);
                    SlotInfo { gated, threshold: Some(*threshold) }
                }
                Technology::Idealized { .. } => {
                    let gated = gated_active(states, *threshold, out);
                    SlotInfo { gated, threshold: Some(*threshold) }
                }
            },
            Policy::Randomized { p } => {
                let gated = randomized_stationary_decide(states, *p, rng, out);
                SlotInfo { gated, threshold: None }
            }
        }
    }

    /// Consume the slot's broadcast feedback.
    pub fn observe(&mut self, outcome: &SlotOutcome) {
        match self {
            Policy::Aloha(aloha) | Policy::Sat { aloha, .. } => aloha.update(outcome.collision),
            Policy::Aat(aat) => aat.observe(outcome),
            Policy::Gsat { technology: Technology::Aloha(aloha), .. } => {
                aloha.update(outcome.collision)
            }
            _ => {}
        }
    }
}
