//! The discrete-time slot loop.
//!
//! Slot phases, in order: (1) arrivals, (2) policy decision and
//! transmission, (3) channel resolution and feedback, (4) age update for
//! the next slot. Ages enter the metric at the post-arrival instant of
//! phase 2. The first slot observes the initialized ages (h = 1).

use crate::age::{initial_states, IntegrityError};
use crate::channel::{resolve_active_idealized, resolve_transmitters, SlotOutcome};
use crate::metrics::{EmptyRunError, MetricsAccumulator, RunMetrics, TimeSeries};
use crate::policy::{ChannelKind, Policy};
use crate::rng::{bernoulli_bits, SimRng};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Integrity(#[from] IntegrityError),
    #[error(transparent)]
    EmptyRun(#[from] EmptyRunError),
}

/// Below this arrival rate, arrivals are drawn by geometric gap sampling
/// instead of one Bernoulli draw per source per slot.
const GAP_SAMPLING_MAX_THETA: f64 = 0.02;

/// Everything a finished replication reports.
#[derive(Clone, Debug)]
pub struct SimOutput {
    pub metrics: RunMetrics,
    /// Mean gain threshold over accounted slots (threshold policies).
    pub mean_threshold: Option<f64>,
    /// Mean fraction of sources past the gate (threshold policies).
    pub active_fraction: Option<f64>,
    pub time_series: Option<TimeSeries>,
}

/// Run one seeded replication of `horizon` slots over `sources` sources
/// with Bernoulli(`theta`) arrivals.
pub fn run_simulation(
    sources: usize,
    theta: f64,
    horizon: u64,
    burn_in: u64,
    policy: &mut Policy,
    rng: &mut SimRng,
    time_series_stride: Option<u64>,
) -> Result<SimOutput, SimError> {
    let mut states = initial_states(sources);
    let mut acc = MetricsAccumulator::new(sources).with_burn_in(burn_in);
    if let Some(stride) = time_series_stride {
        acc = acc.with_time_series(stride);
    }
    let channel = policy.channel_kind();
    let mut arrivals = ArrivalSampler::new(sources, theta);
    let mut out: Vec<u32> = Vec::with_capacity(sources);

    let mut pending: Option<SlotOutcome> = None;
    let mut threshold_sum = 0.0f64;
    let mut gated_sum = 0u64;
    let mut tracked_slots = 0u64;
    let mut track_thresholds = false;

    for k in 1..=horizon {
        if let Some(prev) = &pending {
            if let Some(i) = prev.delivered {
                if !states[i as usize].has_packet {
                    return Err(IntegrityError { source_index: i as usize }.into());
                }
            }
        }

        // Boundary pass: previous slot's deliveries, this slot's
        // arrivals, and the post-arrival age sum, in one traversal.
        let delivered_prev = pending.as_ref().and_then(|o| o.delivered);
        let mut slot_age_sum = 0u64;
        arrivals.begin_slot(rng);
        if pending.is_some() {
            for (i, s) in states.iter_mut().enumerate() {
                s.apply_delivery(delivered_prev == Some(i as u32));
                s.apply_arrival(arrivals.next(i, rng));
                slot_age_sum += s.h;
            }
        } else {
            // Slot 1: no outcome yet, the initial ages are observed as is.
            for (i, s) in states.iter_mut().enumerate() {
                s.apply_arrival(arrivals.next(i, rng));
                slot_age_sum += s.h;
            }
        }

        let info = policy.decide(&states, rng, &mut out);
        let outcome = match channel {
            ChannelKind::Collision => resolve_transmitters(&out),
            ChannelKind::Idealized { success_prob } => {
                resolve_active_idealized(&out, success_prob, rng)
            }
        };

        acc.accumulate(slot_age_sum, &outcome);
        if k > burn_in {
            tracked_slots += 1;
            gated_sum += info.gated as u64;
            if let Some(t) = info.threshold {
                track_thresholds = true;
                threshold_sum += t as f64;
            }
        }

        policy.observe(&outcome);
        pending = Some(outcome);
    }

    let metrics = acc.finalize(sources)?;
    let (mean_threshold, active_fraction) = if track_thresholds && tracked_slots > 0 {
        (
            Some(threshold_sum / tracked_slots as f64),
            Some(gated_sum as f64 / (tracked_slots as f64 * sources as f64)),
        )
    } else {
        (None, None)
    };
    Ok(SimOutput {
        metrics,
        mean_threshold,
        active_fraction,
        time_series: acc.time_series().cloned(),
    })
}

/// Per-slot Bernoulli arrival stream over the source row. Three regimes:
/// certain arrivals at theta = 1, per-source draws for moderate rates,
/// and geometric gap sampling for sparse rates (one log per arrival
/// instead of one draw per source).
struct ArrivalSampler {
    sources: usize,
    mode: ArrivalMode,
    /// Next arriving source index in gap mode; `sources` when exhausted.
    next_index: usize,
    theta_bits: u64,
    /// 1 / ln(1 - theta), cached for gap mode.
    inv_log_q: f64,
}

enum ArrivalMode {
    Certain,
    PerSource,
    Gap,
}

impl ArrivalSampler {
    fn new(sources: usize, theta: f64) -> Self {
        debug_assert!(theta > 0.0 && theta <= 1.0);
        let mode = if theta >= 1.0 {
            ArrivalMode::Certain
        } else if theta <= GAP_SAMPLING_MAX_THETA {
            ArrivalMode::Gap
        } else {
            ArrivalMode::PerSource
        };
        ArrivalSampler {
            sources,
            mode,
            next_index: 0,
            theta_bits: bernoulli_bits(theta.min(1.0)),
            inv_log_q: 1.0 / (1.0 - theta).ln(),
        }
    }

    #[inline]
    fn begin_slot(&mut self, rng: &mut SimRng) {
        if let ArrivalMode::Gap = self.mode {
            self.next_index = self.gap(rng);
        }
    }

    #[inline(always)]
    fn next(&mut self, i: usize, rng: &mut SimRng) -> bool {
        match self.mode {
            ArrivalMode::Certain => true,
            ArrivalMode::PerSource => rng.next_u64() < self.theta_bits,
            ArrivalMode::Gap => {
                if i == self.next_index {
                    self.next_index = i + 1 + self.gap(rng);
                    true
                } else {
                    false
                }
            }
        }
    }

    /// Geometric(theta) gap: number of non-arriving sources to skip.
    #[inline]
    fn gap(&self, rng: &mut SimRng) -> usize {
        let u = 1.0 - rng.next_f64(); // (0, 1]
        let g = u.ln() * self.inv_log_q;
        if g >= self.sources as f64 {
            self.sources // beyond the row: no arrival this slot
        } else {
            g as usize
        }
    }
}
