//! Per-slot statistics and run-level summaries.

use serde::Serialize;

use crate::channel::SlotOutcome;

/// Accumulates one run's slot statistics. Every accounted slot is exactly
/// one of delivery/collision/idle, so those counters always sum to
/// `slot_count`. Ages are sampled after arrivals, before transmission.
#[derive(Clone, Debug)]
pub struct MetricsAccumulator {
    slot_count: u64,
    age_sum: u64,
    deliveries: u64,
    collisions: u64,
    idles: u64,
    per_source_deliveries: Vec<u64>,
    burn_in: u64,
    slots_seen: u64,
    time_series: Option<TimeSeries>,
}

/// Sampled (slot, mean destination age) trace at a fixed stride.
#[derive(Clone, Debug, Default)]
pub struct TimeSeries {
    pub stride: u64,
    pub samples: Vec<(u64, f64)>,
}

/// Finalized per-run metrics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    pub naaoi: f64,
    pub throughput: f64,
    pub p_success: f64,
    pub p_idle: f64,
    pub p_collision: f64,
    pub slot_count: u64,
    pub deliveries: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("no slots accumulated (horizon consumed by burn-in?)")]
pub struct EmptyRunError;

impl MetricsAccumulator {
    pub fn new(sources: usize) -> Self {
        MetricsAccumulator {
            slot_count: 0,
            age_sum: 0,
            deliveries: 0,
            collisions: 0,
            idles: 0,
            per_source_deliveries: vec![0; sources],
            burn_in: 0,
            slots_seen: 0,
            time_series: None,
        }
    }

    /// Exclude the first `slots` slots from every statistic.
    pub fn with_burn_in(mut self, slots: u64) -> Self {
        self.burn_in = slots;
        self
    }

    /// Record (slot, mean age) every `stride` accounted slots.
    pub fn with_time_series(mut self, stride: u64) -> Self {
        self.time_series = Some(TimeSeries { stride: stride.max(1), samples: Vec::new() });
        self
    }

    /// Fold in one slot: `slot_age_sum` is the sum of destination ages at
    /// the post-arrival instant, `outcome` the slot's channel resolution.
    #[inline]
    pub fn accumulate(&mut self, slot_age_sum: u64, outcome: &SlotOutcome) {
        self.slots_seen += 1;
        if self.slots_seen <= self.burn_in {
            return;
        }
        self.slot_count += 1;
        self.age_sum += slot_age_sum;
        if let Some(i) = outcome.delivered {
            self.deliveries += 1;
            self.per_source_deliveries[i as usize] += 1;
        } else if outcome.collision {
            self.collisions += 1;
        } else {
            self.idles += 1;
        }
        if let Some(ts) = &mut self.time_series {
            if self.slot_count % ts.stride == 0 {
                let mean_age = slot_age_sum as f64 / self.per_source_deliveries.len() as f64;
                ts.samples.push((self.slots_seen, mean_age));
            }
        }
    }

    /// Field-wise merge of another accumulator (replication reduction).
    pub fn merge(&mut self, other: &MetricsAccumulator) {
        assert_eq!(self.per_source_deliveries.len(), other.per_source_deliveries.len());
        self.slot_count += other.slot_count;
        self.age_sum += other.age_sum;
        self.deliveries += other.deliveries;
        self.collisions += other.collisions;
        self.idles += other.idles;
        for (a, b) in self.per_source_deliveries.iter_mut().zip(&other.per_source_deliveries) {
            *a += b;
        }
        self.slots_seen += other.slots_seen;
    }

    pub fn slot_count(&self) -> u64 {
        self.slot_count
    }

    pub fn age_sum(&self) -> u64 {
        self.age_sum
    }

    pub fn deliveries(&self) -> u64 {
        self.deliveries
    }

    pub fn per_source_deliveries(&self) -> &[u64] {
        &self.per_source_deliveries
    }

    pub fn time_series(&self) -> Option<&TimeSeries> {
        self.time_series.as_ref()
    }

    /// Normalized average age and slot-event frequencies over the
    /// accounted horizon: the age sum divided by `M^2 K`, throughput as
    /// deliveries per slot.
    pub fn finalize(&self, sources: usize) -> Result<RunMetrics, EmptyRunError> {
        if self.slot_count == 0 {
            return Err(EmptyRunError);
        }
        debug_assert_eq!(self.deliveries + self.collisions + self.idles, self.slot_count);
        let k = self.slot_count as f64;
        let m = sources as f64;
        Ok(RunMetrics {
            naaoi: self.age_sum as f64 / (m * m * k),
            throughput: self.deliveries as f64 / k,
            p_success: self.deliveries as f64 / k,
            p_idle: self.idles as f64 / k,
            p_collision: self.collisions as f64 / k,
            slot_count: self.slot_count,
            deliveries: self.deliveries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SlotOutcome;

    #[test]
    fn constant_age_naaoi() {
        // M = 2, K = 3, every h_i(k) = 2: naaoi = 12 / (4 * 3) = 1.
        let mut acc = MetricsAccumulator::new(2);
        for _ in 0..3 {
            acc.accumulate(4, &SlotOutcome::IDLE);
        }
        let m = acc.finalize(2).unwrap();
        assert_eq!(m.naaoi, 1.0);
        assert_eq!(m.p_idle, 1.0);
        assert_eq!(m.throughput, 0.0);
    }

    #[test]
    fn counters_partition_slots() {
        let mut acc = MetricsAccumulator::new(2);
        acc.accumulate(5, &SlotOutcome::delivery(0));
        acc.accumulate(5, &SlotOutcome::COLLISION);
        acc.accumulate(5, &SlotOutcome::IDLE);
        acc.accumulate(5, &SlotOutcome::delivery(1));
        assert_eq!(acc.deliveries(), 2);
        assert_eq!(acc.per_source_deliveries(), &[1, 1]);
        let m = acc.finalize(2).unwrap();
        assert_eq!(m.throughput, 0.5);
        assert!((m.p_success + m.p_idle + m.p_collision - 1.0).abs() < 1e-15);
    }

    #[test]
    fn saturated_throughput_is_one() {
        let mut acc = MetricsAccumulator::new(1);
        for _ in 0..10 {
            acc.accumulate(1, &SlotOutcome::delivery(0));
        }
        assert_eq!(acc.finalize(1).unwrap().throughput, 1.0);
    }

    #[test]
    fn burn_in_skips_initial_slots() {
        let mut acc = MetricsAccumulator::new(1).with_burn_in(2);
        acc.accumulate(100, &SlotOutcome::COLLISION);
        acc.accumulate(100, &SlotOutcome::COLLISION);
        acc.accumulate(3, &SlotOutcome::IDLE);
        let m = acc.finalize(1).unwrap();
        assert_eq!(m.slot_count, 1);
        assert_eq!(m.naaoi, 3.0);
    }

    #[test]
    fn empty_run_is_an_error() {
        let acc = MetricsAccumulator::new(3);
        assert_eq!(acc.finalize(3), Err(EmptyRunError));
    }

    #[test]
    fn merge_is_fieldwise_addition() {
        let mut a = MetricsAccumulator::new(2);
        a.accumulate(4, &SlotOutcome::delivery(0));
        let mut b = MetricsAccumulator::new(2);
        b.accumulate(6, &SlotOutcome::IDLE);
        b.accumulate(2, &SlotOutcome::delivery(1));
        a.merge(&b);
        assert_eq!(a.slot_count(), 3);
        assert_eq!(a.age_sum(), 12);
        assert_eq!(a.per_source_deliveries(), &[1, 1]);
    }

    #[test]
    fn time_series_sampling() {
        let mut acc = MetricsAccumulator::new(2).with_time_series(2);
        for k in 1..=6u64 {
            acc.accumulate(2 * k, &SlotOutcome::IDLE);
        }
        let ts = acc.time_series().unwrap();
        assert_eq!(ts.samples.len(), 3);
        assert_eq!(ts.samples[0], (2, 2.0));
    }
}
