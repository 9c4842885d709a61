//! Per-source age state and the slot recursions that drive it.
//!
//! Each source tracks the destination age `h` (slots since the newest
//! delivered packet was generated), the source age `w` (slots since the
//! newest generated packet), and a unit buffer. New packets replace the
//! buffered one. The age-gain `h - w` is the drop in destination age a
//! successful delivery would produce right now.

use crate::channel::SlotOutcome;

/// Age state of one source. Invariants on reachable states:
/// `h >= 1`, `w >= 0`, and `h >= w` (so the age-gain is never negative).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceState {
    /// Destination age in slots.
    pub h: u64,
    /// Source age in slots; 0 exactly in the slot a packet arrives.
    pub w: u64,
    /// Unit buffer occupancy.
    pub has_packet: bool,
}

impl SourceState {
    /// Initial point: fresh system, empty buffer.
    pub fn new() -> Self {
        SourceState { h: 1, w: 0, has_packet: false }
    }

    /// Age-gain `delta = h - w`: how much a delivery would reduce the
    /// destination age.
    #[inline(always)]
    pub fn age_gain(&self) -> u64 {
        debug_assert!(self.h >= self.w);
        self.h - self.w
    }

    /// Start-of-slot arrival step: a fresh packet resets `w` and replaces
    /// whatever the buffer held; otherwise the source ages by one slot.
    /// `h` is untouched (arrivals precede transmission).
    #[inline(always)]
    pub fn apply_arrival(&mut self, arrived: bool) {
        if arrived {
            self.w = 0;
            self.has_packet = true;
        } else {
            self.w += 1;
        }
    }

    /// End-of-slot delivery step, producing next-slot ages: a delivered
    /// packet sets `h` to its age plus the unit transmission delay and
    /// frees the buffer; otherwise the destination ages by one slot.
    #[inline(always)]
    pub fn apply_delivery(&mut self, delivered: bool) {
        if delivered {
            self.h = self.w + 1;
            self.has_packet = false;
        } else {
            self.h += 1;
        }
    }
}

impl Default for SourceState {
    fn default() -> Self {
        Self::new()
    }
}

/// Fresh states for `m` sources.
pub fn initial_states(m: usize) -> Vec<SourceState> {
    vec![SourceState::new(); m]
}

/// Apply one slot of Bernoulli arrivals to every source.
pub fn apply_arrivals(states: &mut [SourceState], arrivals: &[bool]) {
    debug_assert_eq!(states.len(), arrivals.len());
    for (s, &a) in states.iter_mut().zip(arrivals) {
        s.apply_arrival(a);
    }
}

/// Delivery flagged for a source with an empty buffer: the channel claims
/// a packet the source does not hold, so the run is corrupt.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("simulation integrity violation: delivery from empty source {source_index}")]
pub struct IntegrityError {
    pub source_index: usize,
}

/// Apply a slot outcome's deliveries to every source, advancing `h`.
pub fn apply_deliveries(states: &mut [SourceState], outcome: &SlotOutcome) -> Result<(), IntegrityError> {
    if let Some(i) = outcome.delivered {
        let i = i as usize;
        if !states[i].has_packet {
            return Err(IntegrityError { source_index: i });
        }
    }
    for (i, s) in states.iter_mut().enumerate() {
        s.apply_delivery(outcome.delivered == Some(i as u32));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SlotOutcome;

    fn st(h: u64, w: u64, has_packet: bool) -> SourceState {
        SourceState { h, w, has_packet }
    }

    #[test]
    fn arrival_resets_source_age_and_fills_buffer() {
        let mut s = st(4, 2, true);
        s.apply_arrival(true);
        assert_eq!(s, st(4, 0, true));

        let mut s = st(4, 2, false);
        s.apply_arrival(false);
        assert_eq!(s, st(4, 3, false));

        // Replacing an already-fresh packet is a no-op on the ages.
        let mut s = st(1, 0, true);
        s.apply_arrival(true);
        assert_eq!(s, st(1, 0, true));
    }

    #[test]
    fn delivery_drops_destination_age_to_packet_age() {
        let mut s = st(4, 2, true);
        s.apply_delivery(true);
        assert_eq!(s.h, 3);
        assert!(!s.has_packet);

        let mut s = st(4, 2, true);
        s.apply_delivery(false);
        assert_eq!(s.h, 5);

        // Fresh packet delivered: age floor of one slot.
        let mut s = st(1, 0, true);
        s.apply_delivery(true);
        assert_eq!(s.h, 1);
        assert!(!s.has_packet);
    }

    #[test]
    fn age_gain_is_h_minus_w() {
        assert_eq!(st(5, 2, true).age_gain(), 3);
        assert_eq!(st(3, 3, false).age_gain(), 0);
        assert_eq!(st(1, 0, false).age_gain(), 1);
    }

    #[test]
    fn delivery_from_empty_source_is_an_integrity_error() {
        let mut states = vec![st(3, 1, false)];
        let outcome = SlotOutcome { delivered: Some(0), collision: false, idle: false };
        assert_eq!(
            apply_deliveries(&mut states, &outcome),
            Err(IntegrityError { source_index: 0 })
        );
    }

    #[test]
    fn gain_stays_zero_between_delivery_and_next_arrival() {
        let mut s = st(7, 3, true);
        s.apply_delivery(true); // h = 4
        for _ in 0..5 {
            s.apply_arrival(false); // w catches up with h each slot
            assert_eq!(s.age_gain(), 0);
            s.apply_delivery(false);
        }
        s.apply_arrival(true);
        assert!(s.age_gain() > 0);
    }
}
