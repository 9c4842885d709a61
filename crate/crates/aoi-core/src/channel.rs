//! Slot-level channel resolution and the feedback all sources observe.

use crate::rng::SimRng;

/// Outcome of one slot on the shared medium. At most one packet goes
/// through per slot, so the delivery vector is carried as the index of
/// the delivering source, if any.
///
/// Exactly one of delivery / collision / idle holds:
/// `delivered.is_some()` implies `!collision && !idle`; `collision` means
/// the slot was consumed without a delivery while at least one source
/// attempted; `idle` means nobody attempted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotOutcome {
    pub delivered: Option<u32>,
    pub collision: bool,
    pub idle: bool,
}

impl SlotOutcome {
    pub const IDLE: SlotOutcome = SlotOutcome { delivered: None, collision: false, idle: true };

    pub fn delivery(source: u32) -> SlotOutcome {
        SlotOutcome { delivered: Some(source), collision: false, idle: false }
    }

    pub const COLLISION: SlotOutcome = SlotOutcome { delivered: None, collision: true, idle: false };

    /// Per-source delivery indicator.
    #[inline]
    pub fn delivered_for(&self, source: usize) -> bool {
        self.delivered == Some(source as u32)
    }
}

/// Resolve a slot from per-source transmit flags: a lone transmitter
/// delivers, two or more collide, none is an idle slot.
pub fn resolve_slot(transmit: &[bool]) -> SlotOutcome {
    let mut first = None;
    let mut count = 0u32;
    for (i, &t) in transmit.iter().enumerate() {
        if t {
            count += 1;
            if first.is_none() {
                first = Some(i as u32);
            }
            if count > 1 {
                return SlotOutcome::COLLISION;
            }
        }
    }
    match (count, first) {
        (1, Some(i)) => SlotOutcome::delivery(i),
        _ => SlotOutcome::IDLE,
    }
}

/// Same resolution over a list of transmitting source indices.
#[inline]
pub fn resolve_transmitters(transmitters: &[u32]) -> SlotOutcome {
    match transmitters {
        [] => SlotOutcome::IDLE,
        [i] => SlotOutcome::delivery(*i),
        _ => SlotOutcome::COLLISION,
    }
}

/// Idealized contention-free technology of a given per-slot success
/// probability: when any source is active, the slot delivers one of them
/// (chosen uniformly) with probability `success_prob`, and is otherwise
/// wasted. A wasted slot reports `collision = true` so feedback-driven
/// policies see a binary busy/free signal.
pub fn resolve_slot_idealized(active: &[bool], success_prob: f64, rng: &mut SimRng) -> SlotOutcome {
    let indices: Vec<u32> = active
        .iter()
        .enumerate()
        .filter_map(|(i, &a)| a.then_some(i as u32))
        .collect();
    resolve_active_idealized(&indices, success_prob, rng)
}

/// `resolve_slot_idealized` over a prebuilt active index list.
#[inline]
pub fn resolve_active_idealized(active: &[u32], success_prob: f64, rng: &mut SimRng) -> SlotOutcome {
    if active.is_empty() {
        return SlotOutcome::IDLE;
    }
    if rng.bernoulli(success_prob) {
        SlotOutcome::delivery(active[rng.index(active.len())])
    } else {
        SlotOutcome::COLLISION
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lone_transmitter_delivers() {
        let out = resolve_slot(&[true, false, false]);
        assert_eq!(out, SlotOutcome::delivery(0));
    }

    #[test]
    fn two_attempts_collide() {
        let out = resolve_slot(&[true, true, false]);
        assert_eq!(out, SlotOutcome::COLLISION);
        assert_eq!(out.delivered, None);
    }

    #[test]
    fn empty_slot_is_idle() {
        let out = resolve_slot(&[false, false, false]);
        assert_eq!(out, SlotOutcome::IDLE);
        assert!(!out.collision);
    }

    #[test]
    fn idealized_idle_when_no_active() {
        let mut rng = SimRng::new(1);
        assert_eq!(resolve_slot_idealized(&[false, false], 0.8, &mut rng), SlotOutcome::IDLE);
    }

    #[test]
    fn idealized_certain_success_single_active() {
        let mut rng = SimRng::new(2);
        assert_eq!(resolve_slot_idealized(&[true, false], 1.0, &mut rng), SlotOutcome::delivery(0));
    }

    #[test]
    fn idealized_uniform_choice_frequency() {
        // Expected values from the law of large numbers over the uniform
        // pick: each of three active sources is chosen 1/3 of the time.
        let mut rng = SimRng::new(3);
        let mut counts = [0u32; 3];
        let draws = 100_000;
        for _ in 0..draws {
            let out = resolve_slot_idealized(&[true, true, true], 1.0, &mut rng);
            counts[out.delivered.unwrap() as usize] += 1;
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.01, "freq = {freq}");
        }
    }

    #[test]
    fn idealized_wasted_slot_reports_collision() {
        let mut rng = SimRng::new(4);
        let out = resolve_slot_idealized(&[true, true], 0.0, &mut rng);
        assert_eq!(out, SlotOutcome::COLLISION);
    }
}
