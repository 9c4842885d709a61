//! Age-gain distribution recursions, thinning thresholds, stationary fixed
//! points, slot probabilities, lower bounds, and asymptotic age values.
//!
//! Everything here is a pure function of its arguments. Distributions are
//! truncated at a configurable order `N`; mass that would land beyond `N`
//! is lumped into bucket `N` so totals are conserved.

use std::f64::consts::E;

use crate::policy::PolicyKind;

/// Entries below this are flushed to zero during propagation. Keeps long
/// runs out of subnormal arithmetic and bounds the live support; the
/// flushed dust is reabsorbed by the bucket-N lump so totals still add up.
const FLUSH: f64 = 1e-60;

/// Forward-iteration cap for the stationary fixed point.
pub const FIXED_POINT_MAX_ITERS: u64 = 1_000_000;

/// Default L1 tolerance for the stationary fixed point.
pub const FIXED_POINT_DEFAULT_TOL: f64 = 1e-10;

/// Damping factor of the fixed-point iteration.
const FIXED_POINT_DAMPING: f64 = 0.5;

/// Capacity upper bound of the collision channel with feedback, used in
/// the distributed lower-bound overlay.
pub const RA_FEEDBACK_CAPACITY_BOUND: f64 = 0.568;

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum ThinningError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("fixed point did not converge; last L1 residual {residual}")]
    Convergence { residual: f64 },
    #[error("no asymptotic age value for policy {0}")]
    Unsupported(PolicyKind),
}

/// Expected fraction of sources per age-gain order, truncated at order N.
/// `ell[m]` is the mass of m-order sources; entries are nonnegative and
/// sum to one (tail beyond N lumped into the last bucket).
#[derive(Clone, Debug, PartialEq)]
pub struct AgeGainDistribution {
    pub ell: Vec<f64>,
}

impl AgeGainDistribution {
    /// All mass at order zero (every source synchronized fresh).
    pub fn point_mass_at_zero(truncation: usize) -> Self {
        let mut ell = vec![0.0; truncation + 1];
        ell[0] = 1.0;
        AgeGainDistribution { ell }
    }

    pub fn truncation(&self) -> usize {
        self.ell.len() - 1
    }

    pub fn total_mass(&self) -> f64 {
        self.ell.iter().sum()
    }

    /// Tail mass at or above `order`.
    pub fn tail_mass(&self, order: usize) -> f64 {
        self.ell[order.min(self.ell.len())..].iter().rev().sum()
    }
}

/// Expected fraction of sources that just moved up to each order after an
/// arrival step. Index 0 is unused and kept zero so indices line up with
/// the distribution. Totals never exceed the arrival rate.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalMassVector {
    pub a: Vec<f64>,
}

impl ArrivalMassVector {
    pub fn total_mass(&self) -> f64 {
        self.a.iter().sum()
    }

    pub fn tail_mass(&self, order: usize) -> f64 {
        self.a[order.min(self.a.len())..].iter().rev().sum()
    }
}

/// In-place arrival propagation step.
///
/// `ell` and `a` have identical length `n + 1`. On entry, entries of `ell`
/// above `hi` must be zero. Writes the post-arrival distribution into
/// `ell`, the per-order arrival mass into `a` (index 0 zeroed), and
/// returns the new support upper bound.
///
/// The recursion for `a` is evaluated as `a[m+1] = (1-t)a[m] + t^2 ell[m]`,
/// which telescopes the defining geometric sum exactly. The remainder
/// `t * total - sum(a[1..n])` is lumped into `a[n]`, which makes the
/// total arrival mass exactly `theta * total` and conserves `sum(ell)`.
pub fn propagate_step(ell: &mut [f64], a: &mut [f64], theta: f64, hi: usize) -> usize {
    let n = ell.len() - 1;
    debug_assert_eq!(a.len(), ell.len());
    debug_assert!(n >= 1);
    debug_assert!((0.0..=1.0).contains(&theta));
    debug_assert!(hi <= n);

    a[0] = 0.0;
    if theta == 0.0 {
        a[1..].fill(0.0);
        return hi;
    }

    let total: f64 = ell.iter().sum();
    let q = 1.0 - theta;
    let t2 = theta * theta;

    let mut a_run = 0.0f64;
    let mut a_sum = 0.0f64;
    let mut prev_ell = ell[0];
    ell[0] *= q;
    let mut new_hi = 0;

    let mut m = 1;
    while m < n {
        a_run = q * a_run + t2 * prev_ell;
        if a_run < FLUSH {
            a_run = 0.0;
            // Past the live support the chain is pure decay; once flushed
            // it stays zero, so the rest of the row is zero fill.
            if m > hi {
                a[m..n].fill(0.0);
                break;
            }
        }
        prev_ell = ell[m];
        a[m] = a_run;
        a_sum += a_run;
        let v = q * ell[m] + a_run;
        ell[m] = if v < FLUSH { 0.0 } else { v };
        if ell[m] > 0.0 {
            new_hi = m;
        }
        m += 1;
    }

    let a_lump = (theta * total - a_sum).max(0.0);
    a[n] = a_lump;
    let v = q * ell[n] + a_lump;
    ell[n] = if v < FLUSH { 0.0 } else { v };
    if ell[n] > 0.0 {
        new_hi = n;
    }
    new_hi
}

/// Arrival propagation over one slot: every source gains a fresh packet
/// with probability `theta`; a source of order `j` that receives one
/// jumps to order `j + (source age)`, geometrically distributed.
/// Returns the post-arrival distribution and the per-order arrival mass.
pub fn propagate_arrival_distribution(
    dist: &AgeGainDistribution,
    theta: f64,
) -> (AgeGainDistribution, ArrivalMassVector) {
    let mut ell = dist.ell.clone();
    let mut a = vec![0.0; ell.len()];
    let hi = ell.len() - 1;
    propagate_step(&mut ell, &mut a, theta, hi);
    (AgeGainDistribution { ell }, ArrivalMassVector { a })
}

/// Largest threshold whose arrival tail mass still meets `target`,
/// scanning no higher than `hi`. Falls back to 1 when no order qualifies,
/// which admits every packet.
pub fn threshold_from_tail(a: &[f64], hi: usize, target: f64) -> usize {
    debug_assert!(target > 0.0);
    let mut tail = 0.0;
    let mut t = hi.min(a.len() - 1);
    while t >= 1 {
        tail += a[t];
        if tail >= target {
            return t;
        }
        t -= 1;
    }
    1
}

/// Thinning threshold rule: the largest order whose incoming arrival mass
/// keeps the effective arrival rate at or above `target` (callers pass
/// `1/(eM)` for the slotted-ALOHA technology).
pub fn adaptive_threshold(a: &ArrivalMassVector, target: f64) -> usize {
    threshold_from_tail(&a.a, a.a.len() - 1, target)
}

/// In-place post-feedback tail update. On a busy-but-unresolved slot the
/// estimate is left alone (`collision`); otherwise the delivery budget is
/// removed from the at-or-above-threshold tail proportionally and credited
/// to order zero. Per-order removal is `r_m * budget` with
/// `r_m = ell[m] / tail`, clipped at the available mass; since the clip
/// ratio `budget / tail` is common to every tail entry, the update is a
/// uniform tail scaling and conserves mass exactly.
pub fn thin_tail_step(ell: &mut [f64], threshold: usize, budget: f64, hi: usize) {
    let n = ell.len() - 1;
    let threshold = threshold.max(1);
    if threshold > hi.min(n) {
        return;
    }
    let tail: f64 = ell[threshold..=hi].iter().rev().sum();
    if tail <= 0.0 {
        return;
    }
    let scale = (1.0 - budget / tail).max(0.0);
    if scale == 0.0 {
        ell[threshold..=hi].fill(0.0);
        ell[0] += tail;
        return;
    }
    for v in &mut ell[threshold..=hi] {
        *v *= scale;
    }
    ell[0] += tail * (1.0 - scale);
}

/// Post-feedback estimate update for the adaptive policy: identity on
/// collision slots; on collision-free slots the expected delivered mass
/// (one delivery in two such slots, i.e. a `1/(2M)` budget) leaves the
/// tail and re-enters at order zero.
pub fn post_feedback_update(
    dist_plus: &AgeGainDistribution,
    threshold: usize,
    collision: bool,
    sources: usize,
) -> AgeGainDistribution {
    let mut ell = dist_plus.ell.clone();
    if !collision {
        let hi = ell.len() - 1;
        thin_tail_step(&mut ell, threshold, 1.0 / (2.0 * sources as f64), hi);
    }
    AgeGainDistribution { ell }
}

/// Closed-form stationary thinning threshold for the slotted-ALOHA
/// technology: `max(1, floor(eM - 1/theta + 1))`.
pub fn fixed_threshold(sources: usize, theta: f64) -> u64 {
    let v = (E * sources as f64 - 1.0 / theta + 1.0).floor();
    if v < 1.0 {
        1
    } else {
        v as u64
    }
}

/// Closed-form stationary threshold for a technology of sum throughput
/// `capacity`: `max(1, floor(M/C - 1/theta + 1))`. Reduces to
/// `fixed_threshold` at `capacity = 1/e`.
pub fn generalized_threshold(sources: usize, theta: f64, capacity: f64) -> Result<u64, ThinningError> {
    if !(capacity > 0.0) {
        return Err(ThinningError::Domain(format!(
            "capacity must be positive, got {capacity}"
        )));
    }
    let v = (sources as f64 / capacity - 1.0 / theta + 1.0).floor();
    Ok(if v < 1.0 { 1 } else { v as u64 })
}

/// Stationary age-gain distribution of the thinned system, found by damped
/// forward iteration of the propagation step composed with the expected
/// delivery update (budget `1/(eM)` removed from the tail per slot).
/// Requires the thinning regime `M * theta > 1/e` and a truncation that
/// clears the stationary threshold.
pub fn stationary_fixed_point(
    sources: usize,
    theta: f64,
    truncation: usize,
    tol: f64,
) -> Result<(AgeGainDistribution, ArrivalMassVector), ThinningError> {
    if sources == 0 {
        return Err(ThinningError::Domain("sources must be >= 1".into()));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(ThinningError::Domain(format!("theta must be in (0, 1], got {theta}")));
    }
    let m = sources as f64;
    if m * theta <= 1.0 / E {
        return Err(ThinningError::Domain(format!(
            "thinning regime requires M*theta > 1/e, got {}",
            m * theta
        )));
    }
    let tstar = fixed_threshold(sources, theta) as usize;
    if truncation < tstar {
        return Err(ThinningError::Domain(format!(
            "truncation {truncation} is below the stationary threshold {tstar}"
        )));
    }

    let budget = 1.0 / (E * m);
    let mut x = AgeGainDistribution::point_mass_at_zero(truncation).ell;
    let mut y = vec![0.0; truncation + 1];
    let mut a = vec![0.0; truncation + 1];
    let mut hi = 0usize;

    let mut residual = f64::INFINITY;
    for _ in 0..FIXED_POINT_MAX_ITERS {
        y.copy_from_slice(&x);
        let step_hi = propagate_step(&mut y, &mut a, theta, hi);
        thin_tail_step(&mut y, tstar, budget, step_hi);
        hi = step_hi;

        residual = 0.0;
        for (xi, &yi) in x.iter_mut().zip(y.iter()) {
            let z = *xi + FIXED_POINT_DAMPING * (yi - *xi);
            residual += (z - *xi).abs();
            *xi = z;
        }
        if residual < tol {
            let mut ell = x.clone();
            let mut a_star = vec![0.0; truncation + 1];
            propagate_step(&mut ell, &mut a_star, theta, hi);
            return Ok((AgeGainDistribution { ell: x }, ArrivalMassVector { a: a_star }));
        }
    }
    Err(ThinningError::Convergence { residual })
}

/// Asymptotic per-slot probabilities of a stabilized slotted-ALOHA system
/// at attempt rate `G`: success `G e^-G`, idle `e^-G`, collision the
/// remainder. The three always sum to one.
pub fn aloha_slot_probabilities(attempt_rate: f64) -> (f64, f64, f64) {
    debug_assert!(attempt_rate >= 0.0);
    let p_success = attempt_rate * (-attempt_rate).exp();
    let p_idle = (-attempt_rate).exp();
    let p_collision = 1.0 - (p_success + p_idle);
    (p_success, p_idle, p_collision)
}

/// Capacity lower bound on the normalized average age:
/// `1/(2C) + 1/(2M)` for any policy on a channel of sum capacity `C`.
pub fn lower_bound_capacity(sources: usize, capacity: f64) -> f64 {
    1.0 / (2.0 * capacity) + 1.0 / (2.0 * sources as f64)
}

/// Arrival-rate lower bound on the normalized average age: `1/(M theta)`;
/// sampling no faster than `theta` caps freshness regardless of policy.
pub fn lower_bound_arrival(sources: usize, theta: f64) -> Result<f64, ThinningError> {
    if !(theta > 0.0) {
        return Err(ThinningError::Domain("theta must be positive (age is unbounded at 0)".into()));
    }
    Ok(1.0 / (sources as f64 * theta))
}

/// Large-system age limit of a policy, where one exists: `1/eta` for
/// stabilized slotted ALOHA below capacity (`eta` the limiting sum arrival
/// rate), `e/2` for stationary thinning over ALOHA, and `1/(2C)` for
/// stationary thinning over a throughput-`C` technology.
pub fn asymptotic_naaoi(policy: PolicyKind, param: f64) -> Result<f64, ThinningError> {
    match policy {
        PolicyKind::Aloha => {
            if !(param > 0.0 && param <= 1.0 / E) {
                return Err(ThinningError::Domain(format!(
                    "stabilized ALOHA limit holds for eta in (0, 1/e], got {param}"
                )));
            }
            Ok(1.0 / param)
        }
        PolicyKind::Sat => Ok(E / 2.0),
        PolicyKind::Gsat => {
            if !(param > 0.0 && param <= 1.0) {
                return Err(ThinningError::Domain(format!(
                    "capacity must be in (0, 1], got {param}"
                )));
            }
            Ok(1.0 / (2.0 * param))
        }
        other => Err(ThinningError::Unsupported(other)),
    }
}
