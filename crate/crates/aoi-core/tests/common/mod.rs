//! Shared helpers for the integration suites: an exact enumeration oracle
//! for the arrival-propagation recursion, and a FIFO-buffer variant of
//! the age dynamics for the buffer-dominance check.

#![allow(dead_code)]

use std::collections::VecDeque;

use aoi_core::rng::SimRng;

/// Exact expected post-arrival distribution for `orders[i]`-order sources,
/// by enumerating every arrival pattern and every source-age value up to
/// the truncation (ages past it land in the last bucket). Returns the
/// expected node distribution and the expected arrival mass per order.
///
/// This is the independent route against the propagation recursion: no
/// geometric telescoping, just the product law of Bernoulli(theta)
/// arrivals and the stationary source-age distribution
/// `P(w = j) = theta (1-theta)^(j-1)`.
pub fn propagate_oracle(orders: &[usize], truncation: usize, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let m = orders.len();
    let mut ell = vec![0.0; truncation + 1];
    let mut arrival_mass = vec![0.0; truncation + 1];
    let mut landings = vec![(0usize, false); m];
    enumerate(orders, truncation, theta, 0, 1.0, &mut landings, &mut ell, &mut arrival_mass);
    (ell, arrival_mass)
}

fn enumerate(
    orders: &[usize],
    truncation: usize,
    theta: f64,
    i: usize,
    prob: f64,
    landings: &mut Vec<(usize, bool)>,
    ell: &mut [f64],
    arrival_mass: &mut [f64],
) {
    let m = orders.len();
    if i == m {
        for &(order, arrived) in landings.iter() {
            ell[order] += prob / m as f64;
            if arrived {
                arrival_mass[order] += prob / m as f64;
            }
        }
        return;
    }
    // No arrival: the order is unchanged.
    landings[i] = (orders[i], false);
    enumerate(orders, truncation, theta, i + 1, prob * (1.0 - theta), landings, ell, arrival_mass);
    // Arrival with source age w: the order jumps to orders[i] + w.
    for w in 1..=truncation {
        let p_w = theta * (1.0 - theta).powi(w as i32 - 1);
        landings[i] = ((orders[i] + w).min(truncation), true);
        enumerate(orders, truncation, theta, i + 1, prob * theta * p_w, landings, ell, arrival_mass);
    }
    // Source ages past the truncation all land in the last bucket.
    let p_tail = (1.0 - theta).powi(truncation as i32);
    landings[i] = (truncation, true);
    enumerate(orders, truncation, theta, i + 1, prob * theta * p_tail, landings, ell, arrival_mass);
}

/// Infinite-FIFO-buffer variant of the per-source age dynamics: arrivals
/// queue up, transmissions send the head-of-line packet.
pub struct FifoSources {
    pub h: Vec<u64>,
    queues: Vec<VecDeque<u64>>,
}

impl FifoSources {
    pub fn new(m: usize) -> Self {
        FifoSources { h: vec![1; m], queues: vec![VecDeque::new(); m] }
    }

    pub fn apply_arrivals(&mut self, slot: u64, arrivals: &[bool]) {
        for (q, &a) in self.queues.iter_mut().zip(arrivals) {
            if a {
                q.push_back(slot);
            }
        }
    }

    pub fn nonempty(&self, i: usize) -> bool {
        !self.queues[i].is_empty()
    }

    /// End-of-slot update: the delivered source's destination age drops to
    /// its head-of-line packet's age plus one; everyone else ages.
    pub fn apply_delivery(&mut self, slot: u64, delivered: Option<usize>) {
        for i in 0..self.h.len() {
            if delivered == Some(i) {
                let t_arrival = self.queues[i].pop_front().expect("delivery from empty queue");
                self.h[i] = slot - t_arrival + 1;
            } else {
                self.h[i] += 1;
            }
        }
    }
}

/// Deterministic Bernoulli matrix draw helper shared by coupled runs.
pub fn draw_matrix(rng: &mut SimRng, slots: usize, m: usize, p: f64) -> Vec<Vec<bool>> {
    (0..slots).map(|_| (0..m).map(|_| rng.bernoulli(p)).collect()).collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn stderr(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}
