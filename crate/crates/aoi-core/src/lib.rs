//! Discrete-time simulator and analytical toolkit for age of information
//! over a slotted random-access collision channel.
//!
//! A shared medium carries status updates from `M` sources to one
//! monitor. Packets arrive per source as Bernoulli(theta) per slot into a
//! unit buffer (fresh packets replace stale ones); simultaneous
//! transmissions collide; everyone hears binary collision feedback. The
//! crate provides:
//!
//! - [`age`]: per-source age recursions (destination age, source age,
//!   age-gain) and the unit-buffer state.
//! - [`channel`]: slot resolution for the collision channel and an
//!   idealized contention-free technology.
//! - [`policy`]: max-weight scheduling, stabilized slotted ALOHA,
//!   adaptive and stationary age-based thinning, generalized thinning,
//!   and a randomized baseline.
//! - [`thinning`]: the analytical layer — age-gain distribution
//!   recursions, thinning thresholds in closed form, stationary fixed
//!   points, slot probabilities, lower bounds, asymptotic age values.
//! - [`metrics`]: per-slot accumulation and normalized-average-age
//!   summaries.
//! - [`sim`]: the slot loop.
//! - [`harness`] / [`presets`]: seeded, parallel experiment running with
//!   CSV/JSON output and bundled reference sweeps.

pub mod age;
pub mod channel;
pub mod harness;
pub mod metrics;
pub mod policy;
pub mod presets;
pub mod rng;
pub mod sim;
pub mod thinning;

pub use age::{apply_arrivals, apply_deliveries, SourceState};
pub use channel::{resolve_slot, resolve_slot_idealized, SlotOutcome};
pub use harness::{run_experiment, run_sweep, ExperimentConfig, RunRecord};
pub use metrics::{MetricsAccumulator, RunMetrics};
pub use policy::{AlohaState, Policy, PolicyKind};
pub use presets::{run_preset, PresetName, PresetScale};
pub use rng::SimRng;
pub use sim::{run_simulation, SimOutput};
pub use thinning::{
    adaptive_threshold, aloha_slot_probabilities, asymptotic_naaoi, fixed_threshold,
    generalized_threshold, lower_bound_arrival, lower_bound_capacity,
    propagate_arrival_distribution, stationary_fixed_point, AgeGainDistribution,
    ArrivalMassVector,
};
