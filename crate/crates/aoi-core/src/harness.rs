//! Experiment harness: declarative configs, seeded replications run in
//! parallel, parameter sweeps, and CSV / summary-JSON output.
//!
//! Reproducibility contract: `(config, seed)` determines every output
//! byte except wall time. Replication `r` draws from the RNG stream
//! `SimRng::for_replication(seed, r)`, so records are independent of the
//! worker pool and are always emitted in replication order.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::policy::{AlohaState, Policy, PolicyKind, Technology};
use crate::rng::SimRng;
use crate::sim::{run_simulation, SimError};
use crate::thinning::{
    asymptotic_naaoi, fixed_threshold, generalized_threshold, lower_bound_arrival,
    lower_bound_capacity, ThinningError, RA_FEEDBACK_CAPACITY_BOUND,
};

/// Exact column set of every run CSV.
pub const CSV_HEADER: &str = "policy,M,theta,K,seed,replication,naaoi,throughput,p_success,p_idle,p_collision,threshold,lb_arrival,lb_capacity,asymptote";

/// Load term fed to the pseudo-Bayesian estimate of the plain ALOHA
/// policy: the raw sum arrival rate, or clamped at the `1/e` capacity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadMode {
    Raw,
    #[default]
    Clamped,
}

impl FromStr for LoadMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(LoadMode::Raw),
            "clamped" => Ok(LoadMode::Clamped),
            other => Err(format!("unknown load mode '{other}' (expected raw|clamped)")),
        }
    }
}

/// Declarative description of one experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub policy: PolicyKind,
    pub sources: usize,
    pub theta: f64,
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: u32,
    /// Age-gain distribution truncation; defaults to `4 * ceil(e * M)`.
    #[serde(default)]
    pub truncation: Option<usize>,
    /// Technology sum throughput; required by (and only by) `gsat`.
    #[serde(default)]
    pub capacity: Option<f64>,
    #[serde(default)]
    pub load_mode: LoadMode,
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_replications() -> u32 {
    1
}

impl ExperimentConfig {
    pub fn new(policy: PolicyKind, sources: usize, theta: f64, horizon: u64) -> Self {
        ExperimentConfig {
            policy,
            sources,
            theta,
            horizon,
            seed: 0,
            replications: 1,
            truncation: None,
            capacity: None,
            load_mode: LoadMode::default(),
            burn_in: 0,
            out: None,
        }
    }

    pub fn effective_truncation(&self) -> usize {
        self.truncation
            .unwrap_or_else(|| 4 * (std::f64::consts::E * self.sources as f64).ceil() as usize)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        fn fail(field: &str, message: String) -> Result<(), HarnessError> {
            Err(HarnessError::Config { field: field.into(), message })
        }
        if self.sources < 1 {
            return fail("sources", "must be >= 1".into());
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return fail("theta", format!("must be in (0, 1], got {}", self.theta));
        }
        if self.horizon < 1 {
            return fail("horizon", "must be >= 1".into());
        }
        if self.replications < 1 {
            return fail("replications", "must be >= 1".into());
        }
        if self.burn_in >= self.horizon {
            return fail("burn_in", format!("{} leaves no slots of horizon {}", self.burn_in, self.horizon));
        }
        if let Some(n) = self.truncation {
            if n < 2 {
                return fail("truncation", "must be >= 2".into());
            }
        }
        match (self.policy, self.capacity) {
            (PolicyKind::Gsat, None) => return fail("capacity", "required for policy gsat".into()),
            (PolicyKind::Gsat, Some(c)) if !(c > 0.0 && c <= 1.0) => {
                return fail("capacity", format!("must be in (0, 1], got {c}"))
            }
            (PolicyKind::Gsat, Some(_)) => {}
            (_, Some(_)) => return fail("capacity", "only meaningful for policy gsat".into()),
            (_, None) => {}
        }
        Ok(())
    }

    /// Fresh policy state for one replication.
    pub fn build_policy(&self) -> Result<Policy, HarnessError> {
        let m = self.sources as f64;
        let arrival_load = m * self.theta;
        let capped_load = arrival_load.min(1.0 / std::f64::consts::E);
        Ok(match self.policy {
            PolicyKind::MaxWeight => Policy::MaxWeight,
            PolicyKind::Aloha => {
                let load = match self.load_mode {
                    LoadMode::Raw => arrival_load,
                    LoadMode::Clamped => capped_load,
                };
                Policy::Aloha(AlohaState::new(load, m))
            }
            PolicyKind::Sat => Policy::Sat {
                threshold: fixed_threshold(self.sources, self.theta),
                aloha: AlohaState::new(capped_load, m),
            },
            PolicyKind::Aat => Policy::Aat(Box::new(crate::policy::AatPolicy::new(
                self.sources,
                self.theta,
                self.effective_truncation(),
            ))),
            PolicyKind::Gsat => {
                let capacity = self.capacity.expect("validated");
                Policy::Gsat {
                    threshold: generalized_threshold(self.sources, self.theta, capacity)?,
                    technology: Technology::Idealized { success_prob: capacity },
                }
            }
            PolicyKind::Randomized => Policy::Randomized { p: 1.0 / m },
        })
    }

    /// Capacity constant of the lower-bound overlay for this policy: the
    /// technology throughput for `gsat`, 1 for the collision-free
    /// centralized scheduler, and the feedback-channel capacity bound for
    /// the ALOHA-class policies.
    pub fn bound_capacity(&self) -> f64 {
        match self.policy {
            PolicyKind::Gsat => self.capacity.unwrap_or(1.0),
            PolicyKind::MaxWeight => 1.0,
            _ => RA_FEEDBACK_CAPACITY_BOUND,
        }
    }

    fn asymptote(&self) -> Option<f64> {
        let param = match self.policy {
            PolicyKind::Aloha => self.sources as f64 * self.theta,
            PolicyKind::Gsat => self.capacity.unwrap_or(f64::NAN),
            _ => 0.0,
        };
        asymptotic_naaoi(self.policy, param).ok()
    }
}

/// One replication's aggregated output plus its analytical companions.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub policy: PolicyKind,
    pub sources: usize,
    pub theta: f64,
    pub horizon: u64,
    pub seed: u64,
    pub replication: u32,
    pub naaoi: f64,
    pub throughput: f64,
    pub p_success: f64,
    pub p_idle: f64,
    pub p_collision: f64,
    /// Fixed threshold, or the slot-average of the adaptive one.
    pub threshold: Option<f64>,
    pub lb_arrival: f64,
    pub lb_capacity: f64,
    pub asymptote: Option<f64>,
    /// Extra fields carried to the summary JSON, not the CSV.
    pub capacity: Option<f64>,
    pub active_fraction: Option<f64>,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt6).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.policy,
            self.sources,
            fmt6(self.theta),
            self.horizon,
            self.seed,
            self.replication,
            fmt6(self.naaoi),
            fmt6(self.throughput),
            fmt6(self.p_success),
            fmt6(self.p_idle),
            fmt6(self.p_collision),
            opt(self.threshold),
            fmt6(self.lb_arrival),
            fmt6(self.lb_capacity),
            opt(self.asymptote),
        )
    }
}

/// Floating-point CSV formatting: six significant digits, fixed notation.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let decimals = (5 - x.abs().log10().floor() as i32).clamp(0, 17) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid config: field '{field}': {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Thinning(#[from] ThinningError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Run every replication of one experiment. Deterministic given
/// `(config, seed)`; replications are dispatched over the rayon pool and
/// collected in replication order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>, HarnessError> {
    config.validate()?;
    run_many(std::slice::from_ref(config))
}

/// Run a list of validated configs, all replications in one job pool,
/// records ordered by (config, replication).
pub fn run_many(configs: &[ExperimentConfig]) -> Result<Vec<RunRecord>, HarnessError> {
    for c in configs {
        c.validate()?;
    }
    let jobs: Vec<(usize, u32)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.replications).map(move |r| (i, r)))
        .collect();
    jobs.into_par_iter()
        .map(|(i, rep)| run_one(&configs[i], rep))
        .collect()
}

fn run_one(config: &ExperimentConfig, replication: u32) -> Result<RunRecord, HarnessError> {
    let start = Instant::now();
    let mut policy = config.build_policy()?;
    let mut rng = SimRng::for_replication(config.seed, replication as u64);
    let output = run_simulation(
        config.sources,
        config.theta,
        config.horizon,
        config.burn_in,
        &mut policy,
        &mut rng,
        None,
    )?;
    Ok(RunRecord {
        policy: config.policy,
        sources: config.sources,
        theta: config.theta,
        horizon: config.horizon,
        seed: config.seed,
        replication,
        naaoi: output.metrics.naaoi,
        throughput: output.metrics.throughput,
        p_success: output.metrics.p_success,
        p_idle: output.metrics.p_idle,
        p_collision: output.metrics.p_collision,
        threshold: output.mean_threshold,
        lb_arrival: lower_bound_arrival(config.sources, config.theta)?,
        lb_capacity: lower_bound_capacity(config.sources, config.bound_capacity()),
        asymptote: config.asymptote(),
        capacity: config.capacity,
        active_fraction: output.active_fraction,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Sweep axis and its values.
#[derive(Clone, Debug)]
pub enum SweepAxis {
    Theta(Vec<f64>),
    Sources(Vec<usize>),
    Policy(Vec<PolicyKind>),
    Capacity(Vec<f64>),
}

impl SweepAxis {
    pub fn is_empty(&self) -> bool {
        match self {
            SweepAxis::Theta(v) => v.is_empty(),
            SweepAxis::Sources(v) => v.is_empty(),
            SweepAxis::Policy(v) => v.is_empty(),
            SweepAxis::Capacity(v) => v.is_empty(),
        }
    }

    /// Parse an axis from CLI-style strings.
    pub fn parse(axis: &str, values: &[String]) -> Result<SweepAxis, HarnessError> {
        let bad = |message: String| HarnessError::Config { field: "values".into(), message };
        match axis {
            "theta" => values
                .iter()
                .map(|v| v.parse::<f64>().map_err(|e| bad(format!("'{v}': {e}"))))
                .collect::<Result<_, _>>()
                .map(SweepAxis::Theta),
            "M" | "sources" => values
                .iter()
                .map(|v| v.parse::<usize>().map_err(|e| bad(format!("'{v}': {e}"))))
                .collect::<Result<_, _>>()
                .map(SweepAxis::Sources),
            "policy" => values
                .iter()
                .map(|v| v.parse::<PolicyKind>().map_err(bad))
                .collect::<Result<_, _>>()
                .map(SweepAxis::Policy),
            "capacity" => values
                .iter()
                .map(|v| v.parse::<f64>().map_err(|e| bad(format!("'{v}': {e}"))))
                .collect::<Result<_, _>>()
                .map(SweepAxis::Capacity),
            other => Err(HarnessError::Config {
                field: "axis".into(),
                message: format!("unknown axis '{other}' (expected theta|sources|policy|capacity)"),
            }),
        }
    }

    /// Configs derived from the base, one per axis value, in order.
    pub fn configs(&self, base: &ExperimentConfig) -> Result<Vec<ExperimentConfig>, HarnessError> {
        if self.is_empty() {
            return Err(HarnessError::Config { field: "values".into(), message: "empty values list".into() });
        }
        let mut out = Vec::new();
        match self {
            SweepAxis::Theta(vs) => {
                for &v in vs {
                    let mut c = base.clone();
                    c.theta = v;
                    out.push(c);
                }
            }
            SweepAxis::Sources(vs) => {
                for &v in vs {
                    let mut c = base.clone();
                    c.sources = v;
                    out.push(c);
                }
            }
            SweepAxis::Policy(vs) => {
                for &v in vs {
                    let mut c = base.clone();
                    c.policy = v;
                    if v != PolicyKind::Gsat {
                        c.capacity = None;
                    } else if c.capacity.is_none() {
                        c.capacity = Some(1.0);
                    }
                    out.push(c);
                }
            }
            SweepAxis::Capacity(vs) => {
                for &v in vs {
                    let mut c = base.clone();
                    c.capacity = Some(v);
                    out.push(c);
                }
            }
        }
        Ok(out)
    }
}

/// Run a sweep: one record per (value, replication), ordered.
pub fn run_sweep(base: &ExperimentConfig, axis: &SweepAxis) -> Result<Vec<RunRecord>, HarnessError> {
    run_many(&axis.configs(base)?)
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut s = String::with_capacity(64 + records.len() * 128);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, records: &[RunRecord]) -> Result<(), HarnessError> {
    fs::write(path, records_to_csv(records))
        .map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

/// Per-config aggregate over replications.
#[derive(Clone, Debug, Serialize)]
pub struct GroupSummary {
    pub policy: PolicyKind,
    pub sources: usize,
    pub theta: f64,
    pub capacity: Option<f64>,
    pub replications: usize,
    pub naaoi_mean: f64,
    pub naaoi_stddev: f64,
    pub naaoi_stderr: f64,
    pub throughput_mean: f64,
    pub p_success_mean: f64,
    pub p_idle_mean: f64,
    pub p_collision_mean: f64,
    pub threshold_mean: Option<f64>,
    pub active_fraction_mean: Option<f64>,
    pub lb_arrival: f64,
    pub lb_capacity: f64,
    pub asymptote: Option<f64>,
    pub wall_time_s: f64,
}

/// Group consecutive records of the same configuration and average them.
pub fn summarize(records: &[RunRecord]) -> Vec<GroupSummary> {
    let mut groups: Vec<GroupSummary> = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let r = &records[i];
        let same = |x: &RunRecord| {
            x.policy == r.policy
                && x.sources == r.sources
                && x.theta == r.theta
                && x.capacity == r.capacity
                && x.horizon == r.horizon
        };
        let j = records[i..].iter().take_while(|x| same(x)).count() + i;
        let group = &records[i..j];
        let naaois: Vec<f64> = group.iter().map(|x| x.naaoi).collect();
        let naaoi_mean = mean(&naaois);
        let naaoi_stddev = stddev(&naaois);
        let avg = |f: fn(&RunRecord) -> f64| mean(&group.iter().map(f).collect::<Vec<_>>());
        let avg_opt = |f: fn(&RunRecord) -> Option<f64>| {
            let vals: Vec<f64> = group.iter().filter_map(f).collect();
            if vals.is_empty() { None } else { Some(mean(&vals)) }
        };
        groups.push(GroupSummary {
            policy: r.policy,
            sources: r.sources,
            theta: r.theta,
            capacity: r.capacity,
            replications: group.len(),
            naaoi_mean,
            naaoi_stddev,
            naaoi_stderr: naaoi_stddev / (group.len() as f64).sqrt(),
            throughput_mean: avg(|x| x.throughput),
            p_success_mean: avg(|x| x.p_success),
            p_idle_mean: avg(|x| x.p_idle),
            p_collision_mean: avg(|x| x.p_collision),
            threshold_mean: avg_opt(|x| x.threshold),
            active_fraction_mean: avg_opt(|x| x.active_fraction),
            lb_arrival: r.lb_arrival,
            lb_capacity: r.lb_capacity,
            asymptote: r.asymptote,
            wall_time_s: group.iter().map(|x| x.wall_time_s).sum(),
        });
        i = j;
    }
    groups
}

/// Summary JSON written next to a run CSV.
#[derive(Serialize)]
pub struct SummaryReport<'a> {
    pub config: &'a ExperimentConfig,
    pub groups: Vec<GroupSummary>,
    pub records: &'a [RunRecord],
}

pub fn write_summary_json(
    path: &Path,
    config: &ExperimentConfig,
    records: &[RunRecord],
) -> Result<(), HarnessError> {
    let report = SummaryReport { config, groups: summarize(records), records };
    let body = serde_json::to_string_pretty(&report).expect("serializable");
    fs::write(path, body).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; zero for fewer than two samples.
pub fn stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}
