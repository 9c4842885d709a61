//! Bundled sweep presets.
//!
//! Each preset runs a named grid of experiments and writes two files:
//! `<name>_runs.csv` with the standard per-replication schema, and
//! `<name>_summary.csv` with per-point aggregates next to published
//! reference coordinates for the same operating points.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::harness::{
    fmt6, run_many, summarize, write_csv, ExperimentConfig, GroupSummary, HarnessError, RunRecord,
};
use crate::policy::PolicyKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetName {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
}

impl PresetName {
    pub const ALL: [PresetName; 4] = [PresetName::Fig1a, PresetName::Fig1b, PresetName::Fig2a, PresetName::Fig2b];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::Fig1a => "fig1a",
            PresetName::Fig1b => "fig1b",
            PresetName::Fig2a => "fig2a",
            PresetName::Fig2b => "fig2b",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig1a" => Ok(PresetName::Fig1a),
            "fig1b" => Ok(PresetName::Fig1b),
            "fig2a" => Ok(PresetName::Fig2a),
            "fig2b" => Ok(PresetName::Fig2b),
            other => Err(format!("unknown preset '{other}' (expected fig1a|fig1b|fig2a|fig2b)")),
        }
    }
}

/// Horizon / replication / seed defaults a preset runs at. The documented
/// defaults reproduce the reference coordinates; smaller scales are for
/// quick looks.
#[derive(Clone, Copy, Debug)]
pub struct PresetScale {
    pub horizon: u64,
    pub replications: u32,
    pub seed: u64,
    /// Initial slots excluded from the statistics of every run.
    pub burn_in: u64,
}

impl Default for PresetScale {
    fn default() -> Self {
        PresetScale { horizon: 1_000_000, replications: 5, seed: 20207, burn_in: 0 }
    }
}

/// Everything a preset produced, for callers that want the data without
/// re-reading the CSV.
#[derive(Debug)]
pub struct PresetOutput {
    pub runs: Vec<RunRecord>,
    pub summary: Vec<PresetSummaryRow>,
    pub files: Vec<PathBuf>,
}

/// One aggregated grid point with its reference coordinates, if any.
#[derive(Clone, Debug)]
pub struct PresetSummaryRow {
    pub group: GroupSummary,
    pub reference_naaoi: Option<f64>,
    pub reference_p_success: Option<f64>,
    pub reference_active_fraction: Option<f64>,
}

pub const SUMMARY_CSV_HEADER: &str = "policy,M,theta,replications,naaoi,naaoi_stderr,throughput,p_success,active_fraction,threshold,lb_arrival,lb_capacity,asymptote,reference_naaoi,reference_p_success,reference_active_fraction";

/// Run a preset and write its CSV files under `out_dir`.
pub fn run_preset(name: PresetName, scale: &PresetScale, out_dir: &Path) -> Result<PresetOutput, HarnessError> {
    let configs = preset_configs(name, scale);
    let runs = run_many(&configs)?;
    let summary: Vec<PresetSummaryRow> = summarize(&runs)
        .into_iter()
        .map(|group| {
            let refs = reference_for(name, group.policy, group.sources, group.theta);
            PresetSummaryRow {
                group,
                reference_naaoi: refs.0,
                reference_p_success: refs.1,
                reference_active_fraction: refs.2,
            }
        })
        .collect();

    fs::create_dir_all(out_dir)
        .map_err(|source| HarnessError::Io { path: out_dir.to_path_buf(), source })?;
    let runs_path = out_dir.join(format!("{name}_runs.csv"));
    write_csv(&runs_path, &runs)?;
    let summary_path = out_dir.join(format!("{name}_summary.csv"));
    let mut body = String::from(SUMMARY_CSV_HEADER);
    body.push('\n');
    for row in &summary {
        body.push_str(&summary_csv_row(row));
        body.push('\n');
    }
    fs::write(&summary_path, body)
        .map_err(|source| HarnessError::Io { path: summary_path.clone(), source })?;

    Ok(PresetOutput { runs, summary, files: vec![runs_path, summary_path] })
}

fn summary_csv_row(row: &PresetSummaryRow) -> String {
    let g = &row.group;
    let opt = |v: Option<f64>| v.map(fmt6).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        g.policy,
        g.sources,
        fmt6(g.theta),
        g.replications,
        fmt6(g.naaoi_mean),
        fmt6(g.naaoi_stderr),
        fmt6(g.throughput_mean),
        fmt6(g.p_success_mean),
        opt(g.active_fraction_mean),
        opt(g.threshold_mean),
        fmt6(g.lb_arrival),
        fmt6(g.lb_capacity),
        opt(g.asymptote),
        opt(row.reference_naaoi),
        opt(row.reference_p_success),
        opt(row.reference_active_fraction),
    )
}

/// The experiment grid of a preset, policy-major then theta, so summary
/// rows group cleanly.
pub fn preset_configs(name: PresetName, scale: &PresetScale) -> Vec<ExperimentConfig> {
    let mut configs = Vec::new();
    let mut push = |policy: PolicyKind, sources: usize, theta: f64| {
        let mut c = ExperimentConfig::new(policy, sources, theta, scale.horizon);
        c.seed = scale.seed;
        c.replications = scale.replications;
        c.burn_in = scale.burn_in;
        if policy == PolicyKind::Gsat {
            c.capacity = Some(1.0);
        }
        configs.push(c);
    };
    match name {
        PresetName::Fig2a => {
            for policy in FIG2_POLICIES {
                for &theta in THETA_GRID_WIDE {
                    push(policy, 500, theta);
                }
            }
        }
        PresetName::Fig2b => {
            for policy in FIG2_POLICIES {
                for &theta in THETA_GRID_SPARSE {
                    push(policy, 500, theta);
                }
            }
        }
        PresetName::Fig1a => {
            for &(sources, first_theta) in &[(500usize, 0.002f64), (100, 0.01), (50, 0.02)] {
                for policy in [PolicyKind::Sat, PolicyKind::Aat] {
                    push(policy, sources, first_theta);
                    for &theta in &THETA_GRID_WIDE[1..] {
                        push(policy, sources, theta);
                    }
                }
            }
        }
        PresetName::Fig1b => {
            for &theta in THETA_GRID_NEAR_ONE {
                push(PolicyKind::Aat, 500, theta);
            }
        }
    }
    configs
}

const FIG2_POLICIES: [PolicyKind; 6] = [
    PolicyKind::Aloha,
    PolicyKind::Randomized,
    PolicyKind::Sat,
    PolicyKind::Aat,
    PolicyKind::Gsat,
    PolicyKind::MaxWeight,
];

/// theta in {0.002, 0.05, 0.10, ..., 1.0}.
pub const THETA_GRID_WIDE: &[f64] = &[
    0.002, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75,
    0.8, 0.85, 0.9, 0.95, 1.0,
];

/// Sub-1/M arrival rates.
pub const THETA_GRID_SPARSE: &[f64] = &[
    0.00024525, 0.00049051, 0.00073576, 0.00098101, 0.0012, 0.0015, 0.0017, 0.0020,
];

pub const THETA_GRID_NEAR_ONE: &[f64] = &[
    0.95, 0.955, 0.96, 0.965, 0.97, 0.975, 0.98, 0.985, 0.99, 0.995, 1.0,
];

fn reference_for(
    name: PresetName,
    policy: PolicyKind,
    sources: usize,
    theta: f64,
) -> (Option<f64>, Option<f64>, Option<f64>) {
    match name {
        PresetName::Fig2a => (lookup(fig2a_table(policy), theta), None, None),
        PresetName::Fig2b => (lookup(fig2b_table(policy), theta), None, None),
        PresetName::Fig1a => (lookup(fig1a_table(policy, sources), theta), None, None),
        PresetName::Fig1b => (
            None,
            lookup(Some(FIG1B_SUCCESS), theta),
            lookup(Some(FIG1B_ACTIVE), theta),
        ),
    }
}

fn lookup(table: Option<&[(f64, f64)]>, theta: f64) -> Option<f64> {
    table?.iter().find(|(t, _)| (t - theta).abs() < 1e-9).map(|&(_, v)| v)
}

fn fig1a_table(policy: PolicyKind, sources: usize) -> Option<&'static [(f64, f64)]> {
    match (policy, sources) {
        (PolicyKind::Aat, 500) => Some(FIG1A_AAT_M500),
        (PolicyKind::Sat, 500) => Some(FIG1A_SAT_M500),
        (PolicyKind::Aat, 100) => Some(FIG1A_AAT_M100),
        (PolicyKind::Sat, 100) => Some(FIG1A_SAT_M100),
        (PolicyKind::Aat, 50) => Some(FIG1A_AAT_M50),
        (PolicyKind::Sat, 50) => Some(FIG1A_SAT_M50),
        _ => None,
    }
}

fn fig2a_table(policy: PolicyKind) -> Option<&'static [(f64, f64)]> {
    match policy {
        PolicyKind::Aloha => Some(FIG2A_ALOHA),
        PolicyKind::Randomized => Some(FIG2A_RANDOMIZED),
        PolicyKind::Sat => Some(FIG1A_SAT_M500),
        PolicyKind::Aat => Some(FIG2A_AAT),
        PolicyKind::MaxWeight => Some(FIG2A_MAXWEIGHT),
        PolicyKind::Gsat => Some(FIG2A_GSAT_CSMA),
    }
}

fn fig2b_table(policy: PolicyKind) -> Option<&'static [(f64, f64)]> {
    match policy {
        PolicyKind::Aloha => Some(FIG2B_ALOHA),
        PolicyKind::Randomized => Some(FIG2B_RANDOMIZED),
        PolicyKind::Sat => Some(FIG2B_SAT),
        PolicyKind::Aat => Some(FIG2B_AAT),
        PolicyKind::MaxWeight => Some(FIG2B_MAXWEIGHT),
        PolicyKind::Gsat => Some(FIG2B_GSAT_CSMA),
    }
}

// Reference coordinates for the bundled grids (M = 500 unless noted).

const FIG1A_AAT_M500: &[(f64, f64)] = &[
    (0.002, 1.6643), (0.05, 1.4013), (0.1, 1.3875), (0.15, 1.3898), (0.2, 1.3887),
    (0.25, 1.3813), (0.3, 1.3832), (0.35, 1.3847), (0.4, 1.3866), (0.45, 1.3804),
    (0.5, 1.3800), (0.55, 1.3827), (0.6, 1.3768), (0.65, 1.3764), (0.7, 1.3776),
    (0.75, 1.3638), (0.8, 1.3616), (0.85, 1.3621), (0.9, 1.3397), (0.95, 1.2345),
    (1.0, 1.0578),
];

const FIG1A_SAT_M500: &[(f64, f64)] = &[
    (0.002, 1.6983), (0.05, 1.4410), (0.1, 1.4293), (0.15, 1.4301), (0.2, 1.4279),
    (0.25, 1.4261), (0.3, 1.4255), (0.35, 1.4247), (0.4, 1.4248), (0.45, 1.4211),
    (0.5, 1.4256), (0.55, 1.4219), (0.6, 1.4232), (0.65, 1.4212), (0.7, 1.4221),
    (0.75, 1.4216), (0.8, 1.4158), (0.85, 1.4176), (0.9, 1.4058), (0.95, 1.3847),
    (1.0, 1.3590),
];

const FIG1A_AAT_M100: &[(f64, f64)] = &[
    (0.01, 1.8157), (0.05, 1.4716), (0.1, 1.4553), (0.15, 1.4370), (0.2, 1.4159),
    (0.25, 1.4110), (0.3, 1.4035), (0.35, 1.4066), (0.4, 1.4076), (0.45, 1.4015),
    (0.5, 1.4044), (0.55, 1.4008), (0.6, 1.3889), (0.65, 1.3780), (0.7, 1.3782),
    (0.75, 1.3672), (0.8, 1.3633), (0.85, 1.3657), (0.9, 1.3439), (0.95, 1.2770),
    (1.0, 1.0633),
];

const FIG1A_SAT_M100: &[(f64, f64)] = &[
    (0.01, 1.7277), (0.05, 1.4947), (0.1, 1.4706), (0.15, 1.4637), (0.2, 1.4522),
    (0.25, 1.4514), (0.3, 1.4474), (0.35, 1.4430), (0.4, 1.4414), (0.45, 1.4403),
    (0.5, 1.4347), (0.55, 1.4375), (0.6, 1.4420), (0.65, 1.4317), (0.7, 1.4259),
    (0.75, 1.4324), (0.8, 1.4237), (0.85, 1.4208), (0.9, 1.4095), (0.95, 1.3922),
    (1.0, 1.3675),
];

const FIG1A_AAT_M50: &[(f64, f64)] = &[
    (0.02, 1.8459), (0.05, 1.5713), (0.1, 1.5012), (0.15, 1.4866), (0.2, 1.4533),
    (0.25, 1.4425), (0.3, 1.4368), (0.35, 1.4347), (0.4, 1.4345), (0.45, 1.4339),
    (0.5, 1.4276), (0.55, 1.4168), (0.6, 1.4141), (0.65, 1.4172), (0.7, 1.4180),
    (0.75, 1.3953), (0.8, 1.3844), (0.85, 1.3738), (0.9, 1.3463), (0.95, 1.2945),
    (1.0, 1.0721),
];

const FIG1A_SAT_M50: &[(f64, f64)] = &[
    (0.02, 1.8286), (0.05, 1.5842), (0.1, 1.5069), (0.15, 1.4967), (0.2, 1.4870),
    (0.25, 1.4806), (0.3, 1.4730), (0.35, 1.4824), (0.4, 1.4711), (0.45, 1.4622),
    (0.5, 1.4599), (0.55, 1.4598), (0.6, 1.4512), (0.65, 1.4500), (0.7, 1.4442),
    (0.75, 1.4444), (0.8, 1.4350), (0.85, 1.4267), (0.9, 1.4087), (0.95, 1.3919),
    (1.0, 1.3584),
];

/// Per-slot success frequency of the adaptive policy near theta = 1.
const FIG1B_SUCCESS: &[(f64, f64)] = &[
    (0.95, 0.3700), (0.955, 0.3804), (0.96, 0.3829), (0.965, 0.3863), (0.97, 0.3863),
    (0.975, 0.3900), (0.98, 0.4045), (0.985, 0.4127), (0.99, 0.4229), (0.995, 0.4505),
    (1.0, 0.4778),
];

/// Fraction of sources past the adaptive gate near theta = 1.
const FIG1B_ACTIVE: &[(f64, f64)] = &[
    (0.95, 0.0222), (0.955, 0.0215), (0.96, 0.0219), (0.965, 0.0216), (0.97, 0.0226),
    (0.975, 0.0218), (0.98, 0.0215), (0.985, 0.0217), (0.99, 0.0216), (0.995, 0.0223),
    (1.0, 0.0221),
];

const FIG2A_ALOHA: &[(f64, f64)] = &[
    (0.002, 2.9296), (0.05, 2.7164), (0.1, 2.7187), (0.15, 2.7128), (0.2, 2.7136),
    (0.25, 2.7136), (0.3, 2.7201), (0.35, 2.7127), (0.4, 2.7172), (0.45, 2.7104),
    (0.5, 2.7179), (0.55, 2.7106), (0.6, 2.7174), (0.65, 2.7168), (0.7, 2.7160),
    (0.75, 2.7160), (0.8, 2.7131), (0.85, 2.7147), (0.9, 2.7176), (0.95, 2.7170),
    (1.0, 2.7134),
];

const FIG2A_RANDOMIZED: &[(f64, f64)] = &[
    (0.002, 2.7138), (0.05, 2.7149), (0.1, 2.7149), (0.15, 2.7103), (0.2, 2.7129),
    (0.25, 2.7083), (0.3, 2.7164), (0.35, 2.7149), (0.4, 2.7158), (0.45, 2.7156),
    (0.5, 2.7122), (0.55, 2.7143), (0.6, 2.7145), (0.65, 2.7151), (0.7, 2.7103),
    (0.75, 2.7157), (0.8, 2.7141), (0.85, 2.7139), (0.9, 2.7136), (0.95, 2.7122),
    (1.0, 2.7163),
];

const FIG2A_AAT: &[(f64, f64)] = &[
    (0.002, 1.6643), (0.05, 1.4013), (0.1, 1.3875), (0.15, 1.3898), (0.2, 1.3887),
    (0.25, 1.3813), (0.3, 1.3832), (0.35, 1.3847), (0.4, 1.3866), (0.45, 1.3804),
    (0.5, 1.3800), (0.55, 1.3827), (0.6, 1.3768), (0.65, 1.3784), (0.7, 1.3776),
    (0.75, 1.3738), (0.8, 1.3616), (0.85, 1.3621), (0.9, 1.3397), (0.95, 1.2345),
    (1.0, 1.0778),
];

const FIG2A_MAXWEIGHT: &[(f64, f64)] = &[
    (0.002, 1.0064), (0.05, 0.5023), (0.1, 0.5013), (0.15, 0.5008), (0.2, 0.5005),
    (0.25, 0.5002), (0.3, 0.5000), (0.35, 0.4999), (0.4, 0.4998), (0.45, 0.4996),
    (0.5, 0.4995), (0.55, 0.4995), (0.6, 0.4994), (0.65, 0.4993), (0.7, 0.4992),
    (0.75, 0.4992), (0.8, 0.4991), (0.85, 0.4991), (0.9, 0.4991), (0.95, 0.4990),
    (1.0, 0.4989),
];

/// Stationary thinning driven by a carrier-sensing technology; the
/// idealized unit-capacity channel here tracks the lower bound 0.5010
/// instead of the published CSMA implementation's overhead.
const FIG2A_GSAT_CSMA: &[(f64, f64)] = &[
    (0.002, 1.0615), (0.05, 0.5496), (0.1, 0.5402), (0.15, 0.5363), (0.2, 0.5344),
    (0.25, 0.5331), (0.3, 0.5319), (0.35, 0.5314), (0.4, 0.5307), (0.45, 0.5302),
    (0.5, 0.5301), (0.55, 0.5298), (0.6, 0.5295), (0.65, 0.5293), (0.7, 0.5291),
    (0.75, 0.5289), (0.8, 0.5287), (0.85, 0.5285), (0.9, 0.5284), (0.95, 0.5283),
    (1.0, 0.5283),
];

const FIG2B_ALOHA: &[(f64, f64)] = &[
    (0.00024525, 8.1214), (0.00049051, 4.0774), (0.00073576, 2.7455), (0.00098101, 2.7449),
    (0.0012, 2.8376), (0.0015, 3.0772), (0.0017, 3.0116), (0.0020, 2.9296),
];

const FIG2B_RANDOMIZED: &[(f64, f64)] = &[
    (0.00024525, 8.1549), (0.00049051, 4.0535), (0.00073576, 3.0025), (0.00098101, 2.7303),
    (0.0012, 2.7340), (0.0015, 2.7162), (0.0017, 2.7171), (0.0020, 2.7138),
];

const FIG2B_SAT: &[(f64, f64)] = &[
    (0.00024525, 8.1549), (0.00049051, 4.0774), (0.00073576, 2.7268), (0.00098101, 2.2161),
    (0.0012, 1.9514), (0.0015, 1.8038), (0.0017, 1.7406), (0.0020, 1.6983),
];

const FIG2B_AAT: &[(f64, f64)] = &[
    (0.00024525, 8.1549), (0.00049051, 4.0774), (0.00073576, 2.7263), (0.00098101, 2.5984),
    (0.0012, 2.2805), (0.0015, 1.9658), (0.0017, 1.7867), (0.0020, 1.6643),
];

const FIG2B_MAXWEIGHT: &[(f64, f64)] = &[
    (0.00024525, 8.1549), (0.00049051, 4.0774), (0.00073576, 2.7199), (0.00098101, 2.0741),
    (0.0012, 1.6681), (0.0015, 1.3419), (0.0017, 1.1152), (0.0020, 1.0174),
];

const FIG2B_GSAT_CSMA: &[(f64, f64)] = &[
    (0.00024525, 8.0899), (0.00049051, 4.0490), (0.00073576, 2.7305), (0.00098101, 2.0512),
    (0.0012, 1.6822), (0.0015, 1.3552), (0.0017, 1.2051), (0.0020, 1.0615),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_parse() {
        for p in PresetName::ALL {
            assert_eq!(p.as_str().parse::<PresetName>().unwrap(), p);
        }
        assert!("fig3".parse::<PresetName>().is_err());
    }

    #[test]
    fn grids_have_expected_shapes() {
        let scale = PresetScale { horizon: 100, replications: 1, seed: 1, burn_in: 0 };
        assert_eq!(preset_configs(PresetName::Fig2a, &scale).len(), 6 * 21);
        assert_eq!(preset_configs(PresetName::Fig2b, &scale).len(), 6 * 8);
        assert_eq!(preset_configs(PresetName::Fig1a, &scale).len(), 3 * 2 * 21);
        assert_eq!(preset_configs(PresetName::Fig1b, &scale).len(), 11);
        for c in preset_configs(PresetName::Fig2a, &scale) {
            assert!(c.validate().is_ok(), "{c:?}");
        }
    }

    #[test]
    fn references_join_on_theta() {
        let (naaoi, _, _) = reference_for(PresetName::Fig2a, PolicyKind::Sat, 500, 1.0);
        assert_eq!(naaoi, Some(1.3590));
        let (_, ps, active) = reference_for(PresetName::Fig1b, PolicyKind::Aat, 500, 1.0);
        assert_eq!(ps, Some(0.4778));
        assert_eq!(active, Some(0.0221));
    }

    #[test]
    fn tiny_preset_runs_and_writes_files() {
        let scale = PresetScale { horizon: 400, replications: 1, seed: 3, burn_in: 0 };
        let dir = std::env::temp_dir().join("aoi_preset_test");
        let out = run_preset(PresetName::Fig1b, &scale, &dir).unwrap();
        assert_eq!(out.runs.len(), 11);
        assert_eq!(out.summary.len(), 11);
        for f in &out.files {
            assert!(f.exists());
            fs::remove_file(f).ok();
        }
    }
}
