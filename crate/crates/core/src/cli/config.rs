//! TOML experiment configuration, schema version 1.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::compactness::TestSequenceSpec;
use crate::profile::Profile;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MikhlinCheck,
    DyadicScaling,
    KernelTails,
    KernelSums,
    CommutatorSvd,
    OscillationDecay,
    Hmeasure,
    RoundtripSelftest,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::MikhlinCheck,
        ExperimentKind::DyadicScaling,
        ExperimentKind::KernelTails,
        ExperimentKind::KernelSums,
        ExperimentKind::CommutatorSvd,
        ExperimentKind::OscillationDecay,
        ExperimentKind::Hmeasure,
        ExperimentKind::RoundtripSelftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::MikhlinCheck => "mikhlin-check",
            ExperimentKind::DyadicScaling => "dyadic-scaling",
            ExperimentKind::KernelTails => "kernel-tails",
            ExperimentKind::KernelSums => "kernel-sums",
            ExperimentKind::CommutatorSvd => "commutator-svd",
            ExperimentKind::OscillationDecay => "oscillation-decay",
            ExperimentKind::Hmeasure => "hmeasure",
            ExperimentKind::RoundtripSelftest => "roundtrip-selftest",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::MikhlinCheck => "annulus derivative ratios of a symbol and their maximum k_hat",
            ExperimentKind::DyadicScaling => "rescaled derivative energy of the dyadic pieces a_j",
            ExperimentKind::KernelTails => "L1 mass of dyadic kernels outside a ball, with the power-law rescaling",
            ExperimentKind::KernelSums => "off-ball increments of partial kernel sums and small-ball moments",
            ExperimentKind::CommutatorSvd => "singular-value tail energy of the dense commutator under refinement",
            ExperimentKind::OscillationDecay => "norms of the commutator applied to a weak-null sequence",
            ExperimentKind::Hmeasure => "hermitian form along an oscillating sequence against its limit",
            ExperimentKind::RoundtripSelftest => "transform roundtrip and Plancherel errors on random fields",
        }
    }

    pub fn required_fields(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::MikhlinCheck => &["grid.d", "symbol"],
            ExperimentKind::DyadicScaling => &["grid.d", "symbol"],
            ExperimentKind::KernelTails => &["grid", "symbol"],
            ExperimentKind::KernelSums => &["grid", "symbol"],
            ExperimentKind::CommutatorSvd => &["grid.d", "symbol", "b", "params.grids"],
            ExperimentKind::OscillationDecay => &["grid", "symbol", "b", "sequence", "params.n_list"],
            ExperimentKind::Hmeasure => &["grid", "symbol", "sequence", "weights", "params.n_list"],
            ExperimentKind::RoundtripSelftest => &["grid"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub l: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub phi1: Profile,
    pub phi2: Profile,
}

/// Numeric knobs; each experiment reads the ones it needs and defaults the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub kappa: Option<usize>,
    pub j_range: Option<[i32; 2]>,
    pub resolution: Option<usize>,
    pub eps: Option<f64>,
    pub s: Option<f64>,
    pub s_list: Option<Vec<f64>>,
    pub p0: Option<f64>,
    pub k: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub grids: Option<Vec<(usize, f64)>>,
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub output: PathBuf,
    #[serde(default)]
    pub symbol: Option<String>,
    #[serde(default)]
    pub sphere: bool,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub b: Option<Profile>,
    #[serde(default)]
    pub sequence: Option<TestSequenceSpec>,
    #[serde(default)]
    pub weights: Option<WeightsConfig>,
    #[serde(default)]
    pub params: Params,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}
