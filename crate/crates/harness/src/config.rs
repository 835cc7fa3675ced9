//! Experiment configuration, read from TOML. Unknown keys are rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use qem_core::circuits::{Amplification, Boundary, ScaleFactor};
use qem_core::extrapolate::{PostprocessMode, Strategy};
use qem_core::select::ReportValue;
use qem_core::simcore::NoiseModel;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Inclusive integer range written as `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct IntRange {
    pub start: u32,
    pub end: u32,
}

impl IntRange {
    pub const fn new(start: u32, end: u32) -> Self {
        Self { start, end }
    }

    pub fn values(&self) -> impl Iterator<Item = u32> {
        self.start..=self.end
    }

    pub fn is_empty(&self) -> bool {
        self.start > self.end
    }
}

impl From<[u32; 2]> for IntRange {
    fn from([start, end]: [u32; 2]) -> Self {
        Self { start, end }
    }
}

impl From<IntRange> for [u32; 2] {
    fn from(r: IntRange) -> Self {
        [r.start, r.end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotMode {
    /// Use the simulator's exact output distributions.
    #[default]
    Exact,
    /// Replace each noisy distribution by an empirical one from `n_meas` shots.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// All four strategies ranked, N-version selection picks among them.
    NversionExperiment,
    /// Linear, Richardson and Exponential plus the per-bin consistency output.
    ConsistencyExperiment,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "nversion_experiment" => Ok(Preset::NversionExperiment),
            "consistency_experiment" => Ok(Preset::ConsistencyExperiment),
            other => Err(format!("unknown preset {other:?}")),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::NversionExperiment => "nversion_experiment",
            Preset::ConsistencyExperiment => "consistency_experiment",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_qubits: usize,
    /// Shots per circuit per scale factor in sampled mode.
    pub n_meas: u64,
    /// Evolution time `t`.
    pub time: f64,
    pub j_range: IntRange,
    pub b_range: IntRange,
    pub m_range: IntRange,
    pub scale_factors: Vec<ScaleFactor>,
    pub noise: NoiseModel,
    pub amplification: Amplification,
    /// Subset size `L` for consistency selection.
    pub subset_size: usize,
    pub strategies: Vec<Strategy>,
    /// Adds the per-bin consistency output as a ranked candidate.
    pub include_consistency: bool,
    pub fallback: Strategy,
    pub report_value: ReportValue,
    pub postprocess: PostprocessMode,
    pub master_seed: u64,
    pub boundary: Boundary,
    pub shot_mode: ShotMode,
}

impl Default for ExperimentConfig {
    /// Desk-scale sweep: 5 qubits, `J, B ∈ 1..=4`, `M ∈ 5..=10`.
    fn default() -> Self {
        Self {
            n_qubits: 5,
            n_meas: 5000,
            time: 1.0,
            j_range: IntRange::new(1, 4),
            b_range: IntRange::new(1, 4),
            m_range: IntRange::new(5, 10),
            scale_factors: [1, 3, 5].map(|l| ScaleFactor::new(l).expect("odd")).to_vec(),
            noise: NoiseModel::default(),
            amplification: Amplification::Fold,
            subset_size: 2,
            strategies: Strategy::ALL.to_vec(),
            include_consistency: false,
            fallback: Strategy::Linear,
            report_value: ReportValue::FullFit,
            postprocess: PostprocessMode::ClipRenorm,
            master_seed: 2024,
            boundary: Boundary::Open,
            shot_mode: ShotMode::Exact,
        }
    }
}

impl ExperimentConfig {
    /// The full-size sweep: 10 qubits, `J, B ∈ 1..=10`, 5000 shots.
    pub fn full_scale() -> Self {
        Self {
            n_qubits: 10,
            j_range: IntRange::new(1, 10),
            b_range: IntRange::new(1, 10),
            ..Self::default()
        }
    }

    pub fn with_preset(mut self, preset: Preset) -> Self {
        match preset {
            Preset::NversionExperiment => {
                self.strategies = Strategy::ALL.to_vec();
                self.include_consistency = false;
            }
            Preset::ConsistencyExperiment => {
                self.strategies = vec![Strategy::Linear, Strategy::Richardson, Strategy::Exponential];
                self.include_consistency = true;
            }
        }
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.n_qubits < 2 {
            return bad(format!("n_qubits must be at least 2, got {}", self.n_qubits));
        }
        for (name, range) in [("j_range", self.j_range), ("b_range", self.b_range), ("m_range", self.m_range)] {
            if range.is_empty() {
                return bad(format!("{name} is empty"));
            }
        }
        if self.m_range.start == 0 {
            return bad("m_range must start at 1 or above".into());
        }
        if !(self.time > 0.0 && self.time.is_finite()) {
            return bad(format!("time must be positive, got {}", self.time));
        }
        if self.scale_factors.first() != Some(&ScaleFactor::ONE) {
            return bad("scale_factors must start at 1".into());
        }
        if self.scale_factors.windows(2).any(|w| w[0] >= w[1]) {
            return bad("scale_factors must be strictly ascending".into());
        }
        if self.strategies.is_empty() {
            return bad("strategies must not be empty".into());
        }
        if self.strategies.len() < 3 {
            return bad("N-version selection needs at least 3 strategies".into());
        }
        if self.include_consistency {
            let k = self.scale_factors.len();
            if self.subset_size < 2 || self.subset_size >= k {
                return bad(format!("subset_size {} must lie in [2, {})", self.subset_size, k));
            }
            if let Some(s) = self.strategies.iter().find(|s| s.min_points() > self.subset_size) {
                return bad(format!("{s} cannot run on {} points", self.subset_size));
            }
        }
        if self.shot_mode == ShotMode::Sampled && self.n_meas == 0 {
            return bad("n_meas must be positive in sampled mode".into());
        }
        self.noise.validate()?;
        Ok(())
    }

    /// Number of `(J, B, M)` runs in the sweep.
    pub fn run_count(&self) -> usize {
        self.j_range.values().count() * self.b_range.values().count() * self.m_range.values().count()
    }
}
