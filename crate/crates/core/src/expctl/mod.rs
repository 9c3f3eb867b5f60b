//! Experiment definitions, configuration files and run artifacts.
//!
//! An experiment is described by a TOML file with dotted keys, for example
//!
//! ```toml
//! name = "discrete_n_sweep"
//! seed = 7
//! sim.paths = 200
//! sweep.n = [2, 10, 100]
//! ```
//!
//! Anything not given falls back to the reference parameter block
//! (`beta = 0.3`, `gamma = 0.4`, `sigma = 0.01`, `epsilon = 1e-4`, zero
//! initial data, 100 paths). [`run_experiment`] writes CSV series, fit
//! results as JSON and a `manifest.json` listing the SHA-256 of every output.

mod artifacts;
pub mod csvio;
mod fieldsfile;
mod runner;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HetsisError, Result};
use crate::stochsim::{BoundaryMode, Execution, NoiseMode};

pub use artifacts::{FileEntry, RunRecord, LOCK_FILE, MANIFEST_FILE};
pub use csvio::{emit_csv, read_csv, CsvTable};
pub use fieldsfile::FieldsFile;
pub use runner::run_experiment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    HomFree,
    HomClamped,
    DiscreteNSweep,
    ContinuousPSweep,
    ContinuousPSweepFree,
    NonseparableMuSweep,
    DriftExponentSweep,
    LambdaCurves,
    NormalizationCurve,
    DensityPlot,
    MeanPath,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 11] = [
        ExperimentName::HomFree,
        ExperimentName::HomClamped,
        ExperimentName::DiscreteNSweep,
        ExperimentName::ContinuousPSweep,
        ExperimentName::ContinuousPSweepFree,
        ExperimentName::NonseparableMuSweep,
        ExperimentName::DriftExponentSweep,
        ExperimentName::LambdaCurves,
        ExperimentName::NormalizationCurve,
        ExperimentName::DensityPlot,
        ExperimentName::MeanPath,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::HomFree => "hom_free",
            ExperimentName::HomClamped => "hom_clamped",
            ExperimentName::DiscreteNSweep => "discrete_n_sweep",
            ExperimentName::ContinuousPSweep => "continuous_p_sweep",
            ExperimentName::ContinuousPSweepFree => "continuous_p_sweep_free",
            ExperimentName::NonseparableMuSweep => "nonseparable_mu_sweep",
            ExperimentName::DriftExponentSweep => "drift_exponent_sweep",
            ExperimentName::LambdaCurves => "lambda_curves",
            ExperimentName::NormalizationCurve => "normalization_curve",
            ExperimentName::DensityPlot => "density_plot",
            ExperimentName::MeanPath => "mean_path",
        }
    }

    /// Default boundary handling of the stochastic experiments.
    fn default_boundary(self) -> BoundaryMode {
        match self {
            ExperimentName::HomFree | ExperimentName::ContinuousPSweepFree => BoundaryMode::Free,
            _ => BoundaryMode::Clamped,
        }
    }

    fn default_noise(self) -> NoiseMode {
        match self {
            ExperimentName::DiscreteNSweep => NoiseMode::IndependentPerNode,
            _ => NoiseMode::SharedAcrossNodes,
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = HetsisError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| HetsisError::invalid(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub dt: f64,
    pub paths: usize,
    pub record_stride: usize,
    /// Upper bound on Euler steps per path; longer horizons use a coarser
    /// step `t_end / max_steps`.
    pub max_steps: usize,
    /// Upper bound on recorded points per path; the stride grows to fit.
    pub max_records: usize,
    /// Simulated horizon as a multiple of `t_crit`.
    pub horizon: f64,
    pub boundary: Option<BoundaryMode>,
    pub noise: Option<NoiseMode>,
    /// Scheduling only; never changes results, so it is not part of the
    /// spec hash.
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: 0.1,
            paths: 100,
            record_stride: 10,
            max_steps: 1_000_000,
            max_records: 100_000,
            horizon: 1.0,
            boundary: None,
            noise: None,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub beta: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub epsilon: f64,
    /// Initial infected share of every class: `I(0, w) = i0 * f(w)`.
    pub i0: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            beta: 0.3,
            gamma: 0.4,
            sigma: 0.01,
            epsilon: 1e-4,
            i0: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpaceSection {
    /// Quadrature nodes of the continuous h-state space.
    pub m: usize,
}

impl Default for SpaceSection {
    fn default() -> Self {
        Self { m: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensitySection {
    /// Width parameter of the centred density in the discrete sweep and the
    /// normalization curve.
    pub p: f64,
    /// Standard deviation of the density in the non-separable experiments.
    pub sd: f64,
}

impl Default for DensitySection {
    fn default() -> Self {
        Self { p: 0.5, sd: 0.1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub n: Option<Vec<usize>>,
    pub p: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    pub r: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    pub fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveSection {
    /// Grid points of each `lambda(t)` curve on `[0, t_crit]`.
    pub points: usize,
}

impl Default for CurveSection {
    fn default() -> Self {
        Self { points: 1001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    #[serde(default)]
    pub seed: u64,
    /// Where artifacts go; not part of the spec hash.
    #[serde(default = "default_output_dir", skip_serializing)]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub space: SpaceSection,
    #[serde(default)]
    pub density: DensitySection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub curve: CurveSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

/// `n in [2, 100]`, 12 log-spaced integers.
pub fn default_n_grid() -> Vec<usize> {
    let mut out: Vec<usize> = (0..12)
        .map(|k| (2.0 * 50f64.powf(k as f64 / 11.0)).round() as usize)
        .collect();
    out.dedup();
    out
}

/// `p = 0.05, 0.15, ..., 0.95`.
pub fn default_p_grid() -> Vec<f64> {
    (0..10).map(|k| (5 + 10 * k) as f64 / 100.0).collect()
}

/// `mu = 0, 0.125, ..., 1`.
pub fn default_mu_grid() -> Vec<f64> {
    (0..=8).map(|k| k as f64 / 8.0).collect()
}

impl ExperimentSpec {
    /// The named experiment with every parameter at its default.
    pub fn defaults(name: ExperimentName) -> Self {
        Self {
            name,
            seed: 0,
            output_dir: default_output_dir(),
            sim: SimSection::default(),
            model: ModelSection::default(),
            space: SpaceSection::default(),
            density: DensitySection::default(),
            sweep: SweepSection::default(),
            fit: FitSection::default(),
            curve: CurveSection::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| HetsisError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HetsisError::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| match e {
                HetsisError::Config(msg) => HetsisError::Config(format!("{}: {msg}", path.display())),
                other => other,
            })
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.sim.boundary.unwrap_or(self.name.default_boundary())
    }

    pub fn noise(&self) -> NoiseMode {
        self.sim.noise.unwrap_or(self.name.default_noise())
    }

    /// 0.8 for free-boundary runs and 0.9 otherwise unless overridden.
    pub fn fit_fraction(&self) -> f64 {
        self.fit.fraction.unwrap_or(match self.boundary() {
            BoundaryMode::Free => 0.8,
            BoundaryMode::Clamped => 0.9,
        })
    }

    pub fn n_grid(&self) -> Vec<usize> {
        match (&self.sweep.n, self.name) {
            (Some(n), _) => n.clone(),
            (None, ExperimentName::NormalizationCurve) => (2..=100).collect(),
            (None, _) => default_n_grid(),
        }
    }

    pub fn p_grid(&self) -> Vec<f64> {
        self.sweep.p.clone().unwrap_or_else(default_p_grid)
    }

    pub fn mu_grid(&self) -> Vec<f64> {
        match (&self.sweep.mu, self.name) {
            (Some(mu), _) => mu.clone(),
            (None, ExperimentName::LambdaCurves) => vec![0.0, 0.5, 1.0],
            (None, _) => default_mu_grid(),
        }
    }

    pub fn r_grid(&self) -> Vec<f64> {
        self.sweep.r.clone().unwrap_or_else(|| vec![0.8, 1.5])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HetsisError::Config(msg));
        let sim = &self.sim;
        if !(sim.dt > 0.0 && sim.dt.is_finite()) {
            return bad(format!("sim.dt must be positive, got {}", sim.dt));
        }
        if sim.paths == 0 || sim.record_stride == 0 || sim.max_steps == 0 || sim.max_records < 2 {
            return bad("sim.paths, sim.record_stride and sim.max_steps must be at least 1, sim.max_records at least 2".into());
        }
        if !(sim.horizon > 0.0 && sim.horizon.is_finite()) {
            return bad(format!("sim.horizon must be positive, got {}", sim.horizon));
        }
        let m = &self.model;
        for (key, v) in [("beta", m.beta), ("gamma", m.gamma), ("sigma", m.sigma), ("epsilon", m.epsilon)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("model.{key} must be finite and nonnegative, got {v}"));
            }
        }
        if !(m.beta > 0.0 && m.gamma > 0.0 && m.epsilon > 0.0) {
            return bad("model.beta, model.gamma and model.epsilon must be positive".into());
        }
        if !(0.0..=1.0).contains(&m.i0) {
            return bad(format!("model.i0 must lie in [0, 1], got {}", m.i0));
        }
        if self.space.m == 0 {
            return bad("space.m must be at least 1".into());
        }
        if !(self.density.p > 0.0 && self.density.p < 1.0) {
            return bad(format!("density.p must lie in (0, 1), got {}", self.density.p));
        }
        if !(self.density.sd > 0.0 && self.density.sd.is_finite()) {
            return bad(format!("density.sd must be positive, got {}", self.density.sd));
        }
        if let Some(f) = self.fit.fraction {
            if !(f > 0.0 && f < 1.0) {
                return bad(format!("fit.fraction must lie in (0, 1), got {f}"));
            }
        }
        if self.curve.points < 3 {
            return bad("curve.points must be at least 3".into());
        }
        check_grid("sweep.n", &self.n_grid(), |&n| n >= 2)?;
        check_grid("sweep.p", &self.p_grid(), |&p| p > 0.0 && p < 1.0)?;
        check_grid("sweep.mu", &self.mu_grid(), |&mu| (0.0..=1.0).contains(&mu))?;
        check_grid("sweep.r", &self.r_grid(), |&r| r > 0.0 && r.is_finite())?;
        Ok(())
    }

    /// Canonical JSON of the spec: sorted keys, shortest round-trip floats,
    /// output directory and scheduling left out.
    pub fn canonical_json(&self) -> String {
        serde_json::to_value(self)
            .expect("spec serializes")
            .to_string()
    }

    /// Hex SHA-256 of [`canonical_json`](Self::canonical_json).
    pub fn spec_hash(&self) -> String {
        artifacts::sha256_hex(self.canonical_json().as_bytes())
    }
}

fn check_grid<T: fmt::Debug>(key: &str, grid: &[T], ok: impl Fn(&T) -> bool) -> Result<()> {
    if grid.is_empty() {
        return Err(HetsisError::Config(format!("{key} must not be empty")));
    }
    if let Some(v) = grid.iter().find(|v| !ok(v)) {
        return Err(HetsisError::Config(format!("{key} contains invalid value {v:?}")));
    }
    Ok(())
}
