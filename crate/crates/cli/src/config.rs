//! TOML run and sweep configurations.

use std::path::{Path, PathBuf};

use nullwave::evolve::{AngularComponent, FieldData, InitialDataSpec, NullGridSpec, ReportPlan, RunOptions};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    pub u_max: f64,
    pub v_max: f64,
    /// Bound on the support of the cone data.
    pub v0: f64,
    #[serde(default)]
    pub l_max: usize,
    #[serde(default = "yes")]
    pub axisymmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeWeight {
    pub ell: usize,
    #[serde(default)]
    pub m: i64,
    pub weight: f64,
}

/// Cone data `ε · bump · Σ w Y_ℓm` for one unknown. An empty mode list
/// means spherically symmetric data with `rψ = ε·bump`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_support")]
    pub support: [f64; 2],
    #[serde(default)]
    pub modes: Vec<ModeWeight>,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { epsilon: 0.0, support: default_support(), modes: Vec::new() }
    }
}

impl FieldConfig {
    pub fn to_field_data(&self) -> FieldData {
        if self.modes.is_empty() {
            return FieldData::radial(self.epsilon, self.support);
        }
        FieldData {
            amplitude: self.epsilon,
            support: self.support,
            angular: self
                .modes
                .iter()
                .map(|w| AngularComponent { ell: w.ell, m: w.m, weight: w.weight })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default)]
    pub phi: FieldConfig,
    #[serde(default)]
    pub psi: FieldConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default = "yes")]
    pub sources: bool,
    #[serde(default = "one")]
    pub corrector_passes: usize,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { sources: true, corrector_passes: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Region parameter `δ`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Per-mode `δ_ℓ`; defaults to `min(δ/2, 1/(4ℓ+4))`.
    #[serde(default)]
    pub delta_ell: Option<f64>,
    /// Higher modes whose profile residual is reported.
    #[serde(default)]
    pub mode_ells: Vec<usize>,
    #[serde(default)]
    pub report_times: Vec<f64>,
    #[serde(default)]
    pub hyperboloidal: bool,
    #[serde(default = "default_power_window")]
    pub power_window: [f64; 2],
    #[serde(default = "default_log_window")]
    pub log_window: [f64; 2],
    /// Keep every `slice_stride`-th centre node in slices.csv.
    #[serde(default = "one")]
    pub slice_stride: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            delta_ell: None,
            mode_ells: Vec::new(),
            report_times: Vec::new(),
            hyperboloidal: false,
            power_window: default_power_window(),
            log_window: default_log_window(),
            slice_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub seed: u64,
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

fn default_support() -> [f64; 2] {
    [0.5, 2.0]
}

fn default_delta() -> f64 {
    0.1
}

fn default_power_window() -> [f64; 2] {
    [50.0, 1000.0]
}

fn default_log_window() -> [f64; 2] {
    [300.0, 1000.0]
}

fn default_out() -> PathBuf {
    PathBuf::from("run")
}

pub fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Read { file: path.to_path_buf(), source })?;
    Ok(toml::from_str(&text)?)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = read_toml(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid_spec(&self) -> NullGridSpec {
        let g = &self.grid;
        NullGridSpec {
            h: g.h,
            u_max: g.u_max,
            v_max: g.v_max,
            support_bound: g.v0,
            l_max: g.l_max,
            axisymmetric: g.axisymmetric,
        }
    }

    pub fn data_spec(&self) -> InitialDataSpec {
        InitialDataSpec { phi: self.data.phi.to_field_data(), psi: self.data.psi.to_field_data() }
    }

    pub fn plan(&self) -> ReportPlan {
        ReportPlan {
            times: self.analysis.report_times.clone(),
            hyperboloidal: self.analysis.hyperboloidal,
            hyperboloid_s: Vec::new(),
            keep_slices: true,
        }
    }

    pub fn options(&self) -> RunOptions {
        RunOptions { sources: self.physics.sources, corrector_passes: self.physics.corrector_passes }
    }

    pub fn delta_ell(&self, ell: usize) -> f64 {
        self.analysis
            .delta_ell
            .unwrap_or_else(|| nullwave::asympt::default_delta_ell(self.analysis.delta, ell))
    }

    /// Checks every field and reports the offending one by its path.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        positive("grid.h", g.h)?;
        positive("grid.v_max", g.v_max)?;
        positive("grid.u_max", g.u_max)?;
        if !(g.v0 > 0.0 && g.v0 < g.v_max) {
            return Err(config_err("grid.v0", format!("must lie in (0, v_max), got {}", g.v0)));
        }
        if g.u_max > g.v_max {
            return Err(config_err("grid.u_max", "must not exceed grid.v_max"));
        }
        for (name, f) in [("data.phi", &self.data.phi), ("data.psi", &self.data.psi)] {
            if !(f.epsilon >= 0.0) || !f.epsilon.is_finite() {
                return Err(config_err(format!("{name}.epsilon"), "must be finite and >= 0"));
            }
            let [a, b] = f.support;
            if !(a > 0.0 && a < b && b <= g.v0) {
                return Err(config_err(format!("{name}.support"), format!("need 0 < a < b <= grid.v0, got [{a}, {b}]")));
            }
            for (n, w) in f.modes.iter().enumerate() {
                if w.ell > g.l_max || w.m.unsigned_abs() as usize > w.ell || (g.axisymmetric && w.m != 0) {
                    return Err(config_err(
                        format!("{name}.modes[{n}]"),
                        format!("mode ({}, {}) not resolved by l_max = {} (axisymmetric = {})", w.ell, w.m, g.l_max, g.axisymmetric),
                    ));
                }
            }
        }
        if self.physics.sources && self.physics.corrector_passes == 0 {
            return Err(config_err("physics.corrector_passes", "must be >= 1 with sources on"));
        }
        let a = &self.analysis;
        if !(a.delta > 0.0 && a.delta < 1.0) {
            return Err(config_err("analysis.delta", "must lie in (0, 1)"));
        }
        if let Some(d) = a.delta_ell {
            if !(d > 0.0 && d < 1.0) {
                return Err(config_err("analysis.delta_ell", "must lie in (0, 1)"));
            }
        }
        for (n, &ell) in a.mode_ells.iter().enumerate() {
            if ell > g.l_max {
                return Err(config_err(format!("analysis.mode_ells[{n}]"), format!("{ell} exceeds grid.l_max")));
            }
        }
        for (n, &t) in a.report_times.iter().enumerate() {
            if !(t > 0.0) || 2.0 * t > g.v_max * (1.0 + 1e-12) {
                return Err(config_err(
                    format!("analysis.report_times[{n}]"),
                    format!("{t} must lie in (0, v_max/2 = {}]", g.v_max / 2.0),
                ));
            }
        }
        for (name, w) in [("analysis.power_window", a.power_window), ("analysis.log_window", a.log_window)] {
            if !(w[0] > 0.0 && w[1] > w[0]) {
                return Err(config_err(name, format!("need 0 < start < end, got {w:?}")));
            }
        }
        if a.slice_stride == 0 {
            return Err(config_err("analysis.slice_stride", "must be >= 1"));
        }
        self.grid_spec().validate().map_err(|e| config_err("grid", e.to_string()))?;
        self.data_spec()
            .validate(&self.grid_spec())
            .map_err(|e| config_err("data", e.to_string()))?;
        self.plan()
            .validate(&self.grid_spec())
            .map_err(|e| config_err("analysis.report_times", e.to_string()))?;
        Ok(())
    }
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(config_err(path, format!("must be positive, got {x}")))
    }
}

/// Random small-data experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub samples: usize,
    pub epsilon_range: [f64; 2],
    /// Left support end drawn uniformly from this range.
    #[serde(default = "default_left")]
    pub support_left: [f64; 2],
    /// Minimal support width.
    #[serde(default = "default_width")]
    pub min_width: f64,
    /// Largest `ℓ` carrying random angular weight.
    #[serde(default = "one")]
    pub l_data: usize,
    /// `c₁` counts as nonzero above `tau_scale · ε²`.
    #[serde(default = "default_tau")]
    pub tau_scale: f64,
    pub grid: GridConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_left() -> [f64; 2] {
    [0.2, 1.0]
}

fn default_width() -> f64 {
    0.5
}

fn default_tau() -> f64 {
    1e-12
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = read_toml(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(config_err("samples", "must be >= 1"));
        }
        let [lo, hi] = self.epsilon_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(config_err("epsilon_range", format!("need 0 < lo <= hi, got [{lo}, {hi}]")));
        }
        let [a, b] = self.support_left;
        if !(a > 0.0 && b >= a && b + self.min_width <= self.grid.v0) {
            return Err(config_err("support_left", "need 0 < lo <= hi and hi + min_width <= grid.v0"));
        }
        positive("min_width", self.min_width)?;
        positive("tau_scale", self.tau_scale)?;
        if self.l_data > self.grid.l_max {
            return Err(config_err("l_data", "exceeds grid.l_max"));
        }
        let spec = NullGridSpec {
            h: self.grid.h,
            u_max: self.grid.u_max,
            v_max: self.grid.v_max,
            support_bound: self.grid.v0,
            l_max: self.grid.l_max,
            axisymmetric: self.grid.axisymmetric,
        };
        spec.validate().map_err(|e| config_err("grid", e.to_string()))?;
        Ok(())
    }
}
