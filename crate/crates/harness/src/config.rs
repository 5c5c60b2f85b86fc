//! Experiment configuration files (TOML).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ctqw_core::graph::MAX_VERTICES;
use ctqw_core::operators::MAX_QUBITS;
use ctqw_core::thermal::{DosKind, GammaGrid, GammaStrategy};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    GammaSweep,
    TimeSeries,
    ThermalStats,
    DosHistogram,
    Msqw,
    FloquetSweep,
    Shorttime,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GammaSweep => "gamma_sweep",
            ExperimentKind::TimeSeries => "time_series",
            ExperimentKind::ThermalStats => "thermal_stats",
            ExperimentKind::DosHistogram => "dos_histogram",
            ExperimentKind::Msqw => "msqw",
            ExperimentKind::FloquetSweep => "floquet_sweep",
            ExperimentKind::Shorttime => "shorttime",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Binomial,
    Regular,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub family: FamilyKind,
    /// Edge probability for binomial graphs.
    pub p: Option<f64>,
    /// Vertex degree for regular graphs.
    pub degree: Option<usize>,
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Instances per size.
    #[serde(default = "one")]
    pub instances: usize,
    /// Index of the first instance, so ensembles can be split across runs.
    #[serde(default)]
    pub offset: usize,
    /// Graph JSON files for the explicit family, relative to the config file.
    #[serde(default)]
    pub files: Vec<PathBuf>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Evaluate every grid point.
    Full,
    /// Local descent from the grid point nearest the EMG optimum.
    Descent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSpec {
    /// Explicit γ values; used by sweeps and time series when non-empty.
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default = "grid_lo")]
    pub lo: f64,
    #[serde(default = "grid_hi")]
    pub hi: f64,
    #[serde(default = "grid_step")]
    pub step: f64,
    /// Strategies evaluated by `thermal_stats` (and used to pick γ elsewhere).
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    #[serde(default = "default_search")]
    pub search: SearchMode,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn grid_lo() -> f64 {
    0.05
}
fn grid_hi() -> f64 {
    3.0
}
fn grid_step() -> f64 {
    0.05
}
fn default_strategies() -> Vec<String> {
    vec!["brute".into()]
}
fn default_search() -> SearchMode {
    SearchMode::Full
}
fn default_window() -> usize {
    2
}

impl Default for GammaSpec {
    fn default() -> Self {
        GammaSpec {
            values: Vec::new(),
            lo: grid_lo(),
            hi: grid_hi(),
            step: grid_step(),
            strategies: default_strategies(),
            search: default_search(),
            window: default_window(),
        }
    }
}

impl GammaSpec {
    pub fn grid(&self) -> GammaGrid {
        GammaGrid {
            lo: self.lo,
            hi: self.hi,
            step: self.step,
        }
    }

    /// Explicit values, or the grid when none are given.
    pub fn points(&self) -> Vec<f64> {
        if self.values.is_empty() {
            self.grid().points()
        } else {
            self.values.clone()
        }
    }

    pub fn parsed_strategies(&self) -> Result<Vec<GammaStrategy>> {
        self.strategies
            .iter()
            .map(|s| {
                GammaStrategy::from_str(s).map_err(|_| {
                    HarnessError::Config(format!(
                        "gamma.strategies: unknown strategy '{s}' (expected brute, heuristic, gaussian_opt or emg_opt)"
                    ))
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default = "t_max")]
    pub t_max: f64,
    #[serde(default = "samples")]
    pub samples: usize,
    /// Record the entanglement entropy of a random half of the qubits.
    #[serde(default)]
    pub entropy: bool,
    /// Write every sample; when false only per-walk summaries are kept.
    #[serde(default = "yes")]
    pub series: bool,
}

fn yes() -> bool {
    true
}

fn t_max() -> f64 {
    100.0
}
fn samples() -> usize {
    2000
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec {
            t_max: t_max(),
            samples: samples(),
            entropy: false,
            series: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSpec {
    /// Strategies whose γ also gets the full-spectrum Gibbs prediction.
    #[serde(default = "default_strategies")]
    pub exact_gibbs: Vec<String>,
    /// Late-time entanglement samples per instance at those γ (0 disables).
    #[serde(default)]
    pub entropy_samples: usize,
    #[serde(default = "entropy_t_min")]
    pub entropy_t_min: f64,
    #[serde(default = "entropy_t_max")]
    pub entropy_t_max: f64,
}

fn entropy_t_min() -> f64 {
    50.0
}
fn entropy_t_max() -> f64 {
    100.0
}

impl Default for ThermalSpec {
    fn default() -> Self {
        ThermalSpec {
            exact_gibbs: default_strategies(),
            entropy_samples: 0,
            entropy_t_min: entropy_t_min(),
            entropy_t_max: entropy_t_max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsqwSpec {
    #[serde(default = "msqw_gammas")]
    pub gammas: Vec<f64>,
    #[serde(default = "msqw_duration")]
    pub duration: f64,
    #[serde(default = "msqw_samples")]
    pub samples_per_stage: usize,
    #[serde(default = "dos_emg")]
    pub model: String,
}

fn msqw_gammas() -> Vec<f64> {
    vec![0.5, 1.0, 1.5, 2.0, 2.5]
}
fn msqw_duration() -> f64 {
    20.0
}
fn msqw_samples() -> usize {
    100
}
fn dos_emg() -> String {
    "emg".into()
}

impl Default for MsqwSpec {
    fn default() -> Self {
        MsqwSpec {
            gammas: msqw_gammas(),
            duration: msqw_duration(),
            samples_per_stage: msqw_samples(),
            model: dos_emg(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetSpec {
    #[serde(default = "taus")]
    pub taus: Vec<f64>,
    #[serde(default = "floquet_gamma")]
    pub gamma: f64,
    #[serde(default = "dos_emg")]
    pub model: String,
}

fn taus() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.4]
}
fn floquet_gamma() -> f64 {
    1.0
}

impl Default for FloquetSpec {
    fn default() -> Self {
        FloquetSpec {
            taus: taus(),
            gamma: floquet_gamma(),
            model: dos_emg(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DosSpec {
    #[serde(default = "bins")]
    pub bins: usize,
}

fn bins() -> usize {
    100
}

impl Default for DosSpec {
    fn default() -> Self {
        DosSpec { bins: bins() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShorttimeSpec {
    /// Sample until `torsion * t^4` reaches this value.
    #[serde(default = "eps_max")]
    pub eps_max: f64,
    #[serde(default = "short_samples")]
    pub samples: usize,
}

fn eps_max() -> f64 {
    1.0
}
fn short_samples() -> usize {
    200
}

impl Default for ShorttimeSpec {
    fn default() -> Self {
        ShorttimeSpec {
            eps_max: eps_max(),
            samples: short_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub master_seed: u64,
    /// Output directory, relative to the working directory.
    pub output: Option<PathBuf>,
    pub graphs: GraphSpec,
    #[serde(default)]
    pub gamma: GammaSpec,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub thermal: ThermalSpec,
    #[serde(default)]
    pub msqw: MsqwSpec,
    #[serde(default)]
    pub floquet: FloquetSpec,
    #[serde(default)]
    pub dos: DosSpec,
    #[serde(default)]
    pub shorttime: ShorttimeSpec,
    /// Worker threads; defaults to all cores.
    pub threads: Option<usize>,
}

pub fn parse_model(s: &str, key: &str) -> Result<DosKind> {
    DosKind::from_str(s).map_err(|_| HarnessError::Config(format!("{key}: unknown model '{s}' (expected gaussian or emg)")))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            for f in &mut cfg.graphs.files {
                if f.is_relative() {
                    *f = dir.join(&*f);
                }
            }
        }
        Ok((cfg, text))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let g = &self.graphs;
        match g.family {
            FamilyKind::Binomial => match g.p {
                Some(p) if (0.0..=1.0).contains(&p) => {}
                Some(p) => return bad(format!("graphs.p must lie in [0, 1], got {p}")),
                None => return bad("graphs.p is required for the binomial family".into()),
            },
            FamilyKind::Regular => {
                let Some(d) = g.degree else {
                    return bad("graphs.degree is required for the regular family".into());
                };
                if let Some(&n) = g.sizes.iter().find(|&&n| d >= n || (n * d) % 2 == 1) {
                    return bad(format!("graphs.degree {d} is impossible for {n} vertices"));
                }
            }
            FamilyKind::Explicit => {
                if g.files.is_empty() {
                    return bad("graphs.files must list at least one graph for the explicit family".into());
                }
            }
        }
        if g.family != FamilyKind::Explicit {
            if g.sizes.is_empty() {
                return bad("graphs.sizes must not be empty".into());
            }
            if g.instances == 0 {
                return bad("graphs.instances must be at least 1".into());
            }
            if let Some(&n) = g.sizes.iter().find(|&&n| n < 2 || n > MAX_VERTICES) {
                return bad(format!("graphs.sizes: {n} is outside 2..={MAX_VERTICES}"));
            }
        }
        if let Some(&n) = g.sizes.iter().find(|&&n| n > MAX_QUBITS) {
            return Err(HarnessError::Capacity(format!(
                "graphs.sizes: {n} qubits exceeds the dense limit of {MAX_QUBITS}"
            )));
        }
        if self.gamma.grid().points().is_empty() && self.gamma.values.is_empty() {
            return bad(format!(
                "gamma grid lo={} hi={} step={} is empty",
                self.gamma.lo, self.gamma.hi, self.gamma.step
            ));
        }
        if self.gamma.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return bad("gamma.values must be finite and non-negative".into());
        }
        self.gamma.parsed_strategies()?;
        for s in &self.thermal.exact_gibbs {
            GammaStrategy::from_str(s)
                .map_err(|_| HarnessError::Config(format!("thermal.exact_gibbs: unknown strategy '{s}'")))?;
        }
        if !(self.time.t_max >= 0.0) || self.time.samples == 0 {
            return bad("time.t_max must be non-negative and time.samples positive".into());
        }
        if self.thermal.entropy_samples > 0 && !(self.thermal.entropy_t_max >= self.thermal.entropy_t_min) {
            return bad("thermal.entropy_t_max must not be below thermal.entropy_t_min".into());
        }
        if self.msqw.gammas.is_empty() || !(self.msqw.duration > 0.0) {
            return bad("msqw.gammas must be non-empty and msqw.duration positive".into());
        }
        if self.msqw.gammas.windows(2).any(|w| w[1] < w[0]) {
            return bad("msqw.gammas must be non-decreasing".into());
        }
        parse_model(&self.msqw.model, "msqw.model")?;
        parse_model(&self.floquet.model, "floquet.model")?;
        if self.floquet.taus.iter().any(|t| !(*t > 0.0)) {
            return bad("floquet.taus must be positive".into());
        }
        if self.dos.bins == 0 {
            return bad("dos.bins must be positive".into());
        }
        if !(self.shorttime.eps_max > 0.0) || self.shorttime.samples < 2 {
            return bad("shorttime.eps_max must be positive and shorttime.samples at least 2".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }
}
