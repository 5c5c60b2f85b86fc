//! Choosing the problem weight γ: exhaustive grid search on the measured
//! long-time average, the edge-count heuristic and model-based optima.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::dynamics::{evolve_with, time_average, EvolveOptions, Observable};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::operators::{build_walk_in_sector, diagonalize, plus_state, Sector};

use super::dos::{fit_model, hp_model, DosKind, PredictionSource, ThermalPrediction};
use super::gibbs::{sector_ensemble, solve_beta, CanonicalEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GammaStrategy {
    Brute,
    Heuristic,
    GaussianOpt,
    EmgOpt,
}

impl GammaStrategy {
    pub const ALL: [GammaStrategy; 4] = [
        GammaStrategy::Brute,
        GammaStrategy::Heuristic,
        GammaStrategy::GaussianOpt,
        GammaStrategy::EmgOpt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GammaStrategy::Brute => "brute",
            GammaStrategy::Heuristic => "heuristic",
            GammaStrategy::GaussianOpt => "gaussian_opt",
            GammaStrategy::EmgOpt => "emg_opt",
        }
    }
}

impl fmt::Display for GammaStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GammaStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown gamma strategy '{s}'")))
    }
}

/// Uniform γ grid `lo, lo + step, ..., ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for GammaGrid {
    fn default() -> Self {
        GammaGrid {
            lo: 0.05,
            hi: 3.0,
            step: 0.05,
        }
    }
}

impl GammaGrid {
    pub fn points(&self) -> Vec<f64> {
        if !(self.step > 0.0) || !(self.hi >= self.lo) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Vec::new();
        }
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.lo + k as f64 * self.step).collect()
    }

    /// Index of the grid point closest to `gamma`.
    pub fn nearest(&self, gamma: f64) -> usize {
        let last = self.points().len().saturating_sub(1);
        (((gamma - self.lo) / self.step).round().max(0.0) as usize).min(last)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaChoice {
    pub gamma: f64,
    /// Measured long-time `<H_p>` for brute force, model prediction otherwise.
    pub hp: f64,
    pub strategy: GammaStrategy,
}

/// `γ² κ₂ = n`.
pub fn gamma_heuristic(g: &Graph) -> Result<f64> {
    let k2 = g.invariants().kappa2;
    if k2 == 0 {
        return Err(Error::Parameter("heuristic gamma needs at least one edge".into()));
    }
    Ok((g.n() as f64 / k2 as f64).sqrt())
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
pub fn golden_section(mut a: f64, mut b: f64, tol: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// γ minimising the EMG prediction of the long-time `<H_p>` on `[lo, hi]`.
pub fn gamma_emg_opt(g: &Graph, lo: f64, hi: f64) -> Result<(f64, f64)> {
    golden_section(lo, hi, 1e-4, |gamma| match fit_model(g, gamma, DosKind::Emg) {
        Ok(model) => Ok(hp_model(&model, g, gamma)?.hp),
        Err(Error::FitInfeasible(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    })
}

/// Long-time average of `<H_p>` for the walk from |+>, in the spin-flip sector.
pub fn hp_time_average(g: &Graph, gamma: f64) -> Result<f64> {
    let sector = walk_sector(g);
    let op = build_walk_in_sector(g, gamma, sector)?;
    let spec = diagonalize(&op, None)?;
    time_average(&spec, &plus_state(g.n(), sector), Observable::Diagonal(op.problem_diagonal()?))
}

fn walk_sector(g: &Graph) -> Sector {
    if g.n() > 1 {
        Sector::SpinFlipPlus
    } else {
        Sector::Full
    }
}

pub fn gamma_select(g: &Graph, strategy: GammaStrategy, grid: &GammaGrid) -> Result<GammaChoice> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::Parameter(format!("empty gamma grid {grid:?}")));
    }
    let (gamma, hp) = match strategy {
        GammaStrategy::Brute => {
            let (i, v) = grid_argmin(&points, |gm| hp_time_average(g, gm))?;
            (points[i], v)
        }
        GammaStrategy::Heuristic | GammaStrategy::GaussianOpt => {
            let gm = gamma_heuristic(g)?;
            let model = fit_model(g, gm, DosKind::Gaussian)?;
            (gm, hp_model(&model, g, gm)?.hp)
        }
        GammaStrategy::EmgOpt => gamma_emg_opt(g, grid.lo, grid.hi)?,
    };
    Ok(GammaChoice { gamma, hp, strategy })
}

/// Brute-force optimum found by local descent on the grid, started from the
/// grid point nearest `start` and confirmed over `window` neighbours on each side.
pub fn gamma_brute_descent(
    grid: &GammaGrid,
    start: f64,
    window: usize,
    mut eval: impl FnMut(f64) -> Result<f64>,
) -> Result<GammaChoice> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::Parameter(format!("empty gamma grid {grid:?}")));
    }
    let (i, v) = grid_descent(&points, grid.nearest(start), window, &mut eval)?;
    Ok(GammaChoice {
        gamma: points[i],
        hp: v,
        strategy: GammaStrategy::Brute,
    })
}

/// Index and value of the smallest `f` over `points`; the first wins ties.
pub fn grid_argmin(points: &[f64], mut f: impl FnMut(f64) -> Result<f64>) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in points.iter().enumerate() {
        let v = f(x)?;
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.ok_or_else(|| Error::Parameter("empty grid".into()))
}

/// Local minimum of `f` over `points`: a point no worse than every point
/// within `window` indices of it. Each point is evaluated at most once.
pub fn grid_descent(
    points: &[f64],
    start: usize,
    window: usize,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(usize, f64)> {
    if points.is_empty() {
        return Err(Error::Parameter("empty grid".into()));
    }
    let mut cache: BTreeMap<usize, f64> = BTreeMap::new();
    let mut value = |i: usize, cache: &mut BTreeMap<usize, f64>| -> Result<f64> {
        if let Some(&v) = cache.get(&i) {
            return Ok(v);
        }
        let v = f(points[i])?;
        cache.insert(i, v);
        Ok(v)
    };
    let mut best = start.min(points.len() - 1);
    let mut best_v = value(best, &mut cache)?;
    loop {
        let lo = best.saturating_sub(window.max(1));
        let hi = (best + window.max(1)).min(points.len() - 1);
        let mut moved = false;
        for i in lo..=hi {
            let v = value(i, &mut cache)?;
            if v < best_v || (v == best_v && i < best) {
                best = i;
                best_v = v;
                moved = true;
            }
        }
        if !moved {
            return Ok((best, best_v));
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvaluationOptions {
    /// Also diagonalize the odd spin-flip sector so the full spectrum is available.
    pub full_spectrum: bool,
    /// Times at which to sample the entanglement entropy of `entropy_subset`.
    pub entropy_times: Vec<f64>,
    pub entropy_subset: Vec<usize>,
}

/// Everything measured about one walk at one γ.
#[derive(Debug, Clone)]
pub struct WalkEvaluation {
    pub gamma: f64,
    /// Long-time average of `<H_p>`.
    pub hp_bar: f64,
    /// Even-sector levels with `<E_k|H_p|E_k>`.
    pub even: CanonicalEnsemble,
    pub odd: Option<CanonicalEnsemble>,
    /// `|Σ_k |<E_k|+>|² - 1|`.
    pub overlap_norm_residual: f64,
    /// `|Σ_k |<E_k|+>|² E_k + n|`.
    pub energy_residual: f64,
    pub entropy: Vec<f64>,
    pub max_norm_drift: f64,
    pub max_energy_drift: f64,
}

impl WalkEvaluation {
    /// Canonical ensemble over the full spectrum when both sectors are present.
    pub fn ensemble(&self) -> Result<CanonicalEnsemble> {
        match &self.odd {
            Some(odd) => CanonicalEnsemble::merge(&[self.even.clone(), odd.clone()]),
            None => Err(Error::Validation("odd sector not evaluated".into())),
        }
    }

    /// Gibbs prediction over the full spectrum at the walk's energy `-n`.
    pub fn exact_prediction(&self, n: usize) -> Result<ThermalPrediction> {
        let ens = self.ensemble()?;
        let target = -(n as f64);
        let beta = solve_beta(&ens, target)?;
        Ok(ThermalPrediction {
            beta,
            hp: ens.expectation(beta),
            entropy: ens.entropy(beta),
            target_energy: target,
            source: PredictionSource::ExactGibbs,
        })
    }
}

pub fn evaluate_walk(g: &Graph, gamma: f64, opts: &EvaluationOptions) -> Result<WalkEvaluation> {
    let n = g.n();
    let sector = walk_sector(g);
    let op = build_walk_in_sector(g, gamma, sector)?;
    let spec = diagonalize(&op, None)?;
    let psi0 = plus_state(n, sector);
    let diag = op.problem_diagonal()?;
    let hp_bar = time_average(&spec, &psi0, Observable::Diagonal(diag))?;
    let coeffs = spec.overlaps(&psi0);
    let weight: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let energy: f64 = coeffs.iter().zip(&spec.energies).map(|(c, e)| c.norm_sqr() * e).sum();
    let even = CanonicalEnsemble::from_spectrum(&spec, diag)?;
    let (mut entropy, mut max_norm_drift, mut max_energy_drift) = (Vec::new(), 0.0, 0.0);
    if !opts.entropy_times.is_empty() {
        let traj = evolve_with(
            &op,
            &spec,
            &psi0,
            &opts.entropy_times,
            &EvolveOptions {
                keep_states: false,
                ground_manifold: None,
                entropy_subset: Some(opts.entropy_subset.clone()),
            },
        )?;
        max_norm_drift = traj.max_norm_drift();
        max_energy_drift = traj.max_energy_drift();
        entropy = traj.entropy.unwrap_or_default();
    }
    let odd = if opts.full_spectrum && sector == Sector::SpinFlipPlus {
        Some(sector_ensemble(g, gamma, Sector::SpinFlipMinus)?)
    } else {
        None
    };
    Ok(WalkEvaluation {
        gamma,
        hp_bar,
        even,
        odd,
        overlap_norm_residual: (weight - 1.0).abs(),
        energy_residual: (energy + n as f64).abs(),
        entropy,
        max_norm_drift,
        max_energy_drift,
    })
}
