//! Analytic density-of-states models of the walk spectrum and the thermal
//! predictions derived from them.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Moments of the walk eigenvalue distribution, from trace identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DosMoments {
    pub mu: f64,
    pub sigma2: f64,
    /// Third central moment.
    pub m3: f64,
    /// Fourth central moment.
    pub m4: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn dos_moments(g: &Graph, gamma: f64) -> DosMoments {
    let inv = g.invariants();
    let n = g.n() as f64;
    let (k2, k3, k4) = (inv.kappa2 as f64, inv.kappa3 as f64, inv.kappa4 as f64);
    let g2 = gamma * gamma;
    let sigma2 = n + g2 * k2;
    let m3 = 6.0 * gamma.powi(3) * k3;
    let m4 = 3.0 * n * n - 2.0 * n
        + 4.0 * g2 * n * k2
        + 2.0 * g2 * (n - 4.0) * k2
        + g2 * g2 * (k2 + 3.0 * k2 * (k2 - 1.0) + 24.0 * k4);
    DosMoments {
        mu: 0.0,
        sigma2,
        m3,
        m4,
        skewness: m3 / sigma2.powf(1.5),
        excess_kurtosis: -2.0 * (n + 4.0 * g2 * k2 + g2 * g2 * (k2 - 12.0 * k4)) / (sigma2 * sigma2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DosKind {
    Gaussian,
    Emg,
}

impl std::str::FromStr for DosKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(DosKind::Gaussian),
            "emg" => Ok(DosKind::Emg),
            _ => Err(Error::Parameter(format!("unknown density model '{s}'"))),
        }
    }
}

/// Normalised density of states. The exponentially modified Gaussian is a
/// Gaussian of mean `m` and variance `nu2` convolved with an exponential of
/// rate `lambda`, skewed towards high energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DosModel {
    Gaussian { sigma2: f64 },
    Emg { m: f64, nu2: f64, lambda: f64 },
}

impl DosModel {
    pub fn kind(&self) -> DosKind {
        match self {
            DosModel::Gaussian { .. } => DosKind::Gaussian,
            DosModel::Emg { .. } => DosKind::Emg,
        }
    }

    /// Mean of the exponential part, zero for the Gaussian.
    pub fn delta(&self) -> f64 {
        match *self {
            DosModel::Gaussian { .. } => 0.0,
            DosModel::Emg { lambda, .. } => 1.0 / lambda,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            DosModel::Gaussian { sigma2 } => sigma2,
            DosModel::Emg { nu2, lambda, .. } => nu2 + 1.0 / (lambda * lambda),
        }
    }

    /// Lower end of the inverse temperatures where `ln Z` is finite.
    pub fn beta_lower_bound(&self) -> f64 {
        match *self {
            DosModel::Gaussian { .. } => f64::NEG_INFINITY,
            DosModel::Emg { lambda, .. } => -lambda,
        }
    }

    /// `ln ∫ ρ(E) e^{-βE} dE` for the normalised density.
    pub fn log_partition(&self, beta: f64) -> f64 {
        match *self {
            DosModel::Gaussian { sigma2 } => 0.5 * sigma2 * beta * beta,
            DosModel::Emg { m, nu2, lambda } => {
                if beta <= -lambda {
                    return f64::INFINITY;
                }
                -(beta / lambda).ln_1p() - m * beta + 0.5 * nu2 * beta * beta
            }
        }
    }

    /// `-∂ ln Z / ∂β`.
    pub fn mean_energy(&self, beta: f64) -> f64 {
        match *self {
            DosModel::Gaussian { sigma2 } => -sigma2 * beta,
            DosModel::Emg { m, nu2, lambda } => 1.0 / (lambda + beta) + m - nu2 * beta,
        }
    }

    pub fn energy_variance(&self, beta: f64) -> f64 {
        match *self {
            DosModel::Gaussian { sigma2 } => sigma2,
            DosModel::Emg { nu2, lambda, .. } => nu2 + 1.0 / (lambda + beta).powi(2),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            DosModel::Gaussian { sigma2 } => {
                (-0.5 * x * x / sigma2).exp() / (2.0 * std::f64::consts::PI * sigma2).sqrt()
            }
            DosModel::Emg { m, nu2, lambda } => {
                let nu = nu2.sqrt();
                let z = (m + lambda * nu2 - x) / (std::f64::consts::SQRT_2 * nu);
                // erfc(z) e^{-z²} form stays finite deep in the Gaussian tail
                let log_pref = 0.5 * lambda * (2.0 * m + lambda * nu2 - 2.0 * x);
                if z > 5.0 {
                    let scaled = erfcx(z);
                    0.5 * lambda * (log_pref - z * z).exp() * scaled
                } else {
                    0.5 * lambda * log_pref.exp() * libm::erfc(z)
                }
            }
        }
    }

    /// Inverse temperature with `<E>_β = target`, in closed form.
    pub fn solve_beta(&self, target: f64) -> Result<f64> {
        if target == 0.0 {
            return Ok(0.0);
        }
        if target > 0.0 {
            return Err(Error::NoSolution {
                target,
                reason: "model energies above the mean need negative temperature".into(),
            });
        }
        let et = -target;
        match *self {
            DosModel::Gaussian { sigma2 } => Ok(et / sigma2),
            DosModel::Emg { nu2, lambda, .. } => {
                let d = 1.0 / lambda;
                let sigma2 = nu2 + d * d;
                let a = d * nu2;
                let b = sigma2 - et * d;
                let disc = (sigma2 + et * d).powi(2) - 4.0 * et * d.powi(3);
                if disc < 0.0 {
                    return Err(Error::ModelInfeasible(format!(
                        "negative discriminant {disc:.3e} in the inverse-temperature equation"
                    )));
                }
                let root = disc.sqrt();
                Ok(if b >= 0.0 {
                    2.0 * et / (b + root)
                } else {
                    (root - b) / (2.0 * a)
                })
            }
        }
    }

    /// Inverse temperature with `<E>_β = target` by bisection on the model mean energy.
    pub fn solve_beta_numeric(&self, target: f64) -> Result<f64> {
        if target >= 0.0 {
            return self.solve_beta(target);
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.mean_energy(hi) > target {
            lo = hi;
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::ModelInfeasible(format!("no model temperature reaches {target}")));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.mean_energy(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Scaled complementary error function `e^{z²} erfc(z)` for large positive `z`
/// (asymptotic continued fraction).
fn erfcx(z: f64) -> f64 {
    let mut f = 0.0;
    for k in (1..=60).rev() {
        f = (k as f64 / 2.0) / (z + f);
    }
    1.0 / ((z + f) * std::f64::consts::PI.sqrt())
}

/// Cube-root factor `(3κ₃)^(1/3)` such that the model skew parameter is `γ` times it.
fn skew_rate(g: &Graph) -> f64 {
    (3.0 * g.invariants().kappa3 as f64).cbrt()
}

/// Matches an exponentially modified Gaussian to the mean, variance and third
/// moment. Triangle-free graphs have no skew and yield the Gaussian.
pub fn fit_emg(moments: &DosMoments, gamma: f64, g: &Graph) -> Result<DosModel> {
    let delta = gamma * skew_rate(g);
    if delta == 0.0 {
        return Ok(DosModel::Gaussian {
            sigma2: moments.sigma2,
        });
    }
    let nu2 = moments.sigma2 - delta * delta;
    if nu2 <= 0.0 {
        return Err(Error::FitInfeasible(format!(
            "variance {} does not exceed the squared skew scale {}",
            moments.sigma2,
            delta * delta
        )));
    }
    Ok(DosModel::Emg {
        m: -delta,
        nu2,
        lambda: 1.0 / delta,
    })
}

pub fn fit_model(g: &Graph, gamma: f64, kind: DosKind) -> Result<DosModel> {
    let moments = dos_moments(g, gamma);
    match kind {
        DosKind::Gaussian => Ok(DosModel::Gaussian {
            sigma2: moments.sigma2,
        }),
        DosKind::Emg => fit_emg(&moments, gamma, g),
    }
}

/// `n / (n + γ² κ₂)`.
pub fn beta_gaussian(g: &Graph, gamma: f64) -> f64 {
    let n = g.n() as f64;
    n / dos_moments(g, gamma).sigma2
}

/// Closed-form EMG inverse temperature for the target energy `-n`, checked
/// against a numerical root of the model's energy equation.
pub fn beta_emg(g: &Graph, gamma: f64) -> Result<f64> {
    let model = fit_model(g, gamma, DosKind::Emg)?;
    let target = -(g.n() as f64);
    let closed = model.solve_beta(target)?;
    let numeric = model.solve_beta_numeric(target)?;
    if (closed - numeric).abs() > 1e-10 * closed.abs().max(1.0) {
        return Err(Error::Numeric(format!(
            "closed-form beta {closed} disagrees with root {numeric}"
        )));
    }
    Ok(closed)
}

/// Model entropy `β<E> + n ln 2 + ln Z(β)` (the density is normalised over `2^n` states).
pub fn entropy_model(model: &DosModel, beta: f64, n: usize) -> f64 {
    beta * model.mean_energy(beta) + n as f64 * LN_2 + model.log_partition(beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictionSource {
    ExactGibbs,
    Gaussian,
    Emg,
}

impl From<DosKind> for PredictionSource {
    fn from(k: DosKind) -> Self {
        match k {
            DosKind::Gaussian => PredictionSource::Gaussian,
            DosKind::Emg => PredictionSource::Emg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalPrediction {
    pub beta: f64,
    /// Predicted long-time `<H_p>`.
    pub hp: f64,
    pub entropy: f64,
    pub target_energy: f64,
    pub source: PredictionSource,
}

/// `-(1/β) ∂ ln Z/∂γ` at fixed β, for the model fitted at `gamma`.
pub fn hp_model_at(model: &DosModel, g: &Graph, gamma: f64, beta: f64) -> f64 {
    let k2 = g.invariants().kappa2 as f64;
    match model {
        DosModel::Gaussian { .. } => -beta * gamma * k2,
        DosModel::Emg { lambda, .. } => {
            let d = 1.0 / lambda;
            let dp = skew_rate(g);
            // -(1/β)[-βΔ'/(1+βΔ) + βΔ' + β²(γκ₂ - ΔΔ')] with β cancelled
            dp / (1.0 + beta * d) - dp - beta * (gamma * k2 - d * dp)
        }
    }
}

/// Model prediction for a walk whose energy is `target`.
pub fn predict_model(g: &Graph, gamma: f64, kind: DosKind, target: f64) -> Result<ThermalPrediction> {
    let model = fit_model(g, gamma, kind)?;
    predict_with(&model, g, gamma, target)
}

pub fn predict_with(model: &DosModel, g: &Graph, gamma: f64, target: f64) -> Result<ThermalPrediction> {
    let beta = model.solve_beta(target)?;
    Ok(ThermalPrediction {
        beta,
        hp: hp_model_at(model, g, gamma, beta),
        entropy: entropy_model(model, beta, g.n()),
        target_energy: target,
        source: model.kind().into(),
    })
}

/// Prediction for the plain walk from |+>, whose energy is `-n`.
pub fn hp_model(model: &DosModel, g: &Graph, gamma: f64) -> Result<ThermalPrediction> {
    predict_with(model, g, gamma, -(g.n() as f64))
}
