//! Canonical ensembles over exact spectra and the energy-matched inverse temperature.

use crate::dynamics::Observable;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::operators::{build_walk_in_sector, diagonalize, Sector, SpectralDecomposition};

/// Largest inverse temperature tried before declaring a zero-temperature limit.
pub const BETA_CEILING: f64 = 1e6;

/// Levels `E_k` paired with the diagonal matrix elements `<E_k|O|E_k>` of one observable.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalEnsemble {
    energies: Vec<f64>,
    values: Vec<f64>,
}

impl CanonicalEnsemble {
    pub fn new(energies: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if energies.len() != values.len() || energies.is_empty() {
            return Err(Error::Validation(format!(
                "ensemble needs matching non-empty lists, got {} energies and {} values",
                energies.len(),
                values.len()
            )));
        }
        let mut idx: Vec<usize> = (0..energies.len()).collect();
        idx.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
        Ok(CanonicalEnsemble {
            energies: idx.iter().map(|&k| energies[k]).collect(),
            values: idx.iter().map(|&k| values[k]).collect(),
        })
    }

    pub fn from_spectrum(spec: &SpectralDecomposition, diag: &[f64]) -> Result<Self> {
        Self::new(spec.energies.clone(), spec.diagonal_expectations(diag))
    }

    /// Union of several ensembles (e.g. the two spin-flip sectors).
    pub fn merge(parts: &[CanonicalEnsemble]) -> Result<Self> {
        let energies = parts.iter().flat_map(|p| p.energies.iter().copied()).collect();
        let values = parts.iter().flat_map(|p| p.values.iter().copied()).collect();
        Self::new(energies, values)
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// Boltzmann weights normalised to one, shifted by the ground energy.
    pub fn weights(&self, beta: f64) -> Vec<f64> {
        let e0 = self.ground_energy();
        let mut w: Vec<f64> = self.energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= z);
        w
    }

    /// `ln Tr e^{-βH}`.
    pub fn log_partition(&self, beta: f64) -> f64 {
        let e0 = self.ground_energy();
        let z: f64 = self.energies.iter().map(|e| (-beta * (e - e0)).exp()).sum();
        z.ln() - beta * e0
    }

    pub fn mean_energy(&self, beta: f64) -> f64 {
        self.weights(beta).iter().zip(&self.energies).map(|(w, e)| w * e).sum()
    }

    pub fn energy_variance(&self, beta: f64) -> f64 {
        let w = self.weights(beta);
        let mean: f64 = w.iter().zip(&self.energies).map(|(w, e)| w * e).sum();
        w.iter().zip(&self.energies).map(|(w, e)| w * (e - mean).powi(2)).sum()
    }

    /// Thermal expectation of the attached observable.
    pub fn expectation(&self, beta: f64) -> f64 {
        self.weights(beta).iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Thermodynamic entropy `β<E> + ln Z`.
    pub fn entropy(&self, beta: f64) -> f64 {
        beta * self.mean_energy(beta) + self.log_partition(beta)
    }

    /// Mean energy at infinite temperature.
    pub fn infinite_temperature_energy(&self) -> f64 {
        self.energies.iter().sum::<f64>() / self.len() as f64
    }
}

/// `Σ_k w_k <E_k|O|E_k>` with `w_k ∝ e^{-β(E_k - E_0)}`.
pub fn gibbs_expectation(spec: &SpectralDecomposition, observable: Observable, beta: f64) -> Result<f64> {
    if !beta.is_finite() {
        return Err(Error::Parameter(format!("beta must be finite, got {beta}")));
    }
    let values: Vec<f64> = match observable {
        Observable::Identity => vec![1.0; spec.dim()],
        Observable::Diagonal(d) => spec.diagonal_expectations(d),
        Observable::Operator(m) => (0..spec.dim())
            .map(|k| m.expectation(&spec.state(k)).re)
            .collect(),
    };
    Ok(CanonicalEnsemble::new(spec.energies.clone(), values)?.expectation(beta))
}

/// Inverse temperature at which the ensemble's mean energy equals `target`,
/// by bisection on the monotonically decreasing `<E>_β`.
pub fn solve_beta(ens: &CanonicalEnsemble, target: f64) -> Result<f64> {
    let tol = 1e-8 * target.abs().max(1.0);
    let e0 = ens.ground_energy();
    let e_inf = ens.infinite_temperature_energy();
    if (target - e_inf).abs() <= tol {
        return Ok(0.0);
    }
    if target > e_inf {
        return Err(Error::NoSolution {
            target,
            reason: format!("above the infinite-temperature energy {e_inf}"),
        });
    }
    if target < e0 - tol {
        return Err(Error::NoSolution {
            target,
            reason: format!("below the ground energy {e0}"),
        });
    }
    if target <= e0 + tol {
        return Err(Error::ZeroTemperatureLimit { target });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while ens.mean_energy(hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > BETA_CEILING {
            return Err(Error::ZeroTemperatureLimit { target });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let e = ens.mean_energy(mid);
        if (e - target).abs() <= tol || hi - lo <= 1e-15 * hi {
            return Ok(mid);
        }
        if e > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn solve_beta_exact(spec: &SpectralDecomposition, target: f64) -> Result<f64> {
    let ens = CanonicalEnsemble::new(spec.energies.clone(), vec![0.0; spec.dim()])?;
    solve_beta(&ens, target)
}

/// Walk spectrum of one spin-flip sector with the problem energy of each level.
pub fn sector_ensemble(g: &Graph, gamma: f64, sector: Sector) -> Result<CanonicalEnsemble> {
    let op = build_walk_in_sector(g, gamma, sector)?;
    let spec = diagonalize(&op, None)?;
    CanonicalEnsemble::from_spectrum(&spec, op.problem_diagonal()?)
}

/// Full `2^n` walk spectrum, assembled from both spin-flip sectors, with
/// `<E_k|H_p|E_k>` attached.
pub fn full_walk_ensemble(g: &Graph, gamma: f64) -> Result<CanonicalEnsemble> {
    if g.n() == 1 {
        return sector_ensemble(g, gamma, Sector::Full);
    }
    CanonicalEnsemble::merge(&[
        sector_ensemble(g, gamma, Sector::SpinFlipPlus)?,
        sector_ensemble(g, gamma, Sector::SpinFlipMinus)?,
    ])
}
