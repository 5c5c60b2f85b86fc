//! Short-time geometry of the walk started from |+>: central energy moments,
//! curvature, torsion and the two-level approximation of `<H_p(t)>`.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Central moments `<(H - <H>)^j>` of `H_d + γ H_p` in the state |+>.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralMoments {
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl CentralMoments {
    pub fn curvature(&self) -> f64 {
        self.m4 - self.m2 * self.m2
    }

    /// `m4 - m2² - m3²/m2`; undefined for `m2 = 0`.
    pub fn torsion(&self) -> Result<f64> {
        if self.m2 == 0.0 {
            return Err(Error::UndefinedTorsion);
        }
        Ok(self.m4 - self.m2 * self.m2 - self.m3 * self.m3 / self.m2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortTimeAnalysis {
    pub curvature: f64,
    pub torsion: f64,
    pub omega2: f64,
    /// `torsion^(-1/4)`, infinite when the torsion vanishes.
    pub horizon: f64,
    pub graph_horizon: f64,
    pub central_moments: CentralMoments,
}

fn counts(g: &Graph) -> (f64, f64, f64) {
    let inv = g.invariants();
    (inv.kappa2 as f64, inv.kappa3 as f64, inv.kappa4 as f64)
}

pub fn central_moments(g: &Graph, gamma: f64) -> CentralMoments {
    let (k2, k3, k4) = counts(g);
    let g2 = gamma * gamma;
    CentralMoments {
        m2: g2 * k2,
        m3: 2.0 * g2 * (2.0 * k2 + 3.0 * gamma * k3),
        m4: g2 * (-2.0 * k2 * (g2 - 8.0) + 3.0 * g2 * k2 * k2 + 24.0 * gamma * (2.0 * k3 + gamma * k4)),
    }
}

pub fn curvature(g: &Graph, gamma: f64) -> f64 {
    let (k2, k3, k4) = counts(g);
    let g2 = gamma * gamma;
    2.0 * g2 * (-k2 * (g2 - 8.0) + g2 * k2 * k2 + 12.0 * gamma * (2.0 * k3 + gamma * k4))
}

pub fn torsion(g: &Graph, gamma: f64) -> Result<f64> {
    let (k2, k3, k4) = counts(g);
    if k2 == 0.0 {
        return Err(Error::UndefinedTorsion);
    }
    Ok(2.0 * gamma.powi(4) * (k2 * (k2 - 1.0) - 18.0 * k3 * k3 / k2 + 12.0 * k4))
}

/// Squared oscillation frequency of the two-level approximation.
pub fn omega2(g: &Graph, gamma: f64) -> Result<f64> {
    let (k2, k3, _) = counts(g);
    if k2 == 0.0 {
        return Err(Error::UndefinedTorsion);
    }
    let b = 2.0 * k2 + 3.0 * gamma * k3;
    Ok(gamma * gamma * k2 + b * b / (k2 * k2))
}

pub fn analyze(g: &Graph, gamma: f64) -> Result<ShortTimeAnalysis> {
    let t = torsion(g, gamma)?;
    let horizon = if t > 0.0 { t.powf(-0.25) } else { f64::INFINITY };
    Ok(ShortTimeAnalysis {
        curvature: curvature(g, gamma),
        torsion: t,
        omega2: omega2(g, gamma)?,
        horizon,
        graph_horizon: g.n() as f64 * horizon,
        central_moments: central_moments(g, gamma),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelSeries {
    pub times: Vec<f64>,
    pub hp: Vec<f64>,
    /// Error scale `torsion * t^4` of the approximation.
    pub eps: Vec<f64>,
}

/// `<H_p(t)> ≈ -4 κ₂ γ sin²(ω t)/ω²`.
pub fn two_level_prediction(g: &Graph, gamma: f64, times: &[f64]) -> Result<TwoLevelSeries> {
    if gamma <= 0.0 {
        return Err(Error::Parameter(format!("gamma must be positive, got {gamma}")));
    }
    let k2 = g.invariants().kappa2 as f64;
    let w2 = omega2(g, gamma)?;
    let t4 = torsion(g, gamma)?;
    let w = w2.sqrt();
    Ok(TwoLevelSeries {
        times: times.to_vec(),
        hp: times
            .iter()
            .map(|t| -4.0 * k2 * gamma * (w * t).sin().powi(2) / w2)
            .collect(),
        eps: times.iter().map(|t| t4 * t.powi(4)).collect(),
    })
}
