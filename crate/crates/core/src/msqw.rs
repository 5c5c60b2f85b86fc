//! Multi-stage walks: piecewise-constant γ schedules started from |+>, with
//! exact per-stage thermal predictions and the analytic energy recursion.

use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_with, time_average, uniform_times, EvolveOptions, Observable, Trajectory};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::operators::{build_walk_in_sector, diagonalize, plus_state, Sector, State};
use crate::thermal::{
    fit_model, predict_with, sector_ensemble, solve_beta, CanonicalEnsemble, DosKind, PredictionSource,
    ThermalPrediction,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkStage {
    pub gamma: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSchedule {
    stages: Vec<WalkStage>,
}

impl WalkSchedule {
    /// Stages must have positive durations and non-decreasing γ ≥ 0.
    pub fn new(stages: Vec<WalkStage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Parameter("schedule has no stages".into()));
        }
        for (k, s) in stages.iter().enumerate() {
            if !(s.duration > 0.0) || !s.duration.is_finite() {
                return Err(Error::Parameter(format!("stage {k}: duration must be positive, got {}", s.duration)));
            }
            if !(s.gamma >= 0.0) || !s.gamma.is_finite() {
                return Err(Error::Parameter(format!("stage {k}: gamma must be non-negative, got {}", s.gamma)));
            }
            if k > 0 && s.gamma < stages[k - 1].gamma {
                return Err(Error::Parameter(format!(
                    "stage {k}: gamma {} decreases from {}",
                    s.gamma,
                    stages[k - 1].gamma
                )));
            }
        }
        Ok(WalkSchedule { stages })
    }

    pub fn from_gammas(gammas: &[f64], duration: f64) -> Result<Self> {
        Self::new(gammas.iter().map(|&gamma| WalkStage { gamma, duration }).collect())
    }

    /// γ = 0.5, 1.0, ..., 2.5 with 20 time units each.
    pub fn reference() -> Self {
        Self::from_gammas(&[0.5, 1.0, 1.5, 2.0, 2.5], 20.0).expect("valid reference schedule")
    }

    pub fn stages(&self) -> &[WalkStage] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.stages.windows(2).all(|w| w[1].gamma > w[0].gamma)
    }

    /// Start time of every stage.
    pub fn start_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.stages
            .iter()
            .map(|s| {
                let start = t;
                t += s.duration;
                start
            })
            .collect()
    }

    pub fn total_duration(&self) -> f64 {
        self.stages.iter().map(|s| s.duration).sum()
    }
}

#[derive(Debug, Clone)]
pub struct StageRecord {
    pub index: usize,
    pub gamma: f64,
    pub start_time: f64,
    /// State entering the stage, in the even spin-flip sector.
    pub boundary_state: State,
    /// `<H_p>` of the entering state.
    pub boundary_hp: f64,
    /// `<H_QW>` of the entering state under this stage's Hamiltonian.
    pub boundary_energy: f64,
    /// Long-time average of `<H_p>` if the stage ran forever.
    pub steady_hp: f64,
    /// Even-sector levels of this stage's Hamiltonian with `<E_k|H_p|E_k>`.
    pub even: CanonicalEnsemble,
    /// Samples on global times within the stage.
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone)]
pub struct MsqwRun {
    pub n: usize,
    pub schedule: WalkSchedule,
    pub stages: Vec<StageRecord>,
    pub final_state: State,
}

impl MsqwRun {
    /// All stage samples in time order.
    pub fn trajectory(&self) -> Trajectory {
        let mut it = self.stages.iter().map(|s| s.trajectory.clone());
        let mut traj = it.next().expect("at least one stage");
        for t in it {
            traj.extend(t);
        }
        traj
    }

    /// Steady `<H_p>` of the final stage.
    pub fn final_steady_hp(&self) -> f64 {
        self.stages.last().map(|s| s.steady_hp).unwrap_or(0.0)
    }
}

fn walk_sector(n: usize) -> Sector {
    if n > 1 {
        Sector::SpinFlipPlus
    } else {
        Sector::Full
    }
}

/// Propagates |+> through the schedule stage by stage, sampling
/// `samples_per_stage` points in each stage (stage 1 also samples `t = 0`).
pub fn run_msqw(g: &Graph, schedule: &WalkSchedule, samples_per_stage: usize) -> Result<MsqwRun> {
    let n = g.n();
    let sector = walk_sector(n);
    let mut psi = plus_state(n, sector);
    let starts = schedule.start_times();
    let mut stages = Vec::with_capacity(schedule.len());
    for (k, stage) in schedule.stages().iter().enumerate() {
        let wrap = |e: Error| Error::Stage {
            index: k,
            source: Box::new(e),
        };
        let op = build_walk_in_sector(g, stage.gamma, sector).map_err(wrap)?;
        let spec = diagonalize(&op, None).map_err(wrap)?;
        let diag = op.problem_diagonal().map_err(wrap)?;
        let boundary_hp: f64 = psi.iter().zip(diag).map(|(a, e)| a.norm_sqr() * e).sum();
        let boundary_energy = op.matrix.expectation(&psi).re;
        let steady_hp = time_average(&spec, &psi, Observable::Diagonal(diag)).map_err(wrap)?;
        let local: Vec<f64> = if k == 0 {
            uniform_times(stage.duration, samples_per_stage.max(1) + 1)
        } else {
            uniform_times(stage.duration, samples_per_stage.max(1) + 1).split_off(1)
        };
        let mut trajectory = evolve_with(&op, &spec, &psi, &local, &EvolveOptions::default()).map_err(wrap)?;
        trajectory.times.iter_mut().for_each(|t| *t += starts[k]);
        let next = spec.propagate(&psi, stage.duration);
        stages.push(StageRecord {
            index: k,
            gamma: stage.gamma,
            start_time: starts[k],
            boundary_state: std::mem::replace(&mut psi, next),
            boundary_hp,
            boundary_energy,
            steady_hp,
            even: CanonicalEnsemble::from_spectrum(&spec, diag).map_err(wrap)?,
            trajectory,
        });
    }
    Ok(MsqwRun {
        n,
        schedule: schedule.clone(),
        stages,
        final_state: psi,
    })
}

/// Gibbs prediction for one stage over the full spectrum, at the measured
/// energy of the state entering the stage.
pub fn predict_stage_numeric(g: &Graph, stage: &StageRecord) -> Result<ThermalPrediction> {
    let wrap = |e: Error| Error::Stage {
        index: stage.index,
        source: Box::new(e),
    };
    let ens = if g.n() > 1 {
        let odd = sector_ensemble(g, stage.gamma, Sector::SpinFlipMinus).map_err(wrap)?;
        CanonicalEnsemble::merge(&[stage.even.clone(), odd]).map_err(wrap)?
    } else {
        stage.even.clone()
    };
    let beta = solve_beta(&ens, stage.boundary_energy).map_err(wrap)?;
    Ok(ThermalPrediction {
        beta,
        hp: ens.expectation(beta),
        entropy: ens.entropy(beta),
        target_energy: stage.boundary_energy,
        source: PredictionSource::ExactGibbs,
    })
}

/// Stage energies from `-n` and the `<H_p>` carried across each boundary:
/// `E_k = E_{k-1} + (γ_k - γ_{k-1}) hp_{k-1}`.
pub fn energy_recursion(schedule: &WalkSchedule, n: usize, carried_hp: &[f64]) -> Result<Vec<f64>> {
    let stages = schedule.stages();
    if carried_hp.len() + 1 < stages.len() {
        return Err(Error::Parameter(format!(
            "{} stages need {} carried values, got {}",
            stages.len(),
            stages.len() - 1,
            carried_hp.len()
        )));
    }
    let mut targets = vec![-(n as f64)];
    for k in 1..stages.len() {
        let prev = targets[k - 1];
        targets.push(prev + (stages[k].gamma - stages[k - 1].gamma) * carried_hp[k - 1]);
    }
    Ok(targets)
}

/// Model predictions for every stage, each stage's target energy built from
/// the previous stage's predicted `<H_p>`.
pub fn predict_msqw_analytic(g: &Graph, schedule: &WalkSchedule, kind: DosKind) -> Result<Vec<ThermalPrediction>> {
    let mut out: Vec<ThermalPrediction> = Vec::with_capacity(schedule.len());
    let stages = schedule.stages();
    for (k, stage) in stages.iter().enumerate() {
        let target = match out.last() {
            None => -(g.n() as f64),
            Some(p) => p.target_energy + (stage.gamma - stages[k - 1].gamma) * p.hp,
        };
        let prediction = fit_model(g, stage.gamma, kind)
            .and_then(|model| predict_with(&model, g, stage.gamma, target))
            .map_err(|e| Error::Stage {
                index: k,
                source: Box::new(e),
            })?;
        out.push(prediction);
    }
    Ok(out)
}
