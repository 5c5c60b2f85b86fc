//! Per-instance work for each experiment kind.

use std::collections::BTreeMap;

use ctqw_core::dynamics::{evolve_with, random_half_subset, time_average, uniform_times, EvolveOptions, Observable};
use ctqw_core::floquet::{
    floquet_decompose, floquet_initial_energy, floquet_steady_pair, floquet_thermal_prediction, initial_energy_direct,
    FloquetConfig,
};
use ctqw_core::graph::{ground_manifold, Graph};
use ctqw_core::msqw::{predict_msqw_analytic, predict_stage_numeric, run_msqw, WalkSchedule};
use ctqw_core::operators::{build_walk_in_sector, diagonalize, eigenvalues, plus_state, Sector};
use ctqw_core::shorttime::{analyze, two_level_prediction};
use ctqw_core::thermal::{
    dos_moments, evaluate_walk, fit_model, gamma_brute_descent, gamma_emg_opt, gamma_heuristic, gamma_select,
    grid_argmin, hp_model, sector_ensemble, DosKind, EvaluationOptions, GammaStrategy, ThermalPrediction,
    WalkEvaluation,
};

use crate::checks::{symmetry_checks, Check};
use crate::config::{parse_model, ExperimentConfig, ExperimentKind, SearchMode};
use crate::error::Result;
use crate::instances::Instance;
use crate::table::{Cell, Table};

/// Largest relative error of the two-level curve is reported over samples
/// with `torsion * t^4` at or below this value.
pub const SHORT_TIME_WINDOW: f64 = 0.01;
/// Floor on `|<H_p(t)>|` when forming relative errors, so zeros of the
/// oscillation do not dominate.
pub const RELATIVE_ERROR_FLOOR: f64 = 0.05;

/// Empty tables an experiment writes, in file order.
pub fn schemas(kind: ExperimentKind) -> Vec<Table> {
    const KEY: [&str; 4] = ["instance_id", "n", "family", "seed"];
    let with_key = |name: &str, rest: &[&str]| {
        let cols: Vec<&str> = KEY.iter().chain(rest).copied().collect();
        Table::new(name, &cols)
    };
    match kind {
        ExperimentKind::GammaSweep => vec![with_key(
            "gamma_sweep",
            &["gamma", "hp_bar", "hp_gauss", "hp_emg", "beta_gauss", "beta_emg"],
        )],
        ExperimentKind::TimeSeries => vec![
            Table::new("time_series", &["instance_id", "gamma", "t", "hp", "hd", "hqw", "p_ground", "entropy"]),
            with_key(
                "time_average",
                &["gamma", "t_max", "samples", "hp_bar", "hp_sample_mean", "max_norm_drift", "max_energy_drift"],
            ),
        ],
        ExperimentKind::ThermalStats => vec![
            with_key(
                "thermal_stats",
                &[
                    "strategy",
                    "gamma",
                    "hp_dyn",
                    "beta_exact",
                    "hp_gibbs",
                    "beta_gauss",
                    "hp_gauss",
                    "beta_emg",
                    "hp_emg",
                    "entropy_meas",
                    "entropy_gibbs",
                    "entropy_gauss",
                    "entropy_emg",
                ],
            ),
            Table::new("gamma_evaluations", &["instance_id", "n", "gamma", "hp_bar"]),
        ],
        ExperimentKind::DosHistogram => vec![
            Table::new(
                "dos_histogram",
                &["instance_id", "gamma", "bin", "lo", "hi", "density", "gaussian", "emg"],
            ),
            with_key(
                "dos_fit",
                &[
                    "gamma",
                    "levels",
                    "skewness",
                    "excess_kurtosis",
                    "sample_skewness",
                    "sample_excess_kurtosis",
                    "sse_gaussian",
                    "sse_emg",
                ],
            ),
        ],
        ExperimentKind::Msqw => {
            let pred = ["stage", "gamma", "target_energy", "beta", "hp_pred", "hp_dyn_steady"];
            vec![
                Table::new("msqw_numeric", &[&["instance_id"][..], &pred].concat()),
                Table::new("msqw_analytic", &[&["instance_id"][..], &pred].concat()),
                with_key(
                    "msqw_boundary",
                    &[
                        "stage",
                        "gamma",
                        "start_time",
                        "boundary_hp",
                        "boundary_energy",
                        "steady_hp",
                        "max_norm_drift",
                        "max_energy_drift",
                    ],
                ),
                Table::new("msqw_series", &["instance_id", "t", "stage", "hp", "hqw"]),
            ]
        }
        ExperimentKind::FloquetSweep => vec![with_key(
            "floquet_sweep",
            &[
                "tau",
                "gamma",
                "hp_floquet",
                "hp_ctqw",
                "hp_pred_model",
                "beta_model",
                "corrected",
                "target_energy",
                "initial_energy_closed",
                "initial_energy_direct",
            ],
        )],
        ExperimentKind::Shorttime => vec![
            Table::new("shorttime_series", &["instance_id", "gamma", "t", "hp_exact", "hp_two_level", "eps"]),
            with_key(
                "shorttime_summary",
                &[
                    "gamma",
                    "curvature",
                    "torsion",
                    "omega2",
                    "horizon",
                    "graph_horizon",
                    "window_samples",
                    "max_rel_err_window",
                ],
            ),
        ],
    }
}

/// Rows and diagnostics produced for one instance.
#[derive(Debug, Clone)]
pub struct InstanceOutput {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

impl InstanceOutput {
    fn new(kind: ExperimentKind) -> Self {
        InstanceOutput {
            tables: schemas(kind),
            checks: Vec::new(),
        }
    }

    fn push(&mut self, table: &str, row: Vec<Cell>) {
        self.tables
            .iter_mut()
            .find(|t| t.name == table)
            .unwrap_or_else(|| panic!("no table {table}"))
            .push(row);
    }
}

pub fn run_instance(cfg: &ExperimentConfig, inst: &Instance) -> Result<InstanceOutput> {
    let mut out = InstanceOutput::new(cfg.experiment);
    match cfg.experiment {
        ExperimentKind::GammaSweep => gamma_sweep(cfg, inst, &mut out)?,
        ExperimentKind::TimeSeries => time_series(cfg, inst, &mut out)?,
        ExperimentKind::ThermalStats => thermal_stats(cfg, inst, &mut out)?,
        ExperimentKind::DosHistogram => dos_histogram(cfg, inst, &mut out)?,
        ExperimentKind::Msqw => msqw(cfg, inst, &mut out)?,
        ExperimentKind::FloquetSweep => floquet_sweep(cfg, inst, &mut out)?,
        ExperimentKind::Shorttime => shorttime(cfg, inst, &mut out)?,
    }
    Ok(out)
}

fn key(inst: &Instance) -> Vec<Cell> {
    vec![
        inst.id.as_str().into(),
        inst.n().into(),
        inst.family().into(),
        inst.graph.seed().into(),
    ]
}

fn row(mut head: Vec<Cell>, rest: Vec<Cell>) -> Vec<Cell> {
    head.extend(rest);
    head
}

fn walk_sector(n: usize) -> Sector {
    if n > 1 {
        Sector::SpinFlipPlus
    } else {
        Sector::Full
    }
}

fn point(name: &str, x: f64) -> String {
    format!("{name}={x}")
}

/// Model prediction at the walk energy `-n`; infeasible fits give `None`.
fn model_prediction(g: &Graph, gamma: f64, kind: DosKind) -> Option<ThermalPrediction> {
    fit_model(g, gamma, kind).and_then(|m| hp_model(&m, g, gamma)).ok()
}

fn beta_of(p: &Option<ThermalPrediction>) -> Cell {
    p.map(|p| p.beta).into()
}

fn hp_of(p: &Option<ThermalPrediction>) -> Cell {
    p.map(|p| p.hp).into()
}

fn entropy_of(p: &Option<ThermalPrediction>) -> Cell {
    p.map(|p| p.entropy).into()
}

fn walk_checks(id: &str, pt: &str, ev: &WalkEvaluation, n: usize) -> Vec<Check> {
    let mut c = vec![
        Check::new(id, pt, "overlap_norm", ev.overlap_norm_residual, 1e-10),
        Check::new(id, pt, "spectral_energy", ev.energy_residual, 1e-8 * n as f64),
    ];
    if !ev.entropy.is_empty() {
        c.push(Check::new(id, pt, "norm_drift", ev.max_norm_drift, 1e-8));
        c.push(Check::new(id, pt, "energy_drift", ev.max_energy_drift, 1e-8 * n as f64));
    }
    c
}

fn gamma_sweep(cfg: &ExperimentConfig, inst: &Instance, out: &mut InstanceOutput) -> Result<()> {
    let g = &inst.graph;
    for gamma in cfg.gamma.points() {
        let ev = evaluate_walk(g, gamma, &EvaluationOptions::default())?;
        let gauss = model_prediction(g, gamma, DosKind::Gaussian);
        let emg = model_prediction(g, gamma, DosKind::Emg);
        out.push(
            "gamma_sweep",
            row(
                key(inst),
                vec![gamma.into(), ev.hp_bar.into(), hp_of(&gauss), hp_of(&emg), beta_of(&gauss), beta_of(&emg)],
            ),
        );
        let pt = point("gamma", gamma);
        out.checks.extend(walk_checks(&inst.id, &pt, &ev, g.n()));
        out.checks.extend(symmetry_checks(&inst.id, &pt, g, gamma));
    }
    Ok(())
}

/// Trapezoid mean of `ys` sampled on `ts`.
pub fn trapezoid_mean(ts: &[f64], ys: &[f64]) -> f64 {
    if ts.len() < 2 {
        return ys.first().copied().unwrap_or(f64::NAN);
    }
    let area: f64 = ts
        .windows(2)
        .zip(ys.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum();
    area / (ts[ts.len() - 1] - ts[0])
}

fn time_series(cfg: &ExperimentConfig, inst: &Instance, out: &mut InstanceOutput) -> Result<()> {
    let g = &inst.graph;
    let n = g.n();
    let sector = walk_sector(n);
    let psi0 = plus_state(n, sector);
    let times = uniform_times(cfg.time.t_max, cfg.time.samples);
    let manifold = ground_manifold(g)?;
    for gamma in cfg.gamma.points() {
        let op = build_walk_in_sector(g, gamma, sector)?;
        let spec = diagonalize(&op, None)?;
        let opts = EvolveOptions {
            keep_states: false,
            ground_manifold: Some(manifold.clone()),
            entropy_subset: cfg.time.entropy.then(|| random_half_subset(n, g.seed())),
        };
        let traj = evolve_with(&op, &spec, &psi0, &times, &opts)?;
        let hp_bar = time_average(&spec, &psi0, Observable::Diagonal(op.problem_diagonal()?))?;
        if cfg.time.series {
            for k in 0..traj.len() {
                out.push(
                    "time_series",
                    vec![
                        inst.id.as_str().into(),
                        gamma.into(),
                        traj.times[k].into(),
                        traj.hp[k].into(),
                        traj.hd[k].into(),
                        traj.hqw[k].into(),
                        traj.p_ground.as_ref().map(|p| p[k]).into(),
                        traj.entropy.as_ref().map(|s| s[k]).into(),
                    ],
                );
            }
        }
        out.push(
            "time_average",
            row(
                key(inst),
                vec![
                    gamma.into(),
                    cfg.time.t_max.into(),
                    cfg.time.samples.into(),
                    hp_bar.into(),
                    trapezoid_mean(&traj.times, &traj.hp).into(),
                    traj.max_norm_drift().into(),
                    traj.max_energy_drift().into(),
                ],
            ),
        );
        let pt = point("gamma", gamma);
        out.checks.push(Check::new(&inst.id, &pt, "norm_drift", traj.max_norm_drift(), 1e-8));
        out.checks
            .push(Check::new(&inst.id, &pt, "energy_drift", traj.max_energy_drift(), 1e-8 * n as f64));
        out.checks.extend(symmetry_checks(&inst.id, &pt, g, gamma));
    }
    Ok(())
}

/// Walk evaluations keyed by γ, so a brute search and the strategies that
/// land on the same point share one diagonalization.
#[derive(Default)]
struct EvaluationCache {
    evals: BTreeMap<u64, WalkEvaluation>,
}

impl EvaluationCache {
    fn get(&mut self, g: &Graph, gamma: f64) -> ctqw_core::Result<&mut WalkEvaluation> {
        let k = gamma.to_bits();
        if !self.evals.contains_key(&k) {
            self.evals.insert(k, evaluate_walk(g, gamma, &EvaluationOptions::default())?);
        }
        Ok(self.evals.get_mut(&k).expect("inserted"))
    }
}

fn parse_strategies(names: &[String]) -> Vec<GammaStrategy> {
    names.iter().filter_map(|s| s.parse().ok()).collect()
}

fn thermal_stats(cfg: &ExperimentConfig, inst: &Instance, out: &mut InstanceOutput) -> Result<()> {
    let g = &inst.graph;
    let n = g.n();
    let grid = cfg.gamma.grid();
    let exact_for = parse_strategies(&cfg.thermal.exact_gibbs);
    let mut cache = EvaluationCache::default();
    let mut emg_opt: Option<f64> = None;
    let mut emg_gamma = |g: &Graph| -> Result<f64> {
        if emg_opt.is_none() {
            emg_opt = Some(gamma_emg_opt(g, grid.lo, grid.hi)?.0);
        }
        Ok(emg_opt.expect("set"))
    };
    for strategy in cfg.gamma.parsed_strategies()? {
        let gamma = match strategy {
            GammaStrategy::Brute => match cfg.gamma.search {
                SearchMode::Full => {
                    let points = grid.points();
                    let (i, _) = grid_argmin(&points, |x| Ok(cache.get(g, x)?.hp_bar))?;
                    points[i]
                }
                SearchMode::Descent => {
                    let start = match emg_gamma(g) {
                        Ok(x) => x,
                        Err(_) => gamma_heuristic(g)?,
                    };
                    gamma_brute_descent(&grid, start, cfg.gamma.window, |x| Ok(cache.get(g, x)?.hp_bar))?.gamma
                }
            },
            GammaStrategy::Heuristic | GammaStrategy::GaussianOpt => gamma_heuristic(g)?,
            GammaStrategy::EmgOpt => emg_gamma(g)?,
        };
        let want_exact = exact_for.contains(&strategy) && n > 1;
        let ev = cache.get(g, gamma)?;
        if want_exact && ev.odd.is_none() {
            ev.odd = Some(sector_ensemble(g, gamma, Sector::SpinFlipMinus)?);
        }
        let ev = ev.clone();
        let exact = if want_exact { Some(ev.exact_prediction(n)?) } else { None };
        let gauss = model_prediction(g, gamma, DosKind::Gaussian);
        let emg = model_prediction(g, gamma, DosKind::Emg);
        let pt = format!("{}:gamma={gamma}", strategy.name());
        let mut entropy_meas = None;
        if want_exact && cfg.thermal.entropy_samples > 0 {
            let (t0, t1) = (cfg.thermal.entropy_t_min, cfg.thermal.entropy_t_max);
            let m = cfg.thermal.entropy_samples;
            let opts = EvaluationOptions {
                full_spectrum: false,
                entropy_times: (0..m)
                    .map(|k| if m == 1 { t0 } else { t0 + (t1 - t0) * k as f64 / (m - 1) as f64 })
                    .collect(),
                entropy_subset: random_half_subset(n, g.seed()),
            };
            let with_entropy = evaluate_walk(g, gamma, &opts)?;
            entropy_meas = Some(with_entropy.entropy.iter().sum::<f64>() / m as f64);
            out.checks.extend(walk_checks(&inst.id, &pt, &with_entropy, n));
        }
        out.push(
            "thermal_stats",
            row(
                key(inst),
                vec![
                    strategy.name().into(),
                    gamma.into(),
                    ev.hp_bar.into(),
                    beta_of(&exact),
                    hp_of(&exact),
                    beta_of(&gauss),
                    hp_of(&gauss),
                    beta_of(&emg),
                    hp_of(&emg),
                    entropy_meas.into(),
                    entropy_of(&exact),
                    entropy_of(&gauss),
                    entropy_of(&emg),
                ],
            ),
        );
        out.checks.extend(walk_checks(&inst.id, &pt, &ev, n));
        out.checks.extend(symmetry_checks(&inst.id, &pt, g, gamma));
    }
    for ev in cache.evals.values() {
        out.push(
            "gamma_evaluations",
            vec![inst.id.as_str().into(), n.into(), ev.gamma.into(), ev.hp_bar.into()],
        );
    }
    Ok(())
}

/// γ values for experiments that accept either explicit values or strategies.
fn gammas_or_strategies(cfg: &ExperimentConfig, g: &Graph) -> Result<Vec<f64>> {
    if !cfg.gamma.values.is_empty() {
        return Ok(cfg.gamma.values.clone());
    }
    let grid = cfg.gamma.grid();
    cfg.gamma
        .parsed_strategies()?
        .into_iter()
        .map(|s| Ok(gamma_select(g, s, &grid)?.gamma))
        .collect()
}

fn dos_histogram(cfg: &ExperimentConfig, inst: &Instance, out: &mut InstanceOutput) -> Result<()> {
    let g = &inst.graph;
    let n = g.n();
    let bins = cfg.dos.bins;
    for gamma in gammas_or_strategies(cfg, g)? {
        let sectors: &[Sector] = if n > 1 {
            &[Sector::SpinFlipPlus, Sector::SpinFlipMinus]
        } else {
            &[Sector::Full]
        };
        let mut levels = Vec::with_capacity(1 << n);
        for &s in sectors {
            levels.extend(eigenvalues(&build_walk_in_sector(g, gamma, s)?.matrix)?);
        }
        let count = levels.len() as f64;
        let lo = levels.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let mut hist = vec![0usize; bins];
        for &e in &levels {
            hist[(((e - lo) / width) as usize).min(bins - 1)] += 1;
        }
        let gauss = fit_model(g, gamma, DosKind::Gaussian).ok();
        let emg = fit_model(g, gamma, DosKind::Emg).ok();
        let (mut sse_g, mut sse_e) = (0.0, 0.0);
        for (b, &c) in hist.iter().enumerate() {
            let (a, z) = (lo + b as f64 * width, lo + (b + 1) as f64 * width);
            let centre = 0.5 * (a + z);
            let density = c as f64 / (count * width);
            let fg = gauss.as_ref().map(|m| m.density(centre));
            let fe = emg.as_ref().map(|m| m.density(centre));
            sse_g += fg.map_or(f64::NAN, |f| (density - f).powi(2));
            sse_e += fe.map_or(f64::NAN, |f| (density - f).powi(2));
            out.push(
                "dos_histogram",
                vec![
                    inst.id.as_str().into(),
                    gamma.into(),
                    b.into(),
                    a.into(),
                    z.into(),
                    density.into(),
                    fg.into(),
                    fe.into(),
                ],
            );
        }
        let mean = levels.iter().sum::<f64>() / count;
        let central = |k: i32| levels.iter().map(|e| (e - mean).powi(k)).sum::<f64>() / count;
        let m2 = central(2);
        let moments = dos_moments(g, gamma);
        out.push(
            "dos_fit",
            row(
                key(inst),
                vec![
                    gamma.into(),
                    levels.len().into(),
                    moments.skewness.into(),
                    moments.excess_kurtosis.into(),
                    (central(3) / m2.powf(1.5)).into(),
                    (central(4) / (m2 * m2) - 3.0).into(),
                    sse_g.into(),
                    sse_e.into(),
                ],
            ),
        );
        out.checks.extend(symmetry_checks(&inst.id, &point("gamma", gamma), g, gamma));
    }
    Ok(())
}

fn msqw(cfg: &ExperimentConfig, inst: &Instance, out: &mut InstanceOutput) -> Result<()> {
    let g = &inst.graph;
    let n = g.n();
    let schedule = WalkSchedule::from_gammas(&cfg.msqw.gammas, cfg.msqw.duration)?;
    let kind = parse_model(&cfg.msqw.model, "msqw.model")?;
    let run = run_msqw(g, &schedule, cfg.msqw.samples_per_stage)?;
    let analytic = predict_msqw_analytic(g, &schedule, kind).ok();
    let id: Cell = inst.id.as_str().into();
    for s in &run.stages {
        let stage = s.index + 1;
        let numeric = predict_stage_numeric(g, s).ok();
        let model = analytic.as_ref().map(|a| a[s.index]);
        for (table, p, target) in [
            ("msqw_numeric", numeric, Some(s.boundary_energy)),
            ("msqw_analytic", model, model.map(|m| m.target_energy)),
        ] {
            out.push(
                table,
                vec![
                    id.clone(),
                    stage.into(),
                    s.gamma.into(),
                    target.into(),
                    beta_of(&p),
                    hp_of(&p),
                    s.steady_hp.into(),
                ],
            );
        }
        let traj = &s.trajectory;
        out.push(
            "msqw_boundary",
            row(
                key(inst),
                vec![
                    stage.into(),
                    s.gamma.into(),
                    s.start_time.into(),
                    s.boundary_hp.into(),
                    s.boundary_energy.into(),
                    s.steady_hp.into(),
                    traj.max_norm_drift().into(),
                    traj.max_energy_drift().into(),
                ],
            ),
        );
        for k in 0..traj.len() {
            out.push(
                "msqw_series",
                vec![id.clone(), traj.times[k].into(), stage.into(), traj.hp[k].into(), traj.hqw[k].into()],
            );
        }
        let pt = format!("stage={stage}");
        out.checks.push(Check::new(&inst.id, &pt, "norm_drift", traj.max_norm_drift(), 1e-8));
        out.checks
            .push(Check::new(&inst.id, &pt, "energy_drift", traj.max_energy_drift(), 1e-8 * n as f64));
        out.checks.extend(symmetry_checks(&inst.id, &pt, g, s.gamma));
    }
    Ok(())
}

fn floquet_sweep(cfg: &ExperimentConfig, inst: &Instance, out: &mut InstanceOutput) -> Result<()> {
    let g = &inst.graph;
    let n = g.n();
    let gamma = cfg.floquet.gamma;
    let kind = parse_model(&cfg.floquet.model, "floquet.model")?;
    let ctqw = evaluate_walk(g, gamma, &EvaluationOptions::default())?;
    let ctqw_pred = model_prediction(g, gamma, kind);
    let pt = point("gamma", gamma);
    out.checks.extend(walk_checks(&inst.id, &pt, &ctqw, n));
    out.checks.extend(symmetry_checks(&inst.id, &pt, g, gamma));
    for &tau in &cfg.floquet.taus {
        let fc = FloquetConfig::new(tau, gamma, 0)?;
        let dec = floquet_decompose(g, &fc)?;
        let (plain, corrected) = floquet_steady_pair(&dec, g);
        let pred = floquet_thermal_prediction(g, &fc, kind).ok();
        let closed = floquet_initial_energy(g, &fc);
        let direct = initial_energy_direct(g, &fc)?;
        for (is_corrected, hp, p, target) in [
            (false, plain, pred, closed),
            (true, corrected, ctqw_pred, -(n as f64)),
        ] {
            out.push(
                "floquet_sweep",
                row(
                    key(inst),
                    vec![
                        tau.into(),
                        gamma.into(),
                        hp.into(),
                        ctqw.hp_bar.into(),
                        hp_of(&p),
                        beta_of(&p),
                        is_corrected.into(),
                        target.into(),
                        closed.into(),
                        direct.into(),
                    ],
                ),
            );
        }
        let pt = point("tau", tau);
        let corrected_weight = ctqw_core::floquet::overlap_weight(
            &dec.overlaps_with(&ctqw_core::floquet::corrected_initial_state(g, &fc, dec.sector)),
        );
        let plus_weight = ctqw_core::floquet::overlap_weight(&dec.overlaps);
        out.checks.extend([
            Check::new(&inst.id, &pt, "floquet_unitarity", dec.max_modulus_error(), 1e-10),
            Check::new(&inst.id, &pt, "floquet_residual", dec.residual, 1e-8),
            Check::new(&inst.id, &pt, "floquet_overlap_norm", plus_weight - 1.0, 1e-10),
            Check::new(&inst.id, &pt, "floquet_corrected_overlap_norm", corrected_weight - 1.0, 1e-10),
            Check::new(&inst.id, &pt, "initial_energy", closed - direct, 1e-9),
        ]);
    }
    Ok(())
}

fn shorttime(cfg: &ExperimentConfig, inst: &Instance, out: &mut InstanceOutput) -> Result<()> {
    let g = &inst.graph;
    let n = g.n();
    let sector = walk_sector(n);
    let psi0 = plus_state(n, sector);
    for gamma in cfg.gamma.points() {
        let a = analyze(g, gamma)?;
        let t_end = if a.torsion > 0.0 {
            (cfg.shorttime.eps_max / a.torsion).powf(0.25)
        } else {
            cfg.time.t_max
        };
        let times = uniform_times(t_end, cfg.shorttime.samples);
        let op = build_walk_in_sector(g, gamma, sector)?;
        let spec = diagonalize(&op, None)?;
        let traj = evolve_with(&op, &spec, &psi0, &times, &EvolveOptions::default())?;
        let approx = two_level_prediction(g, gamma, &times)?;
        let (mut in_window, mut worst) = (0usize, 0.0f64);
        for k in 0..times.len() {
            out.push(
                "shorttime_series",
                vec![
                    inst.id.as_str().into(),
                    gamma.into(),
                    times[k].into(),
                    traj.hp[k].into(),
                    approx.hp[k].into(),
                    approx.eps[k].into(),
                ],
            );
            if times[k] > 0.0 && approx.eps[k] <= SHORT_TIME_WINDOW {
                in_window += 1;
                worst = worst.max((approx.hp[k] - traj.hp[k]).abs() / traj.hp[k].abs().max(RELATIVE_ERROR_FLOOR));
            }
        }
        out.push(
            "shorttime_summary",
            row(
                key(inst),
                vec![
                    gamma.into(),
                    a.curvature.into(),
                    a.torsion.into(),
                    a.omega2.into(),
                    a.horizon.into(),
                    a.graph_horizon.into(),
                    in_window.into(),
                    worst.into(),
                ],
            ),
        );
        let pt = point("gamma", gamma);
        out.checks.push(Check::new(&inst.id, &pt, "norm_drift", traj.max_norm_drift(), 1e-8));
        out.checks
            .push(Check::new(&inst.id, &pt, "energy_drift", traj.max_energy_drift(), 1e-8 * n as f64));
        out.checks.extend(symmetry_checks(&inst.id, &pt, g, gamma));
    }
    Ok(())
}
