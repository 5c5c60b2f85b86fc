//! Exact propagation through a spectral decomposition, sampled observables,
//! infinite-time averages and entanglement entropy.

use faer::{c64, Mat, Side};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operators::{
    apply_driver, diagonalize, expand_to_full, inner, Matrix, Sector, SpectralDecomposition,
    State, WalkOperator,
};

/// Number of sample times propagated per matrix product in [`evolve_with`].
const TIME_BLOCK: usize = 128;

#[derive(Debug, Clone, Default)]
pub struct EvolveOptions {
    pub keep_states: bool,
    /// Computational basis states (full-space indices) forming the problem ground manifold.
    pub ground_manifold: Option<Vec<usize>>,
    /// Qubits kept when computing entanglement entropy.
    pub entropy_subset: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub n: usize,
    pub gamma: f64,
    pub sector: Sector,
    pub times: Vec<f64>,
    pub states: Option<Vec<State>>,
    pub norms: Vec<f64>,
    pub hp: Vec<f64>,
    pub hd: Vec<f64>,
    pub hqw: Vec<f64>,
    pub p_ground: Option<Vec<f64>>,
    pub entropy: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norms.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        let Some(&e0) = self.hqw.first() else {
            return 0.0;
        };
        self.hqw.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    /// Appends another trajectory sampled on later times.
    pub fn extend(&mut self, other: Trajectory) {
        self.times.extend(other.times);
        self.norms.extend(other.norms);
        self.hp.extend(other.hp);
        self.hd.extend(other.hd);
        self.hqw.extend(other.hqw);
        match (&mut self.states, other.states) {
            (Some(a), Some(b)) => a.extend(b),
            (a, _) => *a = None,
        }
        match (&mut self.p_ground, other.p_ground) {
            (Some(a), Some(b)) => a.extend(b),
            (a, _) => *a = None,
        }
        match (&mut self.entropy, other.entropy) {
            (Some(a), Some(b)) => a.extend(b),
            (a, _) => *a = None,
        }
    }
}

/// Uniform grid of `samples` points on `[0, t_max]`.
pub fn uniform_times(t_max: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..samples)
            .map(|k| t_max * k as f64 / (samples - 1) as f64)
            .collect(),
    }
}

/// Diagonalizes `op` and samples the trajectory from `psi0` on `times`,
/// keeping the states.
pub fn evolve(op: &WalkOperator, psi0: &[c64], times: &[f64]) -> Result<Trajectory> {
    let spec = diagonalize(op, None)?;
    let opts = EvolveOptions {
        keep_states: true,
        ..Default::default()
    };
    evolve_with(op, &spec, psi0, times, &opts)
}

/// `psi(t) = Σ_k e^{-i E_k t} <E_k|psi0> |E_k>` sampled on `times`.
pub fn evolve_with(
    op: &WalkOperator,
    spec: &SpectralDecomposition,
    psi0: &[c64],
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let dim = op.dim();
    if psi0.len() != dim || spec.dim() != dim {
        return Err(Error::Validation(format!(
            "dimension mismatch: operator {dim}, state {}, spectrum {}",
            psi0.len(),
            spec.dim()
        )));
    }
    let problem = op.problem_diagonal()?;
    let manifold = opts
        .ground_manifold
        .as_ref()
        .map(|m| manifold_in_sector(m, op.n, op.sector));
    let coeffs = spec.overlaps(psi0);

    let mut traj = Trajectory {
        n: op.n,
        gamma: op.gamma,
        sector: op.sector,
        times: times.to_vec(),
        states: opts.keep_states.then(Vec::new),
        norms: Vec::with_capacity(times.len()),
        hp: Vec::with_capacity(times.len()),
        hd: Vec::with_capacity(times.len()),
        hqw: Vec::with_capacity(times.len()),
        p_ground: manifold.as_ref().map(|_| Vec::with_capacity(times.len())),
        entropy: opts.entropy_subset.as_ref().map(|_| Vec::with_capacity(times.len())),
    };

    for block in times.chunks(TIME_BLOCK) {
        for psi in propagate_block(spec, &coeffs, block) {
            let mut norm2 = 0.0;
            let mut hp = 0.0;
            for (a, e) in psi.iter().zip(problem) {
                let w = a.norm_sqr();
                norm2 += w;
                hp += w * e;
            }
            let hd = inner(&psi, &apply_driver(op.n, op.sector, &psi)).re;
            traj.norms.push(norm2.sqrt());
            traj.hp.push(hp);
            traj.hd.push(hd);
            traj.hqw.push(hd + op.gamma * hp);
            if let (Some(series), Some(m)) = (traj.p_ground.as_mut(), manifold.as_ref()) {
                series.push(m.iter().map(|&b| psi[b].norm_sqr()).sum());
            }
            if let (Some(series), Some(subset)) = (traj.entropy.as_mut(), opts.entropy_subset.as_ref()) {
                let full = expand_to_full(&psi, op.n, op.sector);
                series.push(entanglement_entropy(&full, op.n, subset)?);
            }
            if let Some(states) = traj.states.as_mut() {
                states.push(psi);
            }
        }
    }
    Ok(traj)
}

/// States at each time in `block`, as one matrix product with the eigenbasis.
fn propagate_block(spec: &SpectralDecomposition, coeffs: &[c64], block: &[f64]) -> Vec<State> {
    let dim = spec.dim();
    let m = block.len();
    let phased = |k: usize, j: usize| coeffs[k] * c64::from_polar(1.0, -spec.energies[k] * block[j]);
    match &spec.states {
        Matrix::Real(u) => {
            let mut re = Mat::<f64>::zeros(dim, m);
            let mut im = Mat::<f64>::zeros(dim, m);
            for j in 0..m {
                for k in 0..dim {
                    let c = phased(k, j);
                    re[(k, j)] = c.re;
                    im[(k, j)] = c.im;
                }
            }
            let a = u * &re;
            let b = u * &im;
            (0..m)
                .map(|j| {
                    a.col_as_slice(j)
                        .iter()
                        .zip(b.col_as_slice(j))
                        .map(|(&x, &y)| c64::new(x, y))
                        .collect()
                })
                .collect()
        }
        Matrix::Complex(u) => {
            let c = Mat::<c64>::from_fn(dim, m, phased);
            let a = u * &c;
            (0..m).map(|j| a.col_as_slice(j).to_vec()).collect()
        }
    }
}

/// Sector basis indices covering a full-space set of basis states that is
/// closed under complement.
fn manifold_in_sector(states: &[usize], n: usize, sector: Sector) -> Vec<usize> {
    let dim = sector.dim(n);
    states.iter().copied().filter(|&b| b < dim).collect()
}

/// `P(t) = Σ_{b in manifold} |<b|psi(t)>|²` from a trajectory that kept its states.
pub fn ground_state_probability(traj: &Trajectory, ground_manifold: &[usize]) -> Result<Vec<f64>> {
    let states = traj
        .states
        .as_ref()
        .ok_or_else(|| Error::Validation("trajectory was sampled without states".into()))?;
    let idx = manifold_in_sector(ground_manifold, traj.n, traj.sector);
    Ok(states
        .iter()
        .map(|psi| idx.iter().map(|&b| psi[b].norm_sqr()).sum())
        .collect())
}

#[derive(Debug, Clone, Copy)]
pub enum Observable<'a> {
    Identity,
    /// Diagonal in the decomposition's basis.
    Diagonal(&'a [f64]),
    Operator(&'a Matrix),
}

/// Infinite-time average `Σ_{E_m = E_n} <psi0|E_n><E_m|psi0><E_n|O|E_m>`,
/// evaluated group by group as `<phi_g|O|phi_g>` with `phi_g` the projection
/// of `psi0` on a degenerate level.
pub fn time_average(spec: &SpectralDecomposition, psi0: &[c64], observable: Observable) -> Result<f64> {
    if psi0.len() != spec.dim() {
        return Err(Error::Validation("state and spectrum dimensions differ".into()));
    }
    let coeffs = spec.overlaps(psi0);
    let mut total = c64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for group in &spec.groups {
        let weight: f64 = coeffs[group.clone()].iter().map(|c| c.norm_sqr()).sum();
        if weight == 0.0 {
            continue;
        }
        let value = match observable {
            Observable::Identity => c64::new(weight, 0.0),
            Observable::Diagonal(d) => {
                if group.len() == 1 {
                    let k = group.start;
                    let ek = column_weighted(spec, k, d);
                    c64::new(coeffs[k].norm_sqr() * ek, 0.0)
                } else {
                    let phi = project(spec, &coeffs, group.clone());
                    c64::new(phi.iter().zip(d).map(|(a, x)| a.norm_sqr() * x).sum(), 0.0)
                }
            }
            Observable::Operator(m) => {
                let phi = project(spec, &coeffs, group.clone());
                m.expectation(&phi)
            }
        };
        scale = scale.max(value.norm());
        total += value;
    }
    if total.im.abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::Numeric(format!(
            "time average has imaginary part {:.3e}",
            total.im
        )));
    }
    Ok(total.re)
}

fn column_weighted(spec: &SpectralDecomposition, k: usize, d: &[f64]) -> f64 {
    match &spec.states {
        Matrix::Real(u) => u.col_as_slice(k).iter().zip(d).map(|(a, x)| a * a * x).sum(),
        Matrix::Complex(u) => u.col_as_slice(k).iter().zip(d).map(|(a, x)| a.norm_sqr() * x).sum(),
    }
}

fn project(spec: &SpectralDecomposition, coeffs: &[c64], group: std::ops::Range<usize>) -> State {
    let mut c = vec![c64::new(0.0, 0.0); spec.dim()];
    c[group.clone()].copy_from_slice(&coeffs[group]);
    spec.synthesize(&c)
}

/// Von Neumann entropy (nats) of the reduced state on `subset`, from a full
/// `2^n` amplitude vector.
pub fn entanglement_entropy(psi: &[c64], n: usize, subset: &[usize]) -> Result<f64> {
    if psi.len() != 1 << n {
        return Err(Error::Validation(format!(
            "entropy needs a full {}-amplitude state, got {}",
            1usize << n,
            psi.len()
        )));
    }
    let mut keep = 0usize;
    for &q in subset {
        if q >= n || keep & (1 << q) != 0 {
            return Err(Error::Parameter(format!("invalid qubit subset {subset:?} for n={n}")));
        }
        keep |= 1 << q;
    }
    let rest: Vec<usize> = (0..n).filter(|q| keep & (1 << q) == 0).collect();
    // trace out the larger side; both reduced states share their spectrum
    let (rows, cols) = if subset.len() <= rest.len() {
        (subset.to_vec(), rest)
    } else {
        (rest, subset.to_vec())
    };
    let scatter = |bits: &[usize], x: usize| {
        bits.iter()
            .enumerate()
            .fold(0usize, |acc, (i, &q)| acc | (((x >> i) & 1) << q))
    };
    let (nr, nc) = (1usize << rows.len(), 1usize << cols.len());
    let row_index: Vec<usize> = (0..nr).map(|r| scatter(&rows, r)).collect();
    let col_index: Vec<usize> = (0..nc).map(|c| scatter(&cols, c)).collect();
    let m = Mat::<c64>::from_fn(nr, nc, |r, c| psi[row_index[r] | col_index[c]]);
    let rho = &m * m.adjoint();
    let probs = rho
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigensolver: {e:?}")))?;
    Ok(probs
        .into_iter()
        .map(|p| p.max(0.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}

/// Seeded uniform choice of `floor(n/2)` qubits, sorted.
pub fn random_half_subset(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, n, n / 2).into_vec();
    picked.sort_unstable();
    picked
}
