//! The Trotterized walk as a periodically driven system: split-step
//! propagation, quasi-energy decomposition of the single-period unitary,
//! stroboscopic steady states and the effective static Hamiltonian.
//!
//! One period applies `B = e^{-iγτH_p/2}` followed by `A = e^{-iτH_d/2}`.
//! The symmetrised period `W = B^{1/2} A B^{1/2}` is a complex symmetric
//! unitary, so its real and imaginary parts are commuting real symmetric
//! matrices and share a real orthonormal eigenbasis.

use faer::{c64, Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::operators::{
    driver_entries, plus_state, sector_problem_diagonal, Matrix, Sector, State, WalkOperator, MAX_QUBITS,
};
use crate::thermal::{fit_model, hp_model_at, DosKind, PredictionSource, ThermalPrediction};

/// Mixing weight for diagonalising `Re W + c Im W`; any irrational value works.
const MIX: f64 = 0.754_877_666_246_692_7;
/// Gap in `Re W + c Im W` below which eigenvectors are re-resolved on `Im W`.
const CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetConfig {
    pub tau: f64,
    pub gamma: f64,
    pub n_steps: usize,
}

impl FloquetConfig {
    pub fn new(tau: f64, gamma: f64, n_steps: usize) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Parameter(format!("tau must be positive, got {tau}")));
        }
        if !gamma.is_finite() {
            return Err(Error::Parameter(format!("gamma must be finite, got {gamma}")));
        }
        Ok(FloquetConfig { tau, gamma, n_steps })
    }

    /// Width `2π/τ` of the quasi-energy zone.
    pub fn zone_width(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.tau
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Capacity(format!("supports 1..={MAX_QUBITS} qubits, got {n}")));
    }
    Ok(())
}

/// `e^{iθ X}` on every qubit of a full `2^n` vector, in place.
fn apply_driver_step(psi: &mut [c64], n: usize, tau: f64) {
    let (c, s) = ((tau / 2.0).cos(), (tau / 2.0).sin());
    let is = c64::new(0.0, s);
    for k in 0..n {
        let bit = 1usize << k;
        for a in 0..psi.len() {
            if a & bit == 0 {
                let (x, y) = (psi[a], psi[a | bit]);
                psi[a] = x * c + is * y;
                psi[a | bit] = is * x + y * c;
            }
        }
    }
}

/// Applies `N_s` Trotter periods to a full `2^n` state.
pub fn trotter_state(g: &Graph, cfg: &FloquetConfig, psi0: &[c64]) -> Result<State> {
    let n = g.n();
    check_qubits(n)?;
    if psi0.len() != 1 << n {
        return Err(Error::Validation(format!(
            "state has {} amplitudes, expected {}",
            psi0.len(),
            1usize << n
        )));
    }
    let phases: Vec<c64> = sector_problem_diagonal(g, Sector::Full)
        .iter()
        .map(|e| c64::from_polar(1.0, -cfg.gamma * cfg.tau * e / 2.0))
        .collect();
    let mut psi = psi0.to_vec();
    for _ in 0..cfg.n_steps {
        psi.iter_mut().zip(&phases).for_each(|(a, p)| *a *= p);
        apply_driver_step(&mut psi, n, cfg.tau);
    }
    Ok(psi)
}

/// Matrix of `e^{-iτH_d/2} = ⊗(cos(τ/2) + i sin(τ/2) X)` within `sector`.
fn driver_step_matrix(n: usize, tau: f64, sector: Sector) -> Mat<c64> {
    let (c, s) = ((tau / 2.0).cos(), (tau / 2.0).sin());
    // entry for Hamming distance d is cos^{n-d} (i sin)^d
    let by_distance: Vec<c64> = (0..=n)
        .map(|d| c64::new(0.0, s).powi(d as i32) * c.powi((n - d) as i32))
        .collect();
    let dim = sector.dim(n);
    let mask = (1usize << n) - 1;
    let parity = sector.parity();
    Mat::from_fn(dim, dim, |r, col| {
        let direct = by_distance[(r ^ col).count_ones() as usize];
        match sector {
            Sector::Full => direct,
            _ => direct + by_distance[(r ^ col ^ mask).count_ones() as usize] * parity,
        }
    })
}

#[derive(Debug, Clone)]
pub struct FloquetDecomposition {
    pub n: usize,
    pub sector: Sector,
    pub config: FloquetConfig,
    /// Eigenvalues `e^{-iετ}` of the single-period unitary.
    pub eigenvalues: Vec<c64>,
    /// Quasi-energies in `(-π/τ, π/τ]`.
    pub quasi_energies: Vec<f64>,
    /// Real orthonormal eigenvectors of the symmetrised period, as columns.
    /// The Floquet modes are `B^{-1/2}` applied to these.
    pub symmetric_modes: Mat<f64>,
    /// Diagonal of `B^{1/2} = e^{-iγτH_p/4}`.
    pub half_phases: Vec<c64>,
    pub problem: Vec<f64>,
    /// `<φ_α|+>`.
    pub overlaps: Vec<c64>,
    /// Largest `|W q - λ q|` over the modes.
    pub residual: f64,
}

impl FloquetDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Floquet mode `α` in the sector basis.
    pub fn mode(&self, alpha: usize) -> State {
        self.symmetric_modes
            .col_as_slice(alpha)
            .iter()
            .zip(&self.half_phases)
            .map(|(&q, h)| h.conj() * q)
            .collect()
    }

    /// `<φ_α|psi>` for every mode.
    pub fn overlaps_with(&self, psi: &[c64]) -> Vec<c64> {
        let shifted: Vec<c64> = psi.iter().zip(&self.half_phases).map(|(a, h)| a * h).collect();
        (0..self.dim())
            .map(|k| {
                self.symmetric_modes
                    .col_as_slice(k)
                    .iter()
                    .zip(&shifted)
                    .map(|(&q, a)| a * q)
                    .sum()
            })
            .collect()
    }

    pub fn max_modulus_error(&self) -> f64 {
        self.eigenvalues.iter().map(|l| (l.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `Σ_α λ_α |φ_α><φ_α|` as a dense matrix.
    pub fn reconstruct(&self) -> Mat<c64> {
        let dim = self.dim();
        let modes: Vec<State> = (0..dim).map(|k| self.mode(k)).collect();
        Mat::from_fn(dim, dim, |r, c| {
            modes
                .iter()
                .zip(&self.eigenvalues)
                .map(|(m, l)| l * m[r] * m[c].conj())
                .sum()
        })
    }
}

/// Circular distance between quasi-energies on a zone of width `width`.
pub fn zone_distance(a: f64, b: f64, width: f64) -> f64 {
    let d = (a - b).rem_euclid(width);
    d.min(width - d)
}

fn quasi_energy(lambda: c64, tau: f64) -> f64 {
    let e = -lambda.arg() / tau;
    if e <= -std::f64::consts::PI / tau {
        e + 2.0 * std::f64::consts::PI / tau
    } else {
        e
    }
}

/// Orthonormal eigenbasis of the symmetric unitary `re + i im`.
fn symmetric_unitary_eigen(re: &Mat<f64>, im: &Mat<f64>) -> Result<Mat<f64>> {
    let dim = re.nrows();
    let mixed = Mat::<f64>::from_fn(dim, dim, |r, c| re[(r, c)] + MIX * im[(r, c)]);
    let fail = |e| Error::Numeric(format!("eigensolver: {e:?}"));
    let evd = mixed.self_adjoint_eigen(Side::Lower).map_err(fail)?;
    let s = evd.S().column_vector();
    let mut q = evd.U().to_owned();
    let mut start = 0;
    for k in 1..=dim {
        if k < dim && s[k] - s[k - 1] <= CLUSTER_GAP {
            continue;
        }
        if k - start > 1 {
            // near-coincident mixed values can hide distinct eigenvalues; split them on Im W
            let block = q.subcols(start, k - start).to_owned();
            let proj = block.transpose() * im * &block;
            let sym = Mat::<f64>::from_fn(k - start, k - start, |r, c| 0.5 * (proj[(r, c)] + proj[(c, r)]));
            let inner_evd = sym.self_adjoint_eigen(Side::Lower).map_err(fail)?;
            let rotated = &block * inner_evd.U();
            q.subcols_mut(start, k - start).copy_from(&rotated);
        }
        start = k;
    }
    Ok(q)
}

/// Quasi-energy decomposition of the single-period unitary in the even
/// spin-flip sector, where the walk from |+> lives.
pub fn floquet_decompose(g: &Graph, cfg: &FloquetConfig) -> Result<FloquetDecomposition> {
    let sector = if g.n() > 1 { Sector::SpinFlipPlus } else { Sector::Full };
    floquet_decompose_in(g, cfg, sector)
}

pub fn floquet_decompose_in(g: &Graph, cfg: &FloquetConfig, sector: Sector) -> Result<FloquetDecomposition> {
    let n = g.n();
    check_qubits(n)?;
    if !(cfg.tau > 0.0) {
        return Err(Error::Parameter(format!("tau must be positive, got {}", cfg.tau)));
    }
    let problem = sector_problem_diagonal(g, sector);
    let half_phases: Vec<c64> = problem
        .iter()
        .map(|e| c64::from_polar(1.0, -cfg.gamma * cfg.tau * e / 4.0))
        .collect();
    let a = driver_step_matrix(n, cfg.tau, sector);
    let dim = a.nrows();
    let w = Mat::<c64>::from_fn(dim, dim, |r, c| half_phases[r] * a[(r, c)] * half_phases[c]);
    let re = Mat::<f64>::from_fn(dim, dim, |r, c| 0.5 * (w[(r, c)].re + w[(c, r)].re));
    let im = Mat::<f64>::from_fn(dim, dim, |r, c| 0.5 * (w[(r, c)].im + w[(c, r)].im));
    let q = symmetric_unitary_eigen(&re, &im)?;
    let xq = &re * &q;
    let yq = &im * &q;
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut residual = 0.0f64;
    for k in 0..dim {
        let col = q.col_as_slice(k);
        let (xk, yk) = (xq.col_as_slice(k), yq.col_as_slice(k));
        let lr: f64 = col.iter().zip(xk).map(|(a, b)| a * b).sum();
        let li: f64 = col.iter().zip(yk).map(|(a, b)| a * b).sum();
        let r2: f64 = (0..dim)
            .map(|i| (xk[i] - lr * col[i]).powi(2) + (yk[i] - li * col[i]).powi(2))
            .sum();
        residual = residual.max(r2.sqrt());
        eigenvalues.push(c64::new(lr, li));
    }
    if residual > 1e-8 {
        return Err(Error::Numeric(format!(
            "Floquet eigenvectors have residual {residual:.3e}"
        )));
    }
    let quasi_energies = eigenvalues.iter().map(|&l| quasi_energy(l, cfg.tau)).collect();
    let mut dec = FloquetDecomposition {
        n,
        sector,
        config: *cfg,
        eigenvalues,
        quasi_energies,
        symmetric_modes: q,
        half_phases,
        problem,
        overlaps: Vec::new(),
        residual,
    };
    dec.overlaps = dec.overlaps_with(&plus_state(n, sector));
    Ok(dec)
}

/// Default quasi-energy degeneracy threshold, `1e-9` of the zone width.
pub fn default_quasi_tolerance(cfg: &FloquetConfig) -> f64 {
    1e-9 * cfg.zone_width()
}

/// Groups of modes whose quasi-energies coincide within `tol` on the circle.
pub fn quasi_energy_groups(dec: &FloquetDecomposition, tol: f64) -> Vec<Vec<usize>> {
    let width = dec.config.zone_width();
    let mut order: Vec<usize> = (0..dec.dim()).collect();
    order.sort_by(|&a, &b| dec.quasi_energies[a].total_cmp(&dec.quasi_energies[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match groups.last_mut() {
            Some(g) if zone_distance(dec.quasi_energies[*g.last().unwrap()], dec.quasi_energies[k], width) <= tol => {
                g.push(k)
            }
            _ => groups.push(vec![k]),
        }
    }
    // the zone edge wraps: merge the last group into the first if they touch
    if groups.len() > 1 {
        let first = dec.quasi_energies[groups[0][0]];
        let last_group = groups.last().unwrap();
        let last = dec.quasi_energies[*last_group.last().unwrap()];
        if zone_distance(first, last, width) <= tol {
            let tail = groups.pop().unwrap();
            groups[0].extend(tail);
        }
    }
    groups
}

/// Long-run stroboscopic average of `<H_p>` for the given mode overlaps.
pub fn floquet_steady_hp_for(dec: &FloquetDecomposition, overlaps: &[c64], tol_quasi: Option<f64>) -> f64 {
    let tol = tol_quasi.unwrap_or_else(|| default_quasi_tolerance(&dec.config));
    let dim = dec.dim();
    let mut total = 0.0;
    let mut acc = vec![c64::new(0.0, 0.0); dim];
    for group in quasi_energy_groups(dec, tol) {
        acc.iter_mut().for_each(|a| *a = c64::new(0.0, 0.0));
        for &alpha in &group {
            let c = overlaps[alpha];
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for (a, &q) in acc.iter_mut().zip(dec.symmetric_modes.col_as_slice(alpha)) {
                *a += c * q;
            }
        }
        // the mode phases B^{-1/2} have unit modulus and drop out of |.|²
        total += acc.iter().zip(&dec.problem).map(|(a, e)| a.norm_sqr() * e).sum::<f64>();
    }
    total
}

/// Steady stroboscopic `<H_p>` for the walk started in |+>.
pub fn floquet_steady_hp(dec: &FloquetDecomposition, tol_quasi: Option<f64>) -> f64 {
    floquet_steady_hp_for(dec, &dec.overlaps, tol_quasi)
}

/// `Σ_α c_α λ_α^{N_s} φ_α` in the decomposition's sector.
pub fn stroboscopic_state(dec: &FloquetDecomposition, overlaps: &[c64], n_steps: usize) -> State {
    let dim = dec.dim();
    let coeffs: Vec<c64> = overlaps
        .iter()
        .zip(&dec.eigenvalues)
        .map(|(c, l)| c * (l / l.norm()).powi(n_steps as i32))
        .collect();
    let mut out = vec![c64::new(0.0, 0.0); dim];
    for (k, c) in coeffs.iter().enumerate() {
        for (o, &q) in out.iter_mut().zip(dec.symmetric_modes.col_as_slice(k)) {
            *o += c * q;
        }
    }
    out.iter_mut().zip(&dec.half_phases).for_each(|(o, h)| *o *= h.conj());
    out
}

/// `U_p† H_d U_p + γ H_p` with `U_p = e^{-iγτH_p/4}`, in `sector`.
pub fn effective_hamiltonian_in(g: &Graph, cfg: &FloquetConfig, sector: Sector) -> Result<WalkOperator> {
    let n = g.n();
    check_qubits(n)?;
    let problem = sector_problem_diagonal(g, sector);
    let dim = problem.len();
    let mut m = Mat::<c64>::zeros(dim, dim);
    for (b, &e) in problem.iter().enumerate() {
        m[(b, b)] = c64::new(cfg.gamma * e, 0.0);
    }
    let phase = cfg.gamma * cfg.tau / 4.0;
    for (r, c, v) in driver_entries(n, sector) {
        m[(r, c)] += c64::from_polar(v, phase * (problem[r] - problem[c]));
    }
    Ok(WalkOperator {
        n,
        gamma: cfg.gamma,
        sector,
        matrix: Matrix::Complex(m),
        problem: Some(problem),
    })
}

pub fn effective_hamiltonian(g: &Graph, cfg: &FloquetConfig) -> Result<WalkOperator> {
    effective_hamiltonian_in(g, cfg, Sector::Full)
}

/// `<+|H̃_F|+> = -Σ_k cos^{deg k}(γτ/2)`.
pub fn floquet_initial_energy(g: &Graph, cfg: &FloquetConfig) -> f64 {
    let c = (cfg.gamma * cfg.tau / 2.0).cos();
    -(0..g.n()).map(|k| c.powi(g.degree(k) as i32)).sum::<f64>()
}

/// `<+|H̃_F|+>` as a matrix element in the even sector.
pub fn initial_energy_direct(g: &Graph, cfg: &FloquetConfig) -> Result<f64> {
    let sector = if g.n() > 1 { Sector::SpinFlipPlus } else { Sector::Full };
    let op = effective_hamiltonian_in(g, cfg, sector)?;
    Ok(op.matrix.expectation(&plus_state(g.n(), sector)).re)
}

/// Closed-form initial energy, checked against the direct matrix element.
pub fn floquet_initial_energy_checked(g: &Graph, cfg: &FloquetConfig) -> Result<f64> {
    let closed = floquet_initial_energy(g, cfg);
    let direct = initial_energy_direct(g, cfg)?;
    if (closed - direct).abs() > 1e-9 * (g.n() as f64).max(1.0) {
        return Err(Error::Numeric(format!("initial energy {closed} disagrees with matrix element {direct}")));
    }
    Ok(closed)
}

/// Density-model prediction of the steady `<H_p>` with the energy constraint
/// set by the Trotterized walk. A non-negative energy (up to rounding) gives
/// infinite temperature.
pub fn floquet_thermal_prediction(g: &Graph, cfg: &FloquetConfig, kind: DosKind) -> Result<ThermalPrediction> {
    let target = floquet_initial_energy(g, cfg);
    if target >= -1e-12 * g.n() as f64 {
        return Ok(ThermalPrediction {
            beta: 0.0,
            hp: 0.0,
            entropy: g.n() as f64 * std::f64::consts::LN_2,
            target_energy: target,
            source: kind.into(),
        });
    }
    let model = fit_model(g, cfg.gamma, kind)?;
    let beta = model.solve_beta(target)?;
    Ok(ThermalPrediction {
        beta,
        hp: hp_model_at(&model, g, cfg.gamma, beta),
        entropy: crate::thermal::entropy_model(&model, beta, g.n()),
        target_energy: target,
        source: PredictionSource::from(kind),
    })
}

/// `U_p†|+>`, the start state whose energy under `H̃_F` is `-n`.
pub fn corrected_initial_state(g: &Graph, cfg: &FloquetConfig, sector: Sector) -> State {
    let plus = plus_state(g.n(), sector);
    sector_problem_diagonal(g, sector)
        .iter()
        .zip(plus)
        .map(|(e, a)| a * c64::from_polar(1.0, cfg.gamma * cfg.tau * e / 4.0))
        .collect()
}

/// Steady `<H_p>` for both start states: `(|+>, corrected)`.
pub fn floquet_steady_pair(dec: &FloquetDecomposition, g: &Graph) -> (f64, f64) {
    let corrected = corrected_initial_state(g, &dec.config, dec.sector);
    let c = dec.overlaps_with(&corrected);
    (floquet_steady_hp(dec, None), floquet_steady_hp_for(dec, &c, None))
}

/// `Σ |<φ_α|psi>|²`.
pub fn overlap_weight(overlaps: &[c64]) -> f64 {
    overlaps.iter().map(|c| c.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, time_average, Observable};
    use crate::graph::{gen_binomial, Graph};
    use crate::operators::{build_driver, build_walk, build_walk_in_sector, diagonalize, eigenvalues, expand_to_full};

    fn cfg(tau: f64, gamma: f64, n_steps: usize) -> FloquetConfig {
        FloquetConfig::new(tau, gamma, n_steps).unwrap()
    }

    #[test]
    fn trotter_trivial_cases() {
        let g = gen_binomial(6, 0.5, 1).unwrap();
        let plus = plus_state(6, Sector::Full);
        assert_eq!(trotter_state(&g, &cfg(0.3, 1.0, 0), &plus).unwrap(), plus);
        let psi = trotter_state(&g, &cfg(0.3, 0.0, 17), &plus).unwrap();
        let phase = psi[0] / plus[0];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        for (a, b) in psi.iter().zip(&plus) {
            assert!((a - b * phase).norm() < 1e-12);
        }
    }

    #[test]
    fn trotter_state_matches_dense_product() {
        let g = gen_binomial(4, 0.7, 3).unwrap();
        let c = cfg(0.37, 0.8, 3);
        let a = driver_step_matrix(4, c.tau, Sector::Full);
        let diag = sector_problem_diagonal(&g, Sector::Full);
        let mut psi = plus_state(4, Sector::Full);
        for _ in 0..3 {
            let phased: Vec<c64> = psi
                .iter()
                .zip(&diag)
                .map(|(x, e)| x * c64::from_polar(1.0, -c.gamma * c.tau * e / 2.0))
                .collect();
            psi = Matrix::Complex(a.clone()).apply(&phased);
        }
        let t = trotter_state(&g, &c, &plus_state(4, Sector::Full)).unwrap();
        for (x, y) in psi.iter().zip(&t) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn small_period_converges_to_the_walk_at_half_time() {
        let g = gen_binomial(8, 0.6, 2).unwrap();
        let t = 2.0;
        let exact = evolve(&build_walk(&g, 1.0).unwrap(), &plus_state(8, Sector::Full), &[t / 2.0]).unwrap();
        let target = &exact.states.unwrap()[0];
        let mut errs = Vec::new();
        for steps in [20, 40, 80, 160] {
            let psi = trotter_state(&g, &cfg(t / steps as f64, 1.0, steps), &plus_state(8, Sector::Full)).unwrap();
            errs.push(psi.iter().zip(target).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 1.8 && ratio < 2.2, "{errs:?}");
        }
    }

    #[test]
    fn decomposition_is_unitary_and_reconstructs_the_period() {
        let g = gen_binomial(7, 0.6, 4).unwrap();
        let c = cfg(0.45, 1.2, 0);
        for sector in [Sector::Full, Sector::SpinFlipPlus, Sector::SpinFlipMinus] {
            let dec = floquet_decompose_in(&g, &c, sector).unwrap();
            assert!(dec.max_modulus_error() <= 1e-10);
            let a = driver_step_matrix(7, c.tau, sector);
            let b = sector_problem_diagonal(&g, sector);
            let rec = dec.reconstruct();
            let mut err = 0.0f64;
            for r in 0..dec.dim() {
                for col in 0..dec.dim() {
                    let u = a[(r, col)] * c64::from_polar(1.0, -c.gamma * c.tau * b[col] / 2.0);
                    err = err.max((u - rec[(r, col)]).norm());
                }
            }
            assert!(err <= 1e-9, "{sector:?} {err}");
            for &e in &dec.quasi_energies {
                assert!(e > -std::f64::consts::PI / c.tau && e <= std::f64::consts::PI / c.tau);
            }
        }
        let dec = floquet_decompose(&g, &c).unwrap();
        assert!((overlap_weight(&dec.overlaps) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn degenerate_spectrum_is_resolved() {
        // γ = 0 leaves only the highly degenerate driver levels
        let g = Graph::ring(6).unwrap();
        let c = cfg(0.3, 0.0, 0);
        let dec = floquet_decompose_in(&g, &c, Sector::Full).unwrap();
        let driver = eigenvalues(&build_driver(6).unwrap().matrix).unwrap();
        let mut folded: Vec<f64> = dec.quasi_energies.clone();
        folded.sort_by(f64::total_cmp);
        // one period advances time by τ/2 under H_d
        let mut expect: Vec<f64> = driver.iter().map(|e| e / 2.0).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in folded.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(floquet_steady_hp(&dec, None).abs() < 1e-10);
    }

    #[test]
    fn stroboscopic_state_matches_trotter_steps() {
        let g = gen_binomial(8, 0.6, 9).unwrap();
        let c = cfg(0.2, 1.0, 7);
        let dec = floquet_decompose(&g, &c).unwrap();
        let sector_state = stroboscopic_state(&dec, &dec.overlaps, 7);
        let full = expand_to_full(&sector_state, 8, Sector::SpinFlipPlus);
        let direct = trotter_state(&g, &c, &plus_state(8, Sector::Full)).unwrap();
        for (a, b) in full.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn steady_value_is_the_long_stroboscopic_average() {
        for (seed, n) in [(1u64, 8usize), (2, 8), (3, 10)] {
            let g = gen_binomial(n, 0.6, seed).unwrap();
            let c = cfg(0.2, 1.0, 1);
            let dec = floquet_decompose(&g, &c).unwrap();
            let steady = floquet_steady_hp(&dec, None);
            let diag = sector_problem_diagonal(&g, Sector::Full);
            let mut psi = plus_state(n, Sector::Full);
            let mut sum = 0.0;
            for _ in 0..2000 {
                psi = trotter_state(&g, &c, &psi).unwrap();
                sum += psi.iter().zip(&diag).map(|(a, e)| a.norm_sqr() * e).sum::<f64>();
            }
            assert!((sum / 2000.0 - steady).abs() <= 0.05, "{} vs {steady}", sum / 2000.0);
        }
    }

    #[test]
    fn zone_edge_pairs_are_grouped() {
        assert!(zone_distance(3.14, -3.14, 2.0 * std::f64::consts::PI) < 0.01);
        let g = gen_binomial(5, 0.6, 1).unwrap();
        let c = cfg(0.5, 1.0, 0);
        let mut dec = floquet_decompose_in(&g, &c, Sector::Full).unwrap();
        let edge = std::f64::consts::PI / c.tau;
        dec.quasi_energies[0] = edge;
        dec.quasi_energies[1] = -edge + 1e-12;
        let groups = quasi_energy_groups(&dec, default_quasi_tolerance(&c));
        assert!(groups.iter().any(|g| g.contains(&0) && g.contains(&1)));
    }

    #[test]
    fn effective_hamiltonian_properties() {
        let g = gen_binomial(6, 0.6, 5).unwrap();
        let walk = build_walk(&g, 0.9).unwrap().matrix.to_complex();
        let zero = effective_hamiltonian(&g, &cfg(1e-300, 0.9, 0)).unwrap();
        let z = zero.matrix.to_complex();
        for r in 0..64 {
            for col in 0..64 {
                assert!((z[(r, col)] - walk[(r, col)]).norm() < 1e-12);
            }
        }
        for tau in [0.1, 0.2, 0.5] {
            let h = effective_hamiltonian(&g, &cfg(tau, 0.9, 0)).unwrap().matrix.to_complex();
            let (mut ph, mut pw) = (Mat::<c64>::identity(64, 64), Mat::<c64>::identity(64, 64));
            for _ in 1..=4 {
                ph = &ph * &h;
                pw = &pw * &walk;
                let th: c64 = (0..64).map(|i| ph[(i, i)]).sum();
                let tw: c64 = (0..64).map(|i| pw[(i, i)]).sum();
                assert!((th - tw).norm() / 64.0 < 1e-8);
            }
        }
    }

    #[test]
    fn initial_energy_closed_form_matches_matrix_element() {
        for seed in 0..12 {
            let n = 3 + seed as usize % 6;
            let g = gen_binomial(n, 0.6, seed).unwrap();
            for tau in [0.1, 0.2, 0.5] {
                let c = cfg(tau, 1.3, 0);
                let direct = initial_energy_direct(&g, &c).unwrap();
                let full = effective_hamiltonian(&g, &c).unwrap().matrix.expectation(&plus_state(n, Sector::Full)).re;
                assert!((floquet_initial_energy(&g, &c) - direct).abs() < 1e-9);
                assert!((direct - full).abs() < 1e-9);
                assert!(floquet_initial_energy_checked(&g, &c).is_ok());
            }
        }
        assert_eq!(floquet_initial_energy(&gen_binomial(5, 0.5, 0).unwrap(), &cfg(1e-300, 1.0, 0)), -5.0);
        let edge = floquet_initial_energy(&Graph::single_edge(), &cfg(std::f64::consts::PI, 1.0, 0));
        assert!(edge.abs() < 1e-15);
    }

    #[test]
    fn target_vanishes_for_growing_degree() {
        let mut prev = f64::NEG_INFINITY;
        for n in 4..=20 {
            let g = Graph::complete(n).unwrap();
            let e = floquet_initial_energy(&g, &cfg(2.0, 1.0, 0));
            assert!(e > prev);
            prev = e;
        }
        assert!(prev.abs() < 1e-3);
    }

    #[test]
    fn corrected_state_has_walk_energy() {
        for seed in 0..6 {
            let g = gen_binomial(7, 0.6, seed).unwrap();
            let c = cfg(0.3, 1.1, 0);
            let op = effective_hamiltonian(&g, &c).unwrap();
            let psi = corrected_initial_state(&g, &c, Sector::Full);
            assert!((op.matrix.expectation(&psi).re + 7.0).abs() < 1e-10);
            let unchanged = corrected_initial_state(&g, &cfg(1e-300, 1.1, 0), Sector::Full);
            for (a, b) in unchanged.iter().zip(plus_state(7, Sector::Full)) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn thermal_prediction_limits() {
        let g = gen_binomial(10, 2.0 / 3.0, 3).unwrap();
        let p = floquet_thermal_prediction(&g, &cfg(1e-300, 1.0, 0), DosKind::Emg).unwrap();
        let model = fit_model(&g, 1.0, DosKind::Emg).unwrap();
        let walk = crate::thermal::hp_model(&model, &g, 1.0).unwrap();
        assert!((p.hp - walk.hp).abs() < 1e-12 && (p.beta - walk.beta).abs() < 1e-12);
        let hot = floquet_thermal_prediction(&Graph::single_edge(), &cfg(std::f64::consts::PI, 1.0, 0), DosKind::Gaussian).unwrap();
        assert_eq!((hot.beta, hot.hp), (0.0, 0.0));
    }

    #[test]
    fn trotterized_walk_underperforms_and_correction_helps() {
        let mut degrade = Vec::new();
        for seed in 0..6 {
            let g = gen_binomial(8, 2.0 / 3.0, 50 + seed).unwrap();
            let op = build_walk_in_sector(&g, 1.0, Sector::SpinFlipPlus).unwrap();
            let spec = diagonalize(&op, None).unwrap();
            let ctqw = time_average(
                &spec,
                &plus_state(8, Sector::SpinFlipPlus),
                Observable::Diagonal(op.problem_diagonal().unwrap()),
            )
            .unwrap();
            let mut row = Vec::new();
            for tau in [0.05, 0.1, 0.2, 0.4] {
                let dec = floquet_decompose(&g, &cfg(tau, 1.0, 0)).unwrap();
                let (plain, corrected) = floquet_steady_pair(&dec, &g);
                assert!(plain > ctqw);
                assert!((corrected - ctqw).abs() < (plain - ctqw).abs());
                row.push(plain);
            }
            degrade.push(row);
        }
        for k in 1..4 {
            let mut prev: Vec<f64> = degrade.iter().map(|r| r[k - 1]).collect();
            let mut cur: Vec<f64> = degrade.iter().map(|r| r[k]).collect();
            prev.sort_by(f64::total_cmp);
            cur.sort_by(f64::total_cmp);
            assert!(cur[3] >= prev[3]);
        }
    }
}
