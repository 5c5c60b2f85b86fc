//! Driver, problem and walk Hamiltonians as dense matrices, the spin-flip
//! symmetry sectors, and dense spectral decomposition.
//!
//! Basis convention: computational states are ordered by integer value with
//! qubit 0 as the least significant bit, and `Z|0> = +|0>`.
//!
//! The spin-flip operator `G = X_0 X_1 ... X_{n-1}` maps `|b>` to `|b̄>`
//! (bitwise complement). Its ±1 eigenspaces are spanned by
//! `(|b> ± |b̄>)/√2` over representatives `b < b̄`, i.e. states whose top
//! qubit is |0>. Sector basis index `i` is that representative.

use std::ops::Range;

use faer::{c64, Mat, Side};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub type State = Vec<c64>;

/// Largest qubit count accepted by the dense builders.
pub const MAX_QUBITS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    Full,
    SpinFlipPlus,
    SpinFlipMinus,
}

impl Sector {
    pub fn dim(self, n: usize) -> usize {
        match self {
            Sector::Full => 1 << n,
            _ => 1 << (n - 1),
        }
    }

    /// Sign relating the amplitude on `|b̄>` to that on `|b>`.
    pub fn parity(self) -> f64 {
        match self {
            Sector::SpinFlipMinus => -1.0,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sector::Full => "full",
            Sector::SpinFlipPlus => "spinflip_plus",
            Sector::SpinFlipMinus => "spinflip_minus",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Matrix {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl Matrix {
    pub fn dim(&self) -> usize {
        match self {
            Matrix::Real(m) => m.nrows(),
            Matrix::Complex(m) => m.nrows(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        match self {
            Matrix::Real(m) => c64::new(m[(i, j)], 0.0),
            Matrix::Complex(m) => m[(i, j)],
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        let d = self.dim();
        let mut best = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                best = best.max(self.get(i, j).norm());
            }
        }
        best
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn to_complex(&self) -> Mat<c64> {
        match self {
            Matrix::Real(m) => Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0)),
            Matrix::Complex(m) => m.clone(),
        }
    }

    pub fn apply(&self, psi: &[c64]) -> State {
        let d = self.dim();
        assert_eq!(psi.len(), d);
        let mut out = vec![c64::new(0.0, 0.0); d];
        for j in 0..d {
            let x = psi[j];
            if x == c64::new(0.0, 0.0) {
                continue;
            }
            match self {
                Matrix::Real(m) => {
                    for (o, &v) in out.iter_mut().zip(m.col_as_slice(j)) {
                        *o += x * v;
                    }
                }
                Matrix::Complex(m) => {
                    for (o, &v) in out.iter_mut().zip(m.col_as_slice(j)) {
                        *o += x * v;
                    }
                }
            }
        }
        out
    }

    /// `<psi|M|psi>`
    pub fn expectation(&self, psi: &[c64]) -> c64 {
        inner(psi, &self.apply(psi))
    }
}

/// A Hamiltonian acting on a symmetry sector of `n` qubits.
#[derive(Debug, Clone)]
pub struct WalkOperator {
    pub n: usize,
    pub gamma: f64,
    pub sector: Sector,
    pub matrix: Matrix,
    /// Problem-Hamiltonian diagonal in this sector's basis, when a graph is attached.
    pub problem: Option<Vec<f64>>,
}

impl WalkOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Problem diagonal, or a validation error if the operator carries none.
    pub fn problem_diagonal(&self) -> Result<&[f64]> {
        self.problem
            .as_deref()
            .ok_or_else(|| Error::Validation("operator has no problem Hamiltonian attached".into()))
    }
}

pub fn inner(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[c64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "dense operators support 1..={MAX_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// Problem energies at the basis states of `sector`.
pub fn sector_problem_diagonal(g: &Graph, sector: Sector) -> Vec<f64> {
    (0..sector.dim(g.n()))
        .map(|b| g.problem_energy(b) as f64)
        .collect()
}

/// Non-zero entries of the driver `-Σ X_k` in `sector`, as `(row, column, value)`.
/// Entries landing on the same position are listed separately.
pub fn driver_entries(n: usize, sector: Sector) -> Vec<(usize, usize, f64)> {
    let dim = sector.dim(n);
    let mut out = Vec::with_capacity(dim * n);
    match sector {
        Sector::Full => {
            for b in 0..dim {
                for k in 0..n {
                    out.push((b ^ (1 << k), b, -1.0));
                }
            }
        }
        _ => {
            // flipping the top qubit leaves the representative set; fold back through G
            let fold = (1usize << (n - 1)) - 1;
            let top = -sector.parity();
            for b in 0..dim {
                for k in 0..n - 1 {
                    out.push((b ^ (1 << k), b, -1.0));
                }
                out.push((b ^ fold, b, top));
            }
        }
    }
    out
}

/// `(-Σ X_k) psi` within `sector`.
pub fn apply_driver(n: usize, sector: Sector, psi: &[c64]) -> State {
    assert_eq!(psi.len(), sector.dim(n));
    let mut out = vec![c64::new(0.0, 0.0); psi.len()];
    match sector {
        Sector::Full => {
            for (b, o) in out.iter_mut().enumerate() {
                for k in 0..n {
                    *o -= psi[b ^ (1 << k)];
                }
            }
        }
        _ => {
            let fold = (1usize << (n - 1)) - 1;
            let top = sector.parity();
            for (b, o) in out.iter_mut().enumerate() {
                for k in 0..n - 1 {
                    *o -= psi[b ^ (1 << k)];
                }
                *o -= top * psi[b ^ fold];
            }
        }
    }
    out
}

fn dense_from_parts(n: usize, sector: Sector, diagonal: &[f64], driver_scale: f64) -> Mat<f64> {
    let dim = sector.dim(n);
    let mut m = Mat::<f64>::zeros(dim, dim);
    for (b, &d) in diagonal.iter().enumerate() {
        m[(b, b)] = d;
    }
    if driver_scale != 0.0 {
        for (r, c, v) in driver_entries(n, sector) {
            m[(r, c)] += driver_scale * v;
        }
    }
    m
}

pub fn build_problem(g: &Graph) -> Result<WalkOperator> {
    check_qubits(g.n())?;
    let diag = sector_problem_diagonal(g, Sector::Full);
    Ok(WalkOperator {
        n: g.n(),
        gamma: 1.0,
        sector: Sector::Full,
        matrix: Matrix::Real(dense_from_parts(g.n(), Sector::Full, &diag, 0.0)),
        problem: Some(diag),
    })
}

pub fn build_driver(n: usize) -> Result<WalkOperator> {
    check_qubits(n)?;
    let zeros = vec![0.0; 1 << n];
    Ok(WalkOperator {
        n,
        gamma: 0.0,
        sector: Sector::Full,
        matrix: Matrix::Real(dense_from_parts(n, Sector::Full, &zeros, 1.0)),
        problem: None,
    })
}

/// `H_d + γ H_p` on the full space.
pub fn build_walk(g: &Graph, gamma: f64) -> Result<WalkOperator> {
    build_walk_in_sector(g, gamma, Sector::Full)
}

/// `H_d + γ H_p` assembled directly in `sector`.
pub fn build_walk_in_sector(g: &Graph, gamma: f64, sector: Sector) -> Result<WalkOperator> {
    let n = g.n();
    check_qubits(n)?;
    if !gamma.is_finite() {
        return Err(Error::Parameter(format!("gamma must be finite, got {gamma}")));
    }
    let problem = sector_problem_diagonal(g, sector);
    let scaled: Vec<f64> = problem.iter().map(|e| gamma * e).collect();
    Ok(WalkOperator {
        n,
        gamma,
        sector,
        matrix: Matrix::Real(dense_from_parts(n, sector, &scaled, 1.0)),
        problem: Some(problem),
    })
}

/// The spin-flip operator `Π X_k` as a dense permutation matrix.
pub fn spin_flip(n: usize) -> Result<Mat<f64>> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let mask = dim - 1;
    let mut g = Mat::<f64>::zeros(dim, dim);
    for b in 0..dim {
        g[(b ^ mask, b)] = 1.0;
    }
    Ok(g)
}

/// Largest entry of `[M, G]`; since `G` permutes `b -> b̄` this is
/// `max |M[a,b] - M[ā,b̄]|`.
pub fn spin_flip_commutator(m: &Matrix, n: usize) -> f64 {
    let dim = m.dim();
    assert_eq!(dim, 1 << n);
    let mask = dim - 1;
    let mut worst = 0.0f64;
    for b in 0..dim {
        for a in 0..dim {
            worst = worst.max((m.get(a, b) - m.get(a ^ mask, b ^ mask)).norm());
        }
    }
    worst
}

/// Commutator residual of `H_d + γ H_p` with `G`, evaluated on the sparse
/// structure (cheap at any size handled here).
pub fn walk_symmetry_residual(g: &Graph, gamma: f64) -> f64 {
    let dim = 1usize << g.n();
    let mask = dim - 1;
    let mut worst = 0.0f64;
    for b in 0..dim / 2 {
        let d = gamma * (g.problem_energy(b) - g.problem_energy(b ^ mask)) as f64;
        worst = worst.max(d.abs());
    }
    // the driver couples b to b^(1<<k) and b̄ to b̄^(1<<k) = (b^(1<<k))̄ with equal weight
    worst
}

pub fn reduce_to_plus_sector(op: &WalkOperator) -> Result<WalkOperator> {
    reduce_to_sector(op, Sector::SpinFlipPlus)
}

/// Restricts a full-space operator commuting with `G` to one of its eigenspaces.
pub fn reduce_to_sector(op: &WalkOperator, sector: Sector) -> Result<WalkOperator> {
    if op.sector != Sector::Full {
        return Err(Error::Validation("operator is already sector-reduced".into()));
    }
    if sector == Sector::Full {
        return Ok(op.clone());
    }
    let n = op.n;
    let scale = op.matrix.max_abs().max(1.0);
    let residual = spin_flip_commutator(&op.matrix, n);
    if residual > 1e-12 * scale {
        return Err(Error::Symmetry(format!(
            "operator does not commute with the spin flip (residual {residual:.3e})"
        )));
    }
    let dim = sector.dim(n);
    let mask = (1usize << n) - 1;
    let s = sector.parity();
    let matrix = match &op.matrix {
        Matrix::Real(m) => Matrix::Real(Mat::from_fn(dim, dim, |i, j| m[(i, j)] + s * m[(i, j ^ mask)])),
        Matrix::Complex(m) => Matrix::Complex(Mat::from_fn(dim, dim, |i, j| {
            m[(i, j)] + m[(i, j ^ mask)] * s
        })),
    };
    Ok(WalkOperator {
        n,
        gamma: op.gamma,
        sector,
        matrix,
        problem: op.problem.as_ref().map(|p| p[..dim].to_vec()),
    })
}

/// Uniform superposition `|+>` expressed in `sector` (zero in the minus sector).
pub fn plus_state(n: usize, sector: Sector) -> State {
    let dim = sector.dim(n);
    let amp = match sector {
        Sector::SpinFlipMinus => 0.0,
        _ => 1.0 / (dim as f64).sqrt(),
    };
    vec![c64::new(amp, 0.0); dim]
}

/// Maps a sector vector back to the `2^n` computational amplitudes.
pub fn expand_to_full(psi: &[c64], n: usize, sector: Sector) -> State {
    if sector == Sector::Full {
        return psi.to_vec();
    }
    let dim = 1usize << n;
    let mask = dim - 1;
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let s = sector.parity();
    let mut out = vec![c64::new(0.0, 0.0); dim];
    for (b, &x) in psi.iter().enumerate() {
        out[b] = x * w;
        out[b ^ mask] = x * (w * s);
    }
    out
}

/// Components of a full-space vector along the sector basis (orthogonal projection).
pub fn restrict_to_sector(psi: &[c64], n: usize, sector: Sector) -> State {
    if sector == Sector::Full {
        return psi.to_vec();
    }
    let mask = (1usize << n) - 1;
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let s = sector.parity();
    (0..sector.dim(n))
        .map(|b| (psi[b] + psi[b ^ mask] * s) * w)
        .collect()
}

/// Eigen-decomposition with eigenvalues ascending and degenerate levels grouped.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub energies: Vec<f64>,
    /// Eigenvectors as columns.
    pub states: Matrix,
    /// Index ranges of levels whose consecutive gaps are all within `tol_deg`.
    pub groups: Vec<Range<usize>>,
    pub tol_deg: f64,
}

pub fn group_levels(energies: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=energies.len() {
        if k == energies.len() || energies[k] - energies[k - 1] > tol {
            groups.push(start..k);
            start = k;
        }
    }
    groups
}

/// Default degeneracy threshold, `1e-9` times the largest matrix entry.
pub fn default_degeneracy_tolerance(m: &Matrix) -> f64 {
    1e-9 * m.max_abs().max(f64::MIN_POSITIVE)
}

fn hermitian_check(m: &Matrix) -> Result<()> {
    let res = m.hermiticity_residual();
    if res > 1e-12 * m.max_abs().max(1.0) {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (residual {res:.3e})"
        )));
    }
    Ok(())
}

pub fn diagonalize(op: &WalkOperator, tol_deg: Option<f64>) -> Result<SpectralDecomposition> {
    diagonalize_matrix(&op.matrix, tol_deg)
}

pub fn diagonalize_matrix(m: &Matrix, tol_deg: Option<f64>) -> Result<SpectralDecomposition> {
    hermitian_check(m)?;
    let tol = tol_deg.unwrap_or_else(|| default_degeneracy_tolerance(m));
    let fail = |e| Error::Numeric(format!("eigensolver: {e:?}"));
    let (energies, states) = match m {
        Matrix::Real(a) => {
            let evd = a.self_adjoint_eigen(Side::Lower).map_err(fail)?;
            let s = evd.S().column_vector();
            let e: Vec<f64> = (0..a.nrows()).map(|i| s[i]).collect();
            (e, Matrix::Real(evd.U().to_owned()))
        }
        Matrix::Complex(a) => {
            let evd = a.self_adjoint_eigen(Side::Lower).map_err(fail)?;
            let s = evd.S().column_vector();
            let e: Vec<f64> = (0..a.nrows()).map(|i| s[i].re).collect();
            (e, Matrix::Complex(evd.U().to_owned()))
        }
    };
    let groups = group_levels(&energies, tol);
    Ok(SpectralDecomposition {
        energies,
        states,
        groups,
        tol_deg: tol,
    })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    hermitian_check(m)?;
    let fail = |e| Error::Numeric(format!("eigensolver: {e:?}"));
    match m {
        Matrix::Real(a) => a.self_adjoint_eigenvalues(Side::Lower).map_err(fail),
        Matrix::Complex(a) => a.self_adjoint_eigenvalues(Side::Lower).map_err(fail),
    }
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn state(&self, k: usize) -> State {
        match &self.states {
            Matrix::Real(u) => u.col_as_slice(k).iter().map(|&x| c64::new(x, 0.0)).collect(),
            Matrix::Complex(u) => u.col_as_slice(k).to_vec(),
        }
    }

    /// `<E_k|psi>` for every level.
    pub fn overlaps(&self, psi: &[c64]) -> Vec<c64> {
        assert_eq!(psi.len(), self.dim());
        (0..self.dim())
            .map(|k| match &self.states {
                Matrix::Real(u) => u
                    .col_as_slice(k)
                    .iter()
                    .zip(psi)
                    .map(|(&a, &p)| p * a)
                    .sum(),
                Matrix::Complex(u) => inner(u.col_as_slice(k), psi),
            })
            .collect()
    }

    /// `<E_k|D|E_k>` for a diagonal observable `D`.
    pub fn diagonal_expectations(&self, diag: &[f64]) -> Vec<f64> {
        assert_eq!(diag.len(), self.dim());
        (0..self.dim())
            .map(|k| match &self.states {
                Matrix::Real(u) => u.col_as_slice(k).iter().zip(diag).map(|(a, d)| a * a * d).sum(),
                Matrix::Complex(u) => u
                    .col_as_slice(k)
                    .iter()
                    .zip(diag)
                    .map(|(a, d)| a.norm_sqr() * d)
                    .sum(),
            })
            .collect()
    }

    /// `Σ_k c_k |E_k>`.
    pub fn synthesize(&self, coeffs: &[c64]) -> State {
        let mut out = vec![c64::new(0.0, 0.0); self.dim()];
        for (k, &c) in coeffs.iter().enumerate() {
            if c == c64::new(0.0, 0.0) {
                continue;
            }
            match &self.states {
                Matrix::Real(u) => {
                    for (o, &a) in out.iter_mut().zip(u.col_as_slice(k)) {
                        *o += c * a;
                    }
                }
                Matrix::Complex(u) => {
                    for (o, &a) in out.iter_mut().zip(u.col_as_slice(k)) {
                        *o += c * a;
                    }
                }
            }
        }
        out
    }

    /// `e^{-iHt} psi`.
    pub fn propagate(&self, psi: &[c64], t: f64) -> State {
        let c: Vec<c64> = self
            .overlaps(psi)
            .into_iter()
            .zip(&self.energies)
            .map(|(c, &e)| c * c64::from_polar(1.0, -e * t))
            .collect();
        self.synthesize(&c)
    }

    /// `max |H - Σ E_k |E_k><E_k||`.
    pub fn reconstruction_residual(&self, m: &Matrix) -> f64 {
        let d = self.dim();
        let u = self.states.to_complex();
        let mut scaled = u.clone();
        for k in 0..d {
            for i in 0..d {
                scaled[(i, k)] *= self.energies[k];
            }
        }
        let rebuilt = &scaled * u.adjoint();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                worst = worst.max((rebuilt[(i, j)] - m.get(i, j)).norm());
            }
        }
        worst
    }

    /// `max |U†U - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let u = self.states.to_complex();
        let gram = u.adjoint() * &u;
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - c64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}
