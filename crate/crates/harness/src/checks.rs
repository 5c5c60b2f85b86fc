//! Conservation and symmetry diagnostics recorded alongside every experiment.

use ctqw_core::c64;
use ctqw_core::graph::Graph;
use ctqw_core::operators::{apply_driver, plus_state, walk_symmetry_residual, Sector};

use crate::table::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub instance_id: String,
    /// Parameter point, e.g. `gamma=1.0` or `tau=0.2`.
    pub point: String,
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(instance_id: &str, point: impl Into<String>, name: &'static str, value: f64, tolerance: f64) -> Self {
        Check {
            instance_id: instance_id.to_string(),
            point: point.into(),
            name,
            value,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.value.abs() <= self.tolerance
    }
}

pub fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new("checks", &["instance_id", "point", "check", "value", "tolerance", "pass"]);
    for c in checks {
        t.push(vec![
            c.instance_id.as_str().into(),
            c.point.as_str().into(),
            c.name.into(),
            c.value.into(),
            c.tolerance.into(),
            c.passed().into(),
        ]);
    }
    t
}

/// Full-space propagation of |+> by short Taylor steps using only the sparse
/// driver and the problem diagonal, independent of any sector reduction.
/// Returns `(max_i |<Z_i>|, |norm - 1|)` at `t_end`.
pub fn spin_flip_probe(g: &Graph, gamma: f64, t_end: f64) -> (f64, f64) {
    let n = g.n();
    let diag = g.problem_diagonal();
    let scale = n as f64 + gamma * g.invariants().kappa2 as f64;
    let steps = ((t_end * scale / 0.5).ceil() as usize).max(1);
    let dt = t_end / steps as f64;
    let apply = |v: &[c64]| -> Vec<c64> {
        let mut out = apply_driver(n, Sector::Full, v);
        for ((o, x), e) in out.iter_mut().zip(v).zip(&diag) {
            *o += x * (gamma * e);
        }
        out
    };
    let mut psi = plus_state(n, Sector::Full);
    for _ in 0..steps {
        let mut term = psi.clone();
        let mut next = psi.clone();
        for k in 1..=24 {
            let h = apply(&term);
            let f = c64::new(0.0, -dt / k as f64);
            term = h.iter().map(|x| x * f).collect();
            next.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
        }
        psi = next;
    }
    let norm2: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    let z_max = (0..n)
        .map(|i| {
            psi.iter()
                .enumerate()
                .map(|(b, a)| if b >> i & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);
    (z_max, (norm2.sqrt() - 1.0).abs())
}

/// Symmetry checks for one walk: the diagonal spin-flip residual and the
/// full-space `<Z_i>` probe.
pub fn symmetry_checks(id: &str, point: &str, g: &Graph, gamma: f64) -> Vec<Check> {
    let (z, norm) = spin_flip_probe(g, gamma, 1.0);
    vec![
        Check::new(id, point, "spin_flip_commutator", walk_symmetry_residual(g, gamma), 1e-12),
        Check::new(id, point, "z_expectation", z, 1e-8),
        Check::new(id, point, "probe_norm", norm, 1e-8),
    ]
}
