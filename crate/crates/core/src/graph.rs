//! MAX-CUT problem graphs, their generators, and the subgraph counts used by
//! the analytic moment formulas.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count a [`Graph`] can hold (adjacency is stored as bitmasks).
pub const MAX_VERTICES: usize = 64;
/// Largest instance `max_cut_exact` will enumerate.
pub const MAX_CUT_BUDGET: usize = 30;
/// Pairing-model attempts before `gen_regular` gives up.
pub const REGULAR_RETRY_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphFamily {
    Binomial(f64),
    Regular(usize),
    Explicit,
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphFamily::Binomial(p) => write!(f, "binomial({p})"),
            GraphFamily::Regular(d) => write!(f, "regular({d})"),
            GraphFamily::Explicit => write!(f, "explicit"),
        }
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "explicit" {
            return Ok(GraphFamily::Explicit);
        }
        let bad = || Error::Parameter(format!("unrecognised graph family '{s}'"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let arg = rest.strip_suffix(')').ok_or_else(bad)?;
        match name {
            "binomial" => arg.parse().map(GraphFamily::Binomial).map_err(|_| bad()),
            "regular" => arg.parse().map(GraphFamily::Regular).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphInvariants {
    /// Edge count.
    pub kappa2: usize,
    /// Triangle count.
    pub kappa3: usize,
    /// Number of distinct 4-cycle subgraphs.
    pub kappa4: usize,
    pub degrees: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    seed: u64,
    family: GraphFamily,
    adjacency: Vec<u64>,
    invariants: OnceLock<GraphInvariants>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.edges == other.edges
            && self.seed == other.seed
            && self.family == other.family
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    family: String,
    seed: u64,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are normalised to `i < j` and
    /// sorted; self-loops, duplicates and out-of-range vertices are rejected.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        family: GraphFamily,
        seed: u64,
    ) -> Result<Self> {
        if n == 0 || n > MAX_VERTICES {
            return Err(Error::Parameter(format!(
                "vertex count must be in 1..={MAX_VERTICES}, got {n}"
            )));
        }
        let mut list: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Parameter(format!(
                    "edge ({a},{b}) out of range for n={n}"
                )));
            }
            if a == b {
                return Err(Error::Parameter(format!("self-loop at vertex {a}")));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Parameter(format!(
                "duplicate edge ({},{})",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![0u64; n];
        for &(i, j) in &list {
            adjacency[i] |= 1 << j;
            adjacency[j] |= 1 << i;
        }
        if let GraphFamily::Regular(d) = family {
            if let Some(v) = (0..n).find(|&v| adjacency[v].count_ones() as usize != d) {
                return Err(Error::Parameter(format!(
                    "vertex {v} does not have degree {d}"
                )));
            }
        }
        Ok(Graph {
            n,
            edges: list,
            seed,
            family,
            adjacency,
            invariants: OnceLock::new(),
        })
    }

    pub fn explicit(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(n, edges, GraphFamily::Explicit, 0)
    }

    pub fn single_edge() -> Self {
        Self::explicit(2, [(0, 1)]).expect("valid edge")
    }

    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Parameter(format!("ring needs n >= 3, got {n}")));
        }
        Self::explicit(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::explicit(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn family(&self) -> GraphFamily {
        self.family
    }

    /// Neighbour bitmask of vertex `v`.
    pub fn neighbours(&self, v: usize) -> u64 {
        self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].count_ones() as usize
    }

    pub fn invariants(&self) -> &GraphInvariants {
        self.invariants.get_or_init(|| compute_invariants(self))
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = 1u64;
        let mut frontier = 1u64;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.adjacency[v] & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen.count_ones() as usize == self.n
    }

    /// Problem energy `Σ z_i z_j` of computational basis state `b`
    /// (bit k set means qubit k is in |1>, i.e. z_k = -1).
    pub fn problem_energy(&self, b: usize) -> i64 {
        let b = b as u64;
        let cut: u32 = self
            .edges
            .iter()
            .map(|&(i, j)| (((b >> i) ^ (b >> j)) & 1) as u32)
            .sum();
        self.edges.len() as i64 - 2 * cut as i64
    }

    /// Problem energies of all `2^n` basis states.
    pub fn problem_diagonal(&self) -> Vec<f64> {
        (0..1usize << self.n)
            .map(|b| self.problem_energy(b) as f64)
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = GraphJson {
            n: self.n,
            family: self.family.to_string(),
            seed: self.seed,
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
        };
        serde_json::to_string(&doc).expect("graph serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text)?;
        let family = doc.family.parse()?;
        Self::new(doc.n, doc.edges.iter().map(|e| (e[0], e[1])), family, doc.seed)
    }
}

fn compute_invariants(g: &Graph) -> GraphInvariants {
    let n = g.n;
    let codegree = |u: usize, w: usize| (g.adjacency[u] & g.adjacency[w]).count_ones() as usize;
    let triangle_incidences: usize = g.edges.iter().map(|&(i, j)| codegree(i, j)).sum();
    // every 4-cycle has two diagonals, each contributing one pair of common neighbours
    let mut square_pairs = 0usize;
    for u in 0..n {
        for w in u + 1..n {
            let c = codegree(u, w);
            square_pairs += c * c.saturating_sub(1) / 2;
        }
    }
    GraphInvariants {
        kappa2: g.edges.len(),
        kappa3: triangle_incidences / 3,
        kappa4: square_pairs / 2,
        degrees: (0..n).map(|v| g.degree(v)).collect(),
    }
}

pub fn invariants(g: &Graph) -> &GraphInvariants {
    g.invariants()
}

/// Erdős–Rényi graph: each of the `n(n-1)/2` candidate edges, visited in
/// lexicographic order, is kept with probability `p`.
pub fn gen_binomial(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(2..=MAX_VERTICES).contains(&n) {
        return Err(Error::Parameter(format!(
            "binomial graphs need 2 <= n <= {MAX_VERTICES}, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "edge probability must lie in [0, 1], got {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges, GraphFamily::Binomial(p), seed)
}

/// Uniform random `d`-regular graph from the pairing model, rejecting any
/// pairing with loops or repeated edges.
pub fn gen_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if n > MAX_VERTICES || d >= n || (n * d) % 2 != 0 {
        return Err(Error::Parameter(format!(
            "regular graph needs d < n <= {MAX_VERTICES} and n*d even, got n={n}, d={d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n * d).map(|k| k / d.max(1)).collect();
    'attempt: for _ in 0..REGULAR_RETRY_BUDGET {
        points.shuffle(&mut rng);
        let mut adjacency = vec![0u64; n];
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in points.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b || adjacency[a] & (1 << b) != 0 {
                continue 'attempt;
            }
            adjacency[a] |= 1 << b;
            adjacency[b] |= 1 << a;
            edges.push((a, b));
        }
        return Graph::new(n, edges, GraphFamily::Regular(d), seed);
    }
    Err(Error::Generation(format!(
        "no simple {d}-regular pairing on {n} vertices after {REGULAR_RETRY_BUDGET} attempts"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxCut {
    /// Lowest eigenvalue of the problem Hamiltonian.
    pub ground_energy: i64,
    pub cut_size: usize,
    /// A basis state attaining the ground energy (its complement does too).
    pub witness: usize,
}

/// Exhaustive MAX-CUT. Vertex `n-1` is pinned to |0> since complementing a
/// state leaves its energy unchanged; the remaining states are visited in
/// Gray-code order with O(degree) energy updates.
pub fn max_cut_exact(g: &Graph) -> Result<MaxCut> {
    let n = g.n;
    if n > MAX_CUT_BUDGET {
        return Err(Error::Capacity(format!(
            "exhaustive MAX-CUT limited to n <= {MAX_CUT_BUDGET}, got {n}"
        )));
    }
    let free = n - 1;
    let mut state = 0u64;
    let mut energy = g.edges.len() as i64;
    let mut best = (energy, 0u64);
    for step in 1u64..(1u64 << free) {
        let k = step.trailing_zeros() as usize;
        let adj = g.adjacency[k];
        let same = if state & (1 << k) != 0 { state } else { !state };
        let aligned = (adj & same).count_ones() as i64;
        let opposed = adj.count_ones() as i64 - aligned;
        energy -= 2 * (aligned - opposed);
        state ^= 1 << k;
        if energy < best.0 {
            best = (energy, state);
        }
    }
    Ok(MaxCut {
        ground_energy: best.0,
        cut_size: ((g.edges.len() as i64 - best.0) / 2) as usize,
        witness: best.1 as usize,
    })
}

/// All computational basis states (full space) attaining the problem ground energy.
pub fn ground_manifold(g: &Graph) -> Result<Vec<usize>> {
    let e0 = max_cut_exact(g)?.ground_energy;
    Ok((0..1usize << g.n)
        .filter(|&b| g.problem_energy(b) == e0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_triangles(g: &Graph) -> usize {
        let n = g.n();
        let adj = |a: usize, b: usize| g.neighbours(a) & (1 << b) != 0;
        let mut count = 0;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if adj(a, b) && adj(b, c) && adj(a, c) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    fn brute_squares(g: &Graph) -> usize {
        let n = g.n();
        let adj = |a: usize, b: usize| g.neighbours(a) & (1 << b) != 0;
        let cyc = |p: [usize; 4]| (0..4).all(|k| adj(p[k], p[(k + 1) % 4]));
        let mut count = 0;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        // the three distinct cyclic orders of four labelled vertices
                        for p in [[a, b, c, d], [a, b, d, c], [a, c, b, d]] {
                            if cyc(p) {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        count
    }

    fn trace_cubed_over_six(g: &Graph) -> usize {
        let n = g.n();
        let a: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).map(|j| ((g.neighbours(i) >> j) & 1) as usize).collect())
            .collect();
        let mut tr = 0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    tr += a[i][j] * a[j][k] * a[k][i];
                }
            }
        }
        tr / 6
    }

    fn mean_problem_power(g: &Graph, k: i32) -> f64 {
        let d = g.problem_diagonal();
        d.iter().map(|e| e.powi(k)).sum::<f64>() / d.len() as f64
    }

    #[test]
    fn small_graph_invariants() {
        let c3 = Graph::ring(3).unwrap();
        let inv = c3.invariants();
        assert_eq!((inv.kappa2, inv.kappa3, inv.kappa4), (3, 1, 0));

        let c4 = Graph::ring(4).unwrap();
        let inv = c4.invariants();
        assert_eq!((inv.kappa2, inv.kappa3, inv.kappa4), (4, 0, 1));
        assert_eq!(mean_problem_power(&c4, 4), 64.0);

        let k4 = Graph::complete(4).unwrap();
        let inv = k4.invariants();
        assert_eq!((inv.kappa2, inv.kappa3, inv.kappa4), (6, 4, 3));
    }

    #[test]
    fn fourth_moment_identity_on_random_graphs() {
        for seed in 0..40 {
            let g = gen_binomial(4 + (seed as usize % 5), 0.6, seed).unwrap();
            let inv = g.invariants();
            let (k2, k4) = (inv.kappa2 as f64, inv.kappa4 as f64);
            let expected = k2 + 3.0 * k2 * (k2 - 1.0) + 24.0 * k4;
            assert_eq!(mean_problem_power(&g, 4), expected, "seed {seed}");
            assert_eq!(mean_problem_power(&g, 2), k2);
            assert_eq!(mean_problem_power(&g, 3), 6.0 * inv.kappa3 as f64);
        }
    }

    #[test]
    fn counts_match_enumeration() {
        for seed in 0..30 {
            let g = gen_binomial(7, 0.5, seed).unwrap();
            let inv = g.invariants();
            assert_eq!(inv.kappa3, brute_triangles(&g));
            assert_eq!(inv.kappa3, trace_cubed_over_six(&g));
            assert_eq!(inv.kappa4, brute_squares(&g));
            assert_eq!(inv.degrees.iter().sum::<usize>(), 2 * inv.kappa2);
        }
    }

    #[test]
    fn binomial_extremes() {
        let g = gen_binomial(4, 1.0, 99).unwrap();
        assert_eq!(g.invariants().kappa2, 6);
        assert_eq!(g.edges(), Graph::complete(4).unwrap().edges());
        assert!(gen_binomial(5, 0.0, 3).unwrap().edges().is_empty());
        assert!(gen_binomial(1, 0.5, 0).is_err());
        assert!(gen_binomial(5, 1.5, 0).is_err());
    }

    #[test]
    fn binomial_edge_count_statistics() {
        let samples: Vec<f64> = (0..1000)
            .map(|s| gen_binomial(12, 2.0 / 3.0, s).unwrap().edges().len() as f64)
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        // the sample mean of 1000 Binomial(66, 2/3) draws has standard error sqrt(66*2/9/1000)
        let se = (66.0 * 2.0 / 9.0 / 1000.0f64).sqrt();
        assert!((mean - 44.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn binomial_is_deterministic() {
        assert_eq!(gen_binomial(10, 0.3, 5).unwrap(), gen_binomial(10, 0.3, 5).unwrap());
    }

    #[test]
    fn regular_graphs() {
        let k4 = gen_regular(4, 3, 1).unwrap();
        assert_eq!(k4.edges(), Graph::complete(4).unwrap().edges());
        for seed in 0..100 {
            let g = gen_regular(8, 3, seed).unwrap();
            assert!(g.invariants().degrees.iter().all(|&d| d == 3));
        }
        assert_eq!(gen_regular(12, 3, 4).unwrap().invariants().kappa2, 18);
        assert!(gen_regular(5, 3, 0).is_err());
        assert!(gen_regular(4, 4, 0).is_err());
        assert_eq!(gen_regular(12, 3, 8).unwrap(), gen_regular(12, 3, 8).unwrap());
    }

    #[test]
    fn max_cut_examples() {
        let e = max_cut_exact(&Graph::single_edge()).unwrap();
        assert_eq!((e.ground_energy, e.cut_size), (-1, 1));
        let c3 = max_cut_exact(&Graph::ring(3).unwrap()).unwrap();
        assert_eq!((c3.ground_energy, c3.cut_size), (-1, 2));
        let k4 = max_cut_exact(&Graph::complete(4).unwrap()).unwrap();
        assert_eq!((k4.ground_energy, k4.cut_size), (-2, 4));
        let big = Graph::explicit(31, [(0, 1)]).unwrap();
        assert!(matches!(max_cut_exact(&big), Err(Error::Capacity(_))));
    }

    #[test]
    fn max_cut_matches_scan() {
        for seed in 0..20 {
            let g = gen_binomial(9, 0.5, seed).unwrap();
            let scan = g.problem_diagonal().into_iter().fold(f64::INFINITY, f64::min);
            let mc = max_cut_exact(&g).unwrap();
            assert_eq!(mc.ground_energy as f64, scan);
            assert_eq!(g.problem_energy(mc.witness), mc.ground_energy);
        }
    }

    #[test]
    fn json_round_trip() {
        let g = gen_binomial(12, 0.6667, 7).unwrap();
        let text = g.to_json();
        let back = Graph::from_json(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json(), text);
        let r = gen_regular(10, 3, 2).unwrap();
        assert_eq!(Graph::from_json(&r.to_json()).unwrap().to_json(), r.to_json());
        assert!(Graph::from_json(r#"{"n":3,"family":"explicit","seed":0,"edges":[[0,0]]}"#).is_err());
    }

    #[test]
    fn family_strings() {
        for f in [GraphFamily::Binomial(2.0 / 3.0), GraphFamily::Regular(3), GraphFamily::Explicit] {
            assert_eq!(f.to_string().parse::<GraphFamily>().unwrap(), f);
        }
        assert!("ring(3)".parse::<GraphFamily>().is_err());
    }

    #[test]
    fn connectivity() {
        assert!(Graph::ring(5).unwrap().is_connected());
        assert!(!Graph::explicit(4, [(0, 1), (2, 3)]).unwrap().is_connected());
    }
}
