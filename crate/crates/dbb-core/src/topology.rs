//! Communication graphs and doubly stochastic mixing matrices.
//!
//! The consensus analysis needs a symmetric doubly stochastic weight matrix
//! `W` over a connected undirected graph, together with `lambda`, the largest
//! eigenvalue modulus of `W` on the subspace orthogonal to the all-ones
//! vector. Two generators are provided: deterministic Metropolis weights
//! (any connected graph) and Sinkhorn-normalized random weights (the random
//! doubly stochastic construction used for complete graphs).

use std::collections::BTreeSet;
use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::SymMatrix;

const ER_RESAMPLE_CAP: usize = 100;
const SINKHORN_SWEEP_CAP: usize = 10_000;
const SUM_TOL: f64 = 1e-10;

/// Undirected graph on nodes `0..n` with no self-loops.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>, // (i, j) with i < j
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKind {
    Complete,
    Ring,
    ErdosRenyi(f64),
}

impl Graph {
    pub fn complete(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut edges = BTreeSet::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.insert((i, j));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn ring(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut edges = BTreeSet::new();
        for i in 0..n {
            let j = (i + 1) % n;
            edges.insert((i.min(j), i.max(j)));
        }
        Ok(Self { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == i || b == i)
            .count()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Invalid("graph needs at least 2 nodes".into()));
    }
    Ok(())
}

/// Generates a connected graph of the requested kind. Erdos-Renyi draws are
/// resampled (deterministically from the seed) until connected.
pub fn make_graph(kind: GraphKind, n: usize, seed: u64) -> Result<Graph> {
    match kind {
        GraphKind::Complete => Graph::complete(n),
        GraphKind::Ring => Graph::ring(n),
        GraphKind::ErdosRenyi(prob) => {
            if !(prob > 0.0 && prob <= 1.0) {
                return Err(Error::Invalid(format!(
                    "erdos_renyi probability must be in (0, 1], got {prob}"
                )));
            }
            check_n(n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..ER_RESAMPLE_CAP {
                let mut edges = BTreeSet::new();
                for i in 0..n {
                    for j in i + 1..n {
                        if rng.gen::<f64>() < prob {
                            edges.insert((i, j));
                        }
                    }
                }
                let g = Graph { n, edges };
                if g.is_connected() {
                    return Ok(g);
                }
            }
            Err(Error::GraphGeneration {
                attempts: ER_RESAMPLE_CAP,
            })
        }
    }
}

/// Symmetric doubly stochastic mixing matrix together with its second-largest
/// eigenvalue modulus.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    w: SymMatrix,
    lambda: f64,
}

impl MixingMatrix {
    /// Validates double stochasticity and (optionally) graph support, then
    /// computes the spectral quantity lambda.
    pub fn from_matrix(w: SymMatrix, graph: Option<&Graph>) -> Result<Self> {
        let n = w.dim();
        for i in 0..n {
            let mut row = 0.0;
            let mut col = 0.0;
            for j in 0..n {
                let v = w.get(i, j);
                if v < 0.0 {
                    return Err(Error::Invalid(format!(
                        "negative mixing weight at ({i}, {j}): {v}"
                    )));
                }
                row += v;
                col += w.get(j, i);
                if let Some(g) = graph {
                    if i != j && v > 0.0 && !g.has_edge(i, j) {
                        return Err(Error::Invalid(format!(
                            "mixing weight outside graph support at ({i}, {j})"
                        )));
                    }
                }
            }
            if (row - 1.0).abs() > SUM_TOL || (col - 1.0).abs() > SUM_TOL {
                return Err(Error::Invalid(format!(
                    "matrix is not doubly stochastic (row {i} sums to {row})"
                )));
            }
        }
        let lambda = second_eigenvalue(&w)?;
        Ok(Self { w, lambda })
    }

    /// The 1x1 mixing matrix `[[1]]` for single-agent runs.
    pub fn single() -> Self {
        Self {
            w: SymMatrix::identity(1),
            lambda: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.w.dim()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.w
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Metropolis weights: `w_ij = 1 / (1 + max(deg_i, deg_j))` on edges, with
/// the diagonal absorbing the remainder. Deterministic for a given graph.
pub fn metropolis_weights(g: &Graph) -> Result<MixingMatrix> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let deg: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let mut w = SymMatrix::zeros(n);
    for (i, j) in g.edges() {
        let v = 1.0 / (1.0 + deg[i].max(deg[j]) as f64);
        w.set_sym(i, j, v);
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| w.get(i, j)).sum();
        w.set_sym(i, i, 1.0 - off);
    }
    MixingMatrix::from_matrix(w, Some(g))
}

/// Random symmetric doubly stochastic weights: positive uniform draws on the
/// graph support (plus diagonal), then alternating row/column normalization
/// with re-symmetrization until all sums are within 1e-10 of 1.
pub fn sinkhorn_random_weights(g: &Graph, seed: u64) -> Result<MixingMatrix> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            if i == j || g.has_edge(i, j) {
                let v = 1.0 - rng.gen::<f64>(); // uniform (0, 1]
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
    }
    let mut worst = f64::INFINITY;
    for _ in 0..SINKHORN_SWEEP_CAP {
        // row normalize
        for i in 0..n {
            let s: f64 = m[i * n..(i + 1) * n].iter().sum();
            for j in 0..n {
                m[i * n + j] /= s;
            }
        }
        // column normalize
        for j in 0..n {
            let s: f64 = (0..n).map(|i| m[i * n + j]).sum();
            for i in 0..n {
                m[i * n + j] /= s;
            }
        }
        // re-symmetrize
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (m[i * n + j] + m[j * n + i]);
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        worst = 0.0f64;
        for i in 0..n {
            let rs: f64 = m[i * n..(i + 1) * n].iter().sum();
            let cs: f64 = (0..n).map(|r| m[r * n + i]).sum();
            worst = worst.max((rs - 1.0).abs()).max((cs - 1.0).abs());
        }
        if worst <= SUM_TOL {
            let w = SymMatrix::from_rows(n, &m)?;
            return MixingMatrix::from_matrix(w, Some(g));
        }
    }
    Err(Error::SinkhornNotConverged {
        sweeps: SINKHORN_SWEEP_CAP,
        deviation: worst,
    })
}

/// Largest eigenvalue modulus of `W` restricted to the subspace orthogonal to
/// the all-ones vector, computed as the extreme eigenvalues of
/// `W - (1/n) * ones * onesᵀ`.
pub fn second_eigenvalue(w: &SymMatrix) -> Result<f64> {
    let n = w.dim();
    let mut m = vec![0.0; n * n];
    let shift = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = w.get(i, j) - shift;
        }
    }
    let (lo, hi) = SymMatrix::from_rows(n, &m)?.eig_bounds()?;
    Ok(lo.abs().max(hi.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm;

    #[test]
    fn complete_graph_edges() {
        let g = Graph::complete(3).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn ring_graph_edges() {
        let g = Graph::ring(4).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
    }

    #[test]
    fn erdos_renyi_prob_one_is_complete() {
        let g = make_graph(GraphKind::ErdosRenyi(1.0), 5, 7).unwrap();
        assert_eq!(g.edges().count(), 10);
        assert!(g.is_connected());
    }

    #[test]
    fn metropolis_path_graph() {
        // path 0-1-2: degrees 1, 2, 1
        let mut edges = BTreeSet::new();
        edges.insert((0, 1));
        edges.insert((1, 2));
        let g = Graph { n: 3, edges };
        let w = metropolis_weights(&g).unwrap();
        let m = w.matrix();
        assert!((m.get(0, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.get(1, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.get(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.get(2, 2) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn metropolis_two_node_complete() {
        let g = Graph::complete(2).unwrap();
        let w = metropolis_weights(&g).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((w.matrix().get(i, j) - 0.5).abs() < 1e-15);
            }
        }
        assert!(w.lambda().abs() < 1e-10);
    }

    #[test]
    fn metropolis_ring4() {
        let g = Graph::ring(4).unwrap();
        let w = metropolis_weights(&g).unwrap();
        for (i, j) in g.edges() {
            assert!((w.matrix().get(i, j) - 1.0 / 3.0).abs() < 1e-15);
        }
        for i in 0..4 {
            assert!((w.matrix().get(i, i) - 1.0 / 3.0).abs() < 1e-15);
            let col: f64 = (0..4).map(|r| w.matrix().get(r, i)).sum();
            assert!((col - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn metropolis_deterministic() {
        let g = Graph::ring(6).unwrap();
        let a = metropolis_weights(&g).unwrap();
        let b = metropolis_weights(&g).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn sinkhorn_two_node_form() {
        let g = Graph::complete(2).unwrap();
        let w = sinkhorn_random_weights(&g, 3).unwrap();
        let a = w.matrix().get(0, 0);
        assert!(a > 0.0 && a < 1.0);
        assert!((w.matrix().get(0, 1) - (1.0 - a)).abs() < 1e-9);
        assert!((w.matrix().get(1, 1) - a).abs() < 1e-9);
    }

    #[test]
    fn sinkhorn_sums_within_tolerance() {
        let g = Graph::complete(5).unwrap();
        let w = sinkhorn_random_weights(&g, 42).unwrap();
        let n = w.n();
        for i in 0..n {
            let rs: f64 = (0..n).map(|j| w.matrix().get(i, j)).sum();
            let cs: f64 = (0..n).map(|j| w.matrix().get(j, i)).sum();
            assert!((rs - 1.0).abs() <= 1e-10);
            assert!((cs - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn second_eigenvalue_uniform_is_zero() {
        let n = 4;
        let w = SymMatrix::from_rows(n, &vec![1.0 / n as f64; n * n]).unwrap();
        assert!(second_eigenvalue(&w).unwrap().abs() < 1e-10);
    }

    #[test]
    fn second_eigenvalue_identity_is_one() {
        let w = SymMatrix::identity(3);
        assert!((second_eigenvalue(&w).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn connected_lambda_strictly_below_one() {
        for seed in 0..5 {
            let g = make_graph(GraphKind::ErdosRenyi(0.4), 12, seed).unwrap();
            let w = metropolis_weights(&g).unwrap();
            assert!(w.lambda() < 1.0 - 1e-12, "lambda = {}", w.lambda());
        }
    }

    #[test]
    fn averaging_contraction() {
        use rand::Rng;
        use rand::SeedableRng;
        let g = Graph::ring(8).unwrap();
        let w = metropolis_weights(&g).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let v: Vec<f64> = (0..8).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let mean = v.iter().sum::<f64>() / 8.0;
            let wv = w.matrix().matvec(&v).unwrap();
            let dev_before: Vec<f64> = v.iter().map(|x| x - mean).collect();
            let dev_after: Vec<f64> = wv.iter().map(|x| x - mean).collect();
            assert!(norm(&dev_after) <= w.lambda() * norm(&dev_before) + 1e-9);
        }
    }

    #[test]
    fn disconnected_graph_rejected() {
        let mut edges = BTreeSet::new();
        edges.insert((0, 1));
        edges.insert((2, 3));
        let g = Graph { n: 4, edges };
        assert!(matches!(metropolis_weights(&g), Err(Error::Disconnected)));
    }
}
