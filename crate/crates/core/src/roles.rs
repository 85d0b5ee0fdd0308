//! Role extraction: cluster the graph whose weighted adjacency matrix is the
//! node similarity.
//!
//! Clustering uses greedy modularity optimization with aggregation (the
//! Louvain scheme). Each aggregation round yields one level of a
//! [`Hierarchy`].

use crate::error::{Error, Result};
use crate::exact::{full_similarity, Beta, ConvergenceReport, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::graph::{DirectedGraph, Partition};
use crate::lowrank::{lowrank_similarity, LowRankFactor};
use crate::matrix::DenseSymMatrix;
use crate::rng;

pub const DEFAULT_RANK: usize = 10;

/// Nested partitions, finest first. Every level coarsens the one before.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    levels: Vec<Partition>,
}

impl Hierarchy {
    pub fn new(levels: Vec<Partition>) -> Result<Self> {
        let Some(first) = levels.first() else {
            return Err(Error::domain("hierarchy needs at least one level"));
        };
        let n = first.len();
        for pair in levels.windows(2) {
            let (fine, coarse) = (&pair[0], &pair[1]);
            if coarse.len() != n {
                return Err(Error::domain(
                    "hierarchy levels cover different node counts",
                ));
            }
            if !is_coarsening(fine, coarse) {
                return Err(Error::domain(
                    "hierarchy level is not a coarsening of the previous",
                ));
            }
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[Partition] {
        &self.levels
    }

    /// The coarsest level.
    pub fn top(&self) -> &Partition {
        self.levels.last().expect("hierarchy is non-empty")
    }

    pub fn finest(&self) -> &Partition {
        &self.levels[0]
    }
}

/// True when every cluster of `fine` lies inside a single cluster of `coarse`.
pub fn is_coarsening(fine: &Partition, coarse: &Partition) -> bool {
    if fine.len() != coarse.len() {
        return false;
    }
    let mut image = vec![usize::MAX; fine.cluster_count()];
    fine.labels()
        .iter()
        .zip(coarse.labels())
        .all(|(&f, &c)| match image[f] {
            usize::MAX => {
                image[f] = c;
                true
            }
            prev => prev == c,
        })
}

/// Anything that provides pairwise similarities between `dim()` nodes.
pub trait SimilaritySource {
    fn dim(&self) -> usize;
    fn similarity(&self, i: usize, j: usize) -> f64;
}

impl SimilaritySource for DenseSymMatrix {
    fn dim(&self) -> usize {
        DenseSymMatrix::dim(self)
    }

    fn similarity(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.get(i, j) + self.get(j, i))
    }
}

impl SimilaritySource for LowRankFactor {
    fn dim(&self) -> usize {
        LowRankFactor::dim(self)
    }

    fn similarity(&self, i: usize, j: usize) -> f64 {
        self.entry(i, j)
    }
}

/// Symmetric weighted graph with weights `max(S_ij, 0)` for `i != j`.
pub fn similarity_graph<S: SimilaritySource + ?Sized>(s: &S) -> DirectedGraph {
    let n = s.dim();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = s.similarity(i, j);
            if w > 0.0 {
                edges.push((i, j, w));
                edges.push((j, i, w));
            }
        }
    }
    DirectedGraph::new(n, edges).expect("similarity weights are finite and positive")
}

/// Undirected weighted graph in the form the local-move phase needs.
struct Weighted {
    /// Off-diagonal neighbors, sorted by index, weights merged.
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    /// Row sums of the symmetric weight matrix, diagonal included.
    degree: Vec<f64>,
    total: f64,
}

impl Weighted {
    /// `W_ij = (w(i,j) + w(j,i)) / 2`, so any directed input is symmetrized.
    fn from_graph(g: &DirectedGraph) -> Self {
        let n = g.node_count();
        let mut adj = vec![Vec::new(); n];
        let mut self_loop = vec![0.0; n];
        for &(s, d, w) in g.edges() {
            if s == d {
                self_loop[s] += w;
            } else {
                adj[s].push((d, 0.5 * w));
                adj[d].push((s, 0.5 * w));
            }
        }
        Self::finish(adj, self_loop)
    }

    fn finish(mut adj: Vec<Vec<(usize, f64)>>, self_loop: Vec<f64>) -> Self {
        for list in &mut adj {
            list.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(list.len());
            for &(j, w) in list.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += w,
                    _ => merged.push((j, w)),
                }
            }
            *list = merged;
        }
        let degree: Vec<f64> = adj
            .iter()
            .zip(&self_loop)
            .map(|(list, &l)| list.iter().map(|e| e.1).sum::<f64>() + l)
            .collect();
        let total = degree.iter().sum();
        Self {
            adj,
            self_loop,
            degree,
            total,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Collapses each community into a single node.
    fn aggregate(&self, membership: &[usize], k: usize) -> Self {
        let mut adj = vec![Vec::new(); k];
        let mut self_loop = vec![0.0; k];
        for (i, list) in self.adj.iter().enumerate() {
            let ci = membership[i];
            self_loop[ci] += self.self_loop[i];
            for &(j, w) in list {
                let cj = membership[j];
                if ci == cj {
                    self_loop[ci] += w;
                } else {
                    adj[ci].push((cj, w));
                }
            }
        }
        Self::finish(adj, self_loop)
    }
}

/// One round of local moves. Returns the community of every node, numbered
/// by first appearance, or `None` if no node moved.
fn local_moves(g: &Weighted, resolution: f64, seed: u64, level: u64) -> Option<Vec<usize>> {
    let n = g.len();
    let two_m = g.total;
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot = g.degree.clone();
    let mut link = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;
    let eps = 1e-12 * two_m.max(f64::MIN_POSITIVE);

    for pass in 0u64.. {
        let mut moved = false;
        for i in 0..n {
            let ki = g.degree[i];
            let old = comm[i];
            tot[old] -= ki;

            for &c in &touched {
                link[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
            touched.push(old);
            seen[old] = true;
            for &(j, w) in &g.adj[i] {
                let c = comm[j];
                if !seen[c] {
                    seen[c] = true;
                    touched.push(c);
                }
                link[c] += w;
            }

            let gain = |c: usize| link[c] - resolution * tot[c] * ki / two_m;
            let stay = gain(old);
            let mut best = old;
            let mut best_gain = stay;
            let mut best_key = u64::MAX;
            for &c in &touched[1..] {
                let gc = gain(c);
                if gc > best_gain + eps {
                    best = c;
                    best_gain = gc;
                    best_key = rng::hash_words(&[seed, level, pass, i as u64, c as u64]);
                } else if best != old && (gc - best_gain).abs() <= eps {
                    // equal gains: seeded choice
                    let key = rng::hash_words(&[seed, level, pass, i as u64, c as u64]);
                    if key < best_key {
                        best = c;
                        best_key = key;
                    }
                }
            }
            tot[best] += ki;
            if best != old {
                comm[i] = best;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            break;
        }
    }

    if !moved_any {
        return None;
    }
    let mut renumber = vec![usize::MAX; n];
    let mut next = 0;
    Some(
        comm.iter()
            .map(|&c| {
                if renumber[c] == usize::MAX {
                    renumber[c] = next;
                    next += 1;
                }
                renumber[c]
            })
            .collect(),
    )
}

/// Hierarchical greedy modularity clustering of a weighted graph.
///
/// Edge directions are ignored (weights are symmetrized). Nodes without
/// edges stay singletons. The result depends only on the graph, the
/// resolution and the seed.
pub fn cluster(g: &DirectedGraph, resolution: f64, seed: u64) -> Result<Hierarchy> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::domain(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let n = g.node_count();
    let singletons = Partition::new((0..n).collect())?;
    let mut work = Weighted::from_graph(g);
    if work.total <= 0.0 {
        return Hierarchy::new(vec![singletons]);
    }

    // node -> current super-node
    let mut assignment: Vec<usize> = (0..n).collect();
    let mut levels = Vec::new();
    for level in 0u64.. {
        let Some(membership) = local_moves(&work, resolution, seed, level) else {
            break;
        };
        let k = membership.iter().max().map_or(0, |&m| m + 1);
        if k == work.len() {
            break;
        }
        for a in assignment.iter_mut() {
            *a = membership[*a];
        }
        levels.push(Partition::new(assignment.clone())?);
        work = work.aggregate(&membership, k);
        if k == 1 {
            break;
        }
    }
    if levels.is_empty() {
        levels.push(singletons);
    }
    Hierarchy::new(levels)
}

/// Settings for [`extract_roles`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoleOptions {
    /// Rank of the similarity approximation; `None` uses the full-rank matrix.
    pub rank: Option<usize>,
    /// `None` picks `0.9 / ρ(A + A^T)`.
    pub beta: Option<f64>,
    pub resolution: f64,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RoleOptions {
    fn default() -> Self {
        Self {
            rank: Some(DEFAULT_RANK),
            beta: None,
            resolution: 1.0,
            seed: 0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoleExtraction {
    pub hierarchy: Hierarchy,
    pub convergence: ConvergenceReport,
    pub beta: f64,
    /// Rank actually used (the requested rank capped at `n`), `None` for full rank.
    pub rank: Option<usize>,
}

/// Similarity, then similarity graph, then clustering.
pub fn extract_roles(a: &DirectedGraph, opts: &RoleOptions) -> Result<RoleExtraction> {
    let beta = match opts.beta {
        Some(b) => Beta::checked(b, a)?,
        None => Beta::auto(a),
    };
    let n = a.node_count();
    let (graph, convergence, rank) = match opts.rank {
        Some(r) => {
            let r = r.min(n);
            let (x, rep) = lowrank_similarity(a, r, beta, opts.tol, opts.max_iter)?;
            (similarity_graph(&x), rep, Some(r))
        }
        None => {
            let (s, rep) = full_similarity(a, beta, opts.tol, opts.max_iter)?;
            (similarity_graph(&s), rep, None)
        }
    };
    if !convergence.converged {
        log::warn!(
            "similarity iteration stopped after {} steps without converging",
            convergence.iterations
        );
    }
    Ok(RoleExtraction {
        hierarchy: cluster(&graph, opts.resolution, opts.seed)?,
        convergence,
        beta: beta.value(),
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn cliques(sizes: &[usize]) -> DirectedGraph {
        let mut edges = Vec::new();
        let mut start = 0;
        for &s in sizes {
            for i in start..start + s {
                for j in start..start + s {
                    if i != j {
                        edges.push((i, j, 1.0));
                    }
                }
            }
            start += s;
        }
        DirectedGraph::new(start, edges).unwrap()
    }

    #[test]
    fn identity_similarity_has_no_edges() {
        let g = similarity_graph(&DenseSymMatrix::identity(4));
        assert!(g.is_empty());
        assert_eq!(g.node_count(), 4);
    }

    #[test]
    fn negative_entries_are_clamped() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, -0.5, 0.2, -0.5, 1.0, 0.3, 0.2, 0.3, 1.0]);
        let g = similarity_graph(&DenseSymMatrix::new(m).unwrap());
        assert_eq!(g.weight(0, 1), 0.0);
        assert_eq!(g.weight(0, 2), 0.2);
        assert_eq!(g.weight(2, 0), 0.2);
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn block_similarity_gives_cliques() {
        let m = DMatrix::from_fn(4, 4, |i, j| if i / 2 == j / 2 { 1.0 } else { 0.0 });
        let g = similarity_graph(&DenseSymMatrix::new(m).unwrap());
        assert_eq!(g, cliques(&[2, 2]));
    }

    #[test]
    fn disjoint_cliques_split() {
        let h = cluster(&cliques(&[5, 5]), 1.0, 0).unwrap();
        assert_eq!(h.top().labels(), &[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn complete_graph_is_one_cluster() {
        let h = cluster(&cliques(&[8]), 1.0, 3).unwrap();
        assert_eq!(h.top().cluster_count(), 1);
    }

    #[test]
    fn empty_graph_is_singletons() {
        let h = cluster(&DirectedGraph::empty(4).unwrap(), 1.0, 0).unwrap();
        assert_eq!(h.levels().len(), 1);
        assert_eq!(h.top().labels(), &[0, 1, 2, 3]);
    }

    #[test]
    fn isolated_node_stays_alone() {
        let mut edges = cliques(&[4]).edges().to_vec();
        edges.push((4, 4, 1.0));
        let g = DirectedGraph::new(6, edges).unwrap();
        let top = cluster(&g, 1.0, 0).unwrap().top().clone();
        assert_eq!(top.labels()[..4], [0, 0, 0, 0]);
        assert_ne!(top.labels()[4], top.labels()[0]);
        assert_ne!(top.labels()[5], top.labels()[4]);
        assert_ne!(top.labels()[5], top.labels()[0]);
    }

    #[test]
    fn hierarchy_validation() {
        let fine = Partition::new(vec![0, 1, 2, 2]).unwrap();
        let coarse = Partition::new(vec![0, 0, 1, 1]).unwrap();
        assert!(Hierarchy::new(vec![fine.clone(), coarse.clone()]).is_ok());
        assert!(Hierarchy::new(vec![coarse, fine]).is_err());
        assert!(Hierarchy::new(vec![]).is_err());
    }

    #[test]
    fn bad_resolution() {
        assert!(cluster(&cliques(&[3]), 0.0, 0).is_err());
    }
}
