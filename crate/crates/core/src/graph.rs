//! Weighted directed graphs and node partitions.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A weighted directed graph on nodes `0..n`.
///
/// Edges are kept sorted by `(src, dst)`, so two graphs with the same edge set
/// compare equal regardless of insertion order. The sorted edge list doubles
/// as a CSR layout: `offsets[i]..offsets[i + 1]` indexes the out-edges of `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    offsets: Vec<usize>,
}

impl DirectedGraph {
    pub fn new(n: usize, mut edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("graph must have at least one node"));
        }
        for &(s, d, w) in &edges {
            if s >= n || d >= n {
                return Err(Error::domain(format!(
                    "edge ({s},{d}) out of range for {n} nodes"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::domain(format!(
                    "edge ({s},{d}) has invalid weight {w}"
                )));
            }
        }
        edges.sort_by_key(|&(s, d, _)| (s, d));
        if let Some(w) = edges
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::domain(format!(
                "duplicate edge ({},{})",
                w[0].0, w[0].1
            )));
        }
        let mut offsets = vec![0; n + 1];
        for &(s, _, _) in &edges {
            offsets[s + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Ok(Self { n, edges, offsets })
    }

    /// A graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    /// Builds a graph from the nonzero entries of a dense matrix.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::domain("adjacency matrix must be square"));
        }
        let mut edges = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let w = m[(i, j)];
                if w != 0.0 {
                    edges.push((i, j, w));
                }
            }
        }
        Self::new(m.nrows(), edges)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Out-edges of `node` as `(dst, weight)` pairs.
    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.edges[self.offsets[node]..self.offsets[node + 1]]
            .iter()
            .map(|&(_, d, w)| (d, w))
    }

    pub fn weight(&self, src: usize, dst: usize) -> f64 {
        let row = &self.edges[self.offsets[src]..self.offsets[src + 1]];
        row.binary_search_by_key(&dst, |&(_, d, _)| d)
            .map(|k| row[k].2)
            .unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn transpose(&self) -> Self {
        let edges = self.edges.iter().map(|&(s, d, w)| (d, s, w)).collect();
        Self::new(self.n, edges).expect("transpose of a valid graph is valid")
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(s, d, w) in &self.edges {
            m[(s, d)] = w;
        }
        m
    }

    /// Returns `A * m` where `A` is this graph's adjacency matrix.
    pub fn mul_dense(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(m.nrows(), self.n, "dimension mismatch in sparse product");
        let mut out = DMatrix::zeros(self.n, m.ncols());
        for c in 0..m.ncols() {
            let src = m.column(c);
            let mut dst = out.column_mut(c);
            for &(s, d, w) in &self.edges {
                dst[s] += w * src[d];
            }
        }
        out
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n)?;
        let edges = self
            .edges
            .iter()
            .map(|&(s, d, w)| (perm[s], perm[d], w))
            .collect();
        Self::new(self.n, edges)
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::domain(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::domain("permutation is not a bijection"));
        }
    }
    Ok(())
}

/// Inverse of a permutation given as `perm[i] = image of i`.
pub fn invert_permutation(perm: &[usize]) -> Result<Vec<usize>> {
    check_permutation(perm, perm.len())?;
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    Ok(inv)
}

/// An assignment of every node to a cluster in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Validates that `labels` use the contiguous range `0..k`.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::domain("partition must cover at least one node"));
        }
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        let mut used = vec![false; k];
        for &l in &labels {
            used[l] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(Error::domain("cluster ids are not contiguous"));
        }
        Ok(Self { labels, k })
    }

    /// Maps arbitrary ids onto `0..k`, preserving their numeric order.
    pub fn from_raw(labels: &[usize]) -> Result<Self> {
        let map: BTreeMap<usize, usize> = labels
            .iter()
            .copied()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(new, old)| (old, new))
            .collect();
        Self::new(labels.iter().map(|l| map[l]).collect())
    }

    /// Relabels clusters in order of first appearance. Two partitions describe
    /// the same clustering iff their canonical forms are equal.
    pub fn canonical(&self) -> Self {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        Self { labels, k: self.k }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.k
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Moves the label of node `i` to node `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.labels.len())?;
        let mut labels = vec![0; self.labels.len()];
        for (i, &p) in perm.iter().enumerate() {
            labels[p] = self.labels[i];
        }
        Self::new(labels)
    }
}
