//! Role graphs and block-structured random graphs with planted roles.
//!
//! A [`RoleModel`] pairs a small directed role graph with the number of nodes
//! assigned to each role. [`generate`] then draws, for every ordered pair of
//! distinct nodes `(i, j)`, an edge with probability `p_in` when the role
//! graph links `role(i) -> role(j)` and `p_out` otherwise. Each pair uses its
//! own keyed uniform draw, so an instance depends only on `(model, p_in,
//! p_out, seed)`.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Partition};
use crate::io;
use crate::rng;

/// Built-in role graph shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolePreset {
    /// `k` isolated roles, each with a self-loop.
    Community,
    /// Directed cycle `0 -> 1 -> ... -> k-1 -> 0`.
    Cycle,
}

pub fn preset_role_graph(kind: RolePreset, k: usize) -> Result<DirectedGraph> {
    if k == 0 {
        return Err(Error::domain("role graph needs at least one role"));
    }
    let edges = match kind {
        RolePreset::Community => (0..k).map(|i| (i, i, 1.0)).collect(),
        RolePreset::Cycle => (0..k).map(|i| (i, (i + 1) % k, 1.0)).collect(),
    };
    DirectedGraph::new(k, edges)
}

/// Loads a role graph from an edge-list file; weights must be 0 or 1.
pub fn load_role_graph(path: impl AsRef<Path>) -> Result<DirectedGraph> {
    let g = io::load_edge_list(path)?;
    check_binary(&g)?;
    Ok(g)
}

fn check_binary(g: &DirectedGraph) -> Result<()> {
    match g.edges().iter().find(|e| e.2 != 0.0 && e.2 != 1.0) {
        Some(&(s, d, w)) => Err(Error::domain(format!(
            "role graph edge ({s},{d}) has weight {w}, expected 0 or 1"
        ))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoleModel {
    role_graph: DirectedGraph,
    sizes: Vec<usize>,
}

impl RoleModel {
    pub fn new(role_graph: DirectedGraph, sizes: Vec<usize>) -> Result<Self> {
        check_binary(&role_graph)?;
        if sizes.len() != role_graph.node_count() {
            return Err(Error::domain(format!(
                "{} sizes given for {} roles",
                sizes.len(),
                role_graph.node_count()
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::domain("role sizes must be positive"));
        }
        Ok(Self { role_graph, sizes })
    }

    /// A preset role graph with `k` roles of `size` nodes each.
    pub fn preset(kind: RolePreset, k: usize, size: usize) -> Result<Self> {
        Self::new(preset_role_graph(kind, k)?, vec![size; k])
    }

    pub fn role_graph(&self) -> &DirectedGraph {
        &self.role_graph
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn role_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn node_count(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Role of every node; roles occupy consecutive node ranges.
    pub fn labels(&self) -> Partition {
        let labels = self
            .sizes
            .iter()
            .enumerate()
            .flat_map(|(role, &s)| std::iter::repeat_n(role, s))
            .collect();
        Partition::new(labels).expect("sizes are positive")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub graph: DirectedGraph,
    pub truth: Partition,
    pub params: GenParams,
}

pub fn generate(model: &RoleModel, p_in: f64, p_out: f64, seed: u64) -> Result<GeneratedInstance> {
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("{name} = {p} is not a probability")));
        }
    }
    let truth = model.labels();
    let roles = truth.labels();
    let n = roles.len();
    let rg = model.role_graph();

    let edges: Vec<(usize, usize, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..n).filter_map(move |j| {
                if i == j {
                    return None;
                }
                let p = if rg.weight(roles[i], roles[j]) != 0.0 {
                    p_in
                } else {
                    p_out
                };
                (rng::uniform(&[seed, i as u64, j as u64]) < p).then_some((i, j, 1.0))
            })
        })
        .collect();

    Ok(GeneratedInstance {
        graph: DirectedGraph::new(n, edges)?,
        truth,
        params: GenParams { p_in, p_out, seed },
    })
}

/// The noiseless block cycle: every node links to all nodes of the next role.
pub fn regular_block_cycle(k: usize, m: usize) -> Result<GeneratedInstance> {
    let model = RoleModel::preset(RolePreset::Cycle, k, m)?;
    generate(&model, 1.0, 0.0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let c = preset_role_graph(RolePreset::Community, 3).unwrap();
        assert_eq!(c.edges(), &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]);
        let y = preset_role_graph(RolePreset::Cycle, 3).unwrap();
        assert_eq!(y.edges(), &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]);
        let one = preset_role_graph(RolePreset::Cycle, 1).unwrap();
        assert_eq!(one.edges(), &[(0, 0, 1.0)]);
        assert!(preset_role_graph(RolePreset::Cycle, 0).is_err());
    }

    #[test]
    fn forced_block_cycle() {
        let inst = regular_block_cycle(3, 2).unwrap();
        assert_eq!(inst.graph.edge_count(), 12);
        for &(s, d, _) in inst.graph.edges() {
            assert_eq!((s / 2 + 1) % 3, d / 2);
        }
        assert_eq!(inst.truth.labels(), &[0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn zero_probabilities_give_empty_graph() {
        let model = RoleModel::preset(RolePreset::Community, 3, 4).unwrap();
        assert!(generate(&model, 0.0, 0.0, 9).unwrap().graph.is_empty());
        assert!(generate(&model, 1.2, 0.0, 9).is_err());
    }

    #[test]
    fn no_node_self_loops() {
        let model = RoleModel::preset(RolePreset::Community, 2, 5).unwrap();
        let inst = generate(&model, 1.0, 1.0, 1).unwrap();
        assert_eq!(inst.graph.edge_count(), 10 * 9);
        assert!(inst.graph.edges().iter().all(|e| e.0 != e.1));
    }

    #[test]
    fn model_validation() {
        let rg = preset_role_graph(RolePreset::Cycle, 2).unwrap();
        assert!(RoleModel::new(rg.clone(), vec![3]).is_err());
        assert!(RoleModel::new(rg.clone(), vec![3, 0]).is_err());
        let weighted = DirectedGraph::new(2, vec![(0, 1, 0.5)]).unwrap();
        assert!(RoleModel::new(weighted, vec![1, 1]).is_err());
    }
}
