//! MMS-feasibility graphs, saturating matchings, and maximum Hall-violator
//! extraction.
//!
//! Graphs here never exceed a few dozen vertices, so the matcher is a plain
//! augmenting-path search and the violator search enumerates agent subsets.
//! Both explore candidates in ascending index order, which makes every
//! output reproducible.

use crate::error::{Error, Result};
use crate::instance::{Partition, ReducedInstanceView};
use crate::rational::Rational;
use serde::Serialize;

/// Violator subset search is exhaustive; refuse graphs with more left
/// vertices than this.
pub const VIOLATOR_LEFT_BUDGET: usize = 20;

const MAX_RIGHT: usize = 32;

/// A small bipartite graph with adjacency stored as per-left bitmasks over
/// the right side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    adj: Vec<u32>,
}

impl BipartiteGraph {
    pub fn new(n_left: usize, n_right: usize) -> Self {
        assert!(n_right <= MAX_RIGHT);
        BipartiteGraph {
            n_left,
            n_right,
            adj: vec![0; n_left],
        }
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn add_edge(&mut self, left: usize, right: usize) {
        assert!(left < self.n_left && right < self.n_right);
        self.adj[left] |= 1 << right;
    }

    pub fn has_edge(&self, left: usize, right: usize) -> bool {
        self.adj[left] & (1 << right) != 0
    }

    /// Mask of right vertices adjacent to any left vertex in `left_mask`.
    pub fn neighborhood(&self, left_mask: u32) -> u32 {
        let mut out = 0;
        for l in 0..self.n_left {
            if left_mask & (1 << l) != 0 {
                out |= self.adj[l];
            }
        }
        out
    }

    fn try_augment(&self, left: usize, owner: &mut [Option<usize>], visited: &mut u32) -> bool {
        for r in 0..self.n_right {
            let bit = 1u32 << r;
            if self.adj[left] & bit == 0 || *visited & bit != 0 {
                continue;
            }
            *visited |= bit;
            if owner[r].is_none() || self.try_augment(owner[r].unwrap(), owner, visited) {
                owner[r] = Some(left);
                return true;
            }
        }
        false
    }

    /// Maximum matching; `result[left]` is the matched right vertex.
    pub fn maximum_matching(&self) -> Vec<Option<usize>> {
        let mut owner: Vec<Option<usize>> = vec![None; self.n_right];
        for l in 0..self.n_left {
            let mut visited = 0u32;
            self.try_augment(l, &mut owner, &mut visited);
        }
        let mut mate = vec![None; self.n_left];
        for (r, o) in owner.iter().enumerate() {
            if let Some(l) = *o {
                mate[l] = Some(r);
            }
        }
        mate
    }

    /// A matching covering every left vertex, if one exists.
    pub fn left_saturating_matching(&self) -> Option<Vec<usize>> {
        let mate = self.maximum_matching();
        mate.into_iter().collect()
    }

    /// The maximum-cardinality subset `S` of left vertices with
    /// `|S| > |L(S)|`, with its neighborhood; `None` when a left-saturating
    /// matching exists. Ties in size keep the subset found first in
    /// ascending mask order.
    pub fn max_violator_masks(&self) -> Result<Option<(u32, u32)>> {
        if self.n_left > VIOLATOR_LEFT_BUDGET {
            return Err(Error::EnumerationBudgetExceeded(format!(
                "violator search over {} left vertices (budget {})",
                self.n_left, VIOLATOR_LEFT_BUDGET
            )));
        }
        let mut best: Option<(u32, u32)> = None;
        let mut best_size = 0u32;
        for mask in 1u32..(1u32 << self.n_left) {
            let size = mask.count_ones();
            if size <= best_size {
                continue;
            }
            let nb = self.neighborhood(mask);
            if size > nb.count_ones() {
                best = Some((mask, nb));
                best_size = size;
            }
        }
        Ok(best)
    }
}

/// Bipartite graph between a view's agents and a partition's bundles, with
/// an edge wherever the bundle's normalized cost to the agent is at most 1.
#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityGraph {
    /// Global agent indices on the left.
    pub agents: Vec<usize>,
    /// Bundle indices (into the source partition) on the right.
    pub bundles: Vec<usize>,
    /// Edges as (agent, bundle-index) pairs.
    pub edges: Vec<(usize, usize)>,
    #[serde(skip)]
    graph: BipartiteGraph,
}

impl FeasibilityGraph {
    /// Builds the graph; `excluded_agent` / `excluded_bundle` drop one vertex
    /// from either side together with its incident edges.
    pub fn build(
        view: &ReducedInstanceView<'_>,
        partition: &Partition,
        excluded_agent: Option<usize>,
        excluded_bundle: Option<usize>,
    ) -> Result<Self> {
        if !partition.ground().is_subset_of(view.items()) {
            return Err(Error::InvalidInstance(
                "partition ground is not contained in the view's items".into(),
            ));
        }
        let agents: Vec<usize> = view
            .agents()
            .iter()
            .copied()
            .filter(|&a| Some(a) != excluded_agent)
            .collect();
        let bundles: Vec<usize> = (0..partition.len())
            .filter(|&j| Some(j) != excluded_bundle)
            .collect();
        let one = Rational::one();
        let mut graph = BipartiteGraph::new(agents.len(), bundles.len());
        let mut edges = Vec::new();
        for (li, &a) in agents.iter().enumerate() {
            for (ri, &j) in bundles.iter().enumerate() {
                if view.bundle_cost(a, partition.bundle(j)) <= one {
                    graph.add_edge(li, ri);
                    edges.push((a, j));
                }
            }
        }
        Ok(FeasibilityGraph {
            agents,
            bundles,
            edges,
            graph,
        })
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn has_edge(&self, agent: usize, bundle: usize) -> bool {
        self.edges.contains(&(agent, bundle))
    }

    /// Bundle indices liked by the agent.
    pub fn liked_bundles(&self, agent: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|(a, _)| *a == agent)
            .map(|&(_, j)| j)
            .collect()
    }

    /// Union of liked bundles over a set of agents, ascending.
    pub fn neighborhood_of(&self, agents: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter(|(a, _)| agents.contains(a))
            .map(|&(_, j)| j)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A Hall violator: agents `S` with `|S| > |L(S)|`, maximum in cardinality.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Violator {
    pub agents: Vec<usize>,
    pub bundles: Vec<usize>,
}

/// A matching saturating every agent of the graph, or `None`. Pairs are
/// (agent, bundle-index).
pub fn perfect_matching(g: &FeasibilityGraph) -> Option<Vec<(usize, usize)>> {
    let mate = g.graph.left_saturating_matching()?;
    Some(
        mate.into_iter()
            .enumerate()
            .map(|(li, ri)| (g.agents[li], g.bundles[ri]))
            .collect(),
    )
}

/// The maximum-cardinality violator; `None` exactly when a perfect matching
/// exists.
pub fn max_violator(g: &FeasibilityGraph) -> Result<Option<Violator>> {
    Ok(g.graph.max_violator_masks()?.map(|(s_mask, l_mask)| {
        let agents = (0..g.agents.len())
            .filter(|&li| s_mask & (1 << li) != 0)
            .map(|li| g.agents[li])
            .collect();
        let bundles = (0..g.bundles.len())
            .filter(|&ri| l_mask & (1 << ri) != 0)
            .map(|ri| g.bundles[ri])
            .collect();
        Violator { agents, bundles }
    }))
}

/// A matching of the agents outside the violator into the bundles outside
/// its neighborhood. Guaranteed to exist when the violator is maximum;
/// anything else is a bug, reported as an internal-invariant error.
pub fn complement_matching(
    g: &FeasibilityGraph,
    violator: &Violator,
) -> Result<Vec<(usize, usize)>> {
    let lefts: Vec<usize> = g
        .agents
        .iter()
        .copied()
        .filter(|a| !violator.agents.contains(a))
        .collect();
    let rights: Vec<usize> = g
        .bundles
        .iter()
        .copied()
        .filter(|j| !violator.bundles.contains(j))
        .collect();
    let mut sub = BipartiteGraph::new(lefts.len(), rights.len());
    for (li, &a) in lefts.iter().enumerate() {
        for (ri, &j) in rights.iter().enumerate() {
            if g.has_edge(a, j) {
                sub.add_edge(li, ri);
            }
        }
    }
    let mate = sub.left_saturating_matching().ok_or_else(|| {
        Error::InternalInvariant(
            "no matching saturating the violator's complement; violator was not maximum".into(),
        )
    })?;
    Ok(mate
        .into_iter()
        .enumerate()
        .map(|(li, ri)| (lefts[li], rights[ri]))
        .collect())
}
