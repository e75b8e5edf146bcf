//! Pivot-partitioned index tree with per-node bound aggregates.

mod partition;
mod prune;
mod scores;
mod tree;

use serde::{Deserialize, Serialize};

pub use partition::{
    partition_social_network, pivot_index_refinement, CostEstimator, PivotData, Refinement,
};
pub use prune::{node_check, prune_node, NodePruneContext, NODE_ORDER};
pub use scores::{bs_keywords, raw_rs, Norms, Scorer, Weights, EXACT_NORM_LIMIT};

use crate::graph::UserId;
use crate::metrics::{Networks, UNREACHABLE};
use crate::precompute::{KeywordMap, OfflineBounds};

pub type NodeId = u32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Leaf(Vec<UserId>),
    Internal(Vec<NodeId>),
}

/// Bounds that hold for every user below a node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeAgg {
    pub keywords: KeywordMap,
    pub ub_sup: u32,
    pub ub_w_in: f64,
    /// `(mindist_s, maxdist_s)` per social pivot.
    pub env: Vec<(u32, u32)>,
}

impl NodeAgg {
    /// Aggregate of nothing; merging into it is the identity.
    pub fn empty(pivots: usize) -> Self {
        NodeAgg {
            keywords: KeywordMap::default(),
            ub_sup: 0,
            ub_w_in: 0.0,
            env: vec![(UNREACHABLE, 0); pivots],
        }
    }

    pub fn add_user(&mut self, bounds: &OfflineBounds, u: UserId) {
        let b = bounds.user(u);
        self.keywords.merge_max(&b.keywords);
        self.ub_sup = self.ub_sup.max(b.ub_sup);
        self.ub_w_in = self.ub_w_in.max(b.ub_w_in);
        for (e, &d) in self.env.iter_mut().zip(bounds.social_row(u)) {
            e.0 = e.0.min(d);
            e.1 = e.1.max(d);
        }
    }

    pub fn merge(&mut self, o: &NodeAgg) {
        self.keywords.merge_max(&o.keywords);
        self.ub_sup = self.ub_sup.max(o.ub_sup);
        self.ub_w_in = self.ub_w_in.max(o.ub_w_in);
        for (e, &(lo, hi)) in self.env.iter_mut().zip(&o.env) {
            e.0 = e.0.min(lo);
            e.1 = e.1.max(hi);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexNode {
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    /// The pivot user this node was grouped around.
    pub pivot: UserId,
    pub agg: NodeAgg,
}

impl IndexNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexConfig {
    pub fanout: usize,
    pub leaf_capacity: usize,
    /// Swap trials for leaf pivots and for each upper level.
    pub iters: usize,
    /// Users whose intra-group pairs feed the partition cost estimate.
    pub anchors: usize,
    pub seed: u64,
    pub weights: Weights,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            fanout: 8,
            leaf_capacity: 64,
            iters: 50,
            anchors: 64,
            seed: 7,
            weights: Weights::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexTree {
    pub config: IndexConfig,
    pub norms: Norms,
    pub nodes: Vec<IndexNode>,
    pub root: NodeId,
    pub leaf_of: Vec<NodeId>,
    /// Leaf-level pivots, one per leaf.
    pub pivots: Vec<UserId>,
    pub epoch: String,
}

impl IndexTree {
    pub fn build(net: &Networks, bounds: &OfflineBounds, cfg: &IndexConfig) -> IndexTree {
        tree::build(net, bounds, cfg)
    }

    pub fn scorer<'a>(&'a self, net: &'a Networks, bounds: &'a OfflineBounds) -> Scorer<'a> {
        Scorer {
            net,
            bounds,
            norms: &self.norms,
            w: self.config.weights,
        }
    }

    pub fn node(&self, id: NodeId) -> &IndexNode {
        &self.nodes[id as usize]
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as NodeId).filter(|&i| self.node(i).is_leaf())
    }

    /// `id` and every node above it.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(Some(id), |&i| self.node(i).parent)
    }

    pub fn contains(&self, id: NodeId, u: UserId) -> bool {
        self.ancestors(self.leaf_of[u.index()]).any(|a| a == id)
    }

    pub fn users_under(&self, id: NodeId) -> Vec<UserId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(i) = stack.pop() {
            match &self.node(i).kind {
                NodeKind::Leaf(us) => out.extend_from_slice(us),
                NodeKind::Internal(cs) => stack.extend_from_slice(cs),
            }
        }
        out
    }

    /// Edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.leaves().map(|l| self.ancestors(l).count() - 1).max().unwrap_or(0)
    }

    /// Recomputes every aggregate bottom-up. Children always have smaller ids than parents.
    pub fn refresh_aggregates(&mut self, bounds: &OfflineBounds) {
        let a = bounds.pivots.social.len();
        for i in 0..self.nodes.len() {
            let mut agg = NodeAgg::empty(a);
            match &self.nodes[i].kind {
                NodeKind::Leaf(us) => us.iter().for_each(|&u| agg.add_user(bounds, u)),
                NodeKind::Internal(cs) => cs.iter().for_each(|&c| agg.merge(&self.nodes[c as usize].agg)),
            }
            self.nodes[i].agg = agg;
        }
    }

    /// Moves `u` into another leaf. Aggregates are left for [`Self::refresh_aggregates`].
    pub fn migrate(&mut self, u: UserId, to: NodeId) {
        let from = self.leaf_of[u.index()];
        if from == to {
            return;
        }
        if let NodeKind::Leaf(us) = &mut self.nodes[from as usize].kind {
            us.retain(|&x| x != u);
        }
        if let NodeKind::Leaf(us) = &mut self.nodes[to as usize].kind {
            let at = us.binary_search(&u).unwrap_or_else(|e| e);
            us.insert(at, u);
        }
        self.leaf_of[u.index()] = to;
    }

    /// Re-parents a non-root node under another node of the same level.
    pub fn remap(&mut self, id: NodeId, to: NodeId) {
        let Some(from) = self.node(id).parent else {
            return;
        };
        if from == to {
            return;
        }
        if let NodeKind::Internal(cs) = &mut self.nodes[from as usize].kind {
            cs.retain(|&c| c != id);
        }
        if let NodeKind::Internal(cs) = &mut self.nodes[to as usize].kind {
            let at = cs.binary_search(&id).unwrap_or_else(|e| e);
            cs.insert(at, id);
        }
        self.nodes[id as usize].parent = Some(to);
    }

    /// Distance of each node from the root.
    pub fn depths(&self) -> Vec<usize> {
        (0..self.nodes.len() as NodeId).map(|i| self.ancestors(i).count() - 1).collect()
    }

    /// Every way a node fails to bound a user below it.
    pub fn dominance_violations(&self, bounds: &OfflineBounds) -> Vec<String> {
        let mut out = Vec::new();
        for id in 0..self.nodes.len() as NodeId {
            let agg = &self.node(id).agg;
            for u in self.users_under(id) {
                let b = bounds.user(u);
                for (k, a) in b.keywords.iter() {
                    match agg.keywords.get(k) {
                        Some(n) if n.f_sum >= a.f_sum && n.f_max >= a.f_max => {}
                        _ => out.push(format!("node {id} keyword {k} below user {u}")),
                    }
                }
                if agg.ub_sup < b.ub_sup {
                    out.push(format!("node {id} ub_sup below user {u}"));
                }
                if agg.ub_w_in < b.ub_w_in {
                    out.push(format!("node {id} ub_w_in below user {u}"));
                }
                for (i, (&d, &(lo, hi))) in bounds.social_row(u).iter().zip(&agg.env).enumerate() {
                    if d < lo || d > hi {
                        out.push(format!("node {id} envelope {i} misses user {u}"));
                    }
                }
            }
        }
        out
    }

    /// Structural problems: users in no leaf or several, broken parent links, excess height.
    pub fn structure_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = vec![0u32; self.leaf_of.len()];
        for l in self.leaves() {
            if let NodeKind::Leaf(us) = &self.node(l).kind {
                for &u in us {
                    seen[u.index()] += 1;
                    if self.leaf_of[u.index()] != l {
                        out.push(format!("user {u} leaf link"));
                    }
                }
            }
        }
        for (u, &c) in seen.iter().enumerate() {
            if c != 1 {
                out.push(format!("user {u} in {c} leaves"));
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if let NodeKind::Internal(cs) = &n.kind {
                for &c in cs {
                    if self.node(c).parent != Some(i as NodeId) || c as usize >= i {
                        out.push(format!("node {c} parent link"));
                    }
                }
            }
            if n.parent.is_none() && i as NodeId != self.root {
                out.push(format!("node {i} detached"));
            }
        }
        let leaves = self.leaves().count().max(1) as f64;
        let bound = (leaves.ln() / (self.config.fanout.max(2) as f64).ln() - 1e-9).ceil().max(0.0) as usize + 1;
        if self.height() > bound {
            out.push(format!("height {} exceeds {bound}", self.height()));
        }
        out
    }
}
