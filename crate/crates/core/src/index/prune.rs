use std::collections::HashSet;

use super::{IndexTree, NodeId};
use crate::metrics::Thresholds;
use crate::precompute::{pivot_gap_env, LemmaSet, OfflineBounds, PruneReason};

/// Node-level checks in the order they are applied.
pub const NODE_ORDER: [PruneReason; 6] = [
    PruneReason::Keyword,
    PruneReason::Omega,
    PruneReason::Pi,
    PruneReason::Influence,
    PruneReason::Support,
    PruneReason::SocialDist,
];

pub struct NodePruneContext<'a> {
    pub tree: &'a IndexTree,
    pub bounds: &'a OfflineBounds,
    pub th: &'a Thresholds,
    pub lemmas: LemmaSet,
    /// Nodes whose subtree holds q.
    q_nodes: HashSet<NodeId>,
    /// Nodes whose subtree holds a user q points to.
    out_nodes: HashSet<NodeId>,
}

impl<'a> NodePruneContext<'a> {
    pub fn new(
        tree: &'a IndexTree,
        bounds: &'a OfflineBounds,
        g: &crate::graph::SocialNetwork,
        th: &'a Thresholds,
        lemmas: LemmaSet,
    ) -> Self {
        let q = th.q();
        let q_nodes = tree.ancestors(tree.leaf_of[q.index()]).collect();
        let out_nodes = g
            .out_edges(q)
            .iter()
            .flat_map(|&(v, _)| tree.ancestors(tree.leaf_of[v.index()]))
            .collect();
        NodePruneContext {
            tree,
            bounds,
            th,
            lemmas,
            q_nodes,
            out_nodes,
        }
    }

    pub fn holds_q(&self, id: NodeId) -> bool {
        self.q_nodes.contains(&id)
    }

    /// Lower bound on the hop distance from q to any user below `id`.
    pub fn lb_dist(&self, id: NodeId) -> u32 {
        if self.holds_q(id) {
            0
        } else {
            pivot_gap_env(self.bounds.social_row(self.th.q()), &self.tree.node(id).agg.env)
        }
    }

    /// Upper bound on the influence of q on any user below `id`.
    pub fn ub_isf(&self, id: NodeId) -> f64 {
        let out_q = self.bounds.user(self.th.q()).ub_w_out;
        let w_in = self.tree.node(id).agg.ub_w_in;
        if self.out_nodes.contains(&id) {
            out_q.max(w_in)
        } else {
            out_q * w_in
        }
    }
}

/// Whether the node counterpart of `reason` discards `id`, regardless of the switches.
pub fn node_check(reason: PruneReason, id: NodeId, ctx: &NodePruneContext) -> bool {
    let agg = &ctx.tree.node(id).agg;
    let pr = &ctx.th.params;
    let shared = || pr.keywords.iter().filter_map(|&k| agg.keywords.get(k));
    match reason {
        PruneReason::Keyword => shared().next().is_none(),
        PruneReason::Omega => shared().map(|a| a.f_sum).sum::<f64>() < ctx.th.omega_abs,
        PruneReason::Pi => shared().fold(0.0f64, |m, a| m.max(a.f_max)) < ctx.th.pi_abs,
        PruneReason::Influence => !ctx.holds_q(id) && ctx.ub_isf(id) < pr.theta,
        PruneReason::Support => agg.ub_sup < pr.k - 2,
        PruneReason::SocialDist => ctx.lb_dist(id) > pr.d,
        PruneReason::SpatialDist => false,
    }
}

pub fn prune_node(id: NodeId, ctx: &NodePruneContext) -> Option<PruneReason> {
    NODE_ORDER
        .into_iter()
        .find(|&r| ctx.lemmas.enabled(r) && node_check(r, id, ctx))
}
