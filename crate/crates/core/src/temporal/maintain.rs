use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::UserId;
use crate::index::{IndexTree, NodeAgg, NodeId, NodeKind, Scorer};
use crate::metrics::{bfs_hops, Networks};
use crate::precompute::OfflineBounds;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMaintenance {
    pub migrated_users: usize,
    pub remapped_nodes: usize,
    pub refreshed_nodes: usize,
}

/// First index of the largest value.
fn argmax(xs: impl IntoIterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, x) in xs.into_iter().enumerate() {
        if x > best.1 {
            best = (i, x);
        }
    }
    best
}

fn refresh(tree: &mut IndexTree, bounds: &OfflineBounds, id: NodeId) {
    let mut agg = NodeAgg::empty(bounds.pivots.social.len());
    match &tree.nodes[id as usize].kind {
        NodeKind::Leaf(us) => us.iter().for_each(|&u| agg.add_user(bounds, u)),
        NodeKind::Internal(cs) => cs.iter().for_each(|&c| agg.merge(&tree.nodes[c as usize].agg)),
    }
    tree.nodes[id as usize].agg = agg;
}

fn child_count(tree: &IndexTree, id: NodeId) -> usize {
    match &tree.node(id).kind {
        NodeKind::Leaf(us) => us.len(),
        NodeKind::Internal(cs) => cs.len(),
    }
}

/// Moves affected users and the nodes above them when another pivot is better by more
/// than `delta`, then refreshes every aggregate that can have changed. Nothing is moved
/// out of a node it is the last member of.
pub fn maintain_index(
    tree: &mut IndexTree,
    net: &Networks,
    bounds: &OfflineBounds,
    affected: &[UserId],
    delta: f64,
) -> IndexMaintenance {
    let mut stats = IndexMaintenance::default();
    if affected.is_empty() {
        return stats;
    }
    let norms = tree.norms.clone();
    let sc = Scorer {
        net,
        bounds,
        norms: &norms,
        w: tree.config.weights,
    };
    let depths = tree.depths();
    let height = depths.iter().copied().max().unwrap_or(0);
    let mut levels: Vec<Vec<NodeId>> = vec![Vec::new(); height + 1];
    for (i, &d) in depths.iter().enumerate() {
        levels[d].push(i as NodeId);
    }
    let mut dirty: BTreeSet<NodeId> = BTreeSet::new();

    // leaf pass
    let leaves: Vec<NodeId> = tree.leaves().collect();
    for &u in affected {
        let from = tree.leaf_of[u.index()];
        dirty.insert(from);
        if leaves.len() < 2 {
            continue;
        }
        let hops = bfs_hops(&net.skeleton, u);
        let qual = |l: NodeId| {
            let piv = tree.node(l).pivot;
            sc.quality(u, piv, hops[piv.index()])
        };
        let (i, best) = argmax(leaves.iter().map(|&l| qual(l)));
        let to = leaves[i];
        if to != from && best - qual(from) > delta && child_count(tree, from) > 1 {
            tree.migrate(u, to);
            dirty.insert(to);
            stats.migrated_users += 1;
        }
    }

    // bottom-up pass
    for depth in (1..=height).rev() {
        let here: Vec<NodeId> = dirty.iter().copied().filter(|&n| depths[n as usize] == depth).collect();
        for &n in &here {
            refresh(tree, bounds, n);
            stats.refreshed_nodes += 1;
        }
        let parents = &levels[depth - 1];
        for &n in &here {
            let from = tree.node(n).parent.expect("only the root lacks a parent");
            if parents.len() > 1 {
                let qual = |p: NodeId| {
                    let piv = tree.node(p).pivot;
                    sc.quality_node(tree.node(n), piv, tree.contains(n, piv))
                };
                let (i, best) = argmax(parents.iter().map(|&p| qual(p)));
                let to = parents[i];
                if to != from && best - qual(from) > delta && child_count(tree, from) > 1 {
                    tree.remap(n, to);
                    dirty.insert(to);
                    stats.remapped_nodes += 1;
                }
            }
            dirty.insert(from);
        }
    }
    if dirty.contains(&tree.root) {
        refresh(tree, bounds, tree.root);
        stats.refreshed_nodes += 1;
    }
    stats
}
