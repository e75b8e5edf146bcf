use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::partition::pivot_index_refinement;
use super::{IndexConfig, IndexNode, IndexTree, NodeAgg, NodeId, NodeKind, Norms, Scorer};
use crate::graph::UserId;
use crate::metrics::Networks;
use crate::precompute::OfflineBounds;

/// Node-to-pivot assignment over a precomputed score table, first maximum wins.
fn assign_nodes(quality: &[Vec<f64>], chosen: &[usize]) -> Vec<usize> {
    quality
        .iter()
        .map(|row| {
            let mut best = (0, f64::NEG_INFINITY);
            for (j, &c) in chosen.iter().enumerate() {
                if row[c] > best.1 {
                    best = (j, row[c]);
                }
            }
            best.0
        })
        .collect()
}

fn tree_cost(sc: &Scorer, bs: &[Vec<f64>], ss: &[Vec<f64>], chosen: &[usize], assign: &[usize]) -> f64 {
    let (mut b, mut s) = (0.0, 0.0);
    for (n, &j) in assign.iter().enumerate() {
        b += bs[n][chosen[j]];
        s += ss[n][chosen[j]];
    }
    sc.w.bs * (1.0 - b) + sc.w.ss * (1.0 - s)
}

/// Picks `target` parent pivots among `cands` and assigns each level node to one.
fn select_parents(
    sc: &Scorer,
    nodes: &[IndexNode],
    level: &[NodeId],
    top_of: &[usize],
    cands: &[UserId],
    target: usize,
    iters: usize,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut bs = vec![vec![0.0; cands.len()]; level.len()];
    let mut ss = vec![vec![0.0; cands.len()]; level.len()];
    let mut qual = vec![vec![0.0; cands.len()]; level.len()];
    for (n, &id) in level.iter().enumerate() {
        let node = &nodes[id as usize];
        for (c, &p) in cands.iter().enumerate() {
            bs[n][c] = sc.bs_node(node, p);
            ss[n][c] = sc.ss_node(node, p, top_of[p.index()] == n);
            qual[n][c] = sc.w.bs * bs[n][c] + sc.w.ss * ss[n][c];
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = target.clamp(1, cands.len());
    let mut chosen = sample(&mut rng, cands.len(), target).into_vec();
    let mut assign = assign_nodes(&qual, &chosen);
    let mut cost = tree_cost(sc, &bs, &ss, &chosen, &assign);
    if target < cands.len() {
        for _ in 0..iters {
            let i = rng.random_range(0..chosen.len());
            let c = loop {
                let c = rng.random_range(0..cands.len());
                if !chosen.contains(&c) {
                    break c;
                }
            };
            let old = std::mem::replace(&mut chosen[i], c);
            let a = assign_nodes(&qual, &chosen);
            let k = tree_cost(sc, &bs, &ss, &chosen, &a);
            if k < cost {
                cost = k;
                assign = a;
            } else {
                chosen[i] = old;
            }
        }
    }
    (chosen, assign)
}

pub(super) fn build(net: &Networks, bounds: &OfflineBounds, cfg: &IndexConfig) -> IndexTree {
    let norms = Norms::compute(net, bounds, cfg.seed);
    let sc = Scorer {
        net,
        bounds,
        norms: &norms,
        w: cfg.weights,
    };
    let n = net.user_count();
    let groups = n.div_ceil(cfg.leaf_capacity.max(1)).max(1);
    let refined = pivot_index_refinement(&sc, groups, cfg.iters, cfg.seed, cfg.anchors);
    let a = bounds.pivots.social.len();

    let mut members: Vec<Vec<UserId>> = vec![Vec::new(); refined.pivots.len()];
    for (u, &g) in refined.assign.iter().enumerate() {
        members[g as usize].push(UserId::from(u));
    }
    let mut nodes = Vec::new();
    let mut leaf_of = vec![0; n];
    let mut pivots = Vec::new();
    for (g, us) in members.into_iter().enumerate() {
        if us.is_empty() {
            continue;
        }
        let id = nodes.len() as NodeId;
        let mut agg = NodeAgg::empty(a);
        for &u in &us {
            agg.add_user(bounds, u);
            leaf_of[u.index()] = id;
        }
        pivots.push(refined.pivots[g]);
        nodes.push(IndexNode {
            kind: NodeKind::Leaf(us),
            parent: None,
            pivot: refined.pivots[g],
            agg,
        });
    }

    let mut level: Vec<NodeId> = (0..nodes.len() as NodeId).collect();
    let mut top_of: Vec<usize> = leaf_of.iter().map(|&l| l as usize).collect();
    let mut round = 0u64;
    let root = loop {
        round += 1;
        let target = level.len().div_ceil(cfg.fanout.max(2));
        let mut cands: Vec<UserId> = Vec::new();
        for &id in &level {
            let p = nodes[id as usize].pivot;
            if !cands.contains(&p) {
                cands.push(p);
            }
        }
        let (chosen, assign) =
            select_parents(&sc, &nodes, &level, &top_of, &cands, target, cfg.iters, cfg.seed.wrapping_add(round));
        let mut parent_pos: Vec<Option<usize>> = vec![None; chosen.len()];
        let mut parents: Vec<NodeId> = Vec::new();
        for (j, &c) in chosen.iter().enumerate() {
            let kids: Vec<NodeId> = level
                .iter()
                .zip(&assign)
                .filter(|&(_, &x)| x == j)
                .map(|(&id, _)| id)
                .collect();
            if kids.is_empty() {
                continue;
            }
            let id = nodes.len() as NodeId;
            let mut agg = NodeAgg::empty(a);
            for &k in &kids {
                agg.merge(&nodes[k as usize].agg);
                nodes[k as usize].parent = Some(id);
            }
            parent_pos[j] = Some(parents.len());
            parents.push(id);
            nodes.push(IndexNode {
                kind: NodeKind::Internal(kids),
                parent: None,
                pivot: cands[c],
                agg,
            });
        }
        if parents.len() == 1 {
            break parents[0];
        }
        for t in top_of.iter_mut() {
            *t = parent_pos[assign[*t]].expect("assigned parent exists");
        }
        level = parents;
    };

    IndexTree {
        config: cfg.clone(),
        norms,
        nodes,
        root,
        leaf_of,
        pivots,
        epoch: bounds.epoch.clone(),
    }
}
