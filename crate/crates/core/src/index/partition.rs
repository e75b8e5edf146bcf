use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::scores::{pivot_poi_profile, rs_from_profile, Scorer};
use crate::graph::UserId;
use crate::metrics::bfs_hops;

/// Hop row and road profile of one pivot user.
pub struct PivotData {
    pub hops: Vec<u32>,
    pub profile: Option<Vec<f64>>,
}

impl PivotData {
    pub fn new(sc: &Scorer, piv: UserId) -> Self {
        PivotData {
            hops: bfs_hops(&sc.net.skeleton, piv),
            profile: pivot_poi_profile(sc.net, piv),
        }
    }

    pub fn quality(&self, sc: &Scorer, u: UserId, piv: UserId) -> f64 {
        let rs = rs_from_profile(sc.net, sc.norms, u, self.profile.as_deref());
        sc.combine(sc.bs(u, piv), sc.ss(u, piv, self.hops[u.index()]), rs)
    }
}

/// Best pivot position for `u`; the first maximum wins.
fn best_of(sc: &Scorer, u: UserId, pivots: &[UserId], data: &[PivotData]) -> (u32, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, (&p, d)) in pivots.iter().zip(data).enumerate() {
        let q = d.quality(sc, u, p);
        if q > best.1 {
            best = (i as u32, q);
        }
    }
    best
}

fn assign_all(sc: &Scorer, pivots: &[UserId], data: &[PivotData]) -> (Vec<u32>, Vec<f64>) {
    (0..sc.net.user_count())
        .into_par_iter()
        .map(|u| best_of(sc, UserId::from(u), pivots, data))
        .unzip()
}

/// Pivot position of every user.
pub fn partition_social_network(sc: &Scorer, pivots: &[UserId]) -> Vec<u32> {
    let data: Vec<PivotData> = pivots.par_iter().map(|&p| PivotData::new(sc, p)).collect();
    assign_all(sc, pivots, &data).0
}

/// Partition cost summed over intra-group pairs whose second member is an anchor,
/// scaled up to all users. Exact when every user is an anchor.
pub struct CostEstimator {
    anchors: Vec<UserId>,
    data: Vec<PivotData>,
    scale: f64,
}

impl CostEstimator {
    pub fn new(sc: &Scorer, count: usize, seed: u64) -> Self {
        let n = sc.net.user_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut anchors: Vec<UserId> = if count >= n {
            (0..n).map(UserId::from).collect()
        } else {
            sample(&mut rng, n, count).into_iter().map(UserId::from).collect()
        };
        anchors.sort();
        let data = anchors.par_iter().map(|&a| PivotData::new(sc, a)).collect();
        let scale = if anchors.is_empty() { 0.0 } else { n as f64 / anchors.len() as f64 };
        CostEstimator { anchors, data, scale }
    }

    pub fn cost(&self, sc: &Scorer, assign: &[u32]) -> f64 {
        let groups = assign.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut members: Vec<Vec<UserId>> = vec![Vec::new(); groups];
        for (u, &g) in assign.iter().enumerate() {
            members[g as usize].push(UserId::from(u));
        }
        let (mut bs, mut rs, mut ss) = (0.0, 0.0, 0.0);
        for (&a, d) in self.anchors.iter().zip(&self.data) {
            for &u in &members[assign[a.index()] as usize] {
                if u == a {
                    continue;
                }
                bs += sc.bs(u, a);
                rs += rs_from_profile(sc.net, sc.norms, u, d.profile.as_deref()).unwrap_or(1.0);
                ss += sc.ss(u, a, d.hops[u.index()]);
            }
        }
        sc.cost_from_sums(bs * self.scale, rs * self.scale, ss * self.scale)
    }
}

#[derive(Clone, Debug)]
pub struct Refinement {
    pub pivots: Vec<UserId>,
    pub assign: Vec<u32>,
    pub cost: f64,
    pub initial_cost: f64,
}

/// Seeded random pivots improved by single swaps that lower the partition cost.
pub fn pivot_index_refinement(sc: &Scorer, count: usize, iters: usize, seed: u64, anchors: usize) -> Refinement {
    let n = sc.net.user_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let est = CostEstimator::new(sc, anchors, seed);
    let mut pivots: Vec<UserId> = sample(&mut rng, n, count.clamp(1, n.max(1)).min(n))
        .into_iter()
        .map(UserId::from)
        .collect();
    let mut data: Vec<PivotData> = pivots.par_iter().map(|&p| PivotData::new(sc, p)).collect();
    let (mut assign, mut best) = assign_all(sc, &pivots, &data);
    let mut cost = est.cost(sc, &assign);
    let initial_cost = cost;
    if pivots.len() < n {
        for _ in 0..iters {
            let i = rng.random_range(0..pivots.len());
            let c = loop {
                let c = UserId::from(rng.random_range(0..n));
                if !pivots.contains(&c) {
                    break c;
                }
            };
            let old_piv = std::mem::replace(&mut pivots[i], c);
            let old_data = std::mem::replace(&mut data[i], PivotData::new(sc, c));
            let (pv, dt) = (&pivots, &data);
            let (new_assign, new_best): (Vec<u32>, Vec<f64>) = (0..n)
                .into_par_iter()
                .map(|u| {
                    let uid = UserId::from(u);
                    if assign[u] == i as u32 {
                        return best_of(sc, uid, pv, dt);
                    }
                    let q = dt[i].quality(sc, uid, c);
                    if q > best[u] || (q == best[u] && (i as u32) < assign[u]) {
                        (i as u32, q)
                    } else {
                        (assign[u], best[u])
                    }
                })
                .unzip();
            let new_cost = est.cost(sc, &new_assign);
            if new_cost < cost {
                cost = new_cost;
                assign = new_assign;
                best = new_best;
            } else {
                pivots[i] = old_piv;
                data[i] = old_data;
            }
        }
    }
    Refinement {
        pivots,
        assign,
        cost,
        initial_cost,
    }
}
