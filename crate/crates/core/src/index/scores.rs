use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::IndexNode;
use crate::graph::{PoiId, UserId};
use crate::metrics::{bfs_hops, Networks, UNREACHABLE};
use crate::precompute::{pivot_gap_env, ub_isf, KeywordMap, OfflineBounds};

/// Weights of the bipartite, social and road terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub bs: f64,
    pub ss: f64,
    pub rs: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            bs: 1.0 / 3.0,
            ss: 1.0 / 3.0,
            rs: 1.0 / 3.0,
        }
    }
}

/// The `largest(.)` denominators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub f_sum: f64,
    pub f_max: f64,
    pub rs: f64,
    pub sum_sup: f64,
    pub isf: f64,
    pub dist: f64,
}

/// Above this many users the road and hop maxima are estimated from samples.
pub const EXACT_NORM_LIMIT: usize = 400;

fn positive(x: f64) -> f64 {
    if x > 0.0 && x.is_finite() {
        x
    } else {
        1.0
    }
}

impl Norms {
    pub fn compute(net: &Networks, bounds: &OfflineBounds, seed: u64) -> Norms {
        let n = net.user_count();
        let (mut f_sum, mut f_max, mut sup) = (0.0f64, 0.0f64, 0u32);
        for b in &bounds.users {
            for (_, a) in b.keywords.iter() {
                f_sum = f_sum.max(a.f_sum);
                f_max = f_max.max(a.f_max);
            }
            sup = sup.max(b.ub_sup);
        }
        let isf = net.data.social.edges().fold(0.0f64, |m, (_, _, w)| m.max(w));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let active: Vec<UserId> = net
            .data
            .social
            .users()
            .filter(|&u| !net.data.checkins.checkins(u).is_empty())
            .collect();
        let mut rs = 0.0f64;
        let mut dist = 0u32;
        if n <= EXACT_NORM_LIMIT {
            for &v in &active {
                for &u in &active {
                    rs = rs.max(raw_rs(net, u, v).unwrap_or(0.0));
                }
            }
            for u in net.data.social.users() {
                dist = dist.max(eccentricity(&bfs_hops(&net.skeleton, u)).0);
            }
        } else {
            if !active.is_empty() {
                for _ in 0..2000 {
                    let u = active[rng.random_range(0..active.len())];
                    let v = active[rng.random_range(0..active.len())];
                    rs = rs.max(raw_rs(net, u, v).unwrap_or(0.0));
                }
            }
            // double sweeps from a few random starts
            for _ in 0..4 {
                let s = UserId::from(rng.random_range(0..n));
                let (e, far) = eccentricity(&bfs_hops(&net.skeleton, s));
                let (e2, _) = eccentricity(&bfs_hops(&net.skeleton, far));
                dist = dist.max(e).max(e2);
            }
        }
        Norms {
            f_sum: positive(f_sum),
            f_max: positive(f_max),
            rs: positive(rs),
            sum_sup: positive(2.0 * sup as f64),
            isf: positive(isf),
            dist: positive(dist as f64),
        }
    }

    pub fn dist_term(&self, d: u32) -> f64 {
        if d == UNREACHABLE {
            1.0
        } else {
            (d as f64 / self.dist).min(1.0)
        }
    }
}

fn eccentricity(row: &[u32]) -> (u32, UserId) {
    let mut best = (0, UserId(0));
    for (i, &h) in row.iter().enumerate() {
        if h != UNREACHABLE && h >= best.0 {
            best = (h, UserId::from(i));
        }
    }
    best
}

/// Unnormalized road score: mean of `avg_dist(u, p)` over `v`'s POIs.
pub fn raw_rs(net: &Networks, u: UserId, v: UserId) -> Option<f64> {
    let vl = net.data.checkins.checkins(v);
    if vl.is_empty() {
        return None;
    }
    let mut s = 0.0;
    for &p in vl.keys() {
        s += net.avg_dist(u, p)?;
    }
    Some(s / vl.len() as f64)
}

/// Keyword overlap score shared by user pairs and node/pivot pairs.
pub fn bs_keywords(a: &KeywordMap, b: &KeywordMap, norms: &Norms) -> f64 {
    let (a, b) = (&a.0, &b.0);
    let (mut i, mut j) = (0, 0);
    let (mut s, mut m) = (0.0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1.f_sum + b[j].1.f_sum;
                m += a[i].1.f_max + b[j].1.f_max;
                i += 1;
                j += 1;
            }
        }
    }
    s / norms.f_sum + m / norms.f_max
}

/// Everything the score functions read.
#[derive(Clone, Copy)]
pub struct Scorer<'a> {
    pub net: &'a Networks,
    pub bounds: &'a OfflineBounds,
    pub norms: &'a Norms,
    pub w: Weights,
}

impl<'a> Scorer<'a> {
    pub fn bs(&self, u: UserId, v: UserId) -> f64 {
        bs_keywords(&self.bounds.user(u).keywords, &self.bounds.user(v).keywords, self.norms)
    }

    /// `None` when either side has no check-ins.
    pub fn rs(&self, u: UserId, v: UserId) -> Option<f64> {
        raw_rs(self.net, u, v).map(|x| (x / self.norms.rs).min(1.0))
    }

    /// `dist` is the hop distance between `u` and `v`.
    pub fn ss(&self, u: UserId, v: UserId, dist: u32) -> f64 {
        let (bu, bv) = (self.bounds.user(u), self.bounds.user(v));
        let sup = ((bu.ub_sup + bv.ub_sup) as f64 / self.norms.sum_sup).min(1.0);
        let isf = (ub_isf(self.bounds, &self.net.data.social, u, v) / self.norms.isf).min(1.0);
        sup + isf + (1.0 - self.norms.dist_term(dist))
    }

    /// A missing road score counts as the worst, 1.
    pub fn combine(&self, bs: f64, ss: f64, rs: Option<f64>) -> f64 {
        self.w.bs * bs + self.w.ss * ss + (1.0 - self.w.rs * rs.unwrap_or(1.0))
    }

    pub fn quality(&self, u: UserId, piv: UserId, dist: u32) -> f64 {
        self.combine(self.bs(u, piv), self.ss(u, piv, dist), self.rs(u, piv))
    }

    /// Summed pair scores of ordered pairs `(u, v)` inside each group.
    pub fn pair_sums(&self, u: UserId, v: UserId, dist: u32) -> (f64, f64, f64) {
        (self.bs(u, v), self.rs(u, v).unwrap_or(1.0), self.ss(u, v, dist))
    }

    pub fn cost_from_sums(&self, bs: f64, rs: f64, ss: f64) -> f64 {
        self.w.bs * (1.0 - bs) + self.w.rs * rs + self.w.ss * (1.0 - ss)
    }

    /// Exact partition cost over every ordered intra-group pair. One BFS per user.
    pub fn pindex_cost_exact(&self, assign: &[u32]) -> f64 {
        let (mut bs, mut rs, mut ss) = (0.0, 0.0, 0.0);
        for v in 0..assign.len() {
            let row = bfs_hops(&self.net.skeleton, UserId::from(v));
            for u in 0..assign.len() {
                if u != v && assign[u] == assign[v] {
                    let (b, r, s) = self.pair_sums(UserId::from(u), UserId::from(v), row[u]);
                    bs += b;
                    rs += r;
                    ss += s;
                }
            }
        }
        self.cost_from_sums(bs, rs, ss)
    }

    pub fn bs_node(&self, node: &IndexNode, piv: UserId) -> f64 {
        bs_keywords(&node.agg.keywords, &self.bounds.user(piv).keywords, self.norms)
    }

    /// `contains` says whether `piv` lies in the node's subtree.
    pub fn ss_node(&self, node: &IndexNode, piv: UserId, contains: bool) -> f64 {
        let b = self.bounds.user(piv);
        let sup = ((node.agg.ub_sup + b.ub_sup) as f64 / self.norms.sum_sup).min(1.0);
        let isf = (b.ub_w_out * node.agg.ub_w_in / self.norms.isf).min(1.0);
        let lb = if contains {
            0
        } else {
            pivot_gap_env(self.bounds.social_row(piv), &node.agg.env)
        };
        sup + isf + (1.0 - self.norms.dist_term(lb))
    }

    pub fn quality_node(&self, node: &IndexNode, piv: UserId, contains: bool) -> f64 {
        self.w.bs * self.bs_node(node, piv) + self.w.ss * self.ss_node(node, piv, contains)
    }
}

/// Mean distance from a pivot's POIs to every POI, so `rs(u, piv)` is a mean over `u`'s POIs.
pub(crate) fn pivot_poi_profile(net: &Networks, piv: UserId) -> Option<Vec<f64>> {
    let vl = net.data.checkins.checkins(piv);
    if vl.is_empty() {
        return None;
    }
    let mut acc = vec![0.0; net.data.pois.poi_count()];
    for &p in vl.keys() {
        for (a, d) in acc.iter_mut().zip(net.poi_row(p)) {
            *a += d;
        }
    }
    let k = vl.len() as f64;
    acc.iter_mut().for_each(|a| *a /= k);
    Some(acc)
}

/// `rs(u, piv)` from a precomputed profile.
pub(crate) fn rs_from_profile(net: &Networks, norms: &Norms, u: UserId, profile: Option<&[f64]>) -> Option<f64> {
    let prof = profile?;
    let locs = net.data.checkins.checkins(u);
    if locs.is_empty() {
        return None;
    }
    let s: f64 = locs.keys().map(|l: &PoiId| prof[l.index()]).sum();
    Some((s / locs.len() as f64 / norms.rs).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BipartiteNetwork, Dataset, Point, SocialNetwork};
    use crate::precompute::{PivotSets, UserBounds};

    fn unit_norms() -> Norms {
        Norms {
            f_sum: 1.0,
            f_max: 1.0,
            rs: 1.0,
            sum_sup: 1.0,
            isf: 1.0,
            dist: 1.0,
        }
    }

    #[test]
    fn self_pair_with_largest_values() {
        let k = KeywordMap(vec![(crate::KeywordId(0), crate::precompute::KeywordAgg { f_sum: 5.0, f_max: 2.0 })]);
        let norms = Norms {
            f_sum: 5.0,
            f_max: 2.0,
            ..unit_norms()
        };
        assert_eq!(bs_keywords(&k, &k, &norms), 4.0);
        assert_eq!(bs_keywords(&k, &KeywordMap::default(), &norms), 0.0);
    }

    /// Two isolated users at separate corners of a road segment.
    fn isolated() -> Networks {
        let mut ds = Dataset {
            social: SocialNetwork::with_users(2),
            ..Default::default()
        };
        let a = ds.road.add_vertex("a", Point::new(0.0, 0.0)).unwrap();
        let b = ds.road.add_vertex("b", Point::new(3.0, 0.0)).unwrap();
        ds.road.add_edge(a, b, None).unwrap();
        let pa = ds.pois.add_poi("pa", a, &["x"]).unwrap();
        let pb = ds.pois.add_poi("pb", b, &["y"]).unwrap();
        ds.checkins = BipartiteNetwork::new(2, 2);
        ds.checkins.add_checkin(UserId(0), pa, 2.0).unwrap();
        ds.checkins.add_checkin(UserId(1), pb, 2.0).unwrap();
        Networks::new(ds)
    }

    fn bounds_for(net: &Networks) -> OfflineBounds {
        OfflineBounds::with_pivots(
            net,
            PivotSets {
                social: vec![UserId(0)],
                road: vec![crate::VertexId(0)],
            },
        )
    }

    #[test]
    fn isolated_pair_scores_zero_social() {
        let net = isolated();
        let bounds = bounds_for(&net);
        let norms = Norms::compute(&net, &bounds, 1);
        let sc = Scorer {
            net: &net,
            bounds: &bounds,
            norms: &norms,
            w: Weights::default(),
        };
        assert_eq!(sc.ss(UserId(0), UserId(1), UNREACHABLE), 0.0);
        // the far pair realizes the road maximum
        assert_eq!(norms.rs, 3.0);
        assert_eq!(sc.rs(UserId(0), UserId(1)), Some(1.0));
        assert_eq!(sc.rs(UserId(0), UserId(0)), Some(0.0));
    }

    #[test]
    fn quality_collapses_to_road_term() {
        let net = isolated();
        let bounds = bounds_for(&net);
        let norms = Norms::compute(&net, &bounds, 1);
        let sc = Scorer {
            net: &net,
            bounds: &bounds,
            norms: &norms,
            w: Weights {
                bs: 0.0,
                ss: 0.0,
                rs: 1.0,
            },
        };
        assert_eq!(sc.quality(UserId(0), UserId(0), 0), 1.0);
        let single = Scorer {
            w: Weights {
                bs: 0.25,
                ss: 0.5,
                rs: 0.25,
            },
            ..sc
        };
        // separate groups leave every pair sum empty
        assert_eq!(single.pindex_cost_exact(&[0, 1]), 0.75);
        assert_eq!(single.pindex_cost_exact(&[0]), 0.75);
    }

    #[test]
    fn clique_pair_approaches_two() {
        let mut social = SocialNetwork::with_users(3);
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            social.add_edge(UserId(a), UserId(b), 1.0).unwrap();
            social.add_edge(UserId(b), UserId(a), 1.0).unwrap();
        }
        let mut ds = Dataset {
            social,
            ..Default::default()
        };
        let r = ds.road.add_vertex("r", Point::new(0.0, 0.0)).unwrap();
        ds.pois.add_poi("p", r, &["x"]).unwrap();
        ds.checkins = BipartiteNetwork::new(3, 1);
        let net = Networks::new(ds);
        let bounds = bounds_for(&net);
        let norms = Norms::compute(&net, &bounds, 1);
        assert_eq!(norms.dist, 1.0);
        let sc = Scorer {
            net: &net,
            bounds: &bounds,
            norms: &norms,
            w: Weights::default(),
        };
        assert_eq!(sc.ss(UserId(0), UserId(1), 1), 2.0);
        assert_eq!(bounds.user(UserId(0)), &UserBounds { ub_w_in: 1.0, ub_w_out: 1.0, ub_sup: 1, ..Default::default() });
    }
}
