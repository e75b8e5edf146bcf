//! Offline per-user bounds and pivot distance tables.

mod pivots;
mod prune;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use pivots::{
    initial_pivots, road_objective, road_pairs, select_road_pivots, select_social_pivots, social_objective,
    social_pairs, Direction, PivotConfig,
};
pub use prune::{prune_user, user_check, LemmaSet, PruneReason, UserPruneContext};

use crate::graph::{Dataset, KeywordId, PoiId, SocialNetwork, UserId, VertexId};
use crate::metrics::{bfs_hops, full_edge_support, road_sssp, Networks, UNREACHABLE};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KeywordAgg {
    pub f_sum: f64,
    pub f_max: f64,
}

/// Keyword → frequency aggregate, sorted by keyword.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KeywordMap(pub Vec<(KeywordId, KeywordAgg)>);

impl KeywordMap {
    pub fn get(&self, k: KeywordId) -> Option<&KeywordAgg> {
        self.0.binary_search_by_key(&k, |e| e.0).ok().map(|i| &self.0[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (KeywordId, &KeywordAgg)> {
        self.0.iter().map(|(k, a)| (*k, a))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entrywise max with `other`, keeping the union of keywords.
    pub fn merge_max(&mut self, other: &KeywordMap) {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j]);
                j += 1;
            } else {
                let (x, y) = (a[i].1, b[j].1);
                out.push((
                    a[i].0,
                    KeywordAgg {
                        f_sum: x.f_sum.max(y.f_sum),
                        f_max: x.f_max.max(y.f_max),
                    },
                ));
                i += 1;
                j += 1;
            }
        }
        self.0 = out;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UserBounds {
    /// Per keyword: sum and max of `f_{u,p}` over u's POIs carrying it.
    pub keywords: KeywordMap,
    pub ub_f_sum: f64,
    pub ub_f_avg: f64,
    pub ub_w_in: f64,
    pub ub_w_out: f64,
    pub ub_sup: u32,
}

/// The frequency-derived part of a user's bounds: keyword map, sum and max.
pub fn checkin_bounds(ds: &Dataset, u: UserId) -> (KeywordMap, f64, f64) {
    let mut map: std::collections::BTreeMap<KeywordId, KeywordAgg> = Default::default();
    let (mut sum, mut max) = (0.0, 0.0f64);
    for (&p, &f) in ds.checkins.checkins(u) {
        sum += f;
        max = max.max(f);
        for &k in ds.pois.keywords(p) {
            let e = map.entry(k).or_default();
            e.f_sum += f;
            e.f_max = e.f_max.max(f);
        }
    }
    (KeywordMap(map.into_iter().collect()), sum, max)
}

fn max_weight(edges: &[(UserId, f64)]) -> f64 {
    edges.iter().fold(0.0, |m, e| m.max(e.1))
}

pub fn influence_bounds(g: &SocialNetwork, u: UserId) -> (f64, f64) {
    (max_weight(g.in_edges(u)), max_weight(g.out_edges(u)))
}

/// Frequency, influence and support bounds for every user.
pub fn compute_user_bounds(net: &Networks) -> Vec<UserBounds> {
    let sup = full_edge_support(&net.skeleton);
    (0..net.user_count())
        .into_par_iter()
        .map(|i| {
            let u = UserId::from(i);
            let (keywords, ub_f_sum, ub_f_avg) = checkin_bounds(&net.data, u);
            let (ub_w_in, ub_w_out) = influence_bounds(&net.data.social, u);
            UserBounds {
                keywords,
                ub_f_sum,
                ub_f_avg,
                ub_w_in,
                ub_w_out,
                ub_sup: sup[i].iter().copied().max().unwrap_or(0),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotSets {
    pub social: Vec<UserId>,
    pub road: Vec<VertexId>,
}

/// All offline data the filter phase reads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfflineBounds {
    pub users: Vec<UserBounds>,
    pub pivots: PivotSets,
    /// `dist_s(u, spv_i)`, user-major, `UNREACHABLE` when disconnected.
    pub social_dist: Vec<u32>,
    /// `dist_r(v, rpv_i)`, vertex-major.
    pub road_dist: Vec<f64>,
    pub epoch: String,
}

impl OfflineBounds {
    pub fn compute(net: &Networks, cfg: &PivotConfig) -> OfflineBounds {
        let social = select_social_pivots(&net.skeleton, cfg);
        let road = select_road_pivots(&net.data, cfg);
        Self::with_pivots(net, PivotSets { social, road })
    }

    pub fn with_pivots(net: &Networks, pivots: PivotSets) -> OfflineBounds {
        let n = net.user_count();
        let a = pivots.social.len();
        let rows: Vec<Vec<u32>> = pivots.social.par_iter().map(|&p| bfs_hops(&net.skeleton, p)).collect();
        let mut social_dist = vec![UNREACHABLE; n * a];
        for (i, row) in rows.iter().enumerate() {
            for (u, &h) in row.iter().enumerate() {
                social_dist[u * a + i] = h;
            }
        }
        let nv = net.data.road.vertex_count();
        let b = pivots.road.len();
        let rows: Vec<Vec<f64>> = pivots.road.par_iter().map(|&r| road_sssp(&net.data.road, r)).collect();
        let mut road_dist = vec![0.0; nv * b];
        for (i, row) in rows.iter().enumerate() {
            for (v, &d) in row.iter().enumerate() {
                road_dist[v * b + i] = d;
            }
        }
        OfflineBounds {
            users: compute_user_bounds(net),
            pivots,
            social_dist,
            road_dist,
            epoch: net.data.fingerprint(),
        }
    }

    pub fn user(&self, u: UserId) -> &UserBounds {
        &self.users[u.index()]
    }

    pub fn social_row(&self, u: UserId) -> &[u32] {
        let a = self.pivots.social.len();
        &self.social_dist[u.index() * a..(u.index() + 1) * a]
    }

    pub fn road_row(&self, v: VertexId) -> &[f64] {
        let b = self.pivots.road.len();
        &self.road_dist[v.index() * b..(v.index() + 1) * b]
    }

    /// Recomputes the frequency-derived bounds of `u` after its check-ins changed.
    pub fn refresh_checkins(&mut self, ds: &Dataset, u: UserId) {
        let (keywords, s, m) = checkin_bounds(ds, u);
        let e = &mut self.users[u.index()];
        e.keywords = keywords;
        e.ub_f_sum = s;
        e.ub_f_avg = m;
    }
}

/// Upper bound on `isf(u, v)` from the endpoint weight maxima.
pub fn ub_isf(bounds: &OfflineBounds, g: &SocialNetwork, u: UserId, v: UserId) -> f64 {
    let (out_u, in_v) = (bounds.user(u).ub_w_out, bounds.user(v).ub_w_in);
    if g.has_edge(u, v) {
        out_u.max(in_v)
    } else {
        out_u * in_v
    }
}

/// Triangle-inequality lower bound on the hop distance between `u` and `q`.
pub fn lb_dist_s(bounds: &OfflineBounds, u: UserId, q: UserId) -> u32 {
    pivot_gap(bounds.social_row(u), bounds.social_row(q))
}

pub(crate) fn pivot_gap(a: &[u32], b: &[u32]) -> u32 {
    a.iter()
        .zip(b)
        .filter(|(&x, &y)| x != UNREACHABLE && y != UNREACHABLE)
        .map(|(&x, &y)| x.abs_diff(y))
        .max()
        .unwrap_or(0)
}

/// Lower bound on the hop distance from a user with pivot row `q` to any user whose
/// pivot distances lie in the `(min, max)` envelope. Pivots where either side has an
/// unreachable entry are skipped, as in [`lb_dist_s`].
pub fn pivot_gap_env(q: &[u32], env: &[(u32, u32)]) -> u32 {
    q.iter()
        .zip(env)
        .filter(|(&x, &(_, hi))| x != UNREACHABLE && hi != UNREACHABLE)
        .map(|(&x, &(lo, hi))| lo.saturating_sub(x).max(x.saturating_sub(hi)))
        .max()
        .unwrap_or(0)
}

fn road_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| {
        let g = (x - y).abs();
        if g.is_finite() {
            m.max(g)
        } else {
            m
        }
    })
}

/// Lower bound on `avg_dist(u, p)`; `None` if `u` has no check-ins.
pub fn lb_avg_dist_r(bounds: &OfflineBounds, ds: &Dataset, u: UserId, p: PoiId) -> Option<f64> {
    let locs = ds.checkins.checkins(u);
    if locs.is_empty() {
        return None;
    }
    let rp = bounds.road_row(ds.pois.vertex(p));
    let total: f64 = locs
        .keys()
        .map(|&l| road_gap(bounds.road_row(ds.pois.vertex(l)), rp))
        .sum();
    Some(total / locs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BipartiteNetwork, Point};

    #[test]
    fn frequency_bounds_direct() {
        let mut ds = Dataset::default();
        ds.social = SocialNetwork::with_users(2);
        let r = ds.road.add_vertex("r", Point::new(0.0, 0.0)).unwrap();
        let p1 = ds.pois.add_poi("p1", r, &["a", "b"]).unwrap();
        let p2 = ds.pois.add_poi("p2", r, &["b"]).unwrap();
        ds.checkins = BipartiteNetwork::new(2, 2);
        ds.checkins.add_checkin(UserId(0), p1, 3.0).unwrap();
        ds.checkins.add_checkin(UserId(0), p2, 4.0).unwrap();
        let net = Networks::new(ds);
        let b = compute_user_bounds(&net);
        assert_eq!((b[0].ub_f_sum, b[0].ub_f_avg), (7.0, 4.0));
        let kb = net.data.pois.keyword_id("b").unwrap();
        assert_eq!(b[0].keywords.get(kb), Some(&KeywordAgg { f_sum: 7.0, f_max: 4.0 }));
        assert_eq!(b[1], UserBounds::default());
    }

    #[test]
    fn isf_bound_branches() {
        let mut g = SocialNetwork::with_users(4);
        g.add_edge(UserId(0), UserId(1), 0.9).unwrap();
        g.add_edge(UserId(2), UserId(1), 0.7).unwrap();
        g.add_edge(UserId(2), UserId(3), 0.7).unwrap();
        let users = (0..4)
            .map(|i| {
                let (ub_w_in, ub_w_out) = influence_bounds(&g, UserId(i));
                UserBounds {
                    ub_w_in,
                    ub_w_out,
                    ..Default::default()
                }
            })
            .collect();
        let b = OfflineBounds {
            users,
            pivots: PivotSets { social: vec![], road: vec![] },
            social_dist: vec![],
            road_dist: vec![],
            epoch: String::new(),
        };
        assert_eq!(ub_isf(&b, &g, UserId(0), UserId(1)), 0.9);
        assert!((ub_isf(&b, &g, UserId(0), UserId(3)) - 0.63).abs() < 1e-12);
    }

    #[test]
    fn gaps() {
        assert_eq!(pivot_gap(&[1], &[4]), 3);
        assert_eq!(pivot_gap(&[UNREACHABLE, 2], &[7, 2]), 0);
        assert_eq!(road_gap(&[5.0], &[2.0]), 3.0);
        assert_eq!(pivot_gap_env(&[1, 9], &[(4, 6), (2, 3)]), 6);
        assert_eq!(pivot_gap_env(&[5], &[(4, 6)]), 0);
        assert_eq!(pivot_gap_env(&[5], &[(9, UNREACHABLE)]), 0);
    }

    #[test]
    fn keyword_merge() {
        let k = |i| KeywordId(i);
        let a = |s, m| KeywordAgg { f_sum: s, f_max: m };
        let mut x = KeywordMap(vec![(k(1), a(3.0, 2.0)), (k(4), a(1.0, 1.0))]);
        x.merge_max(&KeywordMap(vec![(k(1), a(2.0, 5.0)), (k(2), a(9.0, 9.0))]));
        assert_eq!(x.0, vec![(k(1), a(3.0, 5.0)), (k(2), a(9.0, 9.0)), (k(4), a(1.0, 1.0))]);
    }
}
