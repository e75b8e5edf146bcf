//! Exact evaluators for every community constraint.

mod hops;
mod influence;
mod road;
mod truss;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

pub use hops::{bfs_hops, hop_distance, UNREACHABLE};
pub use influence::{isf, isf_from};
pub use road::{avg_dist, road_distance, road_sssp, PoiDistances};
pub use truss::{edge_support, full_edge_support, verify_kd_truss, Induced};

use crate::error::Result;
use crate::graph::{
    undirected_skeleton, BipartiteNetwork, Dataset, KeywordId, PoiId, PoiTable, QueryParams, Skeleton, UserId,
};

/// A dataset together with the derived structures every evaluator needs.
#[derive(Debug)]
pub struct Networks {
    pub data: Dataset,
    pub skeleton: Skeleton,
    pub dists: PoiDistances,
}

impl Networks {
    pub fn new(data: Dataset) -> Self {
        let skeleton = undirected_skeleton(&data.social);
        let dists = PoiDistances::new(data.pois.poi_count());
        Networks { data, skeleton, dists }
    }

    pub fn avg_dist(&self, u: UserId, p: PoiId) -> Option<f64> {
        self.dists.avg_dist(&self.data.road, &self.data.pois, &self.data.checkins, u, p)
    }

    pub fn poi_row(&self, p: PoiId) -> &[f64] {
        self.dists.row(&self.data.road, &self.data.pois, p)
    }

    pub fn user_count(&self) -> usize {
        self.data.social.user_count()
    }
}

/// Query parameters with `omega` and `pi` converted to absolute frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub params: QueryParams,
    pub omega_abs: f64,
    pub pi_abs: f64,
}

/// Largest per-user frequency sum and largest single frequency.
pub fn frequency_scales(b: &BipartiteNetwork) -> (f64, f64) {
    let mut sum_max: f64 = 0.0;
    let mut f_max: f64 = 0.0;
    for u in 0..b.user_count() {
        let row = b.checkins(UserId::from(u));
        sum_max = sum_max.max(row.values().sum());
        f_max = row.values().fold(f_max, |m, &f| m.max(f));
    }
    (sum_max, f_max)
}

impl Thresholds {
    pub fn resolve(b: &BipartiteNetwork, params: &QueryParams) -> Result<Thresholds> {
        params.validate()?;
        let (sum_max, f_max) = frequency_scales(b);
        Ok(Thresholds {
            params: params.clone(),
            omega_abs: params.omega * sum_max,
            pi_abs: params.pi * f_max,
        })
    }

    pub fn q(&self) -> UserId {
        self.params.q
    }

    pub fn keywords(&self) -> &BTreeSet<KeywordId> {
        &self.params.keywords
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityAnswer {
    pub users: BTreeSet<UserId>,
    pub pois: BTreeSet<PoiId>,
}

impl CommunityAnswer {
    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    /// Check-in edges between the answer's users and POIs.
    pub fn edges(&self, b: &BipartiteNetwork) -> Vec<(UserId, PoiId, f64)> {
        self.users
            .iter()
            .flat_map(|&u| {
                b.checkins(u)
                    .iter()
                    .filter(|(p, _)| self.pois.contains(p))
                    .map(move |(&p, &f)| (u, p, f))
            })
            .collect()
    }
}

/// Checks the keyword-core conditions on `(vs, vp)` without maximality.
pub fn verify_keyword_core(
    b: &BipartiteNetwork,
    pois: &PoiTable,
    vs: &BTreeSet<UserId>,
    vp: &BTreeSet<PoiId>,
    keywords: &BTreeSet<KeywordId>,
    omega_abs: f64,
    pi_abs: f64,
) -> bool {
    if vs.is_empty() || vp.is_empty() {
        return false;
    }
    if !vp.iter().all(|&p| pois.matches(p, keywords)) {
        return false;
    }
    for &u in vs {
        let row = b.checkins(u);
        let s: f64 = vp.iter().filter_map(|p| row.get(p)).sum();
        if s < omega_abs {
            return false;
        }
    }
    for &p in vp {
        let (n, s) = b
            .visitors(p)
            .iter()
            .filter(|(u, _)| vs.contains(u))
            .fold((0usize, 0.0), |(n, s), (_, &f)| (n + 1, s + f));
        if n == 0 || s / (n as f64) < pi_abs {
            return false;
        }
    }
    bipartite_connected(b, vs, vp)
}

fn bipartite_connected(b: &BipartiteNetwork, vs: &BTreeSet<UserId>, vp: &BTreeSet<PoiId>) -> bool {
    let start = *vs.iter().next().expect("nonempty");
    let mut seen_u: BTreeSet<UserId> = [start].into();
    let mut seen_p: BTreeSet<PoiId> = BTreeSet::new();
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for p in b.locations(u).filter(|p| vp.contains(p)) {
            if seen_p.insert(p) {
                for &v in b.visitors(p).keys() {
                    if vs.contains(&v) && seen_u.insert(v) {
                        stack.push(v);
                    }
                }
            }
        }
    }
    seen_u.len() == vs.len() && seen_p.len() == vp.len()
}

/// The POIs a user set can share: keyword matches visited by the set whose average
/// visitor frequency reaches `pi_abs` and that lie within `sigma` of every member.
pub fn canonical_pois(net: &Networks, users: &BTreeSet<UserId>, th: &Thresholds) -> BTreeSet<PoiId> {
    let b = &net.data.checkins;
    let pois = &net.data.pois;
    let mut out = BTreeSet::new();
    if users.iter().any(|&u| b.checkins(u).is_empty()) {
        return out;
    }
    let visited: BTreeSet<PoiId> = users.iter().flat_map(|&u| b.locations(u)).collect();
    for p in visited {
        if !pois.matches(p, th.keywords()) {
            continue;
        }
        let (n, s) = b
            .visitors(p)
            .iter()
            .filter(|(u, _)| users.contains(u))
            .fold((0usize, 0.0), |(n, s), (_, &f)| (n + 1, s + f));
        if s / (n as f64) < th.pi_abs {
            continue;
        }
        if users
            .iter()
            .all(|&u| net.avg_dist(u, p).is_some_and(|x| x <= th.params.sigma))
        {
            out.insert(p);
        }
    }
    out
}

/// If `users` forms a community, returns its POI set. `isf_q` is `isf_from(q)`.
pub fn qualifies(net: &Networks, users: &BTreeSet<UserId>, th: &Thresholds, isf_q: &[f64]) -> Option<BTreeSet<PoiId>> {
    let pr = &th.params;
    if !users.contains(&pr.q) || users.iter().any(|u| isf_q[u.index()] < pr.theta) {
        return None;
    }
    if !verify_kd_truss(&net.skeleton, users, pr.q, pr.k, pr.d) {
        return None;
    }
    let vp = canonical_pois(net, users, th);
    verify_keyword_core(&net.data.checkins, &net.data.pois, users, &vp, th.keywords(), th.omega_abs, th.pi_abs)
        .then_some(vp)
}

/// Per-constraint outcome of [`verify_community`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub membership: bool,
    pub truss: bool,
    pub influence: bool,
    pub spatial: bool,
    pub keyword_core: bool,
    /// Only filled by [`check_maximality`].
    pub maximal: Option<bool>,
}

impl VerificationReport {
    pub fn passes(&self) -> bool {
        self.membership && self.truss && self.influence && self.spatial && self.keyword_core
    }
}

pub fn verify_community(net: &Networks, answer: &CommunityAnswer, th: &Thresholds) -> VerificationReport {
    let pr = &th.params;
    let isf_q = isf_from(&net.data.social, pr.q);
    verify_with(net, answer, th, &isf_q)
}

pub fn verify_with(net: &Networks, answer: &CommunityAnswer, th: &Thresholds, isf_q: &[f64]) -> VerificationReport {
    let pr = &th.params;
    let (vs, vp) = (&answer.users, &answer.pois);
    VerificationReport {
        membership: vs.contains(&pr.q),
        truss: verify_kd_truss(&net.skeleton, vs, pr.q, pr.k, pr.d),
        influence: vs.iter().all(|u| isf_q[u.index()] >= pr.theta),
        spatial: vs.iter().all(|&u| {
            vp.iter()
                .all(|&p| net.avg_dist(u, p).is_some_and(|x| x <= pr.sigma))
        }),
        keyword_core: verify_keyword_core(&net.data.checkins, &net.data.pois, vs, vp, th.keywords(), th.omega_abs, th.pi_abs),
        maximal: None,
    }
}

/// Bullet checks plus maximality by single-element extension. Quadratic; meant for small instances.
pub fn check_maximality(net: &Networks, answer: &CommunityAnswer, th: &Thresholds) -> VerificationReport {
    let isf_q = isf_from(&net.data.social, th.q());
    let mut rep = verify_with(net, answer, th, &isf_q);
    let mut maximal = true;
    for v in net.data.social.users().filter(|v| !answer.users.contains(v)) {
        let mut bigger = answer.users.clone();
        bigger.insert(v);
        if qualifies(net, &bigger, th, &isf_q).is_some() {
            maximal = false;
            break;
        }
    }
    if maximal {
        for p in net.data.pois.pois().filter(|p| !answer.pois.contains(p)) {
            let mut bigger = answer.clone();
            bigger.pois.insert(p);
            if verify_with(net, &bigger, th, &isf_q).passes() {
                maximal = false;
                break;
            }
        }
    }
    rep.maximal = Some(maximal);
    rep
}

/// Hop distances from `q` restricted to a user subset, as a map.
pub fn hops_within(s: &Skeleton, users: &BTreeSet<UserId>, q: UserId) -> HashMap<UserId, u32> {
    let ind = Induced::new(s, users.iter().copied());
    let Some(lq) = ind.local(q) else {
        return HashMap::new();
    };
    ind.bfs(lq)
        .into_iter()
        .enumerate()
        .filter(|&(_, h)| h != UNREACHABLE)
        .map(|(i, h)| (ind.members[i], h))
        .collect()
}
