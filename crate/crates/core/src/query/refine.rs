//! Refinement: a removal-only closure followed by an exact search for the largest
//! qualifying user set inside it.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::graph::{PoiId, UserId};
use crate::metrics::{canonical_pois, qualifies, CommunityAnswer, Induced, Networks, Thresholds};

/// Default cap on the exact search's work, counted in users: every set tested or
/// closed adds its size. Roughly a few seconds at desk scale.
pub const SEARCH_BUDGET: usize = 400_000;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Refined {
    pub answer: CommunityAnswer,
    /// Size of the closure of the candidate set.
    pub closure: usize,
    /// User sets tested plus child sets closed by the search.
    pub states: usize,
    /// False when the budget ran out and a greedy descent finished the job.
    pub exact: bool,
}

/// Removes users that cannot belong to any community inside `users`, to a fixpoint.
///
/// Every step only discards users that fail a necessary condition for every subset
/// containing q, so any community inside `users` survives:
/// - influence from q below theta;
/// - not within d hops of q in the k-truss of the induced skeleton;
/// - keyword frequency to usable POIs below omega, or cut off from q in the usable
///   check-in graph. A POI is usable if it matches, lies within sigma of q, and some
///   remaining visitor within sigma has frequency at least pi.
pub fn closure(net: &Networks, th: &Thresholds, isf_q: &[f64], users: &BTreeSet<UserId>) -> BTreeSet<UserId> {
    let pr = &th.params;
    let q = pr.q;
    let b = &net.data.checkins;
    let near = |u: UserId, p: PoiId| net.avg_dist(u, p).is_some_and(|x| x <= pr.sigma);
    let mut cur: BTreeSet<UserId> = users.iter().copied().filter(|u| isf_q[u.index()] >= pr.theta).collect();
    loop {
        if !cur.contains(&q) || cur.len() < 2 {
            return BTreeSet::new();
        }
        let before = cur.len();

        let t = Induced::new(&net.skeleton, cur.iter().copied()).truss(pr.k);
        let hops = t.bfs(t.local(q).expect("q present"));
        cur = t
            .members
            .iter()
            .zip(&hops)
            .filter(|(_, &h)| h <= pr.d)
            .map(|(&u, _)| u)
            .collect();
        if cur.len() < 2 {
            return BTreeSet::new();
        }

        // usable check-in edges
        let mut best: BTreeMap<PoiId, f64> = BTreeMap::new();
        let mut edges: Vec<(UserId, PoiId, f64)> = Vec::new();
        for &u in &cur {
            for (&p, &f) in b.checkins(u) {
                if net.data.pois.matches(p, th.keywords()) && near(u, p) && near(q, p) {
                    edges.push((u, p, f));
                    let m = best.entry(p).or_insert(0.0);
                    *m = m.max(f);
                }
            }
        }
        edges.retain(|(_, p, _)| best[p] >= th.pi_abs);
        let mut sum: BTreeMap<UserId, f64> = BTreeMap::new();
        for &(u, _, f) in &edges {
            *sum.entry(u).or_insert(0.0) += f;
        }
        let ok: BTreeSet<UserId> = sum
            .into_iter()
            .filter(|&(_, s)| s >= th.omega_abs)
            .map(|(u, _)| u)
            .collect();
        edges.retain(|(u, _, _)| ok.contains(u));
        cur = bipartite_component(&edges, q);

        if cur.len() == before {
            return cur;
        }
    }
}

fn bipartite_component(edges: &[(UserId, PoiId, f64)], q: UserId) -> BTreeSet<UserId> {
    let mut by_user: BTreeMap<UserId, Vec<PoiId>> = BTreeMap::new();
    let mut by_poi: BTreeMap<PoiId, Vec<UserId>> = BTreeMap::new();
    for &(u, p, _) in edges {
        by_user.entry(u).or_default().push(p);
        by_poi.entry(p).or_default().push(u);
    }
    let mut seen = BTreeSet::new();
    if !by_user.contains_key(&q) {
        return seen;
    }
    let mut seen_p = BTreeSet::new();
    let mut stack = vec![q];
    seen.insert(q);
    while let Some(u) = stack.pop() {
        for &p in &by_user[&u] {
            if seen_p.insert(p) {
                for &v in &by_poi[&p] {
                    if seen.insert(v) {
                        stack.push(v);
                    }
                }
            }
        }
    }
    seen
}

/// Orders qualifying sets of equal size: more POIs first, then the smaller sorted user list.
pub(crate) fn better(a: &(BTreeSet<UserId>, BTreeSet<PoiId>), b: &(BTreeSet<UserId>, BTreeSet<PoiId>)) -> bool {
    debug_assert_eq!(a.0.len(), b.0.len());
    a.1.len() > b.1.len() || (a.1.len() == b.1.len() && a.0 < b.0)
}

/// The largest community whose users come from `candidates`, or empty.
///
/// Sets are expanded from the closure downwards, largest first; each child drops one
/// non-query user and is closed again. A community inside a set survives its closure,
/// so it is reached through some chain of children, and the first size level holding
/// a community holds all communities of that size.
pub fn refinement(net: &Networks, th: &Thresholds, isf_q: &[f64], candidates: &BTreeSet<UserId>, budget: usize) -> Refined {
    let q = th.q();
    let mut start = candidates.clone();
    start.insert(q);
    let top = closure(net, th, isf_q, &start);
    let mut out = Refined {
        closure: top.len(),
        exact: true,
        ..Default::default()
    };
    if top.is_empty() {
        return out;
    }
    let mut levels: BTreeMap<usize, BTreeSet<Vec<UserId>>> = BTreeMap::new();
    let mut seen: HashSet<Vec<UserId>> = HashSet::new();
    let mut work = 0;
    let key: Vec<UserId> = top.iter().copied().collect();
    seen.insert(key.clone());
    levels.entry(key.len()).or_default().insert(key);

    while let Some((_, level)) = levels.pop_last() {
        let mut found: Option<(BTreeSet<UserId>, BTreeSet<PoiId>)> = None;
        for set in &level {
            out.states += 1;
            work += set.len();
            let s: BTreeSet<UserId> = set.iter().copied().collect();
            if let Some(vp) = qualifies(net, &s, th, isf_q) {
                let cand = (s, vp);
                if found.as_ref().is_none_or(|f| better(&cand, f)) {
                    found = Some(cand);
                }
            }
        }
        if let Some((users, pois)) = found {
            out.answer = CommunityAnswer { users, pois };
            return out;
        }
        for set in &level {
            for &u in set.iter().filter(|&&u| u != q) {
                if work >= budget {
                    out.exact = false;
                    let first = level.into_iter().next().expect("levels are never empty");
                    out.answer = greedy(net, th, isf_q, first.into_iter().collect(), &mut out.states);
                    return out;
                }
                out.states += 1;
                work += set.len();
                let mut s: BTreeSet<UserId> = set.iter().copied().collect();
                s.remove(&u);
                let c = closure(net, th, isf_q, &s);
                if c.is_empty() {
                    continue;
                }
                let key: Vec<UserId> = c.into_iter().collect();
                if seen.insert(key.clone()) {
                    levels.entry(key.len()).or_default().insert(key);
                }
            }
        }
    }
    out
}

/// Drops one non-query user at a time until the set qualifies or vanishes, then closes
/// the rest again. The victim is the user with the least frequency on the POIs the set
/// can currently share; ties, including the case where nobody has any, go to the user
/// with the fewest neighbours inside the set.
fn greedy(net: &Networks, th: &Thresholds, isf_q: &[f64], mut s: BTreeSet<UserId>, states: &mut usize) -> CommunityAnswer {
    let q = th.q();
    loop {
        *states += 1;
        if s.is_empty() {
            return CommunityAnswer::default();
        }
        if let Some(pois) = qualifies(net, &s, th, isf_q) {
            return CommunityAnswer { users: s, pois };
        }
        let shared = canonical_pois(net, &s, th);
        let ind = Induced::new(&net.skeleton, s.iter().copied());
        let victim = ind
            .members
            .iter()
            .zip(&ind.adj)
            .filter(|(&u, _)| u != q)
            .map(|(&u, adj)| {
                let row = net.data.checkins.checkins(u);
                let f: f64 = shared.iter().filter_map(|p| row.get(p)).sum();
                (f.min(th.omega_abs), adj.len(), u)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)))
            .map(|(_, _, u)| u);
        let Some(v) = victim else {
            return CommunityAnswer::default();
        };
        s.remove(&v);
        s = closure(net, th, isf_q, &s);
    }
}
