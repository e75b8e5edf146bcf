//! Small instances with planted cohesive groups, sized for exhaustive checking.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::road_from_points;
use crate::graph::{
    BipartiteNetwork, Dataset, KeywordId, Point, PoiId, PoiTable, QueryParams, SocialNetwork, UserId, VertexId,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallConfig {
    pub seed: u64,
    pub users: usize,
    pub pois: usize,
    pub road_vertices: usize,
    pub groups: usize,
    pub group_size: (usize, usize),
    /// Chance of each directed edge inside a group.
    pub density: f64,
    /// Random extra out-edges per user.
    pub noise_edges: usize,
    pub keywords: usize,
}

impl Default for SmallConfig {
    fn default() -> Self {
        SmallConfig {
            seed: 1,
            users: 30,
            pois: 12,
            road_vertices: 14,
            groups: 3,
            group_size: (4, 7),
            density: 0.85,
            noise_edges: 1,
            keywords: 6,
        }
    }
}

/// Planted groups of users that know each other, trust each other strongly and share a few
/// nearby POIs, embedded in sparse random noise.
pub fn small_instance(cfg: &SmallConfig) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.users.max(2);
    let mut social = SocialNetwork::with_users(n);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut next = 0;
    for _ in 0..cfg.groups {
        let size = rng.random_range(cfg.group_size.0..=cfg.group_size.1).min(n - next);
        if size < 2 {
            break;
        }
        groups.push((next..next + size).collect());
        next += size;
    }
    let add = |g: &mut SocialNetwork, a: usize, b: usize, w: f64| {
        if a != b && !g.has_edge(UserId::from(a), UserId::from(b)) {
            g.add_edge(UserId::from(a), UserId::from(b), w).expect("checked edge");
        }
    };
    for grp in &groups {
        for &a in grp {
            for &b in grp {
                if a != b && rng.random::<f64>() < cfg.density {
                    let w = rng.random_range(0.5..=1.0);
                    add(&mut social, a, b, w);
                }
            }
        }
    }
    for a in 0..n {
        for _ in 0..cfg.noise_edges {
            let b = rng.random_range(0..n);
            let w = 1.0 - rng.random::<f64>();
            add(&mut social, a, b, w);
        }
    }

    let pts: Vec<Point> = (0..cfg.road_vertices.max(2))
        .map(|_| Point::new(rng.random_range(0.0..20.0), rng.random_range(0.0..20.0)))
        .collect();
    let road = road_from_points(&pts);
    let mut pois = PoiTable::new();
    for j in 0..cfg.pois.max(1) {
        let v = VertexId::from(rng.random_range(0..road.vertex_count()));
        let count = rng.random_range(1..=3.min(cfg.keywords));
        let mut kws = BTreeSet::new();
        while kws.len() < count {
            kws.insert(rng.random_range(0..cfg.keywords));
        }
        let names: Vec<String> = kws.iter().map(|k| format!("k{k}")).collect();
        pois.add_poi(&format!("p{j}"), v, &names).expect("fresh poi");
    }

    let np = pois.poi_count();
    let mut checkins = BipartiteNetwork::new(n, np);
    let visit = |b: &mut BipartiteNetwork, u: usize, p: usize, f: f64| {
        if b.frequency(UserId::from(u), PoiId::from(p)) == 0.0 {
            b.add_checkin(UserId::from(u), PoiId::from(p), f).expect("fresh checkin");
        }
    };
    let mut grouped = vec![false; n];
    for grp in &groups {
        let shared: Vec<usize> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(0..np)).collect();
        for &u in grp {
            grouped[u] = true;
            for &p in &shared {
                if rng.random::<f64>() < 0.85 {
                    let f = rng.random_range(3..=10) as f64;
                    visit(&mut checkins, u, p, f);
                }
            }
        }
    }
    for (u, &g) in grouped.iter().enumerate() {
        let extra = if g { rng.random_range(0..=1) } else { rng.random_range(1..=3) };
        for _ in 0..extra {
            let p = rng.random_range(0..np);
            let f = rng.random_range(1..=10) as f64;
            visit(&mut checkins, u, p, f);
        }
    }
    Dataset {
        social,
        road,
        pois,
        checkins,
    }
}

/// Random query parameters for a small instance, around the default ratios. The query
/// user is among the first 18 (usually inside a planted group) and one keyword comes from
/// its own POIs. `None` if that user has no check-ins.
pub fn small_query<R: Rng>(ds: &Dataset, rng: &mut R) -> Option<QueryParams> {
    let q = UserId(rng.random_range(0..ds.user_count().min(18) as u32));
    let kws: Vec<KeywordId> = ds.checkins.locations(q).flat_map(|p| ds.pois.keywords(p).to_vec()).collect();
    if kws.is_empty() {
        return None;
    }
    let mut keywords: BTreeSet<KeywordId> = BTreeSet::new();
    keywords.insert(kws[rng.random_range(0..kws.len())]);
    if rng.random_bool(0.5) {
        keywords.insert(KeywordId(rng.random_range(0..ds.pois.keyword_count() as u32)));
    }
    Some(QueryParams {
        q,
        keywords,
        k: rng.random_range(3..=4),
        d: rng.random_range(1..=3),
        omega: rng.random_range(0.05..0.5),
        pi: rng.random_range(0.05..0.5),
        theta: rng.random_range(0.05..0.6),
        sigma: rng.random_range(5.0..40.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let cfg = SmallConfig::default();
        let a = small_instance(&cfg);
        assert_eq!(a, small_instance(&cfg));
        assert_eq!(a.user_count(), 30);
        a.road.ensure_connected().unwrap();
        assert!(a.pois.poi_count() <= 15);
    }
}
