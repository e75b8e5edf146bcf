use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Dataset, PoiId, Skeleton, UserId, VertexId};
use crate::metrics::{bfs_hops, road_sssp, UNREACHABLE};

/// Which way pivot refinement pushes its objective.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[default]
    Maximize,
    Minimize,
}

impl Direction {
    fn better(self, new: f64, old: f64) -> bool {
        match self {
            Direction::Maximize => new > old,
            Direction::Minimize => new < old,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotConfig {
    pub social: usize,
    pub road: usize,
    pub iters: usize,
    pub sample_pairs: usize,
    pub seed: u64,
    pub direction: Direction,
}

impl Default for PivotConfig {
    fn default() -> Self {
        PivotConfig {
            social: 8,
            road: 8,
            iters: 200,
            sample_pairs: 1000,
            seed: 42,
            direction: Direction::Maximize,
        }
    }
}

/// Seeded random `count` distinct indices below `n`.
pub fn initial_pivots(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    sample(rng, n, count.min(n)).into_vec()
}

/// Unordered user pairs; every pair when there are at most `budget` of them.
pub fn social_pairs(n: usize, budget: usize, rng: &mut ChaCha8Rng) -> Vec<(UserId, UserId)> {
    if n < 2 {
        return Vec::new();
    }
    if n * (n - 1) / 2 <= budget {
        return (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (UserId::from(a), UserId::from(b))))
            .collect();
    }
    (0..budget)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (UserId::from(a), UserId::from(b))
        })
        .collect()
}

/// Sum over pairs of the pivot lower bound on their hop distance.
pub fn social_objective(rows: &[Vec<u32>], pairs: &[(UserId, UserId)]) -> f64 {
    pairs
        .iter()
        .map(|&(u, v)| {
            rows.iter()
                .filter_map(|r| {
                    let (a, b) = (r[u.index()], r[v.index()]);
                    (a != UNREACHABLE && b != UNREACHABLE).then(|| a.abs_diff(b))
                })
                .max()
                .unwrap_or(0) as f64
        })
        .sum()
}

/// Random single-swap refinement shared by both pivot kinds.
fn refine<T, R>(
    n: usize,
    count: usize,
    cfg: &PivotConfig,
    rng: &mut ChaCha8Rng,
    mut row: impl FnMut(usize) -> R,
    objective: impl Fn(&[R]) -> f64,
    id: impl Fn(usize) -> T,
) -> Vec<T> {
    let mut set = initial_pivots(n, count, rng);
    if set.is_empty() {
        return Vec::new();
    }
    let mut rows: Vec<R> = set.iter().map(|&p| row(p)).collect();
    let mut cur = objective(&rows);
    if set.len() < n {
        for _ in 0..cfg.iters {
            let i = rng.random_range(0..set.len());
            let c = loop {
                let c = rng.random_range(0..n);
                if !set.contains(&c) {
                    break c;
                }
            };
            let old = std::mem::replace(&mut rows[i], row(c));
            let obj = objective(&rows);
            if cfg.direction.better(obj, cur) {
                cur = obj;
                set[i] = c;
            } else {
                rows[i] = old;
            }
        }
    }
    set.into_iter().map(id).collect()
}

pub fn select_social_pivots(s: &Skeleton, cfg: &PivotConfig) -> Vec<UserId> {
    let n = s.user_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs = social_pairs(n, cfg.sample_pairs, &mut rng);
    refine(
        n,
        cfg.social.max(1),
        cfg,
        &mut rng,
        |p| bfs_hops(s, UserId::from(p)),
        |rows| social_objective(rows, &pairs),
        UserId::from,
    )
}

/// (user, POI) pairs over users with check-ins; all of them when at most `budget`.
pub fn road_pairs(ds: &Dataset, budget: usize, rng: &mut ChaCha8Rng) -> Vec<(UserId, PoiId)> {
    let users: Vec<UserId> = ds.social.users().filter(|&u| !ds.checkins.checkins(u).is_empty()).collect();
    let np = ds.pois.poi_count();
    if users.is_empty() || np == 0 {
        return Vec::new();
    }
    if users.len() * np <= budget {
        return users
            .iter()
            .flat_map(|&u| (0..np).map(move |p| (u, PoiId::from(p))))
            .collect();
    }
    (0..budget)
        .map(|_| (users[rng.random_range(0..users.len())], PoiId::from(rng.random_range(0..np))))
        .collect()
}

/// Sum over pairs of the pivot lower bound on `avg_dist(u, p)`.
pub fn road_objective(ds: &Dataset, rows: &[Vec<f64>], pairs: &[(UserId, PoiId)]) -> f64 {
    pairs
        .iter()
        .map(|&(u, p)| {
            let pv = ds.pois.vertex(p).index();
            let locs = ds.checkins.checkins(u);
            let s: f64 = locs
                .keys()
                .map(|&l| {
                    let lv = ds.pois.vertex(l).index();
                    rows.iter().fold(0.0f64, |m, r| m.max((r[lv] - r[pv]).abs()))
                })
                .sum();
            s / locs.len() as f64
        })
        .sum()
}

pub fn select_road_pivots(ds: &Dataset, cfg: &PivotConfig) -> Vec<VertexId> {
    let n = ds.road.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let pairs = road_pairs(ds, cfg.sample_pairs, &mut rng);
    refine(
        n,
        cfg.road.max(1),
        cfg,
        &mut rng,
        |v| road_sssp(&ds.road, VertexId::from(v)),
        |rows| road_objective(ds, rows, &pairs),
        VertexId::from,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path5() -> Skeleton {
        Skeleton::from_pairs(5, &[(0, 1), (1, 2), (2, 3), (3, 4)])
    }

    fn cfg(count: usize, iters: usize) -> PivotConfig {
        PivotConfig {
            social: count,
            road: count,
            iters,
            ..Default::default()
        }
    }

    #[test]
    fn endpoint_wins_on_a_path() {
        let s = path5();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pairs = social_pairs(5, 1000, &mut rng);
        assert_eq!(pairs.len(), 10);
        let scores: Vec<f64> = (0..5)
            .map(|p| social_objective(&[bfs_hops(&s, UserId(p))], &pairs))
            .collect();
        // an endpoint reproduces every pair's true distance: 4*1 + 3*2 + 2*3 + 1*4
        assert_eq!(scores, vec![20.0, 14.0, 10.0, 14.0, 20.0]);
        let chosen = select_social_pivots(&s, &cfg(1, 60));
        assert!(chosen == vec![UserId(0)] || chosen == vec![UserId(4)]);
    }

    #[test]
    fn zero_iterations_keep_initial_set() {
        let s = path5();
        let c = cfg(2, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        let _ = social_pairs(5, c.sample_pairs, &mut rng);
        let init: Vec<UserId> = initial_pivots(5, 2, &mut rng).into_iter().map(UserId::from).collect();
        assert_eq!(select_social_pivots(&s, &c), init);
    }

    #[test]
    fn saturated_set() {
        let s = path5();
        let mut got = select_social_pivots(&s, &cfg(5, 30));
        got.sort();
        assert_eq!(got, (0..5).map(UserId).collect::<Vec<_>>());
        let mut big = select_social_pivots(&s, &cfg(9, 30));
        big.sort();
        assert_eq!(big.len(), 5);
    }
}
