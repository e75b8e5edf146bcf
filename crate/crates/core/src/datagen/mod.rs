//! Seeded synthetic datasets: social graph, Gabriel road network, POIs, check-ins and visit logs.

mod gabriel;
mod small;

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Zipf};
use serde::{Deserialize, Serialize};

pub use gabriel::{blocks, gabriel_brute, gabriel_edges};
pub use small::{small_instance, small_query, SmallConfig};

use crate::error::{Error, Result};
use crate::graph::{BipartiteNetwork, Dataset, Point, PoiId, PoiTable, RoadNetwork, SocialNetwork, UserId, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightDist {
    Uniform,
    Gaussian { mean: f64, sd: f64 },
    /// Gaussian weights, Zipf-distributed degree targets and keyword popularity.
    Skew { zipf_s: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub users: usize,
    /// Inclusive out-degree range.
    pub degree: (usize, usize),
    pub weights: WeightDist,
    /// Chance that a social edge goes to a user with a nearby id.
    pub locality: f64,
    pub road_vertices: usize,
    pub pois: usize,
    pub keywords: usize,
    pub keywords_per_poi: (usize, usize),
    pub checkins_per_user: (usize, usize),
    pub frequency: (u32, u32),
    /// Users with consecutive ids share a home area of this many users.
    pub home_block: usize,
    /// POIs nearest to a home area's center that its users favor.
    pub home_pois: usize,
    /// Chance a check-in goes to a home-area POI.
    pub home_bias: f64,
    pub horizon: Option<i64>,
    pub tau: Option<i64>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 1,
            users: 1000,
            degree: (8, 40),
            weights: WeightDist::Gaussian { mean: 0.5, sd: 0.15 },
            locality: 0.7,
            road_vertices: 1000,
            pois: 500,
            keywords: 50,
            keywords_per_poi: (1, 8),
            checkins_per_user: (1, 10),
            frequency: (1, 10),
            home_block: 40,
            home_pois: 25,
            home_bias: 0.8,
            horizon: None,
            tau: None,
        }
    }
}

const SKEW_SD: f64 = 0.15;
const MIN_WEIGHT: f64 = 1e-3;

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_owned()));
        if self.users == 0 {
            return bad("users must be positive");
        }
        if self.degree.0 == 0 || self.degree.0 > self.degree.1 {
            return bad("degree range must be nonempty and start at 1 or more");
        }
        if self.road_vertices < 2 {
            return bad("road needs at least 2 vertices");
        }
        if self.pois == 0 || self.keywords == 0 {
            return bad("pois and keywords must be positive");
        }
        for (lo, hi, what) in [
            (self.keywords_per_poi.0, self.keywords_per_poi.1, "keywords per poi"),
            (self.checkins_per_user.0, self.checkins_per_user.1, "checkins per user"),
            (self.frequency.0 as usize, self.frequency.1 as usize, "frequency"),
        ] {
            if lo == 0 || lo > hi {
                return bad(&format!("{what} range must be nonempty and positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.locality) || !(0.0..=1.0).contains(&self.home_bias) {
            return bad("locality and home bias are probabilities");
        }
        if let WeightDist::Gaussian { sd, .. } = self.weights {
            if !(sd >= 0.0) {
                return bad("gaussian sd must be nonnegative");
            }
        }
        if let WeightDist::Skew { zipf_s } = self.weights {
            if !(zipf_s >= 0.0) {
                return bad("zipf exponent must be nonnegative");
            }
        }
        if matches!(self.horizon, Some(h) if h < 1) || matches!(self.tau, Some(t) if t < 1) {
            return bad("horizon and tau must be positive");
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    fn zipf_s(&self) -> Option<f64> {
        match self.weights {
            WeightDist::Skew { zipf_s } => Some(zipf_s),
            _ => None,
        }
    }

    fn weight(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (mean, sd) = match self.weights {
            WeightDist::Uniform => return 1.0 - rng.random::<f64>(),
            WeightDist::Gaussian { mean, sd } => (mean, sd),
            WeightDist::Skew { .. } => (0.5, SKEW_SD),
        };
        let x = Normal::new(mean, sd).expect("validated sd").sample(rng);
        x.clamp(MIN_WEIGHT, 1.0)
    }
}

/// A value in `lo..=hi`, Zipf-skewed toward `lo` when `s` is given.
fn ranged(rng: &mut ChaCha8Rng, lo: usize, hi: usize, s: Option<f64>) -> usize {
    match s {
        Some(s) if hi > lo => {
            let z = Zipf::new((hi - lo + 1) as f64, s).expect("valid zipf").sample(rng);
            lo + z as usize - 1
        }
        _ => rng.random_range(lo..=hi),
    }
}

/// Weakly connected directed graph: a random spanning tree plus out-edges up to each user's target.
pub fn gen_social(cfg: &GenConfig) -> SocialNetwork {
    let n = cfg.users;
    let mut g = SocialNetwork::with_users(n);
    if n < 2 {
        return g;
    }
    let mut rng = cfg.rng(1);
    let (lo, hi) = (cfg.degree.0.min(n - 1), cfg.degree.1.min(n - 1));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for i in 1..n {
        let (u, v) = (order[i], order[rng.random_range(0..i)]);
        let w = cfg.weight(&mut rng);
        g.add_edge(UserId::from(u), UserId::from(v), w).expect("fresh tree edge");
    }
    let window = hi.max(10) as i64;
    for u in 0..n {
        let target = ranged(&mut rng, lo, hi, cfg.zipf_s());
        let uid = UserId::from(u);
        let mut tries = 0;
        while g.out_edges(uid).len() < target && tries < 50 * target {
            tries += 1;
            let v = if rng.random::<f64>() < cfg.locality {
                let mut off = rng.random_range(-window..window);
                if off >= 0 {
                    off += 1;
                }
                (u as i64 + off).rem_euclid(n as i64) as usize
            } else {
                rng.random_range(0..n)
            };
            let vid = UserId::from(v);
            if v == u || g.has_edge(uid, vid) {
                continue;
            }
            let w = cfg.weight(&mut rng);
            g.add_edge(uid, vid, w).expect("checked edge");
        }
        // a dense tail can starve the random draws; fill deterministically
        let mut v = (u + 1) % n;
        while g.out_edges(uid).len() < target {
            if v != u && !g.has_edge(uid, UserId::from(v)) {
                let w = cfg.weight(&mut rng);
                g.add_edge(uid, UserId::from(v), w).expect("checked edge");
            }
            v = (v + 1) % n;
        }
    }
    g
}

fn uniform_points(rng: &mut ChaCha8Rng, n: usize, side: f64) -> Vec<Point> {
    let mut seen = HashSet::new();
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let p = Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side));
        if seen.insert((p.x.to_bits(), p.y.to_bits())) {
            pts.push(p);
        }
    }
    pts
}

/// Road network from a Gabriel graph over `pts`, vertices named `r0`, `r1`, ...
pub fn road_from_points(pts: &[Point]) -> RoadNetwork {
    let mut road = RoadNetwork::new();
    for (i, &p) in pts.iter().enumerate() {
        road.add_vertex(&format!("r{i}"), p).expect("fresh vertex");
    }
    for (a, b) in gabriel_edges(pts) {
        road.add_edge(VertexId::from(a), VertexId::from(b), None).expect("gabriel edge");
    }
    road
}

/// Gabriel road network over uniform points in `[0,100]²` and keyword-tagged POIs on its vertices.
pub fn gen_road(cfg: &GenConfig) -> (RoadNetwork, PoiTable) {
    let mut rng = cfg.rng(2);
    let pts = uniform_points(&mut rng, cfg.road_vertices, 100.0);
    let road = road_from_points(&pts);
    let mut pois = PoiTable::new();
    let kmax = cfg.keywords_per_poi.1.min(cfg.keywords);
    let kmin = cfg.keywords_per_poi.0.min(kmax);
    for j in 0..cfg.pois {
        let v = VertexId::from(rng.random_range(0..cfg.road_vertices));
        let count = rng.random_range(kmin..=kmax);
        let mut kws = BTreeSet::new();
        while kws.len() < count {
            kws.insert(ranged(&mut rng, 0, cfg.keywords - 1, cfg.zipf_s()));
        }
        let names: Vec<String> = kws.iter().map(|k| format!("k{k}")).collect();
        pois.add_poi(&format!("p{j}"), v, &names).expect("fresh poi");
    }
    (road, pois)
}

/// Check-ins: each user visits a uniform number of distinct POIs, mostly near its home area.
pub fn gen_bipartite(cfg: &GenConfig, users: usize, road: &RoadNetwork, pois: &PoiTable) -> BipartiteNetwork {
    let mut rng = cfg.rng(3);
    let np = pois.poi_count();
    let mut b = BipartiteNetwork::new(users, np);
    if np == 0 {
        return b;
    }
    let block = cfg.home_block.max(1);
    let near: Vec<Vec<PoiId>> = (0..users.div_ceil(block))
        .map(|_| {
            let c = road.coord(VertexId::from(rng.random_range(0..road.vertex_count())));
            let mut all: Vec<PoiId> = pois.pois().collect();
            all.sort_by(|&x, &y| {
                c.dist(road.coord(pois.vertex(x)))
                    .total_cmp(&c.dist(road.coord(pois.vertex(y))))
                    .then(x.cmp(&y))
            });
            all.truncate(cfg.home_pois.max(1));
            all
        })
        .collect();
    let (lo, hi) = (cfg.checkins_per_user.0.min(np), cfg.checkins_per_user.1.min(np));
    for u in 0..users {
        let count = rng.random_range(lo..=hi);
        let home = &near[u / block];
        let mut chosen = BTreeSet::new();
        while chosen.len() < count {
            let p = if rng.random::<f64>() < cfg.home_bias {
                home[rng.random_range(0..home.len())]
            } else {
                PoiId::from(rng.random_range(0..np))
            };
            chosen.insert(p);
        }
        for p in chosen {
            let f = rng.random_range(cfg.frequency.0..=cfg.frequency.1) as f64;
            b.add_checkin(UserId::from(u), p, f).expect("fresh checkin");
        }
    }
    b
}

/// Expands each check-in of frequency `f` into `f` visits at uniform times in `[0, horizon)`,
/// sorted by time, then user, then POI.
pub fn gen_temporal(cfg: &GenConfig, b: &BipartiteNetwork, horizon: i64) -> Vec<(UserId, PoiId, i64)> {
    let mut rng = cfg.rng(4);
    let mut out = Vec::new();
    for (u, p, f) in b.edges() {
        for _ in 0..f as u64 {
            out.push((u, p, rng.random_range(0..horizon)));
        }
    }
    out.sort_by_key(|&(u, p, t)| (t, u, p));
    out
}

pub fn generate(cfg: &GenConfig) -> Result<Dataset> {
    cfg.validate()?;
    let social = gen_social(cfg);
    let (road, pois) = gen_road(cfg);
    let checkins = gen_bipartite(cfg, social.user_count(), &road, &pois);
    Ok(Dataset {
        social,
        road,
        pois,
        checkins,
    })
}

/// Reads a whitespace-separated edge list (`a b` per line, `#` or `%` comments), keeping the
/// first occurrence of each directed pair and dropping self-loops. Weights come from `cfg`.
pub fn import_edge_list(text: &str, cfg: &GenConfig) -> Result<SocialNetwork> {
    let mut rng = cfg.rng(5);
    let mut g = SocialNetwork::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(a), Some(b)) = (it.next(), it.next()) else {
            return Err(Error::Parse {
                path: "<edge list>".into(),
                line: i + 1,
                msg: "expected two endpoints".into(),
            });
        };
        let (a, b) = (g.add_user(a), g.add_user(b));
        if a != b && !g.has_edge(a, b) {
            let w = cfg.weight(&mut rng);
            g.add_edge(a, b, w)?;
        }
    }
    Ok(g)
}

/// An imported social graph with synthetic road, POIs and check-ins around it.
pub fn augment(social: SocialNetwork, cfg: &GenConfig) -> Result<Dataset> {
    cfg.validate()?;
    let (road, pois) = gen_road(cfg);
    let checkins = gen_bipartite(cfg, social.user_count(), &road, &pois);
    Ok(Dataset {
        social,
        road,
        pois,
        checkins,
    })
}

/// What `gen` wrote, for reproducing it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: GenConfig,
    pub fingerprint: String,
    pub users: usize,
    pub social_edges: usize,
    pub road_vertices: usize,
    pub road_edges: usize,
    pub pois: usize,
    pub checkins: usize,
    pub visits: Option<usize>,
}

impl Manifest {
    pub fn new(cfg: &GenConfig, ds: &Dataset, visits: Option<usize>) -> Manifest {
        Manifest {
            config: cfg.clone(),
            fingerprint: ds.fingerprint(),
            users: ds.social.user_count(),
            social_edges: ds.social.edge_count(),
            road_vertices: ds.road.vertex_count(),
            road_edges: ds.road.edge_count(),
            pois: ds.pois.poi_count(),
            checkins: ds.checkins.edge_count(),
            visits,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> GenConfig {
        GenConfig {
            users: 200,
            road_vertices: 150,
            pois: 80,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate(&small_cfg()).unwrap();
        let b = generate(&small_cfg()).unwrap();
        assert_eq!(a, b);
        let c = generate(&GenConfig { seed: 2, ..small_cfg() }).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn degrees_clipped_for_tiny_graphs() {
        let g = gen_social(&GenConfig {
            users: 10,
            ..Default::default()
        });
        for u in g.users() {
            assert!((8..=9).contains(&g.out_edges(u).len()));
        }
    }

    #[test]
    fn social_ranges_and_connectivity() {
        let cfg = small_cfg();
        let g = gen_social(&cfg);
        for u in g.users() {
            let d = g.out_edges(u).len();
            assert!((1..=40).contains(&d) || d == 0, "degree {d}");
            for &(_, w) in g.out_edges(u) {
                assert!(w > 0.0 && w <= 1.0);
            }
        }
        let s = crate::graph::undirected_skeleton(&g);
        let row = crate::metrics::bfs_hops(&s, UserId(0));
        assert!(row.iter().all(|&h| h != crate::metrics::UNREACHABLE));
    }

    #[test]
    fn gaussian_weight_mean() {
        let cfg = GenConfig::default();
        let mut rng = cfg.rng(9);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| cfg.weight(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = 0.15 / (n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn checkin_ranges_and_road() {
        let ds = generate(&small_cfg()).unwrap();
        ds.road.ensure_connected().unwrap();
        for u in ds.social.users() {
            let row = ds.checkins.checkins(u);
            assert!((1..=10).contains(&row.len()));
            assert!(row.values().all(|&f| (1.0..=10.0).contains(&f) && f.fract() == 0.0));
        }
        for p in ds.pois.pois() {
            assert!((1..=8).contains(&ds.pois.keywords(p).len()));
        }
    }

    #[test]
    fn file_round_trip() {
        let ds = generate(&small_cfg()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        ds.write_dir(dir.path()).unwrap();
        let back = Dataset::load_dir(dir.path()).unwrap();
        assert_eq!(back.fingerprint(), ds.fingerprint());
    }

    #[test]
    fn temporal_expansion_counts() {
        let cfg = small_cfg();
        let ds = generate(&cfg).unwrap();
        let ev = gen_temporal(&cfg, &ds.checkins, 60);
        let total: f64 = ds.checkins.edges().map(|e| e.2).sum();
        assert_eq!(ev.len(), total as usize);
        assert!(ev.iter().all(|e| (0..60).contains(&e.2)));
        assert!(ev.windows(2).all(|w| w[0].2 <= w[1].2));
        assert_eq!(ev, gen_temporal(&cfg, &ds.checkins, 60));
    }

    #[test]
    fn skew_generation_and_import() {
        let cfg = GenConfig {
            weights: WeightDist::Skew { zipf_s: 0.8 },
            ..small_cfg()
        };
        let ds = generate(&cfg).unwrap();
        assert_eq!(ds.user_count(), 200);
        let g = import_edge_list("# c\n1 2\n2 3\n2 3\n3 3\n3 1\n", &cfg).unwrap();
        assert_eq!((g.user_count(), g.edge_count()), (3, 3));
        assert!(import_edge_list("1\n", &cfg).is_err());
        let aug = augment(g, &cfg).unwrap();
        assert_eq!(aug.checkins.user_count(), 3);
    }
}
