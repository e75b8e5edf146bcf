use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::graph::{BipartiteNetwork, Dataset, PoiId, PoiTable, RoadNetwork, UserId, VertexId};

#[derive(PartialEq)]
struct Key(f64, u32);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

/// Single-source shortest road distances; unreachable vertices get `f64::INFINITY`.
pub fn road_sssp(r: &RoadNetwork, src: VertexId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; r.vertex_count()];
    let mut heap = BinaryHeap::new();
    dist[src.index()] = 0.0;
    heap.push(Reverse(Key(0.0, src.0)));
    while let Some(Reverse(Key(d, v))) = heap.pop() {
        if d > dist[v as usize] {
            continue;
        }
        for &(w, len) in r.neighbors(VertexId(v)) {
            let nd = d + len;
            if nd < dist[w.index()] {
                dist[w.index()] = nd;
                heap.push(Reverse(Key(nd, w.0)));
            }
        }
    }
    dist
}

pub fn road_distance(r: &RoadNetwork, a: VertexId, b: VertexId) -> Result<f64> {
    r.check(a)?;
    r.check(b)?;
    if a == b {
        return Ok(0.0);
    }
    Ok(road_sssp(r, a)[b.index()])
}

/// Mean road distance from each of `u`'s check-in POIs to `p`, by one Dijkstra from `p`.
pub fn avg_dist(ds: &Dataset, u: UserId, p: PoiId) -> Result<f64> {
    ds.social.check(u)?;
    ds.pois.check(p)?;
    let locs: Vec<PoiId> = ds.checkins.locations(u).collect();
    if locs.is_empty() {
        return Err(Error::NoCheckins(ds.social.user_name(u).to_owned()));
    }
    let dist = road_sssp(&ds.road, ds.pois.vertex(p));
    Ok(locs.iter().map(|&l| dist[ds.pois.vertex(l).index()]).sum::<f64>() / locs.len() as f64)
}

/// Lazily filled POI-to-POI road distance matrix, one Dijkstra per requested row.
#[derive(Debug, Default)]
pub struct PoiDistances {
    rows: Vec<OnceLock<Box<[f64]>>>,
}

impl PoiDistances {
    pub fn new(pois: usize) -> Self {
        PoiDistances {
            rows: (0..pois).map(|_| OnceLock::new()).collect(),
        }
    }

    /// Distances from `p` to every POI.
    pub fn row(&self, road: &RoadNetwork, pois: &PoiTable, p: PoiId) -> &[f64] {
        self.rows[p.index()].get_or_init(|| {
            let d = road_sssp(road, pois.vertex(p));
            pois.pois().map(|o| d[pois.vertex(o).index()]).collect()
        })
    }

    pub fn is_cached(&self, p: PoiId) -> bool {
        self.rows[p.index()].get().is_some()
    }

    pub fn dist(&self, road: &RoadNetwork, pois: &PoiTable, a: PoiId, b: PoiId) -> f64 {
        if let Some(r) = self.rows[b.index()].get() {
            return r[a.index()];
        }
        self.row(road, pois, a)[b.index()]
    }

    /// `avg_dist(u, p)`; `None` when `u` has no check-ins.
    pub fn avg_dist(&self, road: &RoadNetwork, pois: &PoiTable, b: &BipartiteNetwork, u: UserId, p: PoiId) -> Option<f64> {
        let locs = b.checkins(u);
        if locs.is_empty() {
            return None;
        }
        let row = self.row(road, pois, p);
        Some(locs.keys().map(|l| row[l.index()]).sum::<f64>() / locs.len() as f64)
    }
}
