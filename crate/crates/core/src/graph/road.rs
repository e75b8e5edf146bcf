use serde::{Deserialize, Serialize};

use super::{NameTable, VertexId};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

/// Undirected planar road graph with lengths.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoadNetwork {
    names: NameTable,
    coords: Vec<Point>,
    adj: Vec<Vec<(VertexId, f64)>>,
    edges: usize,
}

impl RoadNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: &str, at: Point) -> Result<VertexId> {
        if !(at.x.is_finite() && at.y.is_finite()) {
            return Err(Error::InvalidParams(format!("vertex {name} has non-finite coordinates")));
        }
        let (i, fresh) = self.names.intern(name);
        if !fresh {
            return Err(Error::DuplicateId(name.to_owned()));
        }
        self.coords.push(at);
        self.adj.push(Vec::new());
        Ok(VertexId(i))
    }

    /// Adds an undirected edge; `length` defaults to the Euclidean distance.
    pub fn add_edge(&mut self, a: VertexId, b: VertexId, length: Option<f64>) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::SelfLoop(self.vertex_name(a).to_owned()));
        }
        let len = length.unwrap_or_else(|| self.coords[a.index()].dist(self.coords[b.index()]));
        if !(len >= 0.0 && len.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "road edge {} - {} has invalid length {len}",
                self.vertex_name(a),
                self.vertex_name(b)
            )));
        }
        let pos = match self.adj[a.index()].binary_search_by_key(&b, |e| e.0) {
            Ok(_) => {
                return Err(Error::DuplicateEdge(
                    self.vertex_name(a).to_owned(),
                    self.vertex_name(b).to_owned(),
                ))
            }
            Err(p) => p,
        };
        self.adj[a.index()].insert(pos, (b, len));
        let pos = self.adj[b.index()].binary_search_by_key(&a, |e| e.0).unwrap_err();
        self.adj[b.index()].insert(pos, (a, len));
        self.edges += 1;
        Ok(())
    }

    pub fn check(&self, v: VertexId) -> Result<()> {
        if v.index() < self.adj.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v.to_string()))
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.names.get(name).map(VertexId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        self.names.name(v.0)
    }

    pub fn coord(&self, v: VertexId) -> Point {
        self.coords[v.index()]
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, f64)] {
        &self.adj[v.index()]
    }

    /// Each undirected edge once with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(a, row)| {
            let a = VertexId::from(a);
            row.iter().filter(move |e| a < e.0).map(move |&(b, l)| (a, b, l))
        })
    }

    pub fn component_count(&self) -> usize {
        let n = self.adj.len();
        let mut seen = vec![false; n];
        let mut comps = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            comps += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adj[v] {
                    if !seen[w.index()] {
                        seen[w.index()] = true;
                        stack.push(w.index());
                    }
                }
            }
        }
        comps
    }

    pub fn ensure_connected(&self) -> Result<()> {
        match self.component_count() {
            0 | 1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_length_is_euclidean() {
        let mut r = RoadNetwork::new();
        let a = r.add_vertex("a", Point::new(0.0, 0.0)).unwrap();
        let b = r.add_vertex("b", Point::new(3.0, 4.0)).unwrap();
        let c = r.add_vertex("c", Point::new(9.0, 9.0)).unwrap();
        r.add_edge(a, b, None).unwrap();
        assert_eq!(r.neighbors(a), &[(b, 5.0)]);
        assert!(matches!(r.ensure_connected(), Err(Error::Disconnected { components: 2 })));
        r.add_edge(c, b, Some(1.0)).unwrap();
        r.ensure_connected().unwrap();
        assert!(r.add_edge(b, c, None).is_err());
        assert!(r.add_vertex("a", Point::new(1.0, 1.0)).is_err());
    }
}
