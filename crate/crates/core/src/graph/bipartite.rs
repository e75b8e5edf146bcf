use std::collections::BTreeMap;

use super::{PoiId, UserId};
use crate::error::{Error, Result};

/// Weighted user → POI check-in edges, indexed from both sides.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BipartiteNetwork {
    by_user: Vec<BTreeMap<PoiId, f64>>,
    by_poi: Vec<BTreeMap<UserId, f64>>,
    edges: usize,
}

impl BipartiteNetwork {
    pub fn new(users: usize, pois: usize) -> Self {
        BipartiteNetwork {
            by_user: vec![BTreeMap::new(); users],
            by_poi: vec![BTreeMap::new(); pois],
            edges: 0,
        }
    }

    fn check(&self, u: UserId, p: PoiId) -> Result<()> {
        if u.index() >= self.by_user.len() {
            return Err(Error::UnknownUser(u.to_string()));
        }
        if p.index() >= self.by_poi.len() {
            return Err(Error::UnknownPoi(p.to_string()));
        }
        Ok(())
    }

    /// Inserts a new edge. Rejects repeats and nonpositive frequencies.
    pub fn add_checkin(&mut self, u: UserId, p: PoiId, f: f64) -> Result<()> {
        self.check(u, p)?;
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::NonPositiveFrequency {
                user: u.to_string(),
                poi: p.to_string(),
                freq: f,
            });
        }
        if self.by_user[u.index()].contains_key(&p) {
            return Err(Error::DuplicateEdge(u.to_string(), p.to_string()));
        }
        self.set_frequency(u, p, f)?;
        Ok(())
    }

    /// Sets `f_{u,p}`; zero deletes the edge. Returns the previous frequency (0 if absent).
    pub fn set_frequency(&mut self, u: UserId, p: PoiId, f: f64) -> Result<f64> {
        self.check(u, p)?;
        if !(f >= 0.0 && f.is_finite()) {
            return Err(Error::NonPositiveFrequency {
                user: u.to_string(),
                poi: p.to_string(),
                freq: f,
            });
        }
        let prev = if f > 0.0 {
            self.by_poi[p.index()].insert(u, f);
            self.by_user[u.index()].insert(p, f)
        } else {
            self.by_poi[p.index()].remove(&u);
            self.by_user[u.index()].remove(&p)
        };
        match (prev.is_some(), f > 0.0) {
            (false, true) => self.edges += 1,
            (true, false) => self.edges -= 1,
            _ => {}
        }
        Ok(prev.unwrap_or(0.0))
    }

    pub fn frequency(&self, u: UserId, p: PoiId) -> f64 {
        self.by_user[u.index()].get(&p).copied().unwrap_or(0.0)
    }

    pub fn checkins(&self, u: UserId) -> &BTreeMap<PoiId, f64> {
        &self.by_user[u.index()]
    }

    pub fn visitors(&self, p: PoiId) -> &BTreeMap<UserId, f64> {
        &self.by_poi[p.index()]
    }

    /// `u.L`: the POIs `u` has an edge to, ascending.
    pub fn locations(&self, u: UserId) -> impl Iterator<Item = PoiId> + '_ {
        self.by_user[u.index()].keys().copied()
    }

    pub fn user_count(&self) -> usize {
        self.by_user.len()
    }

    pub fn poi_count(&self) -> usize {
        self.by_poi.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn edges(&self) -> impl Iterator<Item = (UserId, PoiId, f64)> + '_ {
        self.by_user
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |(&p, &f)| (UserId::from(u), p, f)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_deletes() {
        let mut b = BipartiteNetwork::new(2, 2);
        b.add_checkin(UserId(0), PoiId(1), 3.0).unwrap();
        assert!(b.add_checkin(UserId(0), PoiId(1), 3.0).is_err());
        assert!(b.add_checkin(UserId(1), PoiId(1), 0.0).is_err());
        assert_eq!(b.edge_count(), 1);
        assert_eq!(b.set_frequency(UserId(0), PoiId(1), 0.0).unwrap(), 3.0);
        assert_eq!(b.edge_count(), 0);
        assert!(b.visitors(PoiId(1)).is_empty());
        assert_eq!(b.locations(UserId(0)).count(), 0);
    }
}
