use super::{NameTable, UserId};
use crate::error::{Error, Result};

/// Directed influence graph. Adjacency lists are kept sorted by neighbor id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SocialNetwork {
    users: NameTable,
    out: Vec<Vec<(UserId, f64)>>,
    inn: Vec<Vec<(UserId, f64)>>,
    edges: usize,
}

impl SocialNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n` users named `u0`, `u1`, ...
    pub fn with_users(n: usize) -> Self {
        let mut g = Self::new();
        for i in 0..n {
            g.add_user(&format!("u{i}"));
        }
        g
    }

    /// Declares a user; returns the existing id when already declared.
    pub fn add_user(&mut self, name: &str) -> UserId {
        let (i, fresh) = self.users.intern(name);
        if fresh {
            self.out.push(Vec::new());
            self.inn.push(Vec::new());
        }
        UserId(i)
    }

    pub fn add_edge(&mut self, u: UserId, v: UserId, w: f64) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(Error::SelfLoop(self.user_name(u).to_owned()));
        }
        if !(w > 0.0 && w <= 1.0) {
            return Err(Error::InvalidWeight {
                from: self.user_name(u).to_owned(),
                to: self.user_name(v).to_owned(),
                weight: w,
            });
        }
        let pos = match self.out[u.index()].binary_search_by_key(&v, |e| e.0) {
            Ok(_) => {
                return Err(Error::DuplicateEdge(
                    self.user_name(u).to_owned(),
                    self.user_name(v).to_owned(),
                ))
            }
            Err(p) => p,
        };
        self.out[u.index()].insert(pos, (v, w));
        let pos = self.inn[v.index()]
            .binary_search_by_key(&u, |e| e.0)
            .unwrap_err();
        self.inn[v.index()].insert(pos, (u, w));
        self.edges += 1;
        Ok(())
    }

    pub fn check(&self, u: UserId) -> Result<()> {
        if u.index() < self.out.len() {
            Ok(())
        } else {
            Err(Error::UnknownUser(u.to_string()))
        }
    }

    pub fn user_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn user_id(&self, name: &str) -> Option<UserId> {
        self.users.get(name).map(UserId)
    }

    pub fn require_user(&self, name: &str) -> Result<UserId> {
        self.user_id(name)
            .ok_or_else(|| Error::UnknownUser(name.to_owned()))
    }

    pub fn user_name(&self, u: UserId) -> &str {
        self.users.name(u.0)
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        (0..self.out.len()).map(UserId::from)
    }

    pub fn out_edges(&self, u: UserId) -> &[(UserId, f64)] {
        &self.out[u.index()]
    }

    pub fn in_edges(&self, u: UserId) -> &[(UserId, f64)] {
        &self.inn[u.index()]
    }

    pub fn weight(&self, u: UserId, v: UserId) -> Option<f64> {
        let row = &self.out[u.index()];
        row.binary_search_by_key(&v, |e| e.0).ok().map(|i| row[i].1)
    }

    pub fn has_edge(&self, u: UserId, v: UserId) -> bool {
        self.weight(u, v).is_some()
    }

    /// All directed edges ordered by (source, target).
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId, f64)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&(v, w)| (UserId::from(u), v, w)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        let mut g = SocialNetwork::with_users(2);
        let (a, b) = (UserId(0), UserId(1));
        assert!(matches!(g.add_edge(a, a, 0.5), Err(Error::SelfLoop(_))));
        assert!(matches!(g.add_edge(a, b, 1.5), Err(Error::InvalidWeight { .. })));
        assert!(matches!(g.add_edge(a, b, 0.0), Err(Error::InvalidWeight { .. })));
        g.add_edge(a, b, 1.0).unwrap();
        assert!(matches!(g.add_edge(a, b, 0.2), Err(Error::DuplicateEdge(..))));
        g.add_edge(b, a, 0.3).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.weight(b, a), Some(0.3));
        assert_eq!(g.in_edges(a), &[(b, 0.3)]);
    }
}
