use super::{SocialNetwork, UserId};

/// Undirected simple graph over users: `a`–`b` iff either directed edge exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    adj: Vec<Vec<UserId>>,
}

pub fn undirected_skeleton(g: &SocialNetwork) -> Skeleton {
    let mut adj: Vec<Vec<UserId>> = vec![Vec::new(); g.user_count()];
    for (u, v, _) in g.edges() {
        adj[u.index()].push(v);
        adj[v.index()].push(u);
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    Skeleton { adj }
}

impl Skeleton {
    /// Builds a skeleton directly from undirected pairs. Self-pairs and repeats are ignored.
    pub fn from_pairs(n: usize, pairs: &[(u32, u32)]) -> Self {
        let mut adj: Vec<Vec<UserId>> = vec![Vec::new(); n];
        for &(a, b) in pairs {
            if a != b {
                adj[a as usize].push(UserId(b));
                adj[b as usize].push(UserId(a));
            }
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        Skeleton { adj }
    }

    pub fn user_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: UserId) -> &[UserId] {
        &self.adj[u.index()]
    }

    pub fn degree(&self, u: UserId) -> usize {
        self.adj[u.index()].len()
    }

    pub fn has_edge(&self, a: UserId, b: UserId) -> bool {
        self.adj[a.index()].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Each undirected edge once, as `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(a, row)| {
            let a = UserId::from(a);
            row.iter().filter(move |&&b| a < b).map(move |&b| (a, b))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapse() {
        let mut g = SocialNetwork::with_users(3);
        g.add_edge(UserId(0), UserId(1), 0.5).unwrap();
        g.add_edge(UserId(1), UserId(0), 0.5).unwrap();
        g.add_edge(UserId(2), UserId(1), 0.5).unwrap();
        let s = undirected_skeleton(&g);
        assert_eq!(s.edge_count(), 2);
        assert!(s.has_edge(UserId(1), UserId(2)));
        assert_eq!(s.edges().collect::<Vec<_>>(), vec![(UserId(0), UserId(1)), (UserId(1), UserId(2))]);
        assert_eq!(undirected_skeleton(&SocialNetwork::with_users(4)).edge_count(), 0);
    }
}
