use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::hops::UNREACHABLE;
use crate::graph::{Skeleton, UserId};

fn common(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Support of every skeleton edge inside the subgraph induced by `members`, keyed `(a, b)` with `a < b`.
pub fn edge_support(s: &Skeleton, members: &BTreeSet<UserId>) -> BTreeMap<(UserId, UserId), u32> {
    let local = Induced::new(s, members.iter().copied());
    let mut out = BTreeMap::new();
    for (a, row) in local.adj.iter().enumerate() {
        for &b in row.iter().filter(|&&b| (a as u32) < b) {
            let sup = common(row, &local.adj[b as usize]) as u32;
            out.insert((local.members[a], local.members[b as usize]), sup);
        }
    }
    out
}

/// Support of every skeleton edge in the whole skeleton, aligned with `s.neighbors(u)`.
pub fn full_edge_support(s: &Skeleton) -> Vec<Vec<u32>> {
    let n = s.user_count();
    let mut mark = vec![false; n];
    let mut out: Vec<Vec<u32>> = Vec::with_capacity(n);
    for u in 0..n {
        let nu = s.neighbors(UserId::from(u));
        for v in nu {
            mark[v.index()] = true;
        }
        let row = nu
            .iter()
            .map(|&v| s.neighbors(v).iter().filter(|w| mark[w.index()]).count() as u32)
            .collect();
        for v in nu {
            mark[v.index()] = false;
        }
        out.push(row);
    }
    out
}

/// Subgraph of the skeleton induced by a user set, in local coordinates.
#[derive(Clone, Debug)]
pub struct Induced {
    pub members: Vec<UserId>,
    pub adj: Vec<Vec<u32>>,
}

impl Induced {
    pub fn new(s: &Skeleton, members: impl IntoIterator<Item = UserId>) -> Self {
        let mut members: Vec<UserId> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        let pos: HashMap<UserId, u32> = members.iter().enumerate().map(|(i, &u)| (u, i as u32)).collect();
        let adj = members
            .iter()
            .map(|&u| s.neighbors(u).iter().filter_map(|v| pos.get(v).copied()).collect())
            .collect();
        Induced { members, adj }
    }

    pub fn local(&self, u: UserId) -> Option<u32> {
        self.members.binary_search(&u).ok().map(|i| i as u32)
    }

    /// Removes edges until each remaining edge lies in at least `k - 2` triangles.
    pub fn truss(mut self, k: u32) -> Induced {
        let need = k.saturating_sub(2);
        if need == 0 {
            return self;
        }
        let mut ids: HashMap<(u32, u32), usize> = HashMap::new();
        let mut ends = Vec::new();
        for (a, row) in self.adj.iter().enumerate() {
            for &b in row.iter().filter(|&&b| (a as u32) < b) {
                ids.insert((a as u32, b), ends.len());
                ends.push((a as u32, b));
            }
        }
        let id = |a: u32, b: u32| ids[&(a.min(b), a.max(b))];
        let mut sup: Vec<u32> = ends
            .iter()
            .map(|&(a, b)| common(&self.adj[a as usize], &self.adj[b as usize]) as u32)
            .collect();
        let mut alive = vec![true; ends.len()];
        let mut queued: Vec<bool> = sup.iter().map(|&x| x < need).collect();
        let mut stack: Vec<usize> = (0..ends.len()).filter(|&e| queued[e]).collect();
        while let Some(e) = stack.pop() {
            alive[e] = false;
            let (a, b) = ends[e];
            let (ra, rb) = (&self.adj[a as usize], &self.adj[b as usize]);
            let (mut i, mut j) = (0, 0);
            while i < ra.len() && j < rb.len() {
                match ra[i].cmp(&rb[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        let w = ra[i];
                        let (e1, e2) = (id(a, w), id(b, w));
                        if alive[e1] && alive[e2] {
                            for f in [e1, e2] {
                                sup[f] -= 1;
                                if sup[f] < need && !queued[f] {
                                    queued[f] = true;
                                    stack.push(f);
                                }
                            }
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        for (a, row) in self.adj.iter_mut().enumerate() {
            row.retain(|&b| alive[id(a as u32, b)]);
        }
        self
    }

    pub fn bfs(&self, src: u32) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.members.len()];
        let mut queue = VecDeque::new();
        dist[src as usize] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u as usize] {
                if dist[v as usize] == UNREACHABLE {
                    dist[v as usize] = dist[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Whether `users` can carry a (k,d)-truss containing `q`.
///
/// The community's social part may use any subset of the edges among its users. The
/// best subset is the k-truss of the induced subgraph: it must touch every user, be
/// connected, and keep every user within `d` hops of `q`.
pub fn verify_kd_truss(s: &Skeleton, users: &BTreeSet<UserId>, q: UserId, k: u32, d: u32) -> bool {
    if !users.contains(&q) || users.len() < 2 {
        return false;
    }
    let t = Induced::new(s, users.iter().copied()).truss(k);
    let lq = t.local(q).expect("q is a member");
    t.bfs(lq).iter().all(|&h| h <= d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[u32]) -> BTreeSet<UserId> {
        xs.iter().map(|&x| UserId(x)).collect()
    }

    #[test]
    fn triangle_and_clique_support() {
        let tri = Skeleton::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!(edge_support(&tri, &set(&[0, 1, 2])).values().all(|&s| s == 1));
        let k4 = Skeleton::from_pairs(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let sup = edge_support(&k4, &set(&[0, 1, 2, 3]));
        assert_eq!(sup.len(), 6);
        assert!(sup.values().all(|&s| s == 2));
        assert!(full_edge_support(&k4).iter().flatten().all(|&s| s == 2));
    }

    #[test]
    fn truss_checks() {
        let tri = Skeleton::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]);
        let all = set(&[0, 1, 2]);
        assert!(verify_kd_truss(&tri, &all, UserId(0), 3, 1));
        assert!(!verify_kd_truss(&tri, &all, UserId(0), 4, 1));
        assert!(!verify_kd_truss(&tri, &set(&[0]), UserId(0), 3, 1));
    }

    #[test]
    fn dangling_edge_is_dropped_not_fatal() {
        // triangle 0-1-2 plus pendant 3 hanging off 2: {0,1,2} passes, {0,1,2,3} fails
        let s = Skeleton::from_pairs(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        assert!(verify_kd_truss(&s, &set(&[0, 1, 2]), UserId(0), 3, 1));
        assert!(!verify_kd_truss(&s, &set(&[0, 1, 2, 3]), UserId(0), 3, 3));
        // two triangles sharing vertex 0, plus a chord 1-3
        let b = Skeleton::from_pairs(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4), (1, 3)]);
        assert!(verify_kd_truss(&b, &set(&[0, 1, 2, 3, 4]), UserId(0), 3, 1));
    }
}
