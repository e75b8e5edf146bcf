use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::graph::{SocialNetwork, UserId};

#[derive(PartialEq)]
struct Best(f64, u32);

impl Eq for Best {}

impl PartialOrd for Best {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Best {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then_with(|| o.1.cmp(&self.1))
    }
}

/// Max-product path score from `src` to every user (1 at the source, 0 if unreachable).
///
/// Weights never exceed 1, so a path score can only shrink as it is extended and the
/// first time a user is settled its score is final.
pub fn isf_from(g: &SocialNetwork, src: UserId) -> Vec<f64> {
    let mut best = vec![0.0; g.user_count()];
    let mut done = vec![false; g.user_count()];
    let mut heap = BinaryHeap::new();
    best[src.index()] = 1.0;
    heap.push(Best(1.0, src.0));
    while let Some(Best(s, u)) = heap.pop() {
        if done[u as usize] {
            continue;
        }
        done[u as usize] = true;
        for &(v, w) in g.out_edges(UserId(u)) {
            let c = s * w;
            if c > best[v.index()] {
                best[v.index()] = c;
                heap.push(Best(c, v.0));
            }
        }
    }
    best
}

pub fn isf(g: &SocialNetwork, u: UserId, v: UserId) -> Result<f64> {
    g.check(u)?;
    g.check(v)?;
    if u == v {
        return Ok(1.0);
    }
    Ok(isf_from(g, u)[v.index()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diamond() {
        let mut g = SocialNetwork::with_users(4);
        let (u, a, b, v) = (UserId(0), UserId(1), UserId(2), UserId(3));
        g.add_edge(u, a, 0.9).unwrap();
        g.add_edge(a, v, 0.9).unwrap();
        g.add_edge(u, b, 0.5).unwrap();
        g.add_edge(b, v, 0.99).unwrap();
        assert!((isf(&g, u, v).unwrap() - 0.81).abs() < 1e-12);
        assert_eq!(isf(&g, v, u).unwrap(), 0.0);
        assert_eq!(isf(&g, a, a).unwrap(), 1.0);
        assert!(isf(&g, u, UserId(9)).is_err());
    }

    #[test]
    fn single_edge() {
        let mut g = SocialNetwork::with_users(2);
        g.add_edge(UserId(0), UserId(1), 0.5).unwrap();
        assert_eq!(isf(&g, UserId(0), UserId(1)).unwrap(), 0.5);
    }
}
