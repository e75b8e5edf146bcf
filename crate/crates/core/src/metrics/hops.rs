use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Skeleton, UserId};

/// Sentinel for "no path".
pub const UNREACHABLE: u32 = u32::MAX;

pub fn bfs_hops(s: &Skeleton, src: UserId) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; s.user_count()];
    let mut queue = VecDeque::new();
    dist[src.index()] = 0;
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = dist[u.index()];
        for &v in s.neighbors(u) {
            if dist[v.index()] == UNREACHABLE {
                dist[v.index()] = du + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

pub fn hop_distance(s: &Skeleton, a: UserId, b: UserId) -> Result<u32> {
    for x in [a, b] {
        if x.index() >= s.user_count() {
            return Err(Error::UnknownUser(x.to_string()));
        }
    }
    Ok(bfs_hops(s, a)[b.index()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_and_gap() {
        let s = Skeleton::from_pairs(4, &[(0, 1), (1, 2)]);
        assert_eq!(hop_distance(&s, UserId(0), UserId(0)).unwrap(), 0);
        assert_eq!(hop_distance(&s, UserId(0), UserId(2)).unwrap(), 2);
        assert_eq!(hop_distance(&s, UserId(0), UserId(3)).unwrap(), UNREACHABLE);
    }
}
