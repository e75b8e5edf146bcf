//! Exhaustive reference answer for small instances.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{PoiId, QueryParams, UserId};
use crate::metrics::{bfs_hops, canonical_pois, isf_from, verify_keyword_core, Networks, Thresholds};

use super::refine::better;

/// Most users (besides q) the oracle will enumerate subsets of.
pub const ORACLE_LIMIT: usize = 25;

/// Every subset of the users near q is tried, largest first.
///
/// The pool holds users within `d` hops of q whose influence from q reaches theta and
/// whose visits to matching POIs within sigma of both themselves and q add up to omega;
/// nobody else can be a member. The guard applies to that pool.
pub fn brute_force_oracle(net: &Networks, params: &QueryParams) -> Result<crate::metrics::CommunityAnswer> {
    net.data.social.check(params.q)?;
    let th = Thresholds::resolve(&net.data.checkins, params)?;
    let q = params.q;
    let isf_q = isf_from(&net.data.social, q);
    let hops = bfs_hops(&net.skeleton, q);
    let near = |u: UserId, p: PoiId| net.avg_dist(u, p).is_some_and(|x| x <= params.sigma);
    let reach = |u: UserId| -> f64 {
        net.data
            .checkins
            .checkins(u)
            .iter()
            .filter(|(&p, _)| net.data.pois.matches(p, th.keywords()) && near(u, p) && near(q, p))
            .map(|(_, &f)| f)
            .sum()
    };
    if reach(q) < th.omega_abs {
        return Ok(Default::default());
    }
    let pool: Vec<UserId> = net
        .data
        .social
        .users()
        .filter(|&u| u != q && hops[u.index()] <= params.d && isf_q[u.index()] >= params.theta && reach(u) >= th.omega_abs)
        .collect();
    if pool.len() > ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge {
            users: pool.len(),
            limit: ORACLE_LIMIT,
        });
    }
    // bit i is pool[i]; q is the top bit
    let m = pool.len();
    let qbit = 1u32 << m;
    let mut adj = vec![0u32; m + 1];
    let all: Vec<UserId> = pool.iter().copied().chain([q]).collect();
    for (i, &a) in all.iter().enumerate() {
        for (j, &b) in all.iter().enumerate() {
            if i != j && net.skeleton.has_edge(a, b) {
                adj[i] |= 1 << j;
            }
        }
    }
    let need = params.k - 2;
    for size in (1..=m).rev() {
        let mut best: Option<(BTreeSet<UserId>, BTreeSet<PoiId>)> = None;
        let mut mask: u32 = (1u32 << size) - 1;
        while mask < qbit {
            let s = mask | qbit;
            if degrees_ok(&adj, s, need + 1) && truss_ok(&adj, s, m, need, params.d) {
                let users: BTreeSet<UserId> = (0..=m).filter(|&i| s >> i & 1 == 1).map(|i| all[i]).collect();
                let vp = canonical_pois(net, &users, &th);
                if verify_keyword_core(&net.data.checkins, &net.data.pois, &users, &vp, th.keywords(), th.omega_abs, th.pi_abs) {
                    let cand = (users, vp);
                    if best.as_ref().is_none_or(|b| better(&cand, b)) {
                        best = Some(cand);
                    }
                }
            }
            mask = next_combination(mask);
        }
        if let Some((users, pois)) = best {
            return Ok(crate::metrics::CommunityAnswer { users, pois });
        }
    }
    Ok(Default::default())
}

/// Next larger integer with the same number of set bits.
fn next_combination(x: u32) -> u32 {
    let c = x & x.wrapping_neg();
    let r = x + c;
    (((r ^ x) >> 2) / c) | r
}

/// Every member of `s` has at least `min` neighbours inside `s`.
fn degrees_ok(adj: &[u32], s: u32, min: u32) -> bool {
    let mut rest = s;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if (adj[i] & s).count_ones() < min {
            return false;
        }
    }
    true
}

/// Bitmask k-truss peel of the set `s`, then every member within `d` hops of q (bit `qi`).
fn truss_ok(adj: &[u32], s: u32, qi: usize, need: u32, d: u32) -> bool {
    let mut live: Vec<u32> = (0..adj.len()).map(|i| if s >> i & 1 == 1 { adj[i] & s } else { 0 }).collect();
    loop {
        let mut changed = false;
        for a in 0..live.len() {
            let mut rest = live[a] & !((2u32 << a) - 1);
            while rest != 0 {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if (live[a] & live[b]).count_ones() < need {
                    live[a] &= !(1 << b);
                    live[b] &= !(1 << a);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut reached = 1u32 << qi;
    let mut frontier = reached;
    for _ in 0..d {
        let mut next = 0;
        let mut f = frontier;
        while f != 0 {
            let i = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= live[i];
        }
        frontier = next & !reached;
        reached |= next;
        if frontier == 0 {
            break;
        }
    }
    reached == s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_walk_in_order() {
        let mut x = 0b0111u32;
        let mut seen = vec![x];
        while x < 0b10000 {
            x = next_combination(x);
            if x < 0b10000 {
                seen.push(x);
            }
        }
        assert_eq!(seen, vec![0b0111, 0b1011, 0b1101, 0b1110]);
    }

    #[test]
    fn bitmask_truss() {
        // triangle 0,1,2 (q = 2) plus pendant 3 on 0
        let adj = vec![0b1110, 0b0101, 0b0011, 0b0001];
        assert!(truss_ok(&adj, 0b0111, 2, 1, 1));
        assert!(!truss_ok(&adj, 0b1111, 2, 1, 5));
        assert!(!truss_ok(&adj, 0b0110, 2, 1, 1));
    }
}
