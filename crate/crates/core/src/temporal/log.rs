use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, PoiId, UserId};

/// Timestamped visits per user, in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalVisitLog {
    per_user: Vec<Vec<(PoiId, i64)>>,
}

/// Visits of `u` to `p` with `t - tau + 1 <= t' <= t`.
pub fn window_frequency(log: &TemporalVisitLog, u: UserId, p: PoiId, t: i64, tau: i64) -> u64 {
    log.per_user
        .get(u.index())
        .map_or(0, |es| es.iter().filter(|&&(q, s)| q == p && t - tau < s && s <= t).count() as u64)
}

impl TemporalVisitLog {
    pub fn new(users: usize) -> Self {
        TemporalVisitLog {
            per_user: vec![Vec::new(); users],
        }
    }

    pub fn from_events(users: usize, events: &[(UserId, PoiId, i64)]) -> Self {
        let mut log = Self::new(users);
        for &(u, p, t) in events {
            log.push(u, p, t);
        }
        log
    }

    pub fn push(&mut self, u: UserId, p: PoiId, t: i64) {
        if self.per_user.len() <= u.index() {
            self.per_user.resize(u.index() + 1, Vec::new());
        }
        self.per_user[u.index()].push((p, t));
    }

    /// Removes one matching event; false if there is none.
    pub fn remove(&mut self, u: UserId, p: PoiId, t: i64) -> bool {
        let Some(es) = self.per_user.get_mut(u.index()) else {
            return false;
        };
        match es.iter().position(|&e| e == (p, t)) {
            Some(i) => {
                es.remove(i);
                true
            }
            None => false,
        }
    }

    pub fn events(&self) -> impl Iterator<Item = (UserId, PoiId, i64)> + '_ {
        self.per_user
            .iter()
            .enumerate()
            .flat_map(|(u, es)| es.iter().map(move |&(p, t)| (UserId::from(u), p, t)))
    }

    pub fn len(&self) -> usize {
        self.per_user.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Events older than `cutoff`, in log order.
    pub fn expired(&self, cutoff: i64) -> Vec<(UserId, PoiId, i64)> {
        self.events().filter(|e| e.2 < cutoff).collect()
    }

    /// Drops events older than `cutoff`.
    pub fn expire(&mut self, cutoff: i64) {
        self.per_user.iter_mut().for_each(|es| es.retain(|e| e.1 >= cutoff));
    }

    /// Drops events after `now`.
    pub fn retain_until(&mut self, now: i64) {
        self.per_user.iter_mut().for_each(|es| es.retain(|e| e.1 <= now));
    }

    /// Window counts of every POI `u` visited.
    pub fn counts(&self, u: UserId, now: i64, tau: i64) -> BTreeMap<PoiId, u64> {
        let mut out = BTreeMap::new();
        if let Some(es) = self.per_user.get(u.index()) {
            for &(p, t) in es {
                if now - tau < t && t <= now {
                    *out.entry(p).or_default() += 1;
                }
            }
        }
        out
    }

    pub fn check(&self, ds: &Dataset) -> Result<()> {
        if self.per_user.len() > ds.social.user_count() {
            return Err(Error::UnknownUser(self.per_user.len().saturating_sub(1).to_string()));
        }
        for (u, p, t) in self.events() {
            ds.pois.check(p)?;
            if t < 0 {
                return Err(Error::InvalidParams(format!("negative timestamp {t} for {u}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_edges() {
        let (u, p) = (UserId(0), PoiId(0));
        assert_eq!(window_frequency(&TemporalVisitLog::new(1), u, p, 50, 30), 0);
        let log = TemporalVisitLog::from_events(1, &[(u, p, 48), (u, p, 49), (u, p, 50)]);
        assert_eq!(window_frequency(&log, u, p, 50, 30), 3);
        assert_eq!(window_frequency(&log, u, p, 50, 2), 2);
        assert_eq!(window_frequency(&log, u, p, 77, 30), 3);
        assert_eq!(window_frequency(&log, u, p, 79, 30), 1);
        assert_eq!(window_frequency(&log, u, p, 80, 30), 0);
        assert_eq!(window_frequency(&log, u, PoiId(1), 50, 30), 0);
    }
}
