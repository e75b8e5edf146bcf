//! Sliding-window check-in frequencies and batch maintenance of bounds, registered
//! communities and the index tree.

mod log;
mod maintain;


use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use log::{window_frequency, TemporalVisitLog};
pub use maintain::{maintain_index, IndexMaintenance};

use crate::error::{Error, Result};
use crate::graph::{BipartiteNetwork, Dataset, PoiId, QueryParams, UserId};
use crate::index::{IndexConfig, IndexTree};
use crate::metrics::{isf_from, verify_community, CommunityAnswer, Networks, Thresholds};
use crate::precompute::{OfflineBounds, PivotConfig};
use crate::query::{answer_query, refinement, QueryConfig};

/// Default stability margin on the quality scale.
pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BatchOp {
    Insertion,
    Deletion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdateBatch {
    pub op: BatchOp,
    pub events: Vec<(UserId, PoiId, i64)>,
    /// Current time.
    pub now: i64,
}

impl UpdateBatch {
    pub fn insert(events: Vec<(UserId, PoiId, i64)>, now: i64) -> Self {
        UpdateBatch {
            op: BatchOp::Insertion,
            events,
            now,
        }
    }
}

/// A registered query and its maintained answer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Registered {
    pub params: QueryParams,
    pub answer: CommunityAnswer,
}

/// Wall time per maintenance category, in milliseconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub events: usize,
    pub affected_users: usize,
    /// Frequencies and bounds.
    pub data_ms: f64,
    /// Communities with the batch processed one update at a time; only when requested.
    pub comm_single_ms: Option<f64>,
    /// Communities with the batch processed at once.
    pub comm_batch_ms: f64,
    pub tree_ms: f64,
    pub index: IndexMaintenance,
}

/// Everything a stream of batches mutates. Pivots and score norms stay as built.
#[derive(Debug)]
pub struct TemporalState {
    pub net: Networks,
    pub bounds: OfflineBounds,
    pub tree: IndexTree,
    pub log: TemporalVisitLog,
    pub tau: i64,
    pub now: i64,
    pub delta: f64,
    pub query: QueryConfig,
    pub registry: Vec<Registered>,
    base_epoch: String,
    batches: u64,
}

/// Check-in network holding the window counts of `log` at `now`.
pub fn window_network(ds: &Dataset, log: &TemporalVisitLog, now: i64, tau: i64) -> BipartiteNetwork {
    let mut b = BipartiteNetwork::new(ds.social.user_count(), ds.pois.poi_count());
    for u in ds.social.users() {
        for (p, c) in log.counts(u, now, tau) {
            b.set_frequency(u, p, c as f64).expect("ids from the log are valid");
        }
    }
    b
}

impl TemporalState {
    /// Builds from scratch at time `now`. Events at or before `now - tau` are dropped from the log.
    pub fn new(
        mut ds: Dataset,
        mut log: TemporalVisitLog,
        now: i64,
        tau: i64,
        pivots: &PivotConfig,
        index: &IndexConfig,
    ) -> Result<TemporalState> {
        if tau < 1 {
            return Err(Error::InvalidParams("tau must be at least 1".into()));
        }
        log.check(&ds)?;
        log.expire(now - tau + 1);
        log.retain_until(now);
        ds.checkins = window_network(&ds, &log, now, tau);
        let net = Networks::new(ds);
        let bounds = OfflineBounds::compute(&net, pivots);
        let tree = IndexTree::build(&net, &bounds, index);
        let base_epoch = bounds.epoch.clone();
        Ok(TemporalState {
            net,
            bounds,
            tree,
            log,
            tau,
            now,
            delta: DEFAULT_DELTA,
            query: QueryConfig::default(),
            registry: Vec::new(),
            base_epoch,
            batches: 0,
        })
    }

    pub fn epoch(&self) -> &str {
        &self.bounds.epoch
    }

    /// Batches applied since construction.
    pub fn batches(&self) -> u64 {
        self.batches
    }

    /// Answers `params` now and keeps the answer maintained from here on.
    pub fn register(&mut self, params: QueryParams) -> Result<&Registered> {
        let out = answer_query(&self.tree, &self.bounds, &self.net, &params, &self.query)?;
        self.registry.push(Registered {
            params,
            answer: out.answer,
        });
        Ok(self.registry.last().expect("just pushed"))
    }

    /// The expiration batch at time `now`: every logged event older than the window.
    pub fn expiration(&self, now: i64) -> UpdateBatch {
        UpdateBatch {
            op: BatchOp::Deletion,
            events: self.log.expired(now - self.tau + 1),
            now,
        }
    }

    /// Applies one batch: frequencies and bounds, then communities, then the index.
    pub fn apply_batch(&mut self, batch: &UpdateBatch, time_singletons: bool) -> Result<BatchReport> {
        if batch.now < self.now {
            return Err(Error::InvalidParams(format!("time moves backwards: {} after {}", batch.now, self.now)));
        }
        for &(u, p, t) in &batch.events {
            self.net.data.social.check(u)?;
            self.net.data.pois.check(p)?;
            if t < 0 || (batch.op == BatchOp::Insertion && t > batch.now) {
                return Err(Error::InvalidParams(format!("event time {t} outside [0, {}]", batch.now)));
            }
        }
        let mut report = BatchReport {
            events: batch.events.len(),
            ..Default::default()
        };
        let t0 = Instant::now();
        let affected = self.update_data(batch)?;
        self.now = batch.now;
        report.affected_users = affected.len();
        report.data_ms = ms(t0);

        if time_singletons {
            let mut scratch = self.registry.clone();
            let t1 = Instant::now();
            for &u in &affected {
                maintain_communities(&mut scratch, batch.op, &[u], &self.net, self.query);
            }
            report.comm_single_ms = Some(ms(t1));
        }
        let t2 = Instant::now();
        maintain_communities(&mut self.registry, batch.op, &affected, &self.net, self.query);
        report.comm_batch_ms = ms(t2);

        let t3 = Instant::now();
        report.index = maintain_index(&mut self.tree, &self.net, &self.bounds, &affected, self.delta);
        report.tree_ms = ms(t3);

        self.batches += 1;
        let epoch = format!("{}+{}", self.base_epoch, self.batches);
        self.bounds.epoch = epoch.clone();
        self.tree.epoch = epoch;
        Ok(report)
    }

    /// Updates the log and window frequencies, then the bounds of touched users.
    fn update_data(&mut self, batch: &UpdateBatch) -> Result<Vec<UserId>> {
        let cutoff = batch.now - self.tau + 1;
        let mut touched: Vec<(UserId, PoiId)> = Vec::new();
        match batch.op {
            BatchOp::Insertion => {
                for &(u, p, t) in &batch.events {
                    // already outside the window: it would expire immediately
                    if t < cutoff {
                        continue;
                    }
                    self.log.push(u, p, t);
                    touched.push((u, p));
                }
            }
            BatchOp::Deletion => {
                for &(u, p, t) in &batch.events {
                    if !self.log.remove(u, p, t) {
                        // put back what this batch already took out
                        for &(u, p, t) in &batch.events[..touched.len()] {
                            self.log.push(u, p, t);
                        }
                        return Err(Error::InvalidParams(format!("no logged visit {u} {p} at {t}")));
                    }
                    touched.push((u, p));
                }
            }
        }
        let b = &mut self.net.data.checkins;
        for &(u, p) in &touched {
            let delta = match batch.op {
                BatchOp::Insertion => 1.0,
                BatchOp::Deletion => -1.0,
            };
            let f = b.frequency(u, p) + delta;
            b.set_frequency(u, p, f.max(0.0))?;
        }
        let mut users: Vec<UserId> = Vec::new();
        let mut seen = BTreeSet::new();
        for &(u, _) in &touched {
            if seen.insert(u) {
                users.push(u);
            }
        }
        for &u in &users {
            self.bounds.refresh_checkins(&self.net.data, u);
        }
        Ok(users)
    }

    /// Frequencies, bounds and tree aggregates a fresh build at the current time would
    /// have, keeping this state's pivots and leaf membership.
    pub fn rebuild_reference(&self) -> (BipartiteNetwork, OfflineBounds, IndexTree) {
        let mut ds = self.net.data.clone();
        ds.checkins = window_network(&ds, &self.log, self.now, self.tau);
        let checkins = ds.checkins.clone();
        let net = Networks::new(ds);
        let mut bounds = OfflineBounds::with_pivots(&net, self.bounds.pivots.clone());
        bounds.epoch = self.bounds.epoch.clone();
        let mut tree = self.tree.clone();
        tree.refresh_aggregates(&bounds);
        (checkins, bounds, tree)
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Keeps each registered answer a valid community after a batch touching `affected`.
///
/// Insertion: a member only records the update; an outsider is tried together with the
/// community and the refined result is adopted if it is valid. Deletion: a community
/// losing a member's visit is refined again and dropped if nothing is left. The
/// frequency thresholds are relative to dataset maxima, which a batch can move, so a
/// community that no longer verifies is refined as well.
pub fn maintain_communities(registry: &mut [Registered], op: BatchOp, affected: &[UserId], net: &Networks, cfg: QueryConfig) {
    for reg in registry.iter_mut() {
        if reg.answer.is_empty() {
            continue;
        }
        let Ok(th) = Thresholds::resolve(&net.data.checkins, &reg.params) else {
            continue;
        };
        let isf_q = isf_from(&net.data.social, reg.params.q);
        for &u in affected {
            if reg.answer.is_empty() {
                break;
            }
            let member = reg.answer.users.contains(&u);
            match (op, member) {
                (BatchOp::Insertion, false) => {
                    let mut s = reg.answer.users.clone();
                    s.insert(u);
                    let r = refinement(net, &th, &isf_q, &s, cfg.budget);
                    if !r.answer.is_empty() && r.answer.users.contains(&u) {
                        reg.answer = r.answer;
                    }
                }
                (BatchOp::Deletion, true) => {
                    reg.answer = refinement(net, &th, &isf_q, &reg.answer.users, cfg.budget).answer;
                }
                _ => {}
            }
        }
        if !reg.answer.is_empty() && !verify_community(net, &reg.answer, &th).passes() {
            reg.answer = refinement(net, &th, &isf_q, &reg.answer.users, cfg.budget).answer;
        }
    }
}

/// Splits time-sorted events into insertion batches of `size`; each batch's time is its
/// latest event.
pub fn insertion_batches(events: &[(UserId, PoiId, i64)], size: usize) -> Vec<UpdateBatch> {
    events
        .chunks(size.max(1))
        .map(|c| UpdateBatch::insert(c.to_vec(), c.iter().map(|e| e.2).max().expect("chunks are nonempty")))
        .collect()
}
