//! Filter-and-refine query answering over the index tree, plus the exhaustive oracle.

mod oracle;
mod refine;


use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use oracle::{brute_force_oracle, ORACLE_LIMIT};
pub use refine::{closure, refinement, Refined, SEARCH_BUDGET};

use crate::error::{Error, Result};
use crate::graph::{QueryParams, UserId};
use crate::index::{prune_node, IndexTree, NodeId, NodeKind, NodePruneContext};
use crate::metrics::{isf_from, verify_with, CommunityAnswer, Networks, Thresholds, VerificationReport};
use crate::precompute::{lb_avg_dist_r, prune_user, LemmaSet, OfflineBounds, PruneReason, UserPruneContext};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryConfig {
    pub lemmas: LemmaSet,
    pub budget: usize,
}

impl Default for QueryConfig {
    fn default() -> Self {
        QueryConfig {
            lemmas: LemmaSet::all(),
            budget: SEARCH_BUDGET,
        }
    }
}

impl QueryConfig {
    /// Drops the one lemma that can discard true members.
    pub fn sound_only() -> Self {
        QueryConfig {
            lemmas: LemmaSet::sound_only(),
            ..Default::default()
        }
    }
}

/// Users that survived filtering, ordered by their smallest spatial lower bound to q's POIs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub entries: Vec<(UserId, f64)>,
}

impl CandidateSet {
    pub fn users(&self) -> BTreeSet<UserId> {
        self.entries.iter().map(|&(u, _)| u).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryTrace {
    pub nodes_visited: usize,
    pub node_pruned: BTreeMap<PruneReason, usize>,
    pub user_pruned: BTreeMap<PruneReason, usize>,
    /// Users under nodes that were discarded whole, by the lemma that discarded them.
    pub node_pruned_users: BTreeMap<PruneReason, usize>,
    pub candidates: usize,
    pub closure: usize,
    pub search_states: usize,
    pub exact: bool,
    pub filter_ms: f64,
    pub refine_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub answer: CommunityAnswer,
    pub report: VerificationReport,
    pub trace: QueryTrace,
}

#[derive(PartialEq)]
struct Keyed(u32, NodeId);

impl Eq for Keyed {}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Keyed {
    // larger support first, then smaller id
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.cmp(&o.0).then_with(|| o.1.cmp(&self.1))
    }
}

fn check_epochs(tree: &IndexTree, bounds: &OfflineBounds) -> Result<()> {
    if tree.epoch != bounds.epoch {
        return Err(Error::EpochMismatch {
            expected: bounds.epoch.clone(),
            found: tree.epoch.clone(),
        });
    }
    Ok(())
}

/// Traverses the tree by descending support bound and returns the users no enabled
/// lemma can discard. Empty when q has no matching POI.
pub fn filter(
    tree: &IndexTree,
    bounds: &OfflineBounds,
    net: &Networks,
    th: &Thresholds,
    lemmas: LemmaSet,
    trace: &mut QueryTrace,
) -> CandidateSet {
    let uctx = UserPruneContext::new(net, bounds, th, lemmas);
    if uctx.poi_q.is_empty() {
        return CandidateSet::default();
    }
    let nctx = NodePruneContext::new(tree, bounds, &net.data.social, th, lemmas);
    let floor = th.params.k - 2;
    let mut heap = BinaryHeap::new();
    heap.push(Keyed(tree.node(tree.root).agg.ub_sup, tree.root));
    let mut found = Vec::new();
    while let Some(Keyed(key, id)) = heap.pop() {
        if key < floor {
            break;
        }
        trace.nodes_visited += 1;
        if let Some(r) = prune_node(id, &nctx) {
            *trace.node_pruned.entry(r).or_default() += 1;
            *trace.node_pruned_users.entry(r).or_default() += tree.users_under(id).len();
            continue;
        }
        match &tree.node(id).kind {
            NodeKind::Internal(kids) => {
                for &c in kids {
                    heap.push(Keyed(tree.node(c).agg.ub_sup, c));
                }
            }
            NodeKind::Leaf(users) => {
                for &u in users {
                    if let Some(r) = prune_user(u, &uctx) {
                        *trace.user_pruned.entry(r).or_default() += 1;
                        continue;
                    }
                    let key = uctx
                        .poi_q
                        .iter()
                        .filter_map(|&p| lb_avg_dist_r(bounds, &net.data, u, p))
                        .fold(f64::INFINITY, f64::min);
                    found.push((u, key));
                }
            }
        }
    }
    found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    trace.candidates = found.len();
    CandidateSet { entries: found }
}

pub fn answer_query(
    tree: &IndexTree,
    bounds: &OfflineBounds,
    net: &Networks,
    params: &QueryParams,
    cfg: &QueryConfig,
) -> Result<QueryOutcome> {
    check_epochs(tree, bounds)?;
    net.data.social.check(params.q)?;
    let th = Thresholds::resolve(&net.data.checkins, params)?;
    let mut trace = QueryTrace::default();

    let t0 = Instant::now();
    let cands = filter(tree, bounds, net, &th, cfg.lemmas, &mut trace);
    trace.filter_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let isf_q = isf_from(&net.data.social, params.q);
    let users = cands.users();
    let refined = if users.contains(&params.q) {
        refinement(net, &th, &isf_q, &users, cfg.budget)
    } else {
        Refined {
            exact: true,
            ..Default::default()
        }
    };
    trace.refine_ms = t1.elapsed().as_secs_f64() * 1e3;
    trace.closure = refined.closure;
    trace.search_states = refined.states;
    trace.exact = refined.exact;
    let report = verify_with(net, &refined.answer, &th, &isf_q);
    Ok(QueryOutcome {
        answer: refined.answer,
        report,
        trace,
    })
}
