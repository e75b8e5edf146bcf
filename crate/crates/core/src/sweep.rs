//! Parameter sweeps and cumulative pruning-power staging, as run by `kcs bench`.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{KeywordId, QueryParams, UserId};
use crate::index::IndexTree;
use crate::metrics::{Networks, Thresholds};
use crate::precompute::{LemmaSet, OfflineBounds, PruneReason};
use crate::query::{answer_query, filter, QueryConfig, QueryTrace};

/// Stage order of the pruning-power table.
pub const STAGE_ORDER: [PruneReason; 7] = [
    PruneReason::Keyword,
    PruneReason::Pi,
    PruneReason::Omega,
    PruneReason::SocialDist,
    PruneReason::Support,
    PruneReason::SpatialDist,
    PruneReason::Influence,
];

/// Fixed values for every parameter not being swept.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defaults {
    pub k: u32,
    pub d: u32,
    pub keywords: usize,
    pub omega: f64,
    pub pi: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            k: 3,
            d: 3,
            keywords: 7,
            omega: 0.4,
            pi: 0.4,
            theta: 0.4,
            sigma: 5.0,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    K,
    D,
    Keywords,
    Omega,
    Pi,
    Theta,
    Sigma,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "k" => SweepParam::K,
            "d" => SweepParam::D,
            "keywords" | "q" => SweepParam::Keywords,
            "omega" => SweepParam::Omega,
            "pi" => SweepParam::Pi,
            "theta" => SweepParam::Theta,
            "sigma" => SweepParam::Sigma,
            _ => return Err(Error::InvalidParams(format!("unknown sweep parameter {s}"))),
        })
    }
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::K => "k",
            SweepParam::D => "d",
            SweepParam::Keywords => "keywords",
            SweepParam::Omega => "omega",
            SweepParam::Pi => "pi",
            SweepParam::Theta => "theta",
            SweepParam::Sigma => "sigma",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchPlan {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub defaults: Defaults,
    /// Query users per sweep value.
    pub repetitions: usize,
    pub seed: u64,
    pub lemmas: LemmaSet,
}

impl BenchPlan {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParams("no sweep values".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParams("repetitions must be positive".into()));
        }
        for &v in &self.values {
            let probe = QuerySeed {
                q: UserId(0),
                keywords: vec![KeywordId(0)],
            };
            self.params_for(&probe, v).validate()?;
        }
        Ok(())
    }

    fn params_for(&self, s: &QuerySeed, v: f64) -> QueryParams {
        let d = &self.defaults;
        let mut p = QueryParams {
            q: s.q,
            keywords: s.keywords.iter().take(d.keywords).copied().collect(),
            k: d.k,
            d: d.d,
            omega: d.omega,
            pi: d.pi,
            theta: d.theta,
            sigma: d.sigma,
        };
        if p.keywords.is_empty() {
            p.keywords.insert(KeywordId(0));
        }
        match self.param {
            SweepParam::K => p.k = v as u32,
            SweepParam::D => p.d = v as u32,
            SweepParam::Keywords => p.keywords = s.keywords.iter().take(v.max(1.0) as usize).copied().collect(),
            SweepParam::Omega => p.omega = v,
            SweepParam::Pi => p.pi = v,
            SweepParam::Theta => p.theta = v,
            SweepParam::Sigma => p.sigma = v,
        }
        p
    }
}

/// A query user with a keyword preference order: its own POI keywords first, then the
/// rest of the dictionary in a seeded order. A prefix of any length is a keyword set.
#[derive(Clone, Debug, PartialEq)]
pub struct QuerySeed {
    pub q: UserId,
    pub keywords: Vec<KeywordId>,
}

/// `count` distinct users with check-ins, each with its keyword order.
pub fn sample_queries(net: &Networks, count: usize, seed: u64) -> Vec<QuerySeed> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut users: Vec<UserId> = net
        .data
        .social
        .users()
        .filter(|&u| !net.data.checkins.checkins(u).is_empty())
        .collect();
    users.shuffle(&mut rng);
    users.truncate(count);
    let nk = net.data.pois.keyword_count() as u32;
    users
        .into_iter()
        .map(|q| {
            let mut own: Vec<KeywordId> = net
                .data
                .checkins
                .locations(q)
                .flat_map(|p| net.data.pois.keywords(p).to_vec())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            own.shuffle(&mut rng);
            let mut rest: Vec<KeywordId> = (0..nk).map(KeywordId).filter(|k| !own.contains(k)).collect();
            rest.shuffle(&mut rng);
            own.extend(rest);
            QuerySeed { q, keywords: own }
        })
        .collect()
}

/// One query run. Column order is the CSV schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub param: String,
    pub value: f64,
    pub rep: usize,
    pub q: String,
    pub keywords: usize,
    pub k: u32,
    pub d: u32,
    pub omega: f64,
    pub pi: f64,
    pub theta: f64,
    pub sigma: f64,
    pub candidates: usize,
    pub closure: usize,
    pub search_states: usize,
    pub answer_users: usize,
    pub answer_pois: usize,
    pub exact: bool,
    pub nodes_visited: usize,
    pub filter_ms: f64,
    pub refine_ms: f64,
    pub total_ms: f64,
    pub pruned_keyword: usize,
    pub pruned_omega: usize,
    pub pruned_pi: usize,
    pub pruned_support: usize,
    pub pruned_social_dist: usize,
    pub pruned_influence: usize,
    pub pruned_spatial_dist: usize,
}

/// Users discarded by `r`, directly or under a discarded node.
fn pruned(trace: &QueryTrace, r: PruneReason) -> usize {
    trace.user_pruned.get(&r).copied().unwrap_or(0) + trace.node_pruned_users.get(&r).copied().unwrap_or(0)
}

pub fn run_sweep(tree: &IndexTree, bounds: &OfflineBounds, net: &Networks, plan: &BenchPlan) -> Result<Vec<BenchRow>> {
    plan.validate()?;
    let seeds = sample_queries(net, plan.repetitions, plan.seed);
    let cfg = QueryConfig {
        lemmas: plan.lemmas,
        ..Default::default()
    };
    let mut rows = Vec::new();
    for &v in &plan.values {
        for (rep, s) in seeds.iter().enumerate() {
            let p = plan.params_for(s, v);
            let t = Instant::now();
            let out = answer_query(tree, bounds, net, &p, &cfg)?;
            let total_ms = t.elapsed().as_secs_f64() * 1e3;
            let tr = &out.trace;
            rows.push(BenchRow {
                param: plan.param.name().into(),
                value: v,
                rep,
                q: net.data.social.user_name(p.q).to_owned(),
                keywords: p.keywords.len(),
                k: p.k,
                d: p.d,
                omega: p.omega,
                pi: p.pi,
                theta: p.theta,
                sigma: p.sigma,
                candidates: tr.candidates,
                closure: tr.closure,
                search_states: tr.search_states,
                answer_users: out.answer.users.len(),
                answer_pois: out.answer.pois.len(),
                exact: tr.exact,
                nodes_visited: tr.nodes_visited,
                filter_ms: tr.filter_ms,
                refine_ms: tr.refine_ms,
                total_ms,
                pruned_keyword: pruned(tr, PruneReason::Keyword),
                pruned_omega: pruned(tr, PruneReason::Omega),
                pruned_pi: pruned(tr, PruneReason::Pi),
                pruned_support: pruned(tr, PruneReason::Support),
                pruned_social_dist: pruned(tr, PruneReason::SocialDist),
                pruned_influence: pruned(tr, PruneReason::Influence),
                pruned_spatial_dist: pruned(tr, PruneReason::SpatialDist),
            });
        }
    }
    Ok(rows)
}

/// Filter-phase candidate counts only, `[value][rep]`. No refinement runs.
pub fn sweep_candidates(tree: &IndexTree, bounds: &OfflineBounds, net: &Networks, plan: &BenchPlan) -> Result<Vec<Vec<usize>>> {
    plan.validate()?;
    let seeds = sample_queries(net, plan.repetitions, plan.seed);
    plan.values
        .iter()
        .map(|&v| {
            seeds
                .iter()
                .map(|s| {
                    let th = Thresholds::resolve(&net.data.checkins, &plan.params_for(s, v))?;
                    let mut tr = QueryTrace::default();
                    Ok(filter(tree, bounds, net, &th, plan.lemmas, &mut tr).len())
                })
                .collect()
        })
        .collect()
}

/// Candidates left after the first `stage` lemmas of [`STAGE_ORDER`], summed over queries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub stage: usize,
    pub lemma: String,
    pub remaining: usize,
    pub fraction: f64,
}

/// Cumulative pruning power: stage 0 has no lemma enabled, stage i the first i of
/// [`STAGE_ORDER`]. Stages only add lemmas, so `remaining` never grows.
pub fn staging(tree: &IndexTree, bounds: &OfflineBounds, net: &Networks, queries: &[QueryParams]) -> Result<Vec<StageRow>> {
    let mut rows = Vec::new();
    let mut lemmas = LemmaSet::none();
    let mut base = 0usize;
    for stage in 0..=STAGE_ORDER.len() {
        if stage > 0 {
            lemmas.set(STAGE_ORDER[stage - 1], true);
        }
        let mut remaining = 0;
        for p in queries {
            let th = Thresholds::resolve(&net.data.checkins, p)?;
            let mut tr = QueryTrace::default();
            remaining += filter(tree, bounds, net, &th, lemmas, &mut tr).len();
        }
        if stage == 0 {
            base = remaining.max(1);
        }
        rows.push(StageRow {
            stage,
            lemma: if stage == 0 { "none".into() } else { STAGE_ORDER[stage - 1].name().into() },
            remaining,
            fraction: remaining as f64 / base as f64,
        });
    }
    Ok(rows)
}

/// Query parameters at the defaults for each seed.
pub fn default_queries(net: &Networks, defaults: &Defaults, count: usize, seed: u64) -> Vec<QueryParams> {
    let plan = BenchPlan {
        param: SweepParam::Omega,
        values: vec![defaults.omega],
        defaults: *defaults,
        repetitions: count,
        seed,
        lemmas: LemmaSet::all(),
    };
    sample_queries(net, count, seed)
        .iter()
        .map(|s| plan.params_for(s, defaults.omega))
        .collect()
}
