use serde::{Deserialize, Serialize};

use super::{lb_avg_dist_r, lb_dist_s, ub_isf, OfflineBounds};
use crate::graph::{Dataset, PoiId, UserId};
use crate::metrics::{Networks, Thresholds};

/// Why a user or index node was discarded, in evaluation order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PruneReason {
    Keyword,
    Omega,
    Pi,
    Support,
    SocialDist,
    Influence,
    SpatialDist,
}

impl PruneReason {
    pub const ALL: [PruneReason; 7] = [
        PruneReason::Keyword,
        PruneReason::Omega,
        PruneReason::Pi,
        PruneReason::Support,
        PruneReason::SocialDist,
        PruneReason::Influence,
        PruneReason::SpatialDist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PruneReason::Keyword => "keyword",
            PruneReason::Omega => "omega",
            PruneReason::Pi => "pi",
            PruneReason::Support => "support",
            PruneReason::SocialDist => "social_dist",
            PruneReason::Influence => "influence",
            PruneReason::SpatialDist => "spatial_dist",
        }
    }
}

/// Per-lemma switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaSet {
    pub keyword: bool,
    pub omega: bool,
    pub pi: bool,
    pub support: bool,
    pub social_dist: bool,
    pub influence: bool,
    pub spatial_dist: bool,
}

impl Default for LemmaSet {
    fn default() -> Self {
        Self::all()
    }
}

impl LemmaSet {
    pub fn all() -> Self {
        LemmaSet {
            keyword: true,
            omega: true,
            pi: true,
            support: true,
            social_dist: true,
            influence: true,
            spatial_dist: true,
        }
    }

    pub fn none() -> Self {
        LemmaSet {
            keyword: false,
            omega: false,
            pi: false,
            support: false,
            social_dist: false,
            influence: false,
            spatial_dist: false,
        }
    }

    /// Everything except the average-frequency lemma, which can discard true members.
    pub fn sound_only() -> Self {
        LemmaSet {
            pi: false,
            ..Self::all()
        }
    }

    pub fn only(reasons: &[PruneReason]) -> Self {
        let mut s = Self::none();
        for &r in reasons {
            s.set(r, true);
        }
        s
    }

    pub fn enabled(&self, r: PruneReason) -> bool {
        match r {
            PruneReason::Keyword => self.keyword,
            PruneReason::Omega => self.omega,
            PruneReason::Pi => self.pi,
            PruneReason::Support => self.support,
            PruneReason::SocialDist => self.social_dist,
            PruneReason::Influence => self.influence,
            PruneReason::SpatialDist => self.spatial_dist,
        }
    }

    pub fn set(&mut self, r: PruneReason, on: bool) {
        let slot = match r {
            PruneReason::Keyword => &mut self.keyword,
            PruneReason::Omega => &mut self.omega,
            PruneReason::Pi => &mut self.pi,
            PruneReason::Support => &mut self.support,
            PruneReason::SocialDist => &mut self.social_dist,
            PruneReason::Influence => &mut self.influence,
            PruneReason::SpatialDist => &mut self.spatial_dist,
        };
        *slot = on;
    }
}

pub struct UserPruneContext<'a> {
    pub net: &'a Networks,
    pub bounds: &'a OfflineBounds,
    pub th: &'a Thresholds,
    /// q's visited POIs that match a query keyword.
    pub poi_q: Vec<PoiId>,
    pub lemmas: LemmaSet,
}

pub fn poi_q(ds: &Dataset, th: &Thresholds) -> Vec<PoiId> {
    ds.checkins
        .locations(th.q())
        .filter(|&p| ds.pois.matches(p, th.keywords()))
        .collect()
}

impl<'a> UserPruneContext<'a> {
    pub fn new(net: &'a Networks, bounds: &'a OfflineBounds, th: &'a Thresholds, lemmas: LemmaSet) -> Self {
        UserPruneContext {
            net,
            bounds,
            th,
            poi_q: poi_q(&net.data, th),
            lemmas,
        }
    }
}

/// Whether the lemma behind `reason` discards `u`, regardless of the switches.
pub fn user_check(reason: PruneReason, u: UserId, ctx: &UserPruneContext) -> bool {
    let b = ctx.bounds.user(u);
    let pr = &ctx.th.params;
    let q = pr.q;
    match reason {
        PruneReason::Keyword => !b.keywords.iter().any(|(k, _)| pr.keywords.contains(&k)),
        PruneReason::Omega => {
            let kw: f64 = pr.keywords.iter().filter_map(|&k| b.keywords.get(k)).map(|a| a.f_sum).sum();
            b.ub_f_sum.min(kw) < ctx.th.omega_abs
        }
        PruneReason::Pi => {
            let kw = pr
                .keywords
                .iter()
                .filter_map(|&k| b.keywords.get(k))
                .fold(0.0f64, |m, a| m.max(a.f_max));
            b.ub_f_avg.min(kw) < ctx.th.pi_abs
        }
        PruneReason::Support => b.ub_sup < pr.k - 2,
        PruneReason::SocialDist => lb_dist_s(ctx.bounds, u, q) > pr.d,
        PruneReason::Influence => u != q && ub_isf(ctx.bounds, &ctx.net.data.social, q, u) < pr.theta,
        PruneReason::SpatialDist => {
            if ctx.th.omega_abs == 0.0 || ctx.poi_q.is_empty() {
                return false;
            }
            ctx.poi_q.iter().all(|&p| {
                lb_avg_dist_r(ctx.bounds, &ctx.net.data, u, p).is_none_or(|lb| lb > pr.sigma)
            })
        }
    }
}

/// First enabled lemma that discards `u`, or `None` to keep it.
pub fn prune_user(u: UserId, ctx: &UserPruneContext) -> Option<PruneReason> {
    PruneReason::ALL
        .into_iter()
        .find(|&r| ctx.lemmas.enabled(r) && user_check(r, u, ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BipartiteNetwork, Point, QueryParams, SocialNetwork};
    use crate::precompute::{OfflineBounds, PivotSets};
    use crate::graph::VertexId;

    fn fixture() -> Networks {
        let mut social = SocialNetwork::with_users(4);
        for (a, b) in [(0, 1), (1, 2), (0, 2), (2, 3)] {
            social.add_edge(UserId(a), UserId(b), 0.8).unwrap();
            social.add_edge(UserId(b), UserId(a), 0.8).unwrap();
        }
        let mut ds = Dataset {
            social,
            ..Default::default()
        };
        let r0 = ds.road.add_vertex("r0", Point::new(0.0, 0.0)).unwrap();
        let r1 = ds.road.add_vertex("r1", Point::new(1.0, 0.0)).unwrap();
        ds.road.add_edge(r0, r1, None).unwrap();
        let cafe = ds.pois.add_poi("cafe", r0, &["cafe"]).unwrap();
        let gym = ds.pois.add_poi("gym", r1, &["gym"]).unwrap();
        ds.checkins = BipartiteNetwork::new(4, 2);
        for u in 0..3 {
            ds.checkins.add_checkin(UserId(u), cafe, 4.0).unwrap();
        }
        ds.checkins.add_checkin(UserId(3), gym, 4.0).unwrap();
        Networks::new(ds)
    }

    #[test]
    fn keyword_and_self() {
        let net = fixture();
        let bounds = OfflineBounds::with_pivots(
            &net,
            PivotSets {
                social: vec![UserId(0)],
                road: vec![VertexId(0)],
            },
        );
        let params = QueryParams {
            q: UserId(0),
            keywords: [net.data.pois.keyword_id("cafe").unwrap()].into(),
            k: 3,
            d: 2,
            omega: 0.5,
            pi: 0.5,
            theta: 0.5,
            sigma: 5.0,
        };
        let th = Thresholds::resolve(&net.data.checkins, &params).unwrap();
        let ctx = UserPruneContext::new(&net, &bounds, &th, LemmaSet::all());
        assert_eq!(prune_user(UserId(3), &ctx), Some(PruneReason::Keyword));
        assert_eq!(prune_user(UserId(0), &ctx), None);
        assert!(!user_check(PruneReason::Influence, UserId(0), &ctx));
        let off = UserPruneContext::new(&net, &bounds, &th, LemmaSet::none());
        assert_eq!(prune_user(UserId(3), &off), None);
    }
}
