use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kcs_core::datagen::{gen_temporal, generate, small_instance, small_query, GenConfig, SmallConfig};
use kcs_core::graph::{undirected_skeleton, BipartiteNetwork, PoiId, QueryParams, Skeleton, SocialNetwork, UserId};
use kcs_core::index::{node_check, IndexConfig, IndexTree, NodePruneContext, NODE_ORDER};
use kcs_core::metrics::{avg_dist, bfs_hops, full_edge_support, isf, isf_from, verify_kd_truss, Networks, Thresholds};
use kcs_core::precompute::{
    initial_pivots, select_social_pivots, social_objective, social_pairs, user_check, LemmaSet, OfflineBounds,
    PivotConfig, UserPruneContext,
};
use kcs_core::query::{answer_query, brute_force_oracle, filter, refinement, QueryConfig, QueryTrace, SEARCH_BUDGET};
use kcs_core::temporal::{insertion_batches, window_frequency, TemporalState, TemporalVisitLog, UpdateBatch};
use kcs_core::Dataset;

fn digraph() -> impl Strategy<Value = SocialNetwork> {
    (2usize..=8).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n, 0.01f64..=1.0), 0..n * 3).prop_map(move |es| {
            let mut g = SocialNetwork::with_users(n);
            for (a, b, w) in es {
                if a != b && !g.has_edge(UserId::from(a), UserId::from(b)) {
                    g.add_edge(UserId::from(a), UserId::from(b), w).unwrap();
                }
            }
            g
        })
    })
}

fn built(seed: u64) -> (Networks, OfflineBounds, IndexTree) {
    let net = Networks::new(small_instance(&SmallConfig {
        seed,
        ..Default::default()
    }));
    let bounds = OfflineBounds::compute(&net, &PivotConfig { social: 3, road: 3, iters: 20, seed, ..Default::default() });
    let tree = IndexTree::build(&net, &bounds, &IndexConfig { leaf_capacity: 4, fanout: 3, iters: 10, seed, ..Default::default() });
    (net, bounds, tree)
}

fn query(ds: &Dataset, seed: u64) -> Option<QueryParams> {
    small_query(ds, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dataset_round_trips_through_files(seed in 0u64..10_000) {
        let ds = small_instance(&SmallConfig { seed, ..Default::default() });
        let dir = tempfile::tempdir().unwrap();
        ds.write_dir(dir.path()).unwrap();
        prop_assert_eq!(Dataset::load_dir(dir.path()).unwrap(), ds);
    }

    #[test]
    fn skeleton_is_symmetric_without_loops(g in digraph()) {
        let s = undirected_skeleton(&g);
        for u in g.users() {
            prop_assert!(!s.has_edge(u, u));
            for &v in s.neighbors(u) {
                prop_assert!(s.has_edge(v, u));
                prop_assert!(g.has_edge(u, v) || g.has_edge(v, u));
            }
        }
    }

    #[test]
    fn isf_never_drops_when_an_edge_is_added(g in digraph(), a in 0usize..8, b in 0usize..8, w in 0.01f64..=1.0) {
        let n = g.user_count();
        let (a, b) = (UserId::from(a % n), UserId::from(b % n));
        prop_assume!(a != b && !g.has_edge(a, b));
        let mut h = g.clone();
        h.add_edge(a, b, w).unwrap();
        for u in g.users() {
            let (before, after) = (isf_from(&g, u), isf_from(&h, u));
            for v in g.users() {
                prop_assert!(after[v.index()] >= before[v.index()]);
            }
        }
    }

    #[test]
    fn full_support_matches_triple_enumeration(n in 3usize..=15, pairs in proptest::collection::vec((0u32..15, 0u32..15), 0..60)) {
        let pairs: Vec<(u32, u32)> = pairs.into_iter().filter(|&(a, b)| a != b && (a as usize) < n && (b as usize) < n).collect();
        let s = Skeleton::from_pairs(n, &pairs);
        let sup = full_edge_support(&s);
        for u in 0..n {
            for (i, &v) in s.neighbors(UserId::from(u)).iter().enumerate() {
                let naive = (0..n)
                    .filter(|&w| s.has_edge(UserId::from(u), UserId::from(w)) && s.has_edge(v, UserId::from(w)))
                    .count() as u32;
                prop_assert_eq!(sup[u][i], naive);
            }
        }
    }

    #[test]
    fn truss_check_relaxes_in_k_and_d(seed in 0u64..10_000, k in 3u32..6, d in 1u32..4) {
        let ds = small_instance(&SmallConfig { seed, ..Default::default() });
        let s = undirected_skeleton(&ds.social);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = UserId(0);
        let mut all: Vec<UserId> = ds.social.users().collect();
        for _ in 0..10 {
            all.shuffle(&mut rng);
            let mut set: BTreeSet<UserId> = all.iter().take(8).copied().collect();
            set.insert(q);
            if verify_kd_truss(&s, &set, q, k, d) {
                if k > 3 {
                    prop_assert!(verify_kd_truss(&s, &set, q, k - 1, d));
                }
                prop_assert!(verify_kd_truss(&s, &set, q, k, d + 1));
            }
        }
        // communities of the generator's dense groups make sure the implication is exercised
        let group: BTreeSet<UserId> = (0..5).map(UserId).collect();
        if verify_kd_truss(&s, &group, q, 3, d) {
            prop_assert!(verify_kd_truss(&s, &group, q, 3, d + 1));
        }
    }

    #[test]
    fn avg_dist_ignores_checkin_order(seed in 0u64..10_000) {
        let ds = small_instance(&SmallConfig { seed, ..Default::default() });
        let mut edges: Vec<_> = ds.checkins.edges().collect();
        edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut shuffled = ds.clone();
        shuffled.checkins = BipartiteNetwork::new(ds.checkins.user_count(), ds.checkins.poi_count());
        for (u, p, f) in edges {
            shuffled.checkins.add_checkin(u, p, f).unwrap();
        }
        for u in ds.social.users().filter(|&u| !ds.checkins.checkins(u).is_empty()) {
            for p in 0..ds.pois.poi_count() as u32 {
                prop_assert_eq!(avg_dist(&ds, u, PoiId(p)).unwrap(), avg_dist(&shuffled, u, PoiId(p)).unwrap());
            }
        }
    }

    #[test]
    fn frequency_bound_covers_every_poi_subset(seed in 0u64..10_000) {
        let ds = small_instance(&SmallConfig { seed, ..Default::default() });
        let net = Networks::new(ds);
        let bounds = OfflineBounds::compute(&net, &PivotConfig { social: 2, road: 2, iters: 5, ..Default::default() });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for u in net.data.social.users() {
            let fs: Vec<f64> = net.data.checkins.checkins(u).values().copied().collect();
            for _ in 0..8 {
                let sub: f64 = fs.iter().filter(|_| rand::Rng::random_bool(&mut rng, 0.5)).sum();
                prop_assert!(bounds.user(u).ub_f_sum >= sub);
            }
        }
    }

    #[test]
    fn pivot_refinement_never_loses_objective(seed in 0u64..10_000, iters in 0usize..60) {
        let ds = small_instance(&SmallConfig { seed, ..Default::default() });
        let s = undirected_skeleton(&ds.social);
        let n = s.user_count();
        let cfg = PivotConfig { social: 3, iters, seed, sample_pairs: 200, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = social_pairs(n, cfg.sample_pairs, &mut rng);
        let initial = initial_pivots(n, cfg.social, &mut rng);
        let rows = |ps: &[usize]| ps.iter().map(|&p| bfs_hops(&s, UserId::from(p))).collect::<Vec<_>>();
        let chosen: Vec<usize> = select_social_pivots(&s, &cfg).into_iter().map(|u| u.index()).collect();
        prop_assert!(social_objective(&rows(&chosen), &pairs) >= social_objective(&rows(&initial), &pairs));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pruned_node_implies_pruned_users(seed in 0u64..10_000, qs in 0u64..1000) {
        let (net, bounds, tree) = built(seed);
        let Some(p) = query(&net.data, qs) else { return Ok(()) };
        let th = Thresholds::resolve(&net.data.checkins, &p).unwrap();
        let nctx = NodePruneContext::new(&tree, &bounds, &net.data.social, &th, LemmaSet::all());
        let uctx = UserPruneContext::new(&net, &bounds, &th, LemmaSet::all());
        for id in 0..tree.nodes.len() as u32 {
            for r in NODE_ORDER {
                if node_check(r, id, &nctx) {
                    for u in tree.users_under(id) {
                        prop_assert!(user_check(r, u, &uctx), "node {} pruned by {} but user {} is not", id, r.name(), u);
                    }
                }
            }
        }
    }

    #[test]
    fn tree_partitions_users_with_bounded_height(seed in 0u64..10_000, leaf in 2usize..8, fanout in 2usize..5) {
        let net = Networks::new(small_instance(&SmallConfig { seed, users: 40, ..Default::default() }));
        let bounds = OfflineBounds::compute(&net, &PivotConfig { social: 3, road: 3, iters: 10, ..Default::default() });
        let tree = IndexTree::build(&net, &bounds, &IndexConfig { leaf_capacity: leaf, fanout, iters: 5, seed, ..Default::default() });
        prop_assert!(tree.structure_violations().is_empty());
        prop_assert!(tree.dominance_violations(&bounds).is_empty());
        let mut seen: Vec<UserId> = tree.leaves().flat_map(|l| tree.users_under(l)).collect();
        seen.sort();
        prop_assert_eq!(seen, net.data.social.users().collect::<Vec<_>>());
        let leaves = tree.leaves().count() as f64;
        let bound = (leaves.ln() / (fanout as f64).ln()).ceil().max(0.0) as usize + 1;
        prop_assert!(tree.height() <= bound, "height {} > {}", tree.height(), bound);
    }

    #[test]
    fn empty_answers_stay_empty_when_tightened(seed in 0u64..10_000, qs in 0u64..1000, which in 0usize..6) {
        let (net, bounds, tree) = built(seed);
        let Some(p) = query(&net.data, qs) else { return Ok(()) };
        let cfg = QueryConfig::sound_only();
        let out = answer_query(&tree, &bounds, &net, &p, &cfg).unwrap();
        prop_assume!(out.answer.is_empty());
        let mut t = p.clone();
        match which {
            0 => t.omega = (t.omega * 1.5).min(1.0),
            1 => t.pi = (t.pi * 1.5).min(1.0),
            2 => t.theta = (t.theta * 1.5).min(1.0),
            3 => t.k += 1,
            4 => t.sigma *= 0.5,
            _ => t.d = (t.d - 1).max(1),
        }
        prop_assert!(answer_query(&tree, &bounds, &net, &t, &cfg).unwrap().answer.is_empty());
    }

    #[test]
    fn candidates_shrink_as_omega_grows(seed in 0u64..10_000, qs in 0u64..1000) {
        let (net, bounds, tree) = built(seed);
        let Some(mut p) = query(&net.data, qs) else { return Ok(()) };
        let mut last = usize::MAX;
        for omega in [0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0] {
            p.omega = omega;
            let th = Thresholds::resolve(&net.data.checkins, &p).unwrap();
            let n = filter(&tree, &bounds, &net, &th, LemmaSet::all(), &mut QueryTrace::default()).len();
            prop_assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn filter_keeps_every_oracle_member(seed in 0u64..10_000, qs in 0u64..1000) {
        let (net, bounds, tree) = built(seed);
        let Some(p) = query(&net.data, qs) else { return Ok(()) };
        let Ok(expect) = brute_force_oracle(&net, &p) else { return Ok(()) };
        let th = Thresholds::resolve(&net.data.checkins, &p).unwrap();
        let cands = filter(&tree, &bounds, &net, &th, LemmaSet::sound_only(), &mut QueryTrace::default()).users();
        prop_assert!(expect.users.is_subset(&cands));
    }

    #[test]
    fn refinement_is_idempotent(seed in 0u64..10_000, qs in 0u64..1000) {
        let (net, bounds, tree) = built(seed);
        let Some(p) = query(&net.data, qs) else { return Ok(()) };
        let out = answer_query(&tree, &bounds, &net, &p, &QueryConfig::default()).unwrap();
        let th = Thresholds::resolve(&net.data.checkins, &p).unwrap();
        let isf_q = isf_from(&net.data.social, p.q);
        let again = refinement(&net, &th, &isf_q, &out.answer.users, SEARCH_BUDGET);
        prop_assert_eq!(again.answer, out.answer);
    }
}

fn stream(seed: u64) -> (Dataset, Vec<(UserId, PoiId, i64)>) {
    let ds = small_instance(&SmallConfig { seed, users: 24, ..Default::default() });
    let cfg = GenConfig { seed, ..Default::default() };
    let events = gen_temporal(&cfg, &ds.checkins, 80);
    (ds, events)
}

fn start(ds: &Dataset, events: &[(UserId, PoiId, i64)], now: i64) -> TemporalState {
    let log = TemporalVisitLog::from_events(ds.user_count(), &events.iter().copied().filter(|e| e.2 <= now).collect::<Vec<_>>());
    let mut st = TemporalState::new(
        ds.clone(),
        log,
        now,
        20,
        &PivotConfig { social: 2, road: 2, iters: 5, ..Default::default() },
        &IndexConfig { leaf_capacity: 4, fanout: 3, iters: 5, ..Default::default() },
    )
    .unwrap();
    st.delta = 0.0;
    st
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stored_edges_are_exactly_the_window(seed in 0u64..10_000, size in 1usize..40) {
        let (ds, events) = stream(seed);
        let mut st = start(&ds, &events, 30);
        let later: Vec<_> = events.iter().copied().filter(|e| e.2 > 30).collect();
        let mut seen = TemporalVisitLog::from_events(ds.user_count(), &events.iter().copied().filter(|e| e.2 <= 30).collect::<Vec<_>>());
        for b in insertion_batches(&later, size) {
            b.events.iter().for_each(|&(u, p, t)| seen.push(u, p, t));
            st.apply_batch(&b, false).unwrap();
            let exp = st.expiration(b.now);
            st.apply_batch(&exp, false).unwrap();
            for u in ds.social.users() {
                for p in 0..ds.pois.poi_count() as u32 {
                    let f = window_frequency(&seen, u, PoiId(p), b.now, 20);
                    prop_assert_eq!(st.net.data.checkins.frequency(u, PoiId(p)), f as f64);
                }
            }
        }
    }

    #[test]
    fn batch_and_singletons_agree(seed in 0u64..10_000, size in 2usize..30) {
        let (ds, events) = stream(seed);
        let later: Vec<_> = events.iter().copied().filter(|e| e.2 > 30).collect();
        let (mut whole, mut single) = (start(&ds, &events, 30), start(&ds, &events, 30));
        for b in insertion_batches(&later, size) {
            whole.apply_batch(&b, false).unwrap();
            for &e in &b.events {
                single.apply_batch(&UpdateBatch::insert(vec![e], b.now), false).unwrap();
            }
            let exp = whole.expiration(b.now);
            whole.apply_batch(&exp, false).unwrap();
            for e in single.expiration(b.now).events {
                let one = UpdateBatch { events: vec![e], ..single.expiration(b.now) };
                single.apply_batch(&one, false).unwrap();
            }
            prop_assert_eq!(&whole.net.data.checkins, &single.net.data.checkins);
            let mut sb = single.bounds.clone();
            sb.epoch = whole.bounds.epoch.clone();
            prop_assert_eq!(&whole.bounds, &sb);
        }
    }
}

#[test]
fn generators_are_deterministic_and_load_cleanly() {
    let cfg = GenConfig {
        seed: 9,
        users: 300,
        road_vertices: 200,
        pois: 100,
        ..Default::default()
    };
    let (a, b) = (generate(&cfg).unwrap(), generate(&cfg).unwrap());
    assert_eq!(a, b);
    assert_eq!(gen_temporal(&cfg, &a.checkins, 50), gen_temporal(&cfg, &b.checkins, 50));
    let dir = tempfile::tempdir().unwrap();
    a.write_dir(dir.path()).unwrap();
    assert_eq!(Dataset::load_dir(dir.path()).unwrap(), a);
    let s = SmallConfig::default();
    assert_eq!(small_instance(&s), small_instance(&s));
}

#[test]
fn isf_on_a_chain_is_the_product() {
    let mut g = SocialNetwork::with_users(3);
    g.add_edge(UserId(0), UserId(1), 0.5).unwrap();
    g.add_edge(UserId(1), UserId(2), 0.4).unwrap();
    assert!((isf(&g, UserId(0), UserId(2)).unwrap() - 0.2).abs() < 1e-12);
    assert_eq!(isf(&g, UserId(2), UserId(0)).unwrap(), 0.0);
}
