//! Shared fixtures for the criterion benchmarks.

use kcs_core::datagen::{generate, GenConfig};
use kcs_core::graph::QueryParams;
use kcs_core::index::{IndexConfig, IndexTree};
use kcs_core::metrics::Networks;
use kcs_core::precompute::{OfflineBounds, PivotConfig};
use kcs_core::sweep::{default_queries, Defaults};

pub struct Fixture {
    pub cfg: GenConfig,
    pub net: Networks,
    pub bounds: OfflineBounds,
    pub tree: IndexTree,
    pub queries: Vec<QueryParams>,
}

pub fn gen_config(users: usize) -> GenConfig {
    GenConfig {
        seed: 11,
        users,
        road_vertices: users,
        pois: users / 2,
        ..Default::default()
    }
}

/// A generated instance with bounds, index and ten queries at the given sigma.
pub fn fixture(users: usize, sigma: f64) -> Fixture {
    let cfg = gen_config(users);
    let net = Networks::new(generate(&cfg).expect("valid config"));
    let bounds = OfflineBounds::compute(&net, &PivotConfig::default());
    let tree = IndexTree::build(&net, &bounds, &IndexConfig::default());
    let defaults = Defaults {
        sigma,
        ..Default::default()
    };
    let queries = default_queries(&net, &defaults, 10, 3);
    Fixture {
        cfg,
        net,
        bounds,
        tree,
        queries,
    }
}
