//! Keyword-aware community search over bipartite spatial-social networks.
//!
//! A query asks for the largest group of users around a query user that is
//! socially cohesive (a (k,d)-truss), influenced by the query user, and that
//! shares frequently visited POIs matching a keyword set within a road distance
//! budget. Answers are produced by a filter-and-refine engine over a pivot-based
//! index tree, and can be maintained under a sliding window of timestamped visits.

pub mod datagen;
pub mod error;
pub mod graph;
pub mod index;
pub mod metrics;
pub mod precompute;
pub mod query;
pub mod snapshot;
pub mod sweep;
pub mod temporal;

pub use error::{Error, Result};
pub use graph::{
    BipartiteNetwork, Dataset, KeywordId, Point, PoiId, PoiTable, RoadNetwork, SocialNetwork, UserId, VertexId,
};
