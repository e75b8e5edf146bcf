//! Data model for the social network, the road network, POIs and check-ins.

mod bipartite;
mod dataset;
pub mod io;
mod params;
mod poi;
mod road;
mod skeleton;
mod social;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use bipartite::BipartiteNetwork;
pub use dataset::{Dataset, CHECKIN_FILE, POI_FILE, ROAD_FILE, SOCIAL_FILE, VISIT_FILE};
pub use params::QueryParams;
pub use poi::PoiTable;
pub use road::{Point, RoadNetwork};
pub use skeleton::{undirected_skeleton, Skeleton};
pub use social::SocialNetwork;

macro_rules! dense_id {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            #[inline]
            fn from(i: usize) -> Self {
                $name(i as u32)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

dense_id!(
    /// Dense index of a user in the social network.
    UserId
);
dense_id!(
    /// Dense index of a point of interest.
    PoiId
);
dense_id!(
    /// Dense index of a road intersection.
    VertexId
);
dense_id!(
    /// Dense index of a keyword token.
    KeywordId
);

/// Bidirectional map between external string names and dense indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NameTable {
    names: Vec<String>,
    lookup: HashMap<String, u32>,
}

impl NameTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `name`, inserting it if absent. The flag is true on insertion.
    pub fn intern(&mut self, name: &str) -> (u32, bool) {
        if let Some(&i) = self.lookup.get(name) {
            return (i, false);
        }
        let i = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.lookup.insert(name.to_owned(), i);
        (i, true)
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, i: u32) -> &str {
        &self.names[i as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intern_is_idempotent() {
        let mut t = NameTable::new();
        assert_eq!(t.intern("a"), (0, true));
        assert_eq!(t.intern("b"), (1, true));
        assert_eq!(t.intern("a"), (0, false));
        assert_eq!(t.name(1), "b");
        assert_eq!(t.get("c"), None);
    }
}
