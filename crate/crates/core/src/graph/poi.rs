use std::collections::BTreeSet;

use super::{KeywordId, NameTable, PoiId, VertexId};
use crate::error::{Error, Result};

/// POIs anchored on road vertices, each with a nonempty keyword set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PoiTable {
    names: NameTable,
    vertex: Vec<VertexId>,
    keywords: Vec<Vec<KeywordId>>,
    vocab: NameTable,
}

impl PoiTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keywords are deduplicated; case is significant.
    pub fn add_poi<S: AsRef<str>>(&mut self, name: &str, at: VertexId, keywords: &[S]) -> Result<PoiId> {
        if keywords.is_empty() {
            return Err(Error::InvalidParams(format!("poi {name} has no keywords")));
        }
        let (i, fresh) = self.names.intern(name);
        if !fresh {
            return Err(Error::DuplicateId(name.to_owned()));
        }
        let mut ks: Vec<KeywordId> = keywords
            .iter()
            .map(|k| KeywordId(self.vocab.intern(k.as_ref()).0))
            .collect();
        ks.sort_unstable();
        ks.dedup();
        self.vertex.push(at);
        self.keywords.push(ks);
        Ok(PoiId(i))
    }

    pub fn check(&self, p: PoiId) -> Result<()> {
        if p.index() < self.vertex.len() {
            Ok(())
        } else {
            Err(Error::UnknownPoi(p.to_string()))
        }
    }

    pub fn poi_count(&self) -> usize {
        self.vertex.len()
    }

    pub fn pois(&self) -> impl Iterator<Item = PoiId> {
        (0..self.vertex.len()).map(PoiId::from)
    }

    pub fn poi_id(&self, name: &str) -> Option<PoiId> {
        self.names.get(name).map(PoiId)
    }

    pub fn poi_name(&self, p: PoiId) -> &str {
        self.names.name(p.0)
    }

    pub fn vertex(&self, p: PoiId) -> VertexId {
        self.vertex[p.index()]
    }

    /// Sorted keyword ids of `p`.
    pub fn keywords(&self, p: PoiId) -> &[KeywordId] {
        &self.keywords[p.index()]
    }

    pub fn matches(&self, p: PoiId, query: &BTreeSet<KeywordId>) -> bool {
        self.keywords[p.index()].iter().any(|k| query.contains(k))
    }

    pub fn keyword_count(&self) -> usize {
        self.vocab.len()
    }

    pub fn keyword_id(&self, name: &str) -> Option<KeywordId> {
        self.vocab.get(name).map(KeywordId)
    }

    pub fn keyword_name(&self, k: KeywordId) -> &str {
        self.vocab.name(k.0)
    }
}
