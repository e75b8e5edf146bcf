use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Dataset, KeywordId, UserId};
use crate::error::{Error, Result};

/// One community search request. `omega` and `pi` are fractions of the dataset maxima.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryParams {
    pub q: UserId,
    pub keywords: BTreeSet<KeywordId>,
    pub k: u32,
    pub d: u32,
    pub omega: f64,
    pub pi: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl QueryParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        if self.k <= 2 {
            return Err(Error::InvalidParams(format!("k must exceed 2, got {}", self.k)));
        }
        if self.d == 0 {
            return Err(Error::InvalidParams("d must be positive".into()));
        }
        if !unit(self.omega) || !unit(self.pi) || !unit(self.theta) {
            return Err(Error::InvalidParams(format!(
                "omega, pi, theta must lie in (0, 1], got {}, {}, {}",
                self.omega, self.pi, self.theta
            )));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidParams(format!("sigma must be nonnegative, got {}", self.sigma)));
        }
        if self.keywords.is_empty() {
            return Err(Error::InvalidParams("keyword set is empty".into()));
        }
        Ok(())
    }

    /// Resolves keyword names against the dataset vocabulary. Unknown names can never
    /// match a POI and are dropped; it is an error only if none are known.
    pub fn keywords_from_names<S: AsRef<str>>(ds: &Dataset, names: &[S]) -> Result<BTreeSet<KeywordId>> {
        let set: BTreeSet<KeywordId> = names.iter().filter_map(|n| ds.pois.keyword_id(n.as_ref())).collect();
        if set.is_empty() {
            return Err(Error::InvalidParams("none of the query keywords occur in the dataset".into()));
        }
        Ok(set)
    }
}
