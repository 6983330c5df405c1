use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::units::{Clicks, Money, Weight};
use super::ModelError;

/// A search query with its posted per-click cost and expected clicks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    /// Advertiser value per click.
    pub value: Money,
    /// Posted price per click.
    pub cost: Money,
    pub clicks: Clicks,
    /// Whether the keyword language allows a bid on this phrase.
    pub biddable: bool,
}

impl Query {
    /// Profit from winning the query: (value − cost) × clicks.
    pub fn weight(&self) -> Weight {
        self.value_total() - self.cost_total()
    }

    pub fn value_total(&self) -> Weight {
        Weight::product(self.value, self.clicks)
    }

    pub fn cost_total(&self) -> Weight {
        Weight::product(self.cost, self.clicks)
    }
}

/// The on-disk instance document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub queries: Vec<Query>,
    #[serde(default)]
    pub broad_match: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<Money>,
}

/// A validated bidding instance.
///
/// Queries are ordered by id; everything else refers to them by that
/// position. The broad-match relation always contains `(s, s)` for every
/// biddable `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    queries: Vec<Query>,
    index: HashMap<String, usize>,
    broad_match: BTreeSet<(usize, usize)>,
    // q -> every s with (s, q) in broad_match
    matchers: Vec<Vec<usize>>,
    // s -> every q with (s, q) in broad_match
    matches: Vec<Vec<usize>>,
    budget: Option<Money>,
}

impl Instance {
    pub fn new<S: AsRef<str>>(
        mut queries: Vec<Query>,
        broad_match: impl IntoIterator<Item = (S, S)>,
        budget: Option<Money>,
    ) -> Result<Self, ModelError> {
        queries.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = HashMap::with_capacity(queries.len());
        for (i, q) in queries.iter().enumerate() {
            if index.insert(q.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId(q.id.clone()));
            }
            if q.cost < Money::ZERO {
                return Err(ModelError::NegativeCost(q.id.clone()));
            }
        }
        if let Some(b) = budget {
            if b < Money::ZERO {
                return Err(ModelError::NegativeBudget(b));
            }
        }

        let mut pairs = BTreeSet::new();
        for (s, q) in broad_match {
            let (s, q) = (s.as_ref(), q.as_ref());
            let si = *index
                .get(s)
                .ok_or_else(|| ModelError::UnknownId(s.to_string()))?;
            let qi = *index
                .get(q)
                .ok_or_else(|| ModelError::UnknownId(q.to_string()))?;
            if !queries[si].biddable {
                return Err(ModelError::NotBiddable(s.to_string()));
            }
            pairs.insert((si, qi));
        }
        for (i, q) in queries.iter().enumerate() {
            if q.biddable {
                pairs.insert((i, i));
            }
        }

        let n = queries.len();
        let mut matchers = vec![Vec::new(); n];
        let mut matches = vec![Vec::new(); n];
        for &(s, q) in &pairs {
            matchers[q].push(s);
            matches[s].push(q);
        }
        Ok(Instance {
            queries,
            index,
            broad_match: pairs,
            matchers,
            matches,
            budget,
        })
    }

    pub fn from_document(doc: InstanceDocument) -> Result<Self, ModelError> {
        Self::new(doc.queries, doc.broad_match, doc.budget)
    }

    /// Parses and validates an instance document.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: InstanceDocument =
            serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The canonical document; reflexive pairs are left implicit.
    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            queries: self.queries.clone(),
            broad_match: self
                .broad_match
                .iter()
                .filter(|(s, q)| s != q)
                .map(|&(s, q)| (self.queries[s].id.clone(), self.queries[q].id.clone()))
                .collect(),
            budget: self.budget,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("instance document serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn query(&self, i: usize) -> &Query {
        &self.queries[i]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn broad_match(&self) -> &BTreeSet<(usize, usize)> {
        &self.broad_match
    }

    /// Biddable phrases that broadly match `q`, including `q` itself when biddable.
    pub fn matchers(&self, q: usize) -> &[usize] {
        &self.matchers[q]
    }

    /// Queries broadly matched by a bid on `s`.
    pub fn matched_by(&self, s: usize) -> &[usize] {
        &self.matches[s]
    }

    pub fn budget(&self) -> Option<Money> {
        self.budget
    }

    pub fn with_budget(mut self, budget: Option<Money>) -> Self {
        self.budget = budget;
        self
    }

    pub fn biddable(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.queries[i].biddable)
    }

    pub fn weight(&self, q: usize) -> Weight {
        self.queries[q].weight()
    }

    pub fn weights(&self) -> Vec<Weight> {
        self.queries.iter().map(Query::weight).collect()
    }

    pub fn ids<'a>(&'a self, members: impl IntoIterator<Item = &'a usize>) -> Vec<String> {
        members
            .into_iter()
            .map(|&i| self.queries[i].id.clone())
            .collect()
    }

    /// Resolves query ids to positions.
    pub fn positions<S: AsRef<str>>(
        &self,
        ids: impl IntoIterator<Item = S>,
    ) -> Result<BTreeSet<usize>, ModelError> {
        ids.into_iter()
            .map(|id| {
                self.position(id.as_ref())
                    .ok_or_else(|| ModelError::UnknownId(id.as_ref().to_string()))
            })
            .collect()
    }
}
