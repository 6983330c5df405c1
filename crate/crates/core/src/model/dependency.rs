use std::collections::{BTreeSet, VecDeque};

use super::instance::Instance;

/// The implication pairs `C`: winning the antecedent forces winning the
/// consequent.
///
/// `(s, q)` is a pair exactly when `q` broadly matches `s` and
/// `cost(s) >= cost(q)`. Reflexive pairs of biddable queries are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pairs: BTreeSet<(usize, usize)>,
    antecedents: Vec<Vec<usize>>,
    consequents: Vec<Vec<usize>>,
}

impl DependencyGraph {
    pub fn derive(inst: &Instance) -> Self {
        let pairs = inst
            .broad_match()
            .iter()
            .copied()
            .filter(|&(s, q)| inst.query(s).cost >= inst.query(q).cost)
            .collect();
        Self::from_pairs(inst.len(), pairs)
    }

    pub(crate) fn from_pairs(n: usize, pairs: BTreeSet<(usize, usize)>) -> Self {
        let mut antecedents = vec![Vec::new(); n];
        let mut consequents = vec![Vec::new(); n];
        for &(s, q) in &pairs {
            antecedents[q].push(s);
            consequents[s].push(q);
        }
        DependencyGraph {
            pairs,
            antecedents,
            consequents,
        }
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    /// Pairs `(s, q)` with `s != q`.
    pub fn proper_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied().filter(|(s, q)| s != q)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, s: usize, q: usize) -> bool {
        self.pairs.contains(&(s, q))
    }

    /// `D(q)`: every `s` whose win forces `q`.
    pub fn antecedents(&self, q: usize) -> &[usize] {
        &self.antecedents[q]
    }

    /// `N(s)`: every `q` forced by winning `s`.
    pub fn consequents(&self, s: usize) -> &[usize] {
        &self.consequents[s]
    }

    /// Smallest superset of `set` closed under the pairs.
    pub fn closure<'a>(&self, set: impl IntoIterator<Item = &'a usize>) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = BTreeSet::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &q in set {
            if out.insert(q) {
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            for &next in &self.consequents[q] {
                if out.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        out
    }

    pub fn is_closed(&self, set: &BTreeSet<usize>) -> bool {
        set.iter()
            .all(|&q| self.consequents[q].iter().all(|c| set.contains(c)))
    }
}
