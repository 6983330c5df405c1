//! Instance families: adversarial examples, hardness reductions, the
//! keyword-pair simulation model and random instances for testing.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Clicks, Instance, ModelError, Money, Query};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("invalid generator parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, GenerateError> {
    Err(GenerateError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    GreedyTrap {
        n: usize,
    },
    IntegralityGap {
        k: usize,
        n_chain: usize,
        c: Money,
        c_prime: Money,
        m: Money,
    },
    IndependentSet {
        nodes: Vec<String>,
        edges: Vec<(String, String)>,
    },
    MaxCoverage {
        sets: Vec<Vec<usize>>,
        element_weights: Vec<Money>,
        k: usize,
    },
    Simulation {
        keywords: usize,
        seed: u64,
    },
    RandomQuery {
        size: usize,
        seed: u64,
    },
    RandomBudgeted {
        size: usize,
        seed: u64,
    },
    RandomKeyword {
        keywords: usize,
        seed: u64,
    },
}

pub fn generate(spec: &GeneratorSpec) -> Result<Instance, GenerateError> {
    match spec {
        GeneratorSpec::GreedyTrap { n } => greedy_trap(*n),
        GeneratorSpec::IntegralityGap {
            k,
            n_chain,
            c,
            c_prime,
            m,
        } => integrality_gap(*k, *n_chain, *c, *c_prime, *m),
        GeneratorSpec::IndependentSet { nodes, edges } => independent_set(nodes, edges),
        GeneratorSpec::MaxCoverage {
            sets,
            element_weights,
            k,
        } => max_coverage(sets, element_weights, *k),
        GeneratorSpec::Simulation { keywords, seed } => simulation(*keywords, *seed),
        GeneratorSpec::RandomQuery { size, seed } => {
            Ok(random_query(&mut rng::seeded(*seed), *size)?)
        }
        GeneratorSpec::RandomBudgeted { size, seed } => {
            Ok(random_budgeted(&mut rng::seeded(*seed), *size)?)
        }
        GeneratorSpec::RandomKeyword { keywords, seed } => {
            Ok(random_keyword(&mut rng::seeded(*seed), *keywords)?)
        }
    }
}

fn query(id: String, value: Money, cost: Money, clicks: Clicks, biddable: bool) -> Query {
    Query {
        id,
        value,
        cost,
        clicks,
        biddable,
    }
}

fn keyword_name(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len().max(2);
    format!("kw{i:0width$}")
}

/// `n` keywords worth 2 per click at cost 1, and one query per keyword
/// pair worth `1 - 1.5/n` (rounded to micro-units) matched by both.
///
/// Bidding on every keyword wins everything with utility `(n + 3) / 4`,
/// yet every single step from the empty set loses money.
pub fn greedy_trap(n: usize) -> Result<Instance, GenerateError> {
    if n < 2 {
        return invalid("greedy trap needs at least 2 keywords");
    }
    let one = Money::from_units(1);
    let names: Vec<String> = (0..n).map(|i| keyword_name(i, n)).collect();
    let mut queries: Vec<Query> = names
        .iter()
        .map(|id| query(id.clone(), Money::from_units(2), one, Clicks::ONE, true))
        .collect();
    let pair_value = Money::from_micros(Money::from_units(1).micros() - 1_500_000 / n as i64);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let id = format!("{}_{}", names[i], names[j]);
            queries.push(query(id.clone(), pair_value, one, Clicks::ONE, false));
            pairs.push((names[i].clone(), id.clone()));
            pairs.push((names[j].clone(), id));
        }
    }
    Ok(Instance::new(queries, pairs, None)?)
}

/// Budgeted instance with `k + 1` expensive queries `r_i` (cost `c`,
/// value `m`), `k + 1` cheap queries `l_j` (cost `c_prime`, value 1), and a
/// chain of `n_chain` unit-cost zero-value queries below each `r_i`.
///
/// Winning `r_i` forces every `l_j` with `j != i` and the whole `i`-th
/// chain; the budget `c + k c_prime + n_chain` pays for exactly one such
/// package, so the integral optimum is `m + k`.
pub fn integrality_gap(
    k: usize,
    n_chain: usize,
    c: Money,
    c_prime: Money,
    m: Money,
) -> Result<Instance, GenerateError> {
    if k == 0 || n_chain == 0 {
        return invalid("k and n_chain must be positive");
    }
    let n_chain_i = n_chain as i64;
    let one = Money::from_units(1);
    // Two r packages must not fit, and one r package must beat every l.
    if c_prime <= Money::ZERO
        || c.micros() <= k as i64 * c_prime.micros() + n_chain_i * one.micros()
    {
        return invalid("integrality gap requires c > k c' + n_chain and c' > 0");
    }
    if m <= one {
        return invalid("m must exceed 1");
    }
    let width = k.to_string().len().max(2);
    let r = |i: usize| format!("r{i:0width$}");
    let l = |j: usize| format!("l{j:0width$}");
    let t = |i: usize, d: usize| format!("t{i:0width$}_{d:03}");
    let mut queries = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..=k {
        queries.push(query(r(i), m, c, Clicks::ONE, true));
        queries.push(query(l(i), one, c_prime, Clicks::ONE, true));
        for d in 0..n_chain {
            queries.push(query(t(i, d), Money::ZERO, one, Clicks::ONE, true));
            pairs.push(if d == 0 {
                (r(i), t(i, 0))
            } else {
                (t(i, d - 1), t(i, d))
            });
        }
        for j in (0..=k).filter(|&j| j != i) {
            pairs.push((r(i), l(j)));
        }
    }
    let budget =
        Money::from_micros(c.micros() + k as i64 * c_prime.micros() + n_chain_i * one.micros());
    Ok(Instance::new(queries, pairs, Some(budget))?)
}

/// Keyword-language instance whose optimum is the maximum independent set
/// size of the graph.
///
/// Every query costs `c0 = max(1, max_degree - 1)` per click. Node `v` is a
/// biddable keyword of weight `1 - deg(v)`; edge `{u, v}` is a query of
/// weight 1 matched by both endpoints. Uniform costs keep cheap bids from
/// winning an edge without its endpoint.
pub fn independent_set(
    nodes: &[String],
    edges: &[(String, String)],
) -> Result<Instance, GenerateError> {
    let mut degree: BTreeMap<&str, i64> = nodes.iter().map(|v| (v.as_str(), 0)).collect();
    let mut seen = BTreeSet::new();
    for (u, v) in edges {
        if u == v {
            return invalid(format!("self loop on `{u}`"));
        }
        let key = if u < v { (u, v) } else { (v, u) };
        if !seen.insert(key) {
            return invalid(format!("duplicate edge {u} {v}"));
        }
        for x in [u, v] {
            *degree
                .get_mut(x.as_str())
                .ok_or_else(|| GenerateError::Invalid(format!("unknown node `{x}`")))? += 1;
        }
    }
    let max_degree = degree.values().copied().max().unwrap_or(0);
    let c0 = Money::from_units((max_degree - 1).max(1));
    let mut queries = Vec::new();
    let mut pairs = Vec::new();
    for (v, d) in &degree {
        let value = Money::from_micros(c0.micros() - (d - 1) * Money::from_units(1).micros());
        queries.push(query(format!("v_{v}"), value, c0, Clicks::ONE, true));
    }
    for (u, v) in seen {
        let id = format!("e_{u}_{v}");
        let value = Money::from_micros(c0.micros() + Money::from_units(1).micros());
        queries.push(query(id.clone(), value, c0, Clicks::ONE, false));
        pairs.push((format!("v_{u}"), id.clone()));
        pairs.push((format!("v_{v}"), id));
    }
    Ok(Instance::new(queries, pairs, None)?)
}

/// Clicks on each element query in [`max_coverage`].
pub const COVERAGE_CLICK_MICROS: i64 = 1_000;

/// Budgeted keyword-language instance whose optimal value is the best
/// weight covered by `k` of the sets.
///
/// Set keywords cost 1 and are worth nothing. Element queries also cost 1
/// per click but get only 0.001 clicks, valued so that `v n` is the element
/// weight. The budget `k + 0.001 |elements|` pays for `k` set keywords and
/// any elements they pull in, never for `k + 1` keywords.
pub fn max_coverage(
    sets: &[Vec<usize>],
    element_weights: &[Money],
    k: usize,
) -> Result<Instance, GenerateError> {
    let n_el = element_weights.len();
    if n_el >= 1000 {
        return invalid("max coverage supports fewer than 1000 elements");
    }
    if element_weights.iter().any(|w| *w < Money::ZERO) {
        return invalid("element weights must be non-negative");
    }
    let one = Money::from_units(1);
    let set_width = sets.len().to_string().len().max(2);
    let el = |e: usize| format!("el{e:03}");
    let mut queries = Vec::new();
    let mut pairs = Vec::new();
    for (i, members) in sets.iter().enumerate() {
        let id = format!("set{i:0set_width$}");
        queries.push(query(id.clone(), Money::ZERO, one, Clicks::ONE, true));
        for &e in members {
            if e >= n_el {
                return invalid(format!("set {i} names element {e} out of range"));
            }
            pairs.push((id.clone(), el(e)));
        }
    }
    for (e, w) in element_weights.iter().enumerate() {
        let value = Money::from_micros(w.micros() * 1000);
        let clicks = Clicks::from_micros(COVERAGE_CLICK_MICROS).map_err(ModelError::from)?;
        queries.push(query(el(e), value, one, clicks, false));
    }
    let budget = Money::from_micros(k as i64 * one.micros() + n_el as i64 * COVERAGE_CLICK_MICROS);
    Ok(Instance::new(queries, pairs, Some(budget))?)
}

/// Cost per click of every query in [`simulation`].
pub const SIMULATION_COST: Money = Money::from_units(5);

/// Keywords with standard-normal net values plus one query per keyword
/// pair, matched by both keywords, whose net value is the average, max or
/// min of the two (chosen uniformly). All costs are equal and clicks are 1.
pub fn simulation(keywords: usize, seed: u64) -> Result<Instance, GenerateError> {
    if keywords == 0 {
        return invalid("simulation needs at least one keyword");
    }
    let mut rng = rng::seeded(seed);
    let names: Vec<String> = (0..keywords).map(|i| keyword_name(i, keywords)).collect();
    let nets: Vec<i64> = (0..keywords)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            Money::from_f64(x).micros()
        })
        .collect();
    let priced = |net: i64| Money::from_micros(net + SIMULATION_COST.micros());
    let mut queries: Vec<Query> = names
        .iter()
        .zip(&nets)
        .map(|(id, &net)| query(id.clone(), priced(net), SIMULATION_COST, Clicks::ONE, true))
        .collect();
    let mut pairs = Vec::new();
    for i in 0..keywords {
        for j in i + 1..keywords {
            let (a, b) = (nets[i], nets[j]);
            let net = match rng.random_range(0..3) {
                0 => (a + b).div_euclid(2),
                1 => a.max(b),
                _ => a.min(b),
            };
            let id = format!("{}_{}", names[i], names[j]);
            queries.push(query(
                id.clone(),
                priced(net),
                SIMULATION_COST,
                Clicks::ONE,
                false,
            ));
            pairs.push((names[i].clone(), id.clone()));
            pairs.push((names[j].clone(), id));
        }
    }
    Ok(Instance::new(queries, pairs, None)?)
}

fn money_in(rng: &mut Rng, lo: i64, hi: i64, step: i64) -> Money {
    Money::from_micros(rng.random_range(lo / step..=hi / step) * step)
}

/// Random instance with `size` queries: costs on a coarse grid so that
/// ties occur, values around the costs, a mix of click counts and a random
/// transitive broad-match relation from biddable queries.
pub fn random_query(rng: &mut Rng, size: usize) -> Result<Instance, ModelError> {
    let unit = Money::from_units(1).micros();
    let queries: Vec<Query> = (0..size)
        .map(|i| {
            let cost = money_in(rng, 0, 3 * unit, unit / 2);
            let value = money_in(rng, 0, 5 * unit, unit / 100);
            let clicks =
                Clicks::from_micros(rng.random_range(1..=4) * unit / 2).expect("positive clicks");
            query(
                format!("q{i:02}"),
                value,
                cost,
                clicks,
                rng.random_bool(0.8),
            )
        })
        .collect();
    let density = rng.random_range(0.05..0.35);
    let n = queries.len();
    let mut matches = vec![vec![false; n]; n];
    for (s, row) in matches
        .iter_mut()
        .enumerate()
        .filter(|(s, _)| queries[*s].biddable)
    {
        for (q, m) in row.iter_mut().enumerate() {
            *m = s != q && rng.random_bool(density);
        }
    }
    // Phrase containment is transitive, so close the relation.
    for mid in 0..n {
        let via = matches[mid].clone();
        for row in matches.iter_mut().filter(|row| row[mid]) {
            row.iter_mut().zip(&via).for_each(|(m, v)| *m |= v);
        }
    }
    let pairs: Vec<(String, String)> = (0..n)
        .flat_map(|s| (0..n).map(move |q| (s, q)))
        .filter(|&(s, q)| s != q && matches[s][q])
        .map(|(s, q)| (queries[s].id.clone(), queries[q].id.clone()))
        .collect();
    Instance::new(queries, pairs, None)
}

/// [`random_query`] with a budget drawn uniformly up to the total spend.
pub fn random_budgeted(rng: &mut Rng, size: usize) -> Result<Instance, ModelError> {
    let inst = random_query(rng, size)?;
    let total: i128 = inst.queries().iter().map(|q| q.cost_total().raw()).sum();
    let max_micros = (total / crate::model::MICROS as i128) as i64;
    let budget = Money::from_micros(rng.random_range(0..=max_micros.max(0)));
    Ok(inst.with_budget(Some(budget)))
}

/// Keyword-language instance: `keywords` biddable phrases plus dependent
/// queries, each matched by one or two keywords.
pub fn random_keyword(rng: &mut Rng, keywords: usize) -> Result<Instance, ModelError> {
    let unit = Money::from_units(1).micros();
    let mut queries: Vec<Query> = (0..keywords)
        .map(|i| {
            let cost = money_in(rng, unit / 2, 2 * unit, unit / 2);
            let value = money_in(rng, 0, 6 * unit, unit / 100);
            query(format!("k{i:02}"), value, cost, Clicks::ONE, true)
        })
        .collect();
    let dependents = rng.random_range(keywords..=3 * keywords.max(1));
    let mut pairs = Vec::new();
    for d in 0..dependents {
        let id = format!("q{d:02}");
        let cost = money_in(rng, unit / 2, 2 * unit, unit / 2);
        let value = money_in(rng, 0, 6 * unit, unit / 100);
        let clicks = Clicks::from_micros(rng.random_range(1..=4) * unit / 2).expect("positive");
        queries.push(query(id.clone(), value, cost, clicks, false));
        if keywords == 0 {
            continue;
        }
        let first = rng.random_range(0..keywords);
        pairs.push((format!("k{first:02}"), id.clone()));
        if keywords > 1 && rng.random_bool(0.6) {
            let mut second = rng.random_range(0..keywords - 1);
            if second >= first {
                second += 1;
            }
            pairs.push((format!("k{second:02}"), id));
        }
    }
    Instance::new(queries, pairs, None)
}

/// Parses an edge list: one `u v` pair per line, a lone token for an
/// isolated node, `#` comments.
pub fn parse_edge_list(text: &str) -> Result<(Vec<String>, Vec<(String, String)>), GenerateError> {
    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            [v] => {
                nodes.insert(v.to_string());
            }
            [u, v] => {
                nodes.insert(u.to_string());
                nodes.insert(v.to_string());
                edges.push((u.to_string(), v.to_string()));
            }
            _ => return invalid(format!("line {}: expected `u v`", lineno + 1)),
        }
    }
    Ok((nodes.into_iter().collect(), edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DependencyGraph, Weight};

    #[test]
    fn greedy_trap_shape() {
        let inst = greedy_trap(4).unwrap();
        assert_eq!(inst.len(), 10);
        assert_eq!(DependencyGraph::derive(&inst).len(), 16);
        assert_eq!(inst.biddable().count(), 4);
        let total: Weight = inst.weights().into_iter().sum();
        assert_eq!(total, Weight::from_f64(1.75));
        assert_eq!(greedy_trap(8).unwrap().len(), 36);
        assert!(greedy_trap(1).is_err());
    }

    #[test]
    fn integrality_gap_shape() {
        let inst = integrality_gap(
            3,
            3,
            Money::from_units(100_000),
            Money::from_units(1_000),
            Money::from_units(100_000),
        )
        .unwrap();
        assert_eq!(inst.len(), 4 * 5);
        assert_eq!(inst.budget(), Some(Money::from_units(100_000 + 3_000 + 3)));
        let dg = DependencyGraph::derive(&inst);
        // 20 reflexive + 12 r->l + 4 r->t + 8 chain links
        assert_eq!(dg.len(), 44);
        let surrogate = integrality_gap(
            3,
            3,
            Money::from_units(100),
            Money::from_units(10),
            Money::from_units(50),
        );
        assert!(surrogate.is_ok());
        let bad = integrality_gap(
            3,
            3,
            Money::from_units(30),
            Money::from_units(10),
            Money::from_units(50),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn independent_set_triangle() {
        let nodes: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let edges = vec![
            ("a".into(), "b".into()),
            ("b".into(), "c".into()),
            ("a".into(), "c".into()),
        ];
        let inst = independent_set(&nodes, &edges).unwrap();
        assert_eq!(inst.len(), 6);
        for q in inst.queries().iter().filter(|q| q.biddable) {
            assert_eq!(q.cost, Money::from_units(1));
            assert_eq!(q.weight(), Weight::from_f64(-1.0));
        }
        for q in inst.queries().iter().filter(|q| !q.biddable) {
            assert_eq!(q.weight(), Weight::from_f64(1.0));
        }
    }

    #[test]
    fn edge_list_parsing() {
        let (nodes, edges) = parse_edge_list("1 2\n2 3 # path\n\n4\n").unwrap();
        assert_eq!(nodes, vec!["1", "2", "3", "4"]);
        assert_eq!(edges.len(), 2);
        assert!(parse_edge_list("1 2 3").is_err());
    }

    #[test]
    fn coverage_weights() {
        let inst = max_coverage(&[vec![0, 1], vec![1, 2]], &[Money::from_units(3); 3], 1).unwrap();
        assert_eq!(inst.len(), 5);
        let el = inst.position("el001").unwrap();
        assert_eq!(inst.query(el).value_total(), Weight::from_f64(3.0));
        assert_eq!(inst.budget(), Some(Money::from_f64(1.003)));
    }

    #[test]
    fn simulation_is_seeded() {
        let a = simulation(30, 7).unwrap();
        assert_eq!(a.len(), 465);
        assert_eq!(a.to_json(), simulation(30, 7).unwrap().to_json());
        assert_ne!(a.to_json(), simulation(30, 8).unwrap().to_json());
    }

    #[test]
    fn random_families_are_seeded() {
        for seed in 0..20 {
            let a = random_query(&mut rng::seeded(seed), 12).unwrap();
            let b = random_query(&mut rng::seeded(seed), 12).unwrap();
            assert_eq!(a.to_json(), b.to_json());
            let k = random_keyword(&mut rng::seeded(seed), 4).unwrap();
            for q in 0..k.len() {
                let others = k.matchers(q).iter().filter(|&&s| s != q).count();
                assert!(others <= 2);
            }
        }
    }
}
