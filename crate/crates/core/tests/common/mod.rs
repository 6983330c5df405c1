//! Reference oracles shared by the integration tests. None of them call the
//! solvers or the dependency graph under test.
#![allow(dead_code)]

use broadbid::model::{Clicks, Instance, Query};

pub fn q(id: &str, value: &str, cost: &str, biddable: bool) -> Query {
    Query {
        id: id.into(),
        value: value.parse().unwrap(),
        cost: cost.parse().unwrap(),
        clicks: Clicks::ONE,
        biddable,
    }
}

/// Dependency pairs `(s, q)`, `s != q`, recomputed from the broad-match relation.
pub fn pairs(inst: &Instance) -> Vec<(usize, usize)> {
    inst.broad_match()
        .iter()
        .copied()
        .filter(|&(s, q)| s != q && inst.query(s).cost >= inst.query(q).cost)
        .collect()
}

pub fn close(
    n: usize,
    pairs: &[(usize, usize)],
    seed: impl IntoIterator<Item = usize>,
) -> Vec<bool> {
    let mut inside = vec![false; n];
    let mut stack: Vec<usize> = seed.into_iter().collect();
    while let Some(q) = stack.pop() {
        if !inside[q] {
            inside[q] = true;
            stack.extend(pairs.iter().filter(|p| p.0 == q).map(|p| p.1));
        }
    }
    inside
}

pub fn is_closed(pairs: &[(usize, usize)], inside: impl Fn(usize) -> bool) -> bool {
    pairs.iter().all(|&(s, q)| !inside(s) || inside(q))
}

/// Maximum of `score` over closed sets, by enumerating all subsets.
pub fn best_closed_subset(
    inst: &Instance,
    feasible: impl Fn(&[usize]) -> bool,
    score: impl Fn(&[usize]) -> i128,
) -> i128 {
    let n = inst.len();
    assert!(n <= 22);
    let c = pairs(inst);
    let mut best = i128::MIN;
    for mask in 0u32..(1 << n) {
        if !is_closed(&c, |q| mask >> q & 1 == 1) {
            continue;
        }
        let set: Vec<usize> = (0..n).filter(|&q| mask >> q & 1 == 1).collect();
        if feasible(&set) {
            best = best.max(score(&set));
        }
    }
    best
}

/// Best closed-set utility: closures of subsets of the positive queries.
pub fn closure_oracle(inst: &Instance) -> i128 {
    let c = pairs(inst);
    let positive: Vec<usize> = (0..inst.len())
        .filter(|&q| inst.weight(q).raw() > 0)
        .collect();
    assert!(positive.len() <= 22);
    (0u64..1 << positive.len())
        .map(|mask| {
            let chosen = positive
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &q)| q);
            let set = close(inst.len(), &c, chosen);
            (0..inst.len())
                .filter(|&q| set[q])
                .map(|q| inst.weight(q).raw())
                .sum()
        })
        .max()
        .unwrap_or(0)
}

pub fn units(w: i128) -> f64 {
    w as f64 / 1e12
}
