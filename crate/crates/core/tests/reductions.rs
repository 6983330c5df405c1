use std::collections::BTreeSet;

use broadbid::baselines::brute_force_keyword_budgeted;
use broadbid::baselines::generate::{independent_set, max_coverage, parse_edge_list};
use broadbid::keyword_solver::{solve_keyword_exact, ExactOptions};
use broadbid::model::{Money, Weight};
use proptest::prelude::*;

fn max_independent_set(n: usize, edges: &[(usize, usize)]) -> u32 {
    (0u32..1 << n)
        .filter(|m| {
            edges
                .iter()
                .all(|&(u, v)| m >> u & 1 == 0 || m >> v & 1 == 0)
        })
        .map(u32::count_ones)
        .max()
        .unwrap_or(0)
}

fn max_k_coverage(sets: &[Vec<usize>], weights: &[i64], k: usize) -> i64 {
    (0u32..1 << sets.len())
        .filter(|m| m.count_ones() as usize <= k)
        .map(|m| {
            let covered: BTreeSet<usize> = (0..sets.len())
                .filter(|i| m >> i & 1 == 1)
                .flat_map(|i| sets[i].iter().copied())
                .collect();
            covered.iter().map(|&e| weights[e]).sum()
        })
        .max()
        .unwrap_or(0)
}

fn graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..=9).prop_flat_map(|n| {
        let all: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        let len = all.len();
        (Just(n), proptest::sample::subsequence(all, 0..=len))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn independent_set_identity((n, edges) in graph()) {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let named: Vec<(String, String)> =
            edges.iter().map(|&(u, v)| (names[u].clone(), names[v].clone())).collect();
        let inst = independent_set(&names, &named).unwrap();
        prop_assert_eq!(inst.len(), n + edges.len());
        let best = solve_keyword_exact(&inst, ExactOptions::default()).unwrap().utility();
        prop_assert_eq!(best, Weight::from_f64(max_independent_set(n, &edges) as f64));
    }

    #[test]
    fn coverage_identity(
        sets in proptest::collection::vec(proptest::collection::btree_set(0usize..6, 0..=4), 1..=5),
        weights in proptest::collection::vec(1i64..=9, 6),
        k in 1usize..=5,
    ) {
        let sets: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let k = k.min(sets.len());
        let money: Vec<Money> = weights.iter().map(|&w| Money::from_units(w)).collect();
        let inst = max_coverage(&sets, &money, k).unwrap();
        let (_, won) = brute_force_keyword_budgeted(&inst, None, 10_000_000).unwrap();
        prop_assert_eq!(won.value_part, Money::from_units(max_k_coverage(&sets, &weights, k)).to_weight());
    }
}

#[test]
fn five_cycle_and_path() {
    let (nodes, edges) = parse_edge_list("a b\nb c\nc d\nd e\ne a\n").unwrap();
    let inst = independent_set(&nodes, &edges).unwrap();
    assert_eq!(
        solve_keyword_exact(&inst, ExactOptions::default())
            .unwrap()
            .utility(),
        Weight::from_f64(2.0)
    );
    let (nodes, edges) = parse_edge_list("# path\na b\nb c\nc d\nd e\n").unwrap();
    let inst = independent_set(&nodes, &edges).unwrap();
    assert_eq!(inst.len(), 9);
    assert_eq!(
        solve_keyword_exact(&inst, ExactOptions::default())
            .unwrap()
            .utility(),
        Weight::from_f64(3.0)
    );
}
