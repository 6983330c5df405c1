//! Exact max-flow / min-cut (Dinic) over wide-integer capacities, and the
//! flow graph whose minimum cut is an optimal winning set.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{DependencyGraph, Weight};

pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("capacity sum exceeds the integer range")]
    CapacityOverflow,
    #[error("negative capacity on arc {0}")]
    NegativeCapacity(usize),
    #[error("max-flow value {flow} differs from cut capacity {cut}")]
    CutMismatch { flow: i128, cut: i128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub capacity: i128,
}

/// A directed network with integer capacities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    node_count: usize,
    source: usize,
    sink: usize,
    arcs: Vec<Arc>,
    inf_surrogate: i128,
}

impl FlowNetwork {
    pub fn new(node_count: usize, source: usize, sink: usize) -> Self {
        assert!(source < node_count && sink < node_count && source != sink);
        FlowNetwork {
            node_count,
            source,
            sink,
            arcs: Vec::new(),
            inf_surrogate: i128::MAX,
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, capacity: i128) -> usize {
        assert!(from < self.node_count && to < self.node_count);
        self.arcs.push(Arc { from, to, capacity });
        self.arcs.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// The capacity standing in for an uncuttable arc.
    pub fn inf_surrogate(&self) -> i128 {
        self.inf_surrogate
    }

    pub fn is_infinite(&self, arc: usize) -> bool {
        self.arcs[arc].capacity >= self.inf_surrogate
    }

    /// DIMACS max-flow format (1-based node numbers).
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p max {} {}", self.node_count, self.arcs.len());
        let _ = writeln!(out, "n {} s", self.source + 1);
        let _ = writeln!(out, "n {} t", self.sink + 1);
        for a in &self.arcs {
            let _ = writeln!(out, "a {} {} {}", a.from + 1, a.to + 1, a.capacity);
        }
        out
    }
}

/// Node of query `q` in the graph built by [`build_flow_graph`].
pub fn query_node(q: usize) -> usize {
    q + 2
}

/// The min-cut network of a maximum-weight closure problem.
///
/// Non-positive queries hang off the source with capacity `|w|`, positive
/// ones feed the sink with capacity `w`, and every dependency pair
/// `(p, q)`, `p != q`, becomes an uncuttable arc `q → p`. Then the sink side
/// of any finite cut is closed, and the cut capacity equals
/// `Σ_{T∩Q⁻} |w| + Σ_{Q⁺∖T} w` for its sink side `T`.
pub fn build_flow_graph(
    dg: &DependencyGraph,
    weights: &[Weight],
) -> Result<FlowNetwork, FlowError> {
    let positive_total = weights
        .iter()
        .filter(|w| w.is_positive())
        .try_fold(0i128, |acc, w| acc.checked_add(w.raw()))
        .ok_or(FlowError::CapacityOverflow)?;
    let negative_total = weights
        .iter()
        .filter(|w| !w.is_positive())
        .try_fold(0i128, |acc, w| acc.checked_add(w.raw().checked_neg()?))
        .ok_or(FlowError::CapacityOverflow)?;
    negative_total
        .checked_add(positive_total)
        .ok_or(FlowError::CapacityOverflow)?;
    let inf = positive_total
        .checked_add(1)
        .ok_or(FlowError::CapacityOverflow)?;

    let mut net = FlowNetwork::new(weights.len() + 2, SOURCE, SINK);
    net.inf_surrogate = inf;
    for (q, w) in weights.iter().enumerate() {
        if w.is_positive() {
            net.add_arc(query_node(q), SINK, w.raw());
        } else {
            net.add_arc(SOURCE, query_node(q), -w.raw());
        }
    }
    for (p, q) in dg.proper_pairs() {
        net.add_arc(query_node(q), query_node(p), inf);
    }
    Ok(net)
}

/// A maximum flow and the minimum cut it certifies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutResult {
    pub flow_value: i128,
    /// Nodes reachable from the source in the final residual graph.
    pub source_side: Vec<usize>,
    pub sink_side: Vec<usize>,
    /// Flow on each arc, in arc order.
    pub arc_flows: Vec<i128>,
}

impl CutResult {
    pub fn on_sink_side(&self, node: usize) -> bool {
        self.sink_side.binary_search(&node).is_ok()
    }
}

struct Residual {
    to: usize,
    cap: i128,
}

struct Dinic {
    edges: Vec<Residual>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    next: Vec<usize>,
}

impl Dinic {
    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.edges[e].to;
                if self.edges[e].cap > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: i128) -> i128 {
        if u == t {
            return pushed;
        }
        while self.next[u] < self.adj[u].len() {
            let e = self.adj[u][self.next[u]];
            let v = self.edges[e].to;
            if self.edges[e].cap > 0 && self.level[v] == self.level[u] + 1 {
                let got = self.dfs(v, t, pushed.min(self.edges[e].cap));
                if got > 0 {
                    self.edges[e].cap -= got;
                    self.edges[e ^ 1].cap += got;
                    return got;
                }
            }
            self.next[u] += 1;
        }
        0
    }
}

/// Dinic's algorithm. The returned cut is the one with the smallest source
/// side; its capacity is checked against the flow value.
pub fn max_flow(net: &FlowNetwork) -> Result<CutResult, FlowError> {
    let n = net.node_count;
    let mut outflow: i128 = 0;
    for (i, a) in net.arcs.iter().enumerate() {
        if a.capacity < 0 {
            return Err(FlowError::NegativeCapacity(i));
        }
        if a.from == net.source {
            outflow = outflow
                .checked_add(a.capacity)
                .ok_or(FlowError::CapacityOverflow)?;
        }
    }

    let mut d = Dinic {
        edges: Vec::with_capacity(2 * net.arcs.len()),
        adj: vec![Vec::new(); n],
        level: vec![-1; n],
        next: vec![0; n],
    };
    for a in &net.arcs {
        d.adj[a.from].push(d.edges.len());
        d.edges.push(Residual {
            to: a.to,
            cap: a.capacity,
        });
        d.adj[a.to].push(d.edges.len());
        d.edges.push(Residual { to: a.from, cap: 0 });
    }

    let (s, t) = (net.source, net.sink);
    let mut flow: i128 = 0;
    while d.bfs(s, t) {
        d.next.iter_mut().for_each(|x| *x = 0);
        loop {
            let pushed = d.dfs(s, t, outflow.max(1));
            if pushed == 0 {
                break;
            }
            flow += pushed;
        }
    }

    // After the last BFS, level >= 0 marks residual reachability from s.
    let source_side: Vec<usize> = (0..n).filter(|&v| d.level[v] >= 0).collect();
    let sink_side: Vec<usize> = (0..n).filter(|&v| d.level[v] < 0).collect();
    let arc_flows: Vec<i128> = net
        .arcs
        .iter()
        .enumerate()
        .map(|(i, a)| a.capacity - d.edges[2 * i].cap)
        .collect();
    let cut: i128 = net
        .arcs
        .iter()
        .filter(|a| d.level[a.from] >= 0 && d.level[a.to] < 0)
        .map(|a| a.capacity)
        .sum();
    if cut != flow {
        return Err(FlowError::CutMismatch { flow, cut });
    }
    Ok(CutResult {
        flow_value: flow,
        source_side,
        sink_side,
        arc_flows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::generate::greedy_trap;
    use crate::model::{Clicks, Instance, Query};

    #[test]
    fn single_arc() {
        let mut net = FlowNetwork::new(2, 0, 1);
        net.add_arc(0, 1, 5);
        let cut = max_flow(&net).unwrap();
        assert_eq!(cut.flow_value, 5);
        assert_eq!(cut.source_side, vec![0]);
    }

    #[test]
    fn bottleneck_path() {
        let mut net = FlowNetwork::new(3, 0, 2);
        net.add_arc(0, 1, 3);
        net.add_arc(1, 2, 4);
        let cut = max_flow(&net).unwrap();
        assert_eq!(cut.flow_value, 3);
        assert_eq!(cut.source_side, vec![0]);
        assert_eq!(cut.arc_flows, vec![3, 3]);
    }

    #[test]
    fn classic_network() {
        let mut net = FlowNetwork::new(6, 0, 5);
        for (u, v, c) in [
            (0, 1, 10),
            (0, 2, 10),
            (1, 3, 4),
            (1, 4, 8),
            (2, 4, 9),
            (3, 5, 10),
            (4, 3, 6),
            (4, 5, 10),
        ] {
            net.add_arc(u, v, c);
        }
        assert_eq!(max_flow(&net).unwrap().flow_value, 19);
    }

    #[test]
    fn disconnected_sink() {
        let mut net = FlowNetwork::new(4, 0, 3);
        net.add_arc(0, 1, 10);
        net.add_arc(2, 3, 5);
        let cut = max_flow(&net).unwrap();
        assert_eq!(cut.flow_value, 0);
        assert_eq!(cut.source_side, vec![0, 1]);
    }

    fn a_ab() -> Instance {
        let q = |id: &str, v: &str, biddable| Query {
            id: id.into(),
            value: v.parse().unwrap(),
            cost: "1".parse().unwrap(),
            clicks: Clicks::ONE,
            biddable,
        };
        Instance::new(
            vec![q("a", "2", true), q("ab", "0.9", false)],
            vec![("a", "ab")],
            None,
        )
        .unwrap()
    }

    #[test]
    fn closure_network_for_a_ab() {
        let inst = a_ab();
        let dg = DependencyGraph::derive(&inst);
        let net = build_flow_graph(&dg, &inst.weights()).unwrap();
        let unit = 1_000_000_000_000i128;
        assert_eq!(net.node_count(), 4);
        assert_eq!(net.inf_surrogate(), unit + 1);
        let arcs: Vec<_> = net
            .arcs()
            .iter()
            .map(|a| (a.from, a.to, a.capacity))
            .collect();
        assert_eq!(
            arcs,
            vec![
                (query_node(0), SINK, unit),
                (SOURCE, query_node(1), unit / 10),
                (query_node(1), query_node(0), unit + 1),
            ]
        );
        let cut = max_flow(&net).unwrap();
        assert_eq!(cut.flow_value, unit / 10);
        assert_eq!(cut.sink_side, vec![SINK, query_node(0), query_node(1)]);
    }

    #[test]
    fn single_positive_query() {
        let inst = Instance::new(
            vec![Query {
                id: "p".into(),
                value: "3".parse().unwrap(),
                cost: "1".parse().unwrap(),
                clicks: Clicks::ONE,
                biddable: true,
            }],
            Vec::<(&str, &str)>::new(),
            None,
        )
        .unwrap();
        let dg = DependencyGraph::derive(&inst);
        let net = build_flow_graph(&dg, &inst.weights()).unwrap();
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.arcs().len(), 1);
        assert_eq!(net.arcs()[0].to, SINK);
    }

    #[test]
    fn greedy_trap_network_shape() {
        let inst = greedy_trap(4).unwrap();
        let dg = DependencyGraph::derive(&inst);
        let net = build_flow_graph(&dg, &inst.weights()).unwrap();
        assert_eq!(net.node_count(), 2 + 4 + 6);
        let into_sink = net.arcs().iter().filter(|a| a.to == SINK).count();
        let from_source = net.arcs().iter().filter(|a| a.from == SOURCE).count();
        let infinite = (0..net.arcs().len())
            .filter(|&i| net.is_infinite(i))
            .count();
        assert_eq!((into_sink, from_source, infinite), (4, 6, 12));
    }

    #[test]
    fn overflow_is_reported() {
        let dg = DependencyGraph::from_pairs(2, Default::default());
        let huge = [Weight(i128::MAX), Weight(i128::MAX)];
        assert_eq!(
            build_flow_graph(&dg, &huge),
            Err(FlowError::CapacityOverflow)
        );
    }

    #[test]
    fn dimacs_dump() {
        let mut net = FlowNetwork::new(2, 0, 1);
        net.add_arc(0, 1, 5);
        assert_eq!(net.to_dimacs(), "p max 2 1\nn 1 s\nn 2 t\na 1 2 5\n");
    }
}
