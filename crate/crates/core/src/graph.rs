//! Physical topology, the communication graph built on top of it, and the
//! node sets the formulations read off that transformation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

/// Nodes are numbered 1..=n throughout; 0 is never a valid id.
pub type NodeId = usize;

/// Distance sentinel for unreachable pairs. Small enough that two of them
/// sum without overflow.
pub const UNREACHABLE: u64 = u64::MAX / 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("a network needs at least one node")]
    NoNodes,
    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("self-loop at node {node}")]
    SelfLoop { node: NodeId },
    #[error("duplicate edge ({u},{v})")]
    DuplicateEdge { u: NodeId, v: NodeId },
    #[error("edge ({u},{v}) has zero length")]
    ZeroLength { u: NodeId, v: NodeId },
    #[error("edge ({u},{v}) has length {len} above the signal reach {d_max}, so it can never carry a signal")]
    EdgeTooLong {
        u: NodeId,
        v: NodeId,
        len: u64,
        d_max: u64,
    },
    #[error("({u},{v}) is not an edge of the network")]
    NotAnEdge { u: NodeId, v: NodeId },
}

/// A network that is not (gamma+1)-edge-connected cannot keep all nodes
/// communicating once gamma edges fail, so solvers reject it up front.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("network is not {required}-edge-connected; surviving {gamma} simultaneous edge failure(s) requires {required}-edge-connectivity")]
pub struct ConnectivityError {
    pub gamma: usize,
    pub required: usize,
}

/// Undirected weighted graph with a signal reach limit `d_max`. Edge lengths
/// are positive integers; edges longer than `d_max` are rejected at
/// construction because they can never carry a signal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    n: usize,
    d_max: u64,
    /// Sorted: u < v within each pair, pairs lexicographic.
    edges: Vec<(NodeId, NodeId, u64)>,
    /// 1-indexed; adj[v] sorted by neighbor id.
    adj: Vec<Vec<(NodeId, u64)>>,
}

impl Network {
    pub fn new(n: usize, d_max: u64, edges: &[(NodeId, NodeId, u64)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoNodes);
        }
        let mut seen = BTreeSet::new();
        let mut sorted = Vec::with_capacity(edges.len());
        for &(a, b, len) in edges {
            for node in [a, b] {
                if node == 0 || node > n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop { node: a });
            }
            let (u, v) = (a.min(b), a.max(b));
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge { u, v });
            }
            if len == 0 {
                return Err(GraphError::ZeroLength { u, v });
            }
            if len > d_max {
                return Err(GraphError::EdgeTooLong { u, v, len, d_max });
            }
            sorted.push((u, v, len));
        }
        sorted.sort_unstable();
        let mut adj = vec![Vec::new(); n + 1];
        for &(u, v, len) in &sorted {
            adj[u].push((v, len));
            adj[v].push((u, len));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Network {
            n,
            d_max,
            edges: sorted,
            adj,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn d_max(&self) -> u64 {
        self.d_max
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted with u < v, lexicographically.
    pub fn edges(&self) -> &[(NodeId, NodeId, u64)] {
        &self.edges
    }

    /// Neighbors of `v` with edge lengths, ascending by id.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, u64)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_len(a, b).is_some()
    }

    pub fn edge_len(&self, a: NodeId, b: NodeId) -> Option<u64> {
        self.adj[a]
            .binary_search_by_key(&b, |&(w, _)| w)
            .ok()
            .map(|i| self.adj[a][i].1)
    }
}

/// Exact shortest distances plus, per ordered pair, the first hop of one
/// canonical shortest path. Ties always resolve toward the lowest node id,
/// so the reconstructed path is the lexicographically smallest shortest
/// path and identical across runs.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    dist: Vec<Vec<u64>>,
    step: Vec<Vec<NodeId>>,
}

impl ShortestPaths {
    /// Shortest distance, [`UNREACHABLE`] when no path exists.
    pub fn dist(&self, s: NodeId, t: NodeId) -> u64 {
        self.dist[s][t]
    }

    /// The canonical shortest path from `s` to `t`, endpoints included.
    pub fn path(&self, s: NodeId, t: NodeId) -> Option<Vec<NodeId>> {
        if s == t {
            return Some(vec![s]);
        }
        if self.dist[s][t] >= UNREACHABLE {
            return None;
        }
        let mut path = vec![s];
        let mut cur = s;
        while cur != t {
            cur = self.step[cur][t];
            path.push(cur);
        }
        Some(path)
    }
}

pub fn all_pairs_shortest_paths(net: &Network) -> ShortestPaths {
    let n = net.node_count();
    let mut dist = vec![vec![UNREACHABLE; n + 1]; n + 1];
    for (v, row) in dist.iter_mut().enumerate().skip(1) {
        row[v] = 0;
    }
    for &(u, v, len) in net.edges() {
        dist[u][v] = len;
        dist[v][u] = len;
    }
    for k in 1..=n {
        for i in 1..=n {
            if dist[i][k] >= UNREACHABLE {
                continue;
            }
            for j in 1..=n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    // Greedy lowest-id first hop among shortest continuations yields the
    // lexicographically smallest shortest path.
    let mut step = vec![vec![0; n + 1]; n + 1];
    for s in 1..=n {
        for t in 1..=n {
            if s == t || dist[s][t] >= UNREACHABLE {
                continue;
            }
            for &(u, len) in net.neighbors(s) {
                if len + dist[u][t] == dist[s][t] {
                    step[s][t] = u;
                    break;
                }
            }
        }
    }
    ShortestPaths { dist, step }
}

/// The communication graph M: same nodes as the base network, an edge
/// wherever the shortest base distance is within `d_max`, and for each such
/// edge one canonical base path realizing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformedGraph {
    base: Network,
    m_edges: Vec<(NodeId, NodeId)>,
    provenance: BTreeMap<(NodeId, NodeId), Vec<NodeId>>,
    adj: Vec<Vec<NodeId>>,
}

pub fn build_transformed_graph(net: &Network) -> TransformedGraph {
    let sp = all_pairs_shortest_paths(net);
    let n = net.node_count();
    let mut m_edges = Vec::new();
    let mut provenance = BTreeMap::new();
    let mut adj = vec![Vec::new(); n + 1];
    for u in 1..=n {
        for v in (u + 1)..=n {
            if sp.dist(u, v) <= net.d_max() {
                // A physical edge keeps its own single hop as provenance even
                // when some rerouted path is shorter.
                let path = if net.has_edge(u, v) {
                    vec![u, v]
                } else {
                    sp.path(u, v).expect("distance within reach implies a path")
                };
                m_edges.push((u, v));
                provenance.insert((u, v), path);
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    TransformedGraph {
        base: net.clone(),
        m_edges,
        provenance,
        adj,
    }
}

impl TransformedGraph {
    pub fn base(&self) -> &Network {
        &self.base
    }

    pub fn node_count(&self) -> usize {
        self.base.node_count()
    }

    /// Edges of M sorted with u < v, lexicographically.
    pub fn m_edges(&self) -> &[(NodeId, NodeId)] {
        &self.m_edges
    }

    pub fn m_edge_count(&self) -> usize {
        self.m_edges.len()
    }

    /// The canonical base path realizing an edge of M, from u to v.
    pub fn provenance(&self, u: NodeId, v: NodeId) -> Option<&[NodeId]> {
        self.provenance
            .get(&(u.min(v), u.max(v)))
            .map(|p| p.as_slice())
    }

    /// Neighbors of `v` in M, ascending by id.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn has_m_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn is_complete(&self) -> bool {
        let n = self.node_count();
        self.m_edges.len() == n * (n - 1) / 2
    }

    /// Edges of M that are not edges of the base network.
    pub fn added_edges(&self) -> Vec<(NodeId, NodeId)> {
        self.m_edges
            .iter()
            .copied()
            .filter(|&(u, v)| !self.base.has_edge(u, v))
            .collect()
    }
}

/// Node sets the formulations need: `vbar` collects nodes that gained
/// neighbors in the transformation, `nprime[i]` the nodes lying on the base
/// paths that created those new edges at i (far endpoint included, i itself
/// excluded), `ndc_pairs` the pairs not adjacent in M, and `forced_nodes`
/// every neighbor of an M-degree-2 node; a node with exactly two
/// communication partners needs both equipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedSets {
    pub vbar: Vec<NodeId>,
    pub nprime: BTreeMap<NodeId, Vec<NodeId>>,
    pub ndc_pairs: Vec<(NodeId, NodeId)>,
    pub forced_nodes: Vec<NodeId>,
}

pub fn derive_sets(net: &Network, m: &TransformedGraph) -> DerivedSets {
    let n = net.node_count();
    let added = m.added_edges();
    let mut vbar = Vec::new();
    let mut nprime = BTreeMap::new();
    for i in 1..=n {
        if m.degree(i) > net.degree(i) {
            vbar.push(i);
            let mut on_paths = BTreeSet::new();
            for &(u, v) in &added {
                if u == i || v == i {
                    let path = m.provenance(u, v).expect("added edge has provenance");
                    on_paths.extend(path.iter().copied().filter(|&w| w != i));
                }
            }
            nprime.insert(i, on_paths.into_iter().collect());
        }
    }
    let mut ndc_pairs = Vec::new();
    for u in 1..=n {
        for v in (u + 1)..=n {
            if !m.has_m_edge(u, v) {
                ndc_pairs.push((u, v));
            }
        }
    }
    let mut forced = BTreeSet::new();
    for v in 1..=n {
        if m.degree(v) == 2 {
            forced.extend(m.neighbors(v).iter().copied());
        }
    }
    DerivedSets {
        vbar,
        nprime,
        ndc_pairs,
        forced_nodes: forced.into_iter().collect(),
    }
}

/// The same network minus the given edges.
pub fn remove_edges(net: &Network, failed: &[(NodeId, NodeId)]) -> Result<Network, GraphError> {
    let mut gone = BTreeSet::new();
    for &(a, b) in failed {
        let (u, v) = (a.min(b), a.max(b));
        if !net.has_edge(u, v) {
            return Err(GraphError::NotAnEdge { u, v });
        }
        gone.insert((u, v));
    }
    let kept: Vec<_> = net
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v, _)| !gone.contains(&(u, v)))
        .collect();
    Network::new(net.node_count(), net.d_max(), &kept)
}

/// Unit-capacity max flow between s and t over undirected edges, stopping
/// early once `limit` units are routed. Each undirected edge becomes a pair
/// of antiparallel arcs of capacity one that serve as each other's residual.
///
/// Returns the flow value and, only when the true maximum was proven
/// (value < limit), the s-side of a minimum cut.
pub(crate) fn unit_max_flow(
    n: usize,
    edges: &[(NodeId, NodeId)],
    s: NodeId,
    t: NodeId,
    limit: usize,
) -> (usize, Option<Vec<bool>>) {
    debug_assert!(s != t && s >= 1 && t >= 1 && s <= n && t <= n);
    let mut to = Vec::with_capacity(edges.len() * 2);
    let mut cap = Vec::with_capacity(edges.len() * 2);
    let mut inc = vec![Vec::new(); n + 1];
    for &(u, v) in edges {
        inc[u].push(to.len());
        to.push(v);
        cap.push(1i32);
        inc[v].push(to.len());
        to.push(u);
        cap.push(1i32);
    }
    let mut value = 0;
    while value < limit {
        let mut pre_arc = vec![usize::MAX; n + 1];
        let mut seen = vec![false; n + 1];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &inc[u] {
                let w = to[a];
                if cap[a] > 0 && !seen[w] {
                    seen[w] = true;
                    pre_arc[w] = a;
                    queue.push_back(w);
                }
            }
        }
        if !seen[t] {
            return (value, Some(seen));
        }
        let mut v = t;
        while v != s {
            let a = pre_arc[v];
            cap[a] -= 1;
            cap[a ^ 1] += 1;
            v = to[a ^ 1];
        }
        value += 1;
    }
    (value, None)
}

/// True iff every node pair admits at least k edge-disjoint paths. A single
/// node is k-edge-connected for every k by convention.
///
/// Sweeping max flow from one fixed root suffices: a cut below k separates
/// the root from somebody.
pub fn edge_connectivity_at_least(net: &Network, k: usize) -> bool {
    if k == 0 || net.node_count() == 1 {
        return true;
    }
    let n = net.node_count();
    if (1..=n).any(|v| net.degree(v) < k) {
        return false;
    }
    let pairs: Vec<(NodeId, NodeId)> = net.edges().iter().map(|&(u, v, _)| (u, v)).collect();
    (2..=n).all(|v| unit_max_flow(n, &pairs, 1, v, k).0 >= k)
}

/// Rejects networks that cannot survive `gamma` edge failures.
pub fn require_edge_connectivity(net: &Network, gamma: usize) -> Result<(), ConnectivityError> {
    let required = gamma + 1;
    if edge_connectivity_at_least(net, required) {
        Ok(())
    } else {
        Err(ConnectivityError { gamma, required })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> Network {
        Network::new(3, 200, &[(1, 2, 100), (2, 3, 100)]).unwrap()
    }

    fn four_cycle(d_max: u64) -> Network {
        Network::new(
            4,
            d_max,
            &[(1, 2, 100), (2, 3, 100), (3, 4, 100), (1, 4, 100)],
        )
        .unwrap()
    }

    /// Six nodes where the transformation adds exactly the edge (1,3) via
    /// the path 1-2-3, giving vbar = {1,3}.
    pub(crate) fn vbar_example() -> Network {
        Network::new(
            6,
            100,
            &[
                (1, 2, 60),
                (2, 3, 40),
                (1, 6, 100),
                (3, 4, 80),
                (4, 5, 70),
                (2, 5, 90),
                (4, 6, 100),
                (5, 6, 100),
            ],
        )
        .unwrap()
    }

    #[test]
    fn test_construction_rejects_bad_edges() {
        assert_eq!(
            Network::new(3, 100, &[(1, 1, 50)]),
            Err(GraphError::SelfLoop { node: 1 })
        );
        assert_eq!(
            Network::new(3, 100, &[(1, 2, 50), (2, 1, 60)]),
            Err(GraphError::DuplicateEdge { u: 1, v: 2 })
        );
        assert_eq!(
            Network::new(3, 100, &[(1, 2, 101)]),
            Err(GraphError::EdgeTooLong {
                u: 1,
                v: 2,
                len: 101,
                d_max: 100
            })
        );
        assert_eq!(
            Network::new(2, 100, &[(1, 3, 50)]),
            Err(GraphError::NodeOutOfRange { node: 3, n: 2 })
        );
        assert_eq!(
            Network::new(2, 100, &[(1, 2, 0)]),
            Err(GraphError::ZeroLength { u: 1, v: 2 })
        );
    }

    #[test]
    fn test_path_graph_shortest_paths() {
        let sp = all_pairs_shortest_paths(&path3());
        assert_eq!(sp.dist(1, 3), 200);
        assert_eq!(sp.path(1, 3), Some(vec![1, 2, 3]));
        assert_eq!(sp.dist(1, 1), 0);
        assert_eq!(sp.path(2, 2), Some(vec![2]));
    }

    #[test]
    fn test_single_node_shortest_paths() {
        let net = Network::new(1, 100, &[]).unwrap();
        let sp = all_pairs_shortest_paths(&net);
        assert_eq!(sp.dist(1, 1), 0);
    }

    #[test]
    fn test_disconnected_pair_is_unreachable() {
        let net = Network::new(4, 100, &[(1, 2, 50), (3, 4, 50)]).unwrap();
        let sp = all_pairs_shortest_paths(&net);
        assert_eq!(sp.dist(1, 3), UNREACHABLE);
        assert_eq!(sp.path(1, 3), None);
    }

    #[test]
    fn test_four_cycle_tie_breaks_toward_lower_ids() {
        // Both 1-2-3 and 1-4-3 have length 200; the canonical path must be
        // the lexicographically smaller one.
        let sp = all_pairs_shortest_paths(&four_cycle(200));
        assert_eq!(sp.dist(1, 3), 200);
        assert_eq!(sp.path(1, 3), Some(vec![1, 2, 3]));
        assert_eq!(sp.path(2, 4), Some(vec![2, 1, 4]));
    }

    #[test]
    fn test_transform_adds_reachable_pair() {
        let m = build_transformed_graph(&path3());
        assert_eq!(m.m_edges(), &[(1, 2), (1, 3), (2, 3)]);
        assert_eq!(m.provenance(1, 3), Some(&[1, 2, 3][..]));
        assert_eq!(m.provenance(1, 2), Some(&[1, 2][..]));
        assert!(m.is_complete());
    }

    #[test]
    fn test_transform_reach_too_short_keeps_base_edges_only() {
        let m = build_transformed_graph(&four_cycle(150));
        assert_eq!(m.m_edges(), &[(1, 2), (1, 4), (2, 3), (3, 4)]);
        assert!(m.added_edges().is_empty());
        assert!(!m.is_complete());
    }

    #[test]
    fn test_edge_connectivity() {
        assert!(edge_connectivity_at_least(&four_cycle(150), 2));
        assert!(!edge_connectivity_at_least(&four_cycle(150), 3));
        assert!(!edge_connectivity_at_least(&path3(), 2));

        let mut k5 = Vec::new();
        for u in 1..=5 {
            for v in (u + 1)..=5 {
                k5.push((u, v, 10));
            }
        }
        let k5 = Network::new(5, 100, &k5).unwrap();
        assert!(edge_connectivity_at_least(&k5, 3));
        assert!(edge_connectivity_at_least(&k5, 4));
        assert!(!edge_connectivity_at_least(&k5, 5));
    }

    #[test]
    fn test_single_node_is_connected_by_convention() {
        let net = Network::new(1, 100, &[]).unwrap();
        assert!(edge_connectivity_at_least(&net, 2));
        assert!(require_edge_connectivity(&net, 1).is_ok());
    }

    #[test]
    fn test_connectivity_error_names_requirement() {
        let err = require_edge_connectivity(&path3(), 1).unwrap_err();
        assert_eq!(err, ConnectivityError { gamma: 1, required: 2 });
    }

    #[test]
    fn test_max_flow_finds_min_cut_side() {
        let edges = [(1, 2), (2, 3)];
        let (value, side) = unit_max_flow(3, &edges, 1, 3, 2);
        assert_eq!(value, 1);
        let side = side.unwrap();
        let crossing = edges
            .iter()
            .filter(|&&(u, v)| side[u] != side[v])
            .count();
        assert_eq!(crossing, value);
    }

    #[test]
    fn test_derive_sets_on_vbar_example() {
        let net = vbar_example();
        let m = build_transformed_graph(&net);
        assert_eq!(m.added_edges(), vec![(1, 3)]);
        assert_eq!(m.provenance(1, 3), Some(&[1, 2, 3][..]));

        let ds = derive_sets(&net, &m);
        assert_eq!(ds.vbar, vec![1, 3]);
        assert_eq!(ds.nprime[&1], vec![2, 3]);
        assert_eq!(ds.nprime[&3], vec![1, 2]);
        assert_eq!(m.neighbors(1), &[2, 3, 6]);
        assert!(edge_connectivity_at_least(&net, 2));
    }

    #[test]
    fn test_derive_sets_four_cycle() {
        let net = four_cycle(150);
        let m = build_transformed_graph(&net);
        let ds = derive_sets(&net, &m);
        assert!(ds.vbar.is_empty());
        assert!(ds.nprime.is_empty());
        assert_eq!(ds.ndc_pairs, vec![(1, 3), (2, 4)]);
        // Every node has M-degree 2, so all neighborhoods are forced.
        assert_eq!(ds.forced_nodes, vec![1, 2, 3, 4]);
    }

    #[test]
    fn test_forced_nodes_from_one_degree_two_node() {
        let net = Network::new(3, 100, &[(1, 2, 100), (2, 3, 100)]).unwrap();
        let m = build_transformed_graph(&net);
        let ds = derive_sets(&net, &m);
        assert_eq!(ds.forced_nodes, vec![1, 3]);
    }

    #[test]
    fn test_remove_edges() {
        let net = four_cycle(150);
        let cut = remove_edges(&net, &[(2, 1)]).unwrap();
        assert_eq!(cut.edge_count(), 3);
        assert!(!cut.has_edge(1, 2));

        assert_eq!(remove_edges(&net, &[]).unwrap(), net);

        let all: Vec<_> = net.edges().iter().map(|&(u, v, _)| (u, v)).collect();
        let empty = remove_edges(&net, &all).unwrap();
        assert_eq!(empty.edge_count(), 0);
        assert_eq!(empty.node_count(), 4);

        assert_eq!(
            remove_edges(&net, &[(1, 3)]),
            Err(GraphError::NotAnEdge { u: 1, v: 3 })
        );
    }

    /// Removing every subset of up to k-1 edges and checking reachability is
    /// the definition; the max-flow sweep must agree with it.
    #[test]
    fn test_connectivity_agrees_with_exhaustive_removal() {
        fn connected_after_removal(net: &Network, gone: &[(NodeId, NodeId)]) -> bool {
            let left = remove_edges(net, gone).unwrap();
            let n = left.node_count();
            let mut seen = vec![false; n + 1];
            let mut stack = vec![1];
            seen[1] = true;
            while let Some(u) = stack.pop() {
                for &(v, _) in left.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            (1..=n).all(|v| seen[v])
        }

        fn exhaustive_at_least(net: &Network, k: usize) -> bool {
            let pairs: Vec<_> = net.edges().iter().map(|&(u, v, _)| (u, v)).collect();
            let m = pairs.len();
            for mask in 0u32..(1 << m) {
                if (mask.count_ones() as usize) < k {
                    let gone: Vec<_> = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
                    if !connected_after_removal(net, &gone) {
                        return false;
                    }
                }
            }
            true
        }

        let candidates = [
            four_cycle(150),
            path3(),
            vbar_example(),
            Network::new(5, 100, &[(1, 2, 10), (2, 3, 10), (3, 4, 10), (4, 5, 10), (1, 5, 10), (2, 5, 10)]).unwrap(),
        ];
        for net in &candidates {
            for k in 1..=3 {
                assert_eq!(
                    edge_connectivity_at_least(net, k),
                    exhaustive_at_least(net, k),
                    "k={k}"
                );
            }
        }
    }

    prop_compose! {
        fn arb_network()(n in 2usize..=8, d_max in 50u64..=200)
            (present in prop::collection::vec(prop::option::weighted(0.55, 1u64..=50), n * (n - 1) / 2),
             n in Just(n),
             d_max in Just(d_max))
            -> Network
        {
            let mut edges = Vec::new();
            let mut idx = 0;
            for u in 1..=n {
                for v in (u + 1)..=n {
                    if let Some(len) = present[idx] {
                        edges.push((u, v, len));
                    }
                    idx += 1;
                }
            }
            Network::new(n, d_max, &edges).unwrap()
        }
    }

    proptest! {
        /// Every base edge stays an edge of M, with a valid provenance path.
        #[test]
        fn prop_base_edges_survive_transformation(net in arb_network()) {
            let m = build_transformed_graph(&net);
            for &(u, v, _) in net.edges() {
                prop_assert!(m.has_m_edge(u, v));
                prop_assert_eq!(m.provenance(u, v).unwrap(), &[u, v][..]);
            }
        }

        /// Provenance paths start and end at the edge's endpoints, walk real
        /// base edges, and stay within the reach limit.
        #[test]
        fn prop_provenance_paths_are_valid(net in arb_network()) {
            let m = build_transformed_graph(&net);
            for &(u, v) in m.m_edges() {
                let path = m.provenance(u, v).unwrap();
                prop_assert_eq!(path[0], u);
                prop_assert_eq!(*path.last().unwrap(), v);
                let mut total = 0;
                for hop in path.windows(2) {
                    let len = net.edge_len(hop[0], hop[1]);
                    prop_assert!(len.is_some());
                    total += len.unwrap();
                }
                prop_assert!(total <= net.d_max());
            }
        }

        /// When the transformation adds nothing, no node gained neighbors,
        /// and rebuilding from the surviving edges changes nothing.
        #[test]
        fn prop_unchanged_transform_has_empty_vbar(net in arb_network()) {
            let m = build_transformed_graph(&net);
            if m.added_edges().is_empty() {
                let ds = derive_sets(&net, &m);
                prop_assert!(ds.vbar.is_empty());
                prop_assert!(ds.nprime.is_empty());
                let again = build_transformed_graph(&net);
                prop_assert_eq!(again.m_edges(), m.m_edges());
            }
        }
    }
}
