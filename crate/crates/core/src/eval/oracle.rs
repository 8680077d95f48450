//! Sequential reference algorithms used as ground truth.
//!
//! The kernels work on dense indices `0..n` and are generic over the weight
//! type; [`oracle_solve`] maps a [`Graph`] onto them.

use std::collections::VecDeque;

use crate::graph::{Graph, NodeId};
use crate::number::{Number, Scalar};
use crate::orchestrator::{AnswerValue, TaskKind};
use crate::programs::{DEFAULT_DAMPING, DEFAULT_EPSILON};
use crate::value::{Record, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("the graph has a cycle; no topological order exists")]
    NotADag,
    #[error("triangle sums need node weights")]
    MissingNodeWeights,
    #[error("negative edge weight")]
    NegativeWeight,
    #[error("search budget of {0} steps exhausted")]
    BudgetExceeded(u64),
}

/// Adjacency over dense indices with weights of type `W` (unweighted edges weigh one).
pub type Adjacency<W> = Vec<Vec<(usize, W)>>;

fn weight_of<W: Scalar>(w: Option<Number>) -> Option<W> {
    match w {
        Some(n) => W::from_number(n),
        None => Some(W::one()),
    }
}

/// Out-adjacency (both directions for undirected graphs). `None` if a weight
/// does not fit `W` exactly.
pub fn adjacency<W: Scalar>(g: &Graph) -> Option<Adjacency<W>> {
    let n = g.node_count();
    let mut adj = vec![Vec::new(); n];
    for e in g.edges() {
        let (u, v) = (g.position(e.src)?, g.position(e.dst)?);
        let w = weight_of::<W>(e.weight)?;
        adj[u].push((v, w));
        if !g.is_directed() && u != v {
            adj[v].push((u, w));
        }
    }
    Some(adj)
}

/// O(n²) Dijkstra, which only needs `PartialOrd` on the weights.
pub fn dijkstra<W: Scalar>(adj: &Adjacency<W>, src: usize) -> Vec<Option<W>> {
    let n = adj.len();
    let mut dist: Vec<Option<W>> = vec![None; n];
    let mut done = vec![false; n];
    dist[src] = Some(W::zero());
    loop {
        let mut pick: Option<(usize, W)> = None;
        for (v, d) in dist.iter().enumerate() {
            if let (false, Some(d)) = (done[v], d) {
                if pick.is_none_or(|(_, best)| *d < best) {
                    pick = Some((v, *d));
                }
            }
        }
        let Some((u, du)) = pick else { break };
        done[u] = true;
        for &(v, w) in &adj[u] {
            let cand = du + w;
            if dist[v].is_none_or(|dv| cand < dv) {
                dist[v] = Some(cand);
            }
        }
    }
    dist
}

/// Minimum path weight using at most `k` edges.
pub fn bellman_ford_truncated<W: Scalar>(adj: &Adjacency<W>, src: usize, k: usize) -> Vec<Option<W>> {
    let mut dist: Vec<Option<W>> = vec![None; adj.len()];
    dist[src] = Some(W::zero());
    for _ in 0..k {
        let prev = dist.clone();
        for (u, edges) in adj.iter().enumerate() {
            let Some(du) = prev[u] else { continue };
            for &(v, w) in edges {
                let cand = du + w;
                if dist[v].is_none_or(|dv| cand < dv) {
                    dist[v] = Some(cand);
                }
            }
        }
    }
    dist
}

pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

fn index_pairs(g: &Graph) -> Vec<(usize, usize)> {
    g.edges().iter().map(|e| (g.position(e.src).expect("validated"), g.position(e.dst).expect("validated"))).collect()
}

/// Nodes reachable from `src` by breadth-first search.
pub fn bfs_reachable(adj: &[Vec<usize>], src: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([src]);
    seen[src] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

fn plain_adjacency(g: &Graph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); g.node_count()];
    for (u, v) in index_pairs(g) {
        adj[u].push(v);
        if !g.is_directed() && u != v {
            adj[v].push(u);
        }
    }
    adj
}

/// Undirected graphs go through union-find, directed ones through BFS.
pub fn connected(g: &Graph, s: usize, t: usize) -> bool {
    if g.is_directed() {
        return bfs_reachable(&plain_adjacency(g), s)[t];
    }
    let mut uf = UnionFind::new(g.node_count());
    for (u, v) in index_pairs(g) {
        uf.union(u, v);
    }
    uf.find(s) == uf.find(t)
}

/// Depth-first search for a back edge. Undirected graphs skip only the edge
/// they arrived by, so a self-loop counts as a cycle.
pub fn has_cycle(g: &Graph) -> bool {
    let n = g.node_count();
    // (neighbor, edge id)
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, (u, v)) in index_pairs(g).into_iter().enumerate() {
        adj[u].push((v, id));
        if !g.is_directed() && u != v {
            adj[v].push((u, id));
        }
    }
    // 0 = unseen, 1 = on stack, 2 = finished
    let mut color = vec![0u8; n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        color[root] = 1;
        while let Some(&mut (u, via, ref mut next)) = stack.last_mut() {
            if let Some(&(v, id)) = adj[u].get(*next) {
                *next += 1;
                if !g.is_directed() && Some(id) == via {
                    continue;
                }
                match color[v] {
                    0 => {
                        color[v] = 1;
                        stack.push((v, Some(id), 0));
                    }
                    1 => return true,
                    _ => {
                        if !g.is_directed() {
                            return true;
                        }
                    }
                }
            } else {
                color[u] = 2;
                stack.pop();
            }
        }
    }
    false
}

/// Two-coloring by BFS over the undirected view.
pub fn two_coloring(g: &Graph) -> Option<Vec<u8>> {
    let n = g.node_count();
    let mut adj = vec![Vec::new(); n];
    for (u, v) in index_pairs(g) {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut color: Vec<Option<u8>> = vec![None; n];
    for root in 0..n {
        if color[root].is_some() {
            continue;
        }
        color[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].expect("queued nodes are colored");
            for &v in &adj[u] {
                match color[v] {
                    None => {
                        color[v] = Some(1 - cu);
                        queue.push_back(v);
                    }
                    Some(cv) if cv == cu => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(color.into_iter().map(|c| c.expect("all colored")).collect())
}

/// Odd cycle detection through the bipartite double cover: an odd closed walk
/// exists iff some `(v, 0)` and `(v, 1)` end up in the same component.
pub fn has_odd_cycle(g: &Graph) -> bool {
    let n = g.node_count();
    let mut uf = UnionFind::new(2 * n);
    for (u, v) in index_pairs(g) {
        uf.union(2 * u, 2 * v + 1);
        uf.union(2 * u + 1, 2 * v);
    }
    (0..n).any(|v| uf.find(2 * v) == uf.find(2 * v + 1))
}

/// Kahn's algorithm, smallest ready id first. `None` when a cycle blocks it.
pub fn kahn_order(g: &Graph) -> Option<Vec<NodeId>> {
    let n = g.node_count();
    let mut indeg = vec![0usize; n];
    let adj = plain_adjacency(g);
    for targets in &adj {
        for &v in targets {
            indeg[v] += 1;
        }
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop_first() {
        order.push(g.node_ids()[u]);
        for &v in &adj[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.insert(v);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Checks that `order` lists every node once and respects every edge.
pub fn is_topological_order(g: &Graph, order: &[NodeId]) -> bool {
    if order.len() != g.node_count() {
        return false;
    }
    let mut pos = vec![usize::MAX; g.node_count()];
    for (i, v) in order.iter().enumerate() {
        match g.position(*v) {
            Some(p) if pos[p] == usize::MAX => pos[p] = i,
            _ => return false,
        }
    }
    index_pairs(g).into_iter().all(|(u, v)| pos[u] < pos[v])
}

/// Largest weight sum over all triangles, by checking every triple.
pub fn max_triangle_sum<W: Scalar>(adjacent: &[Vec<bool>], weights: &[W]) -> Option<W> {
    let n = weights.len();
    let mut best: Option<W> = None;
    for i in 0..n {
        for j in i + 1..n {
            if !adjacent[i][j] {
                continue;
            }
            for k in j + 1..n {
                if adjacent[i][k] && adjacent[j][k] {
                    let s = weights[i] + weights[j] + weights[k];
                    if best.is_none_or(|b| s > b) {
                        best = Some(s);
                    }
                }
            }
        }
    }
    best
}

/// Edmonds–Karp on a dense capacity matrix. Returns the flow value and the
/// source side of the final residual graph.
pub fn edmonds_karp<W: Scalar>(cap: &[Vec<W>], s: usize, t: usize) -> (W, Vec<bool>) {
    let n = cap.len();
    let mut residual = cap.to_vec();
    let mut flow = W::zero();
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && residual[u][v] > W::zero() {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            let side = parent.iter().map(|&p| p != usize::MAX).collect();
            return (flow, side);
        }
        let mut bottleneck: Option<W> = None;
        let mut v = t;
        while v != s {
            let u = parent[v];
            let c = residual[u][v];
            bottleneck = Some(bottleneck.map_or(c, |b| if c < b { c } else { b }));
            v = u;
        }
        let b = bottleneck.expect("path has an edge");
        let mut v = t;
        while v != s {
            let u = parent[v];
            residual[u][v] = residual[u][v] - b;
            residual[v][u] = residual[v][u] + b;
            v = u;
        }
        flow = flow + b;
    }
}

/// Total capacity of edges leaving `side`.
pub fn cut_capacity<W: Scalar>(cap: &[Vec<W>], side: &[bool]) -> W {
    let mut total = W::zero();
    for (u, row) in cap.iter().enumerate() {
        for (v, &c) in row.iter().enumerate() {
            if side[u] && !side[v] {
                total = total + c;
            }
        }
    }
    total
}

/// Dense capacities: unweighted edges carry one, undirected edges both ways,
/// self-loops are ignored.
pub fn capacity_matrix<W: Scalar>(g: &Graph) -> Option<Vec<Vec<W>>> {
    let n = g.node_count();
    let mut cap = vec![vec![W::zero(); n]; n];
    for e in g.edges() {
        let (u, v) = (g.position(e.src)?, g.position(e.dst)?);
        if u == v {
            continue;
        }
        let c = weight_of::<W>(e.weight)?;
        cap[u][v] = cap[u][v] + c;
        if !g.is_directed() {
            cap[v][u] = cap[v][u] + c;
        }
    }
    Some(cap)
}

/// Power iteration with dangling mass spread uniformly, until the L1 change
/// drops below `tol`.
pub fn pagerank(g: &Graph, damping: f64, tol: f64, max_iter: usize) -> Vec<f64> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let adj = plain_adjacency(g);
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    for _ in 0..max_iter {
        let dangling: f64 = (0..n).filter(|&u| adj[u].is_empty()).map(|u| rank[u]).sum();
        let mut next = vec![(1.0 - damping) / nf + damping * dangling / nf; n];
        for (u, targets) in adj.iter().enumerate() {
            let share = rank[u] / targets.len() as f64;
            for &v in targets {
                next[v] += damping * share;
            }
        }
        let change: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        rank = next;
        if change < tol {
            break;
        }
    }
    rank
}

/// Exhaustive backtracking search for a Hamiltonian path over the undirected
/// view. Gives up after `budget` extension steps.
pub fn hamiltonian_path(g: &Graph, budget: u64) -> Result<Option<Vec<NodeId>>, OracleError> {
    let n = g.node_count();
    if n == 0 {
        return Ok(None);
    }
    let mut adj = vec![Vec::new(); n];
    for (u, v) in index_pairs(g) {
        if u != v {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    // cheap necessary conditions: connected, at most two endpoints of degree one
    if n > 1 && (adj.iter().any(Vec::is_empty) || adj.iter().filter(|a| a.len() == 1).count() > 2) {
        return Ok(None);
    }
    if !bfs_reachable(&adj, 0).iter().all(|&r| r) {
        return Ok(None);
    }
    let mut steps = 0u64;
    let mut visited = vec![false; n];
    let mut path = Vec::with_capacity(n);

    fn extend(
        adj: &[Vec<usize>],
        visited: &mut [bool],
        path: &mut Vec<usize>,
        steps: &mut u64,
        budget: u64,
    ) -> Result<bool, OracleError> {
        if path.len() == adj.len() {
            return Ok(true);
        }
        *steps += 1;
        if *steps > budget {
            return Err(OracleError::BudgetExceeded(budget));
        }
        let u = *path.last().expect("non-empty path");
        for &v in &adj[u] {
            if !visited[v] {
                visited[v] = true;
                path.push(v);
                if extend(adj, visited, path, steps, budget)? {
                    return Ok(true);
                }
                path.pop();
                visited[v] = false;
            }
        }
        Ok(false)
    }

    // a path must begin at a degree-one node whenever one exists
    let leaves: Vec<usize> = (0..n).filter(|&v| adj[v].len() == 1).collect();
    let starts: Vec<usize> = if leaves.is_empty() { (0..n).collect() } else { leaves };
    for start in starts {
        visited[start] = true;
        path.push(start);
        if extend(&adj, &mut visited, &mut path, &mut steps, budget)? {
            return Ok(Some(path.iter().map(|&i| g.node_ids()[i]).collect()));
        }
        path.pop();
        visited[start] = false;
    }
    Ok(None)
}

pub const HAMILTON_BUDGET: u64 = 50_000_000;

fn node_param(g: &Graph, params: &Record, name: &'static str) -> Result<usize, OracleError> {
    match params.get(name) {
        Some(Value::Node(v)) => g.position(*v).ok_or(OracleError::UnknownNode(*v)),
        _ => Err(OracleError::MissingParameter(name)),
    }
}

fn all_integer(g: &Graph) -> bool {
    g.edges().iter().all(|e| !matches!(e.weight, Some(Number::Float(_))))
}

/// Ground-truth answer for `task` on `g`.
pub fn oracle_solve(task: TaskKind, g: &Graph, params: &Record) -> Result<AnswerValue, OracleError> {
    let ids = g.node_ids();
    Ok(match task {
        TaskKind::Cycle => AnswerValue::Boolean(has_cycle(g)),
        TaskKind::Connectivity => {
            AnswerValue::Boolean(connected(g, node_param(g, params, "source")?, node_param(g, params, "target")?))
        }
        TaskKind::Bipartite => AnswerValue::Boolean(two_coloring(g).is_some()),
        TaskKind::TopoSort => AnswerValue::Ordering(kahn_order(g).ok_or(OracleError::NotADag)?),
        TaskKind::ShortestPath => {
            let src = node_param(g, params, "source")?;
            if g.edges().iter().any(|e| e.weight.is_some_and(Number::is_negative)) {
                return Err(OracleError::NegativeWeight);
            }
            let dist: Vec<Option<Number>> = if all_integer(g) {
                let adj = adjacency::<i64>(g).expect("integer weights");
                dijkstra(&adj, src).into_iter().map(|d| d.map(Number::Int)).collect()
            } else {
                let adj = adjacency::<f64>(g).expect("finite weights");
                dijkstra(&adj, src).into_iter().map(|d| d.map(Number::Float)).collect()
            };
            AnswerValue::DistanceMap(ids.iter().copied().zip(dist).collect())
        }
        TaskKind::TriangleSum => {
            let n = g.node_count();
            let mut adjacent = vec![vec![false; n]; n];
            for (u, v) in index_pairs(g) {
                adjacent[u][v] = true;
                adjacent[v][u] = true;
            }
            let weights: Vec<Number> = ids
                .iter()
                .map(|&v| g.node_weight(v).ok_or(OracleError::MissingNodeWeights))
                .collect::<Result<_, _>>()?;
            let ints: Option<Vec<i64>> =
                weights.iter().map(|w| if let Number::Int(i) = w { Some(*i) } else { None }).collect();
            let best = if let Some(w) = ints {
                max_triangle_sum(&adjacent, &w).map(Number::Int)
            } else {
                let w: Vec<f64> = weights.iter().map(|w| w.as_f64()).collect();
                max_triangle_sum(&adjacent, &w).map(Number::Float)
            };
            best.map_or(AnswerValue::NoSolution, AnswerValue::Number)
        }
        TaskKind::MaxFlow => {
            let (s, t) = (node_param(g, params, "source")?, node_param(g, params, "sink")?);
            let value = if all_integer(g) {
                Number::Int(edmonds_karp(&capacity_matrix::<i64>(g).expect("integer weights"), s, t).0)
            } else {
                Number::Float(edmonds_karp(&capacity_matrix::<f64>(g).expect("finite weights"), s, t).0)
            };
            AnswerValue::Number(value)
        }
        TaskKind::PageRank => {
            let ranks = pagerank(g, DEFAULT_DAMPING, DEFAULT_EPSILON * 1e-6, 100_000);
            let mut out: Vec<(NodeId, f64)> = ids.iter().copied().zip(ranks).collect();
            out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            AnswerValue::Ranking(out)
        }
        TaskKind::HamiltonHeuristic => AnswerValue::Boolean(hamiltonian_path(g, HAMILTON_BUDGET)?.is_some()),
    })
}
