//! Graph data model and the natural-language edge-list parser.
//!
//! Problems describe their graph with a node clause ("The graph has N nodes"
//! or "The nodes are numbered from a to b") followed by parenthesized edge
//! tuples: `(u,v)`, `(u,v,w)`, `(u->v)` or `(u->v,w)`. Node-weighted tasks add
//! bracketed `[node, weight]` pairs.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::sync::OnceLock;

use regex::Regex;

use crate::number::Number;

pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub weight: Option<Number>,
    pub feature: Option<String>,
}

impl Edge {
    pub fn new(src: NodeId, dst: NodeId) -> Self {
        Edge { src, dst, weight: None, feature: None }
    }

    pub fn weighted(src: NodeId, dst: NodeId, weight: impl Into<Number>) -> Self {
        Edge { src, dst, weight: Some(weight.into()), feature: None }
    }
}

/// An adjacent node together with the weight of the connecting edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: NodeId,
    pub weight: Option<Number>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("no node-count or node-range clause found")]
    MissingNodeClause,
    #[error("malformed tuple `{tuple}`: {reason}")]
    MalformedTuple { tuple: String, reason: String },
    #[error("edge endpoint {0} is outside the declared nodes")]
    EndpointOutOfRange(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("edge ({src},{dst}) has no weight in a weighted graph")]
    MissingWeight { src: NodeId, dst: NodeId },
    #[error("edge ({src},{dst}) carries a weight in an unweighted graph")]
    UnexpectedWeight { src: NodeId, dst: NodeId },
    #[error("edge ({src},{dst}) has a non-finite weight")]
    NonFiniteWeight { src: NodeId, dst: NodeId },
}

/// Immutable graph with precomputed adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_ids: Vec<NodeId>,
    edges: Vec<Edge>,
    directed: bool,
    weighted: bool,
    node_features: Option<BTreeMap<NodeId, String>>,
    node_weights: Option<BTreeMap<NodeId, Number>>,
    out_adj: Vec<Vec<Neighbor>>,
    in_adj: Vec<Vec<Neighbor>>,
    self_loops: Vec<bool>,
}

impl Graph {
    /// Builds a graph, dropping duplicate edges (with a warning) and checking
    /// the endpoint and weight invariants.
    pub fn new(
        node_ids: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = Edge>,
        directed: bool,
        weighted: bool,
    ) -> Result<Self, GraphError> {
        let mut ids: Vec<NodeId> = node_ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();

        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for e in edges {
            for end in [e.src, e.dst] {
                if ids.binary_search(&end).is_err() {
                    return Err(GraphError::EndpointOutOfRange(end));
                }
            }
            match (weighted, e.weight) {
                (true, None) => return Err(GraphError::MissingWeight { src: e.src, dst: e.dst }),
                (false, Some(_)) => return Err(GraphError::UnexpectedWeight { src: e.src, dst: e.dst }),
                (true, Some(w)) if !w.is_finite() => {
                    return Err(GraphError::NonFiniteWeight { src: e.src, dst: e.dst })
                }
                _ => {}
            }
            let key = if directed { (e.src, e.dst) } else { (e.src.min(e.dst), e.src.max(e.dst)) };
            if !seen.insert(key) {
                log::warn!("dropping duplicate edge ({},{})", e.src, e.dst);
                continue;
            }
            kept.push(e);
        }

        let mut g = Graph {
            out_adj: vec![Vec::new(); ids.len()],
            in_adj: vec![Vec::new(); ids.len()],
            self_loops: vec![false; ids.len()],
            node_ids: ids,
            edges: kept,
            directed,
            weighted,
            node_features: None,
            node_weights: None,
        };
        g.build_adjacency();
        Ok(g)
    }

    fn build_adjacency(&mut self) {
        for e in &self.edges {
            let s = self.position(e.src).expect("validated endpoint");
            let d = self.position(e.dst).expect("validated endpoint");
            if s == d {
                self.self_loops[s] = true;
            }
            self.out_adj[s].push(Neighbor { id: e.dst, weight: e.weight });
            if self.directed {
                self.in_adj[d].push(Neighbor { id: e.src, weight: e.weight });
            } else if s != d {
                self.out_adj[d].push(Neighbor { id: e.src, weight: e.weight });
            }
        }
        for list in self.out_adj.iter_mut().chain(self.in_adj.iter_mut()) {
            list.sort_by_key(|n| n.id);
        }
        if !self.directed {
            self.in_adj = self.out_adj.clone();
        }
    }

    pub fn with_node_weights(mut self, weights: BTreeMap<NodeId, Number>) -> Result<Self, GraphError> {
        if let Some(bad) = weights.keys().find(|v| !self.contains(**v)) {
            return Err(GraphError::EndpointOutOfRange(*bad));
        }
        self.node_weights = Some(weights);
        Ok(self)
    }

    pub fn with_node_features(mut self, features: BTreeMap<NodeId, String>) -> Result<Self, GraphError> {
        if let Some(bad) = features.keys().find(|v| !self.contains(**v)) {
            return Err(GraphError::EndpointOutOfRange(*bad));
        }
        self.node_features = Some(features);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.position(v).is_some()
    }

    /// Dense index of `v` in `node_ids`.
    pub fn position(&self, v: NodeId) -> Option<usize> {
        self.node_ids.binary_search(&v).ok()
    }

    /// Adjacent nodes for undirected graphs, out-neighbors for directed ones.
    pub fn neighbors(&self, v: NodeId) -> Result<&[Neighbor], GraphError> {
        self.position(v).map(|i| self.out_adj[i].as_slice()).ok_or(GraphError::UnknownNode(v))
    }

    pub fn in_neighbors(&self, v: NodeId) -> Result<&[Neighbor], GraphError> {
        self.position(v).map(|i| self.in_adj[i].as_slice()).ok_or(GraphError::UnknownNode(v))
    }

    pub(crate) fn out_at(&self, i: usize) -> &[Neighbor] {
        &self.out_adj[i]
    }

    pub(crate) fn in_at(&self, i: usize) -> &[Neighbor] {
        &self.in_adj[i]
    }

    pub fn has_self_loop(&self, v: NodeId) -> bool {
        self.position(v).map(|i| self.self_loops[i]).unwrap_or(false)
    }

    /// Undirected degree with self-loops counted twice; out-degree when directed.
    pub fn degree(&self, v: NodeId) -> Result<usize, GraphError> {
        let i = self.position(v).ok_or(GraphError::UnknownNode(v))?;
        let loop_extra = usize::from(!self.directed && self.self_loops[i]);
        Ok(self.out_adj[i].len() + loop_extra)
    }

    pub fn node_weight(&self, v: NodeId) -> Option<Number> {
        self.node_weights.as_ref()?.get(&v).copied()
    }

    pub fn node_weights(&self) -> Option<&BTreeMap<NodeId, Number>> {
        self.node_weights.as_ref()
    }

    pub fn node_feature(&self, v: NodeId) -> Option<&str> {
        self.node_features.as_ref()?.get(&v).map(String::as_str)
    }

    /// Forgets edge direction; antiparallel pairs collapse to the first edge.
    pub fn to_undirected(&self) -> Graph {
        if !self.directed {
            return self.clone();
        }
        let mut seen = HashSet::new();
        let edges: Vec<Edge> =
            self.edges.iter().filter(|e| seen.insert((e.src.min(e.dst), e.src.max(e.dst)))).cloned().collect();
        let mut g =
            Graph::new(self.node_ids.iter().copied(), edges, false, self.weighted).expect("edges already validated");
        g.node_weights = self.node_weights.clone();
        g.node_features = self.node_features.clone();
        g
    }

    /// Canonical one-line form, parseable by [`parse_graph`] into an equal graph.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let contiguous = self.node_ids.windows(2).all(|w| w[1] == w[0] + 1);
        match (self.node_ids.first(), self.node_ids.last()) {
            (Some(first), Some(last)) if contiguous => {
                let _ = write!(out, "The nodes are numbered from {first} to {last}");
            }
            _ => {
                let _ = write!(out, "The graph has {} nodes", self.node_ids.len());
            }
        }
        if let Some(weights) = &self.node_weights {
            out.push_str(", the weights of nodes are:");
            for (v, w) in weights {
                let _ = write!(out, " [{v}, {w}]");
            }
        }
        out.push_str(", and the edges are:");
        let sep = if self.directed { "->" } else { "," };
        for e in &self.edges {
            match e.weight {
                Some(w) => {
                    let _ = write!(out, " ({}{sep}{},{w})", e.src, e.dst);
                }
                None => {
                    let _ = write!(out, " ({}{sep}{})", e.src, e.dst);
                }
            }
        }
        out
    }
}

fn node_count_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\bgraph has (\d+) nodes?\b").unwrap())
}

fn node_range_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\bnodes are numbered from (\d+) to (\d+)").unwrap())
}

fn tuple_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\(([^()]*)\)").unwrap())
}

fn node_weight_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[\s*(\d+)\s*,\s*([^\[\]]+?)\s*\]").unwrap())
}

/// Locates the node clause; returns the declared ids and the byte offset
/// where the edge region starts.
fn node_clause(text: &str) -> Result<(Vec<NodeId>, usize), GraphError> {
    let count = node_count_re().captures(text);
    let range = node_range_re().captures(text);
    let start = |c: &regex::Captures<'_>| c.get(0).map(|m| m.start()).unwrap_or(usize::MAX);
    let parse_id = |s: &str| {
        s.parse::<NodeId>()
            .map_err(|_| GraphError::MalformedTuple { tuple: s.to_string(), reason: "node id out of range".into() })
    };
    let use_range = match (&count, &range) {
        (None, None) => return Err(GraphError::MissingNodeClause),
        (Some(_), None) => false,
        (None, Some(_)) => true,
        (Some(c), Some(r)) => start(r) < start(c),
    };
    if use_range {
        let r = range.expect("checked");
        let lo = parse_id(&r[1])?;
        let hi = parse_id(&r[2])?;
        Ok(((lo..=hi).collect(), r.get(0).unwrap().end()))
    } else {
        let c = count.expect("checked");
        let n = parse_id(&c[1])?;
        Ok(((0..n).collect(), c.get(0).unwrap().end()))
    }
}

fn is_integer_formed(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit())
}

/// Splits a tuple body into trimmed elements; `None` for prose parentheticals.
fn tuple_parts(body: &str) -> Option<Vec<&str>> {
    let parts: Vec<&str> = match body.split_once("->") {
        Some((a, rest)) => std::iter::once(a).chain(rest.split(',')).collect(),
        None => body.split(',').collect(),
    };
    let parts: Vec<&str> = parts.into_iter().map(str::trim).collect();
    if parts.len() < 2 || !is_integer_formed(parts[0]) {
        return None;
    }
    Some(parts)
}

/// Element count of the first edge tuple, and whether it used `->`.
pub fn first_tuple_shape(description: &str) -> Option<(usize, bool)> {
    let (_, start) = node_clause(description).ok()?;
    tuple_re().captures_iter(&description[start..]).find_map(|cap| {
        let body = cap.get(1)?.as_str();
        tuple_parts(body).map(|p| (p.len(), body.contains("->")))
    })
}

/// Parses a natural-language edge-list description.
///
/// Tuple arity must match `weighted`: two elements for unweighted graphs and
/// three for weighted ones. Both `,` and `->` separate the endpoints.
pub fn parse_graph(description: &str, directed: bool, weighted: bool) -> Result<Graph, GraphError> {
    let (ids, region_start) = node_clause(description)?;
    let region = &description[region_start..];

    let mut edges = Vec::new();
    for cap in tuple_re().captures_iter(region) {
        let body = &cap[1];
        // Only groups that start like a tuple are edges; other parentheticals are prose.
        let Some(parts) = tuple_parts(body) else {
            continue;
        };
        let malformed =
            |reason: &str| GraphError::MalformedTuple { tuple: format!("({body})"), reason: reason.to_string() };
        let expected = if weighted { 3 } else { 2 };
        if parts.len() != expected {
            return Err(malformed(&format!("expected {expected} elements, found {}", parts.len())));
        }
        let endpoint = |s: &str| {
            if !is_integer_formed(s) {
                return Err(malformed("endpoint is not a non-negative integer"));
            }
            s.parse::<NodeId>().map_err(|_| malformed("endpoint too large"))
        };
        let src = endpoint(parts[0])?;
        let dst = endpoint(parts[1])?;
        let weight = if weighted {
            Some(parts[2].parse::<Number>().map_err(|_| malformed("weight is not a number"))?)
        } else {
            None
        };
        edges.push(Edge { src, dst, weight, feature: None });
    }

    let mut node_weights = BTreeMap::new();
    for cap in node_weight_re().captures_iter(region) {
        let v: NodeId = cap[1].parse().map_err(|_| GraphError::MalformedTuple {
            tuple: cap[0].to_string(),
            reason: "node id too large".into(),
        })?;
        let w: Number = cap[2].parse().map_err(|_| GraphError::MalformedTuple {
            tuple: cap[0].to_string(),
            reason: "node weight is not a number".into(),
        })?;
        node_weights.insert(v, w);
    }

    let g = Graph::new(ids, edges, directed, weighted)?;
    if node_weights.is_empty() {
        Ok(g)
    } else {
        g.with_node_weights(node_weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const APPENDIX_SP: &str = "The graph has 8 nodes, and the edges are: (0,7,9) (0,1,7) (0,4,9) (1,7,1) (2,7,7) (2,6,5) (2,5,8) (3,5,9) (3,4,8) (3,6,1) (4,7,7) (4,5,6) (5,7,6). Give the weight of the shortest distance from node 1 to other node.";
    const APPENDIX_HAM: &str = "Q: The nodes are numbered from 0 to 5, and the edges are: (0, 3) (0, 1) (0, 2) (0, 4) (1, 5) (1, 4) (1, 2) (1, 3) (2, 4) (2, 5) (3, 5) (3, 4). Is there a Hamiltonian path in this graph?";

    #[test]
    fn parses_appendix_weighted_graph() {
        let g = parse_graph(APPENDIX_SP, false, true).unwrap();
        assert_eq!(g.node_count(), 8);
        assert_eq!(g.edge_count(), 13);
        assert_eq!(g.edges()[0], Edge::weighted(0, 7, 9));
        assert_eq!(
            g.neighbors(1).unwrap(),
            &[Neighbor { id: 0, weight: Some(Number::Int(7)) }, Neighbor { id: 7, weight: Some(Number::Int(1)) }]
        );
    }

    #[test]
    fn parses_range_clause_with_spaces() {
        let g = parse_graph(APPENDIX_HAM, false, false).unwrap();
        assert_eq!(g.node_ids(), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(g.edge_count(), 12);
        let tight = parse_graph(&APPENDIX_HAM.replace(", ", ",").replace(",and", ", and"), false, false).unwrap();
        assert_eq!(tight.edges(), g.edges());
    }

    #[test]
    fn empty_edge_set() {
        let g = parse_graph("The nodes are numbered from 0 to 1, and the edges are:", false, false).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 0);
        assert!(g.neighbors(0).unwrap().is_empty());
    }

    #[test]
    fn ids_are_not_reindexed() {
        let g =
            parse_graph("The nodes are numbered from 1 to 3, and the edges are: (1,2) (2,3)", false, false).unwrap();
        assert_eq!(g.node_ids(), &[1, 2, 3]);
        assert!(!g.contains(0));
        assert_eq!(
            parse_graph("The nodes are numbered from 1 to 3, and the edges are: (0,1)", false, false),
            Err(GraphError::EndpointOutOfRange(0))
        );
    }

    #[test]
    fn rejects_missing_clause_and_bad_tuples() {
        assert_eq!(parse_graph("edges: (0,1)", false, false), Err(GraphError::MissingNodeClause));
        assert!(matches!(
            parse_graph("The graph has 3 nodes, edges: (0,1,4)", false, false),
            Err(GraphError::MalformedTuple { .. })
        ));
        assert!(matches!(
            parse_graph("The graph has 3 nodes, edges: (0,1)", false, true),
            Err(GraphError::MalformedTuple { .. })
        ));
        assert!(matches!(
            parse_graph("The graph has 3 nodes, edges: (0,x)", false, false),
            Err(GraphError::MalformedTuple { .. })
        ));
        assert!(matches!(
            parse_graph("The graph has 3 nodes, edges: (0,1,z)", false, true),
            Err(GraphError::MalformedTuple { .. })
        ));
    }

    #[test]
    fn prose_parentheticals_before_clause_are_ignored() {
        let text = "In an undirected graph, (i,j,k) means an edge. The graph has 2 nodes, and the edges are: (0,1,3) (see above).";
        let g = parse_graph(text, false, true).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn duplicates_dropped_self_loops_kept() {
        let g = parse_graph("The graph has 3 nodes, edges: (0,1) (1,0) (2,2)", false, false).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_self_loop(2));
        assert_eq!(g.degree(2).unwrap(), 2);
        let d = parse_graph("The graph has 2 nodes, edges: (0->1) (1->0) (0->1)", true, false).unwrap();
        assert_eq!(d.edge_count(), 2);
    }

    #[test]
    fn directed_chain_neighbors() {
        let g = parse_graph("The graph has 3 nodes, edges: (0->1) (1->2)", true, false).unwrap();
        let ids = |ns: &[Neighbor]| ns.iter().map(|n| n.id).collect::<Vec<_>>();
        assert_eq!(ids(g.neighbors(1).unwrap()), vec![2]);
        assert_eq!(ids(g.in_neighbors(1).unwrap()), vec![0]);
        assert_eq!(g.neighbors(9), Err(GraphError::UnknownNode(9)));
    }

    #[test]
    fn isolated_node_has_no_neighbors() {
        let g = parse_graph("The graph has 4 nodes, edges: (0,1)", false, false).unwrap();
        assert!(g.neighbors(3).unwrap().is_empty());
    }

    #[test]
    fn node_weights_and_float_weights() {
        let text = "The nodes are numbered from 0 to 2, weights of nodes are: [0, 2] [1, 9] [2, 6], and the edges are: (0, 1) (1, 2) (0, 2).";
        let g = parse_graph(text, false, false).unwrap();
        assert_eq!(g.node_weight(1), Some(Number::Int(9)));
        let f = parse_graph("The graph has 2 nodes, edges: (0,1,2.5)", false, true).unwrap();
        assert_eq!(f.edges()[0].weight, Some(Number::Float(2.5)));
    }

    #[test]
    fn canonical_text_round_trips() {
        for (text, directed, weighted) in [
            (APPENDIX_SP, false, true),
            (APPENDIX_HAM, false, false),
            ("The graph has 3 nodes, edges: (0->1,2.5) (1->2,3)", true, true),
            ("The nodes are numbered from 0 to 2, weights of nodes are: [0, 2] [1, 9] [2, 6], and the edges are: (0, 1)", false, false),
            ("The graph has 0 nodes, and the edges are:", false, false),
        ] {
            let g = parse_graph(text, directed, weighted).unwrap();
            let again = parse_graph(&g.to_text(), directed, weighted).unwrap();
            assert_eq!(g, again, "{}", g.to_text());
        }
    }

    #[test]
    fn to_undirected_collapses_antiparallel() {
        let g = parse_graph("The graph has 3 nodes, edges: (0->1) (1->0) (1->2)", true, false).unwrap();
        let u = g.to_undirected();
        assert!(!u.is_directed());
        assert_eq!(u.edge_count(), 2);
        assert_eq!(u.neighbors(1).unwrap().len(), 2);
    }
}
