//! Graph data model and the combinatorial kernels the analyses build on.
//!
//! Nodes carry string labels interned to dense indices in first-appearance
//! order. Every algorithm iterates in index order, so results are
//! reproducible run to run.

mod assignment;
mod core;
mod cycle_partition;
pub mod generate;
mod matching;
mod scc;

pub use self::assignment::{max_weight_assignment, min_cost_assignment};
pub use self::core::{directed_core, DirectedCore};
pub use self::cycle_partition::{max_weight_cycle_partition, CyclePartition};
pub use self::matching::{bipartite_rep, maximum_matching, BipartiteRep, Matching};
pub(crate) use self::matching::{hopcroft_karp, hopcroft_karp_from};
pub use self::scc::{scc_decompose, SccDecomposition};

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Directed, optionally weighted graph. Self-loops are allowed, parallel
/// edges are not.
#[derive(Debug, Clone, Default)]
pub struct DiGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    edge_set: HashSet<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl PartialEq for DiGraph {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.edges == other.edges
    }
}

impl DiGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n` nodes labelled `"0"`, `"1"`, ...
    pub fn with_nodes(n: usize) -> Self {
        let mut g = Self::new();
        for i in 0..n {
            g.add_node(&i.to_string());
        }
        g
    }

    /// Builds a graph on `n` index-labelled nodes from unit-weight edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::with_nodes(n);
        for &(s, d) in edges {
            g.add_edge(s, d, 1.0)?;
        }
        Ok(g)
    }

    /// Returns the index of `label`, interning it if new.
    pub fn add_node(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        i
    }

    pub fn add_edge(&mut self, src: usize, dst: usize, weight: f64) -> Result<()> {
        let n = self.n_nodes();
        if src >= n || dst >= n {
            return Err(Error::UnknownNode(format!("{}", src.max(dst))));
        }
        if !self.edge_set.insert((src, dst)) {
            return Err(Error::DuplicateEdge {
                src: self.labels[src].clone(),
                dst: self.labels[dst].clone(),
            });
        }
        self.edges.push(Edge { src, dst, weight });
        self.out_adj[src].push(dst);
        self.in_adj[dst].push(src);
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Resolves labels to indices, failing on the first unknown label.
    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.node_index(l.as_ref())
                    .ok_or_else(|| Error::UnknownNode(l.as_ref().to_string()))
            })
            .collect()
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.edge_set.contains(&(src, dst))
    }

    /// Successors in edge-insertion order.
    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_adj[i]
    }

    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_adj[i]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_adj[i].len()
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_adj[i].len()
    }

    /// Reverses every edge, keeping weights and labels.
    pub fn transpose(&self) -> DiGraph {
        let mut t = DiGraph::new();
        for l in &self.labels {
            t.add_node(l);
        }
        for e in &self.edges {
            t.add_edge(e.dst, e.src, e.weight)
                .expect("transpose of a simple digraph is simple");
        }
        t
    }

    /// Subgraph induced by `keep`, nodes renumbered in increasing index order.
    /// Returns the subgraph and the map from new index to old index.
    pub fn induced_subgraph(&self, keep: &[bool]) -> (DiGraph, Vec<usize>) {
        let mut map = Vec::new();
        let mut new_index = vec![usize::MAX; self.n_nodes()];
        let mut sub = DiGraph::new();
        for i in 0..self.n_nodes() {
            if keep[i] {
                new_index[i] = sub.add_node(&self.labels[i]);
                map.push(i);
            }
        }
        for e in &self.edges {
            if keep[e.src] && keep[e.dst] {
                sub.add_edge(new_index[e.src], new_index[e.dst], e.weight)
                    .expect("subgraph of a simple digraph is simple");
            }
        }
        (sub, map)
    }

    /// Copy without the edge at position `edge_idx`.
    pub fn without_edge(&self, edge_idx: usize) -> DiGraph {
        let mut g = DiGraph::new();
        for l in &self.labels {
            g.add_node(l);
        }
        for (k, e) in self.edges.iter().enumerate() {
            if k != edge_idx {
                g.add_edge(e.src, e.dst, e.weight).expect("simple");
            }
        }
        g
    }

    /// Dense weighted adjacency in the `a_ij` = influence of j on i
    /// convention, i.e. edge j -> i lands at row i, column j.
    pub fn to_state_matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n_nodes();
        let mut a = nalgebra::DMatrix::zeros(n, n);
        for e in &self.edges {
            a[(e.dst, e.src)] = e.weight;
        }
        a
    }

    /// Same topology with every weight replaced by `f(edge)`.
    pub fn reweighted(&self, mut f: impl FnMut(&Edge) -> f64) -> DiGraph {
        let mut g = self.clone();
        for e in g.edges.iter_mut() {
            e.weight = f(e);
        }
        g
    }
}

/// Simple undirected graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl UnGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_nodes(n: usize) -> Self {
        let mut g = Self::new();
        for i in 0..n {
            g.add_node(&i.to_string());
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::with_nodes(n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        self.adj.push(Vec::new());
        i
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        let n = self.n_nodes();
        if a >= n || b >= n {
            return Err(Error::UnknownNode(format!("{}", a.max(b))));
        }
        if a == b {
            return Err(Error::InvalidArgument(format!(
                "self-pair {} in undirected graph",
                self.labels[a]
            )));
        }
        if self.adj[a].contains(&b) {
            return Err(Error::DuplicateEdge {
                src: self.labels[a].clone(),
                dst: self.labels[b].clone(),
            });
        }
        self.edges.push((a, b));
        self.adj[a].push(b);
        self.adj[b].push(a);
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Symmetric 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n_nodes();
        let mut a = nalgebra::DMatrix::zeros(n, n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// Graph Laplacian `D - A`.
    pub fn laplacian(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n_nodes();
        let mut l = -self.adjacency_matrix();
        for i in 0..n {
            l[(i, i)] = self.degree(i) as f64;
        }
        l
    }

    /// The symmetric digraph with both orientations of every edge.
    pub fn to_digraph(&self) -> DiGraph {
        let mut g = DiGraph::new();
        for l in &self.labels {
            g.add_node(l);
        }
        for &(a, b) in &self.edges {
            g.add_edge(a, b, 1.0).expect("simple");
            g.add_edge(b, a, 1.0).expect("simple");
        }
        g
    }
}

/// Either flavour of parsed graph.
#[derive(Debug, Clone, PartialEq)]
pub enum Graph {
    Directed(DiGraph),
    Undirected(UnGraph),
}

fn edge_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((k + 1, line.split_whitespace().collect()))
        }
    })
}

fn parse_weight(line: usize, fields: &[&str]) -> Result<f64> {
    match fields.len() {
        2 => Ok(1.0),
        3 => {
            let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad weight {:?}", fields[2]),
            })?;
            if w.is_finite() {
                Ok(w)
            } else {
                Err(Error::Parse { line, message: "non-finite weight".into() })
            }
        }
        k => Err(Error::Parse {
            line,
            message: format!("expected `src dst [weight]`, got {k} fields"),
        }),
    }
}

/// Parses `src dst [weight]` lines into a digraph. `#` lines are comments.
pub fn parse_digraph(text: &str) -> Result<DiGraph> {
    let mut g = DiGraph::new();
    for (line, fields) in edge_lines(text) {
        let w = parse_weight(line, &fields)?;
        let s = g.add_node(fields[0]);
        let d = g.add_node(fields[1]);
        g.add_edge(s, d, w)?;
    }
    Ok(g)
}

/// Parses `a b` lines into an undirected graph; weights are accepted and ignored.
pub fn parse_ungraph(text: &str) -> Result<UnGraph> {
    let mut g = UnGraph::new();
    for (line, fields) in edge_lines(text) {
        parse_weight(line, &fields)?;
        let a = g.add_node(fields[0]);
        let b = g.add_node(fields[1]);
        g.add_edge(a, b).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Parse { line, message: m },
            other => other,
        })?;
    }
    Ok(g)
}

pub fn parse_edge_list(text: &str, directed: bool) -> Result<Graph> {
    if directed {
        parse_digraph(text).map(Graph::Directed)
    } else {
        parse_ungraph(text).map(Graph::Undirected)
    }
}

/// Writes a digraph back out in the edge-list format.
pub fn write_edge_list(g: &DiGraph) -> String {
    let mut s = String::new();
    for e in g.edges() {
        if e.weight == 1.0 {
            s.push_str(&format!("{} {}\n", g.label(e.src), g.label(e.dst)));
        } else {
            s.push_str(&format!("{} {} {}\n", g.label(e.src), g.label(e.dst), e.weight));
        }
    }
    s
}

/// Nodes reachable from `sources` along directed edges, sources included.
pub fn reachable_from(g: &DiGraph, sources: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; g.n_nodes()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in g.out_neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Weakly connected components, labelled in order of their lowest node.
pub fn weak_components(g: &DiGraph) -> Vec<usize> {
    let n = g.n_nodes();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in g.out_neighbors(v).iter().chain(g.in_neighbors(v)) {
                if comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Index of each node reachable in `keep`, restricted to undirected edges.
pub fn connected_components(g: &UnGraph, keep: &[bool]) -> Vec<Vec<usize>> {
    let n = g.n_nodes();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for s in 0..n {
        if seen[s] || !keep[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if keep[w] && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

/// True when the digraph has no directed cycle (self-loops count as cycles).
/// On success returns a topological order.
pub fn topological_order(g: &DiGraph, removed: &[bool]) -> Option<Vec<usize>> {
    let n = g.n_nodes();
    let mut indeg = vec![0usize; n];
    for e in g.edges() {
        if !removed[e.src] && !removed[e.dst] {
            indeg[e.dst] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| !removed[i] && indeg[i] == 0).collect();
    let mut order = Vec::new();
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in g.out_neighbors(v) {
            if removed[w] {
                continue;
            }
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    let alive = removed.iter().filter(|&&r| !r).count();
    (order.len() == alive).then_some(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_labels_in_first_appearance_order() {
        let g = parse_digraph("a b\nb c").unwrap();
        assert_eq!(g.n_nodes(), 3);
        assert_eq!(g.labels(), &["a", "b", "c"]);
        assert_eq!(g.edges()[0].src, 0);
        assert_eq!(g.edges()[1].dst, 2);
    }

    #[test]
    fn parses_weights_comments_and_crlf() {
        let g = parse_digraph("# header\r\na b 0.5\r\n\r\n").unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.edges()[0].weight, 0.5);
    }

    #[test]
    fn rejects_duplicates_and_malformed_lines() {
        assert!(matches!(parse_digraph("a b\na b"), Err(Error::DuplicateEdge { .. })));
        assert_eq!(
            parse_digraph("a b\nc").unwrap_err(),
            Error::Parse { line: 2, message: "expected `src dst [weight]`, got 1 fields".into() }
        );
        assert!(matches!(parse_digraph("a b x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_ungraph("a b\nb a"), Err(Error::DuplicateEdge { .. })));
        assert!(matches!(parse_ungraph("a a"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn transpose_reverses_and_is_an_involution() {
        let g = parse_digraph("a b\nb c\nc c 2").unwrap();
        let t = g.transpose();
        assert!(t.has_edge(1, 0) && t.has_edge(2, 1) && t.has_edge(2, 2));
        assert_eq!(t.edges()[2].weight, 2.0);
        assert_eq!(t.transpose(), g);
    }

    #[test]
    fn reachability() {
        let g = parse_digraph("a b\nb c").unwrap();
        assert_eq!(reachable_from(&g, &[0]), vec![true, true, true]);
        assert_eq!(reachable_from(&g, &[]), vec![false, false, false]);
        let two = DiGraph::from_edges(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        assert_eq!(reachable_from(&two, &[1]), vec![true, true, false, false]);
    }

    #[test]
    fn topological_order_detects_cycles() {
        let dag = DiGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(topological_order(&dag, &[false; 3]).is_some());
        let looped = DiGraph::from_edges(1, &[(0, 0)]).unwrap();
        assert!(topological_order(&looped, &[false]).is_none());
        assert!(topological_order(&looped, &[true]).is_some());
    }
}
