use super::DiGraph;

/// Result of greedy leaf removal on a digraph.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedCore {
    /// Nodes whose out-copy or in-copy survives leaf removal with an edge.
    pub nodes: Vec<usize>,
    /// `|nodes| / N` (0 for the empty graph).
    pub fraction: f64,
}

/// Greedy leaf removal on the bipartite representation.
///
/// An in-leaf (a node with exactly one remaining in-link) forces its parent's
/// out-copy to be matched to it, so every other outgoing link of the parent is
/// removed; out-leaves are handled symmetrically. The fixed point is the
/// core.
pub fn directed_core(g: &DiGraph) -> DirectedCore {
    let n = g.n_nodes();
    // Vertex v < n is the out-copy v+, vertex n + v the in-copy v-.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); 2 * n];
    for e in g.edges() {
        adj[e.src].push(n + e.dst);
        adj[n + e.dst].push(e.src);
    }
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut alive = vec![true; 2 * n];
    let mut stack: Vec<usize> = (0..2 * n).rev().filter(|&v| deg[v] == 1).collect();
    while let Some(leaf) = stack.pop() {
        if !alive[leaf] || deg[leaf] != 1 {
            continue;
        }
        let partner = *adj[leaf]
            .iter()
            .find(|&&w| alive[w])
            .expect("a degree-one vertex has one live neighbour");
        alive[leaf] = false;
        alive[partner] = false;
        deg[leaf] = 0;
        for &w in &adj[partner] {
            if alive[w] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    stack.push(w);
                }
            }
        }
        deg[partner] = 0;
    }
    let nodes: Vec<usize> = (0..n)
        .filter(|&v| (alive[v] && deg[v] > 0) || (alive[n + v] && deg[n + v] > 0))
        .collect();
    let fraction = if n == 0 { 0.0 } else { nodes.len() as f64 / n as f64 };
    DirectedCore { nodes, fraction }
}
