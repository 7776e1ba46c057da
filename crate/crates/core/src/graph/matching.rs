use std::collections::VecDeque;

use super::DiGraph;

/// Bipartite representation of a digraph: every node `i` is split into an
/// out-copy `i+` (left) and an in-copy `i-` (right); each edge `j -> i`
/// becomes `(j+, i-)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteRep {
    pub n: usize,
    /// `(tail, head)` pairs, one per digraph edge, in edge order.
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteRep {
    /// Left-side adjacency with heads sorted ascending.
    pub fn left_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(t, h) in &self.edges {
            adj[t].push(h);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        adj
    }
}

pub fn bipartite_rep(g: &DiGraph) -> BipartiteRep {
    BipartiteRep {
        n: g.n_nodes(),
        edges: g.edges().iter().map(|e| (e.src, e.dst)).collect(),
    }
}

/// A set of directed edges sharing no tails and no heads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// `tail_of[i] = Some(j)` when edge `j -> i` is in the matching.
    pub tail_of: Vec<Option<usize>>,
    /// `head_of[j] = Some(i)` when edge `j -> i` is in the matching.
    pub head_of: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.head_of.iter().filter(|h| h.is_some()).count()
    }

    /// A node is matched when it is the head of a matching edge.
    pub fn is_matched(&self, i: usize) -> bool {
        self.tail_of[i].is_some()
    }

    pub fn unmatched(&self) -> Vec<usize> {
        (0..self.tail_of.len()).filter(|&i| self.tail_of[i].is_none()).collect()
    }

    /// Matching edges as `(tail, head)`, ordered by tail.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.head_of
            .iter()
            .enumerate()
            .filter_map(|(t, h)| h.map(|h| (t, h)))
            .collect()
    }

    pub fn contains(&self, tail: usize, head: usize) -> bool {
        self.head_of[tail] == Some(head)
    }
}

/// Hopcroft-Karp maximum matching on the bipartite representation.
///
/// Left vertices are processed in increasing index order and their heads in
/// increasing order, so the result is a deterministic canonical optimum.
pub fn maximum_matching(b: &BipartiteRep) -> Matching {
    let adj = b.left_adjacency();
    let (head_of, tail_of) = hopcroft_karp(b.n, b.n, &adj);
    Matching { tail_of, head_of }
}

/// Hopcroft-Karp on an arbitrary bipartite graph given as left adjacency.
/// Returns `(right mate of each left, left mate of each right)`.
pub(crate) fn hopcroft_karp(
    n_left: usize,
    n_right: usize,
    adj: &[Vec<usize>],
) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    hopcroft_karp_from(adj, vec![None; n_left], vec![None; n_right])
}

/// Hopcroft-Karp warm-started from a valid (not necessarily maximum)
/// matching.
pub(crate) fn hopcroft_karp_from(
    adj: &[Vec<usize>],
    mut mate_l: Vec<Option<usize>>,
    mut mate_r: Vec<Option<usize>>,
) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    const INF: usize = usize::MAX;
    let n_left = mate_l.len();
    let mut dist = vec![INF; n_left];
    let mut it = vec![0usize; n_left];
    let mut queue = VecDeque::new();
    loop {
        queue.clear();
        for u in 0..n_left {
            if mate_l[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match mate_r[v] {
                    None => found = true,
                    Some(w) if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        it.iter_mut().for_each(|x| *x = 0);
        for root in 0..n_left {
            if mate_l[root].is_some() {
                continue;
            }
            // Iterative layered DFS from `root`.
            let mut stack: Vec<usize> = vec![root];
            let mut path_rights: Vec<usize> = Vec::new();
            let mut augmented = false;
            while let Some(&u) = stack.last() {
                if it[u] >= adj[u].len() {
                    dist[u] = INF;
                    stack.pop();
                    path_rights.pop();
                    continue;
                }
                let v = adj[u][it[u]];
                it[u] += 1;
                match mate_r[v] {
                    None => {
                        path_rights.push(v);
                        augmented = true;
                        break;
                    }
                    Some(w) if dist[w] != INF && dist[w] == dist[u] + 1 => {
                        path_rights.push(v);
                        stack.push(w);
                    }
                    _ => {}
                }
            }
            if augmented {
                for (k, &u) in stack.iter().enumerate() {
                    let v = path_rights[k];
                    mate_l[u] = Some(v);
                    mate_r[v] = Some(u);
                }
            }
        }
    }
    (mate_l, mate_r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mm(n: usize, edges: &[(usize, usize)]) -> Matching {
        maximum_matching(&bipartite_rep(&DiGraph::from_edges(n, edges).unwrap()))
    }

    #[test]
    fn bipartite_rep_examples() {
        let g = DiGraph::from_edges(3, &[(0, 1), (2, 2)]).unwrap();
        assert_eq!(bipartite_rep(&g).edges, vec![(0, 1), (2, 2)]);
        assert!(bipartite_rep(&DiGraph::new()).edges.is_empty());
        let star = DiGraph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        assert_eq!(bipartite_rep(&star).edges, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn path_star_cycle() {
        let p = mm(3, &[(0, 1), (1, 2)]);
        assert_eq!(p.size(), 2);
        assert_eq!(p.unmatched(), vec![0]);
        let s = mm(3, &[(0, 1), (0, 2)]);
        assert_eq!(s.size(), 1);
        assert!(s.contains(0, 1));
        let c = mm(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(c.size(), 3);
        assert!(c.unmatched().is_empty());
    }

    #[test]
    fn matching_is_consistent() {
        let m = mm(5, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 1), (4, 4), (3, 4)]);
        for (t, h) in m.edges() {
            assert_eq!(m.tail_of[h], Some(t));
        }
    }
}
