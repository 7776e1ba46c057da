use super::assignment::max_weight_assignment;
use super::DiGraph;

/// Maximum-weight cycle partition of the input-augmented graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclePartition {
    /// Number of original (state or input) edges used by the partition.
    pub weight: usize,
    /// Successor of every vertex; indices `>= n_states` are input vertices,
    /// in the order the inputs were given.
    pub successor: Vec<usize>,
    pub n_states: usize,
}

/// Builds `G'`: the digraph plus one input vertex per entry of `inputs`
/// (edge `u_j -> x_inputs[j]`, weight 1), zero-weight edges from every state
/// to every input vertex, and zero-weight self-loops wherever none exists.
/// The maximum total weight over all node-disjoint cycle covers is solved as
/// an assignment problem (each vertex picks one successor, each vertex has
/// one predecessor).
pub fn max_weight_cycle_partition(g: &DiGraph, inputs: &[usize]) -> CyclePartition {
    let n = g.n_nodes();
    let m = inputs.len();
    let size = n + m;
    let mut w: Vec<Vec<Option<i64>>> = vec![vec![None; size]; size];
    for e in g.edges() {
        w[e.src][e.dst] = Some(1);
    }
    for (j, &x) in inputs.iter().enumerate() {
        w[n + j][x] = Some(1);
        for row in w.iter_mut().take(n) {
            row[n + j] = Some(0);
        }
    }
    for (v, row) in w.iter_mut().enumerate() {
        if row[v].is_none() {
            row[v] = Some(0);
        }
    }
    let (total, successor) =
        max_weight_assignment(&w).expect("self-loops make a cover always feasible");
    CyclePartition { weight: total as usize, successor, n_states: n }
}
