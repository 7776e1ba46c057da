use super::DiGraph;

/// Strongly connected components and their condensation.
#[derive(Debug, Clone, PartialEq)]
pub struct SccDecomposition {
    /// Component id of each node. Ids are assigned in order of each
    /// component's lowest node index.
    pub component: Vec<usize>,
    /// Members of each component, ascending.
    pub members: Vec<Vec<usize>>,
    /// Deduplicated condensation edges between distinct components.
    pub condensation: Vec<(usize, usize)>,
    /// Components with no incoming condensation edge.
    pub is_root: Vec<bool>,
}

impl SccDecomposition {
    pub fn n_components(&self) -> usize {
        self.members.len()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.n_components()).filter(|&c| self.is_root[c]).collect()
    }

    /// Successor components in the condensation.
    pub fn condensation_successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.n_components()];
        for &(a, b) in &self.condensation {
            succ[a].push(b);
        }
        succ
    }
}

/// Tarjan's linear-time SCC decomposition (iterative, so deep graphs do not
/// overflow the stack).
pub fn scc_decompose(g: &DiGraph) -> SccDecomposition {
    let n = g.n_nodes();
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut raw_comp = vec![UNVISITED; n];
    let mut n_raw = 0;
    let mut counter = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();

    for s in 0..n {
        if index[s] != UNVISITED {
            continue;
        }
        call.push((s, 0));
        index[s] = counter;
        low[s] = counter;
        counter += 1;
        stack.push(s);
        on_stack[s] = true;
        while let Some(&(v, pos)) = call.last() {
            let succ = g.out_neighbors(v);
            if pos < succ.len() {
                let w = succ[pos];
                call.last_mut().expect("nonempty").1 += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        raw_comp[w] = n_raw;
                        if w == v {
                            break;
                        }
                    }
                    n_raw += 1;
                }
            }
        }
    }

    // Renumber by lowest member index.
    let mut renumber = vec![UNVISITED; n_raw];
    let mut next = 0;
    let mut component = vec![0; n];
    for v in 0..n {
        let r = raw_comp[v];
        if renumber[r] == UNVISITED {
            renumber[r] = next;
            next += 1;
        }
        component[v] = renumber[r];
    }
    let mut members = vec![Vec::new(); next];
    for v in 0..n {
        members[component[v]].push(v);
    }
    let mut condensation: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|e| (component[e.src], component[e.dst]))
        .filter(|(a, b)| a != b)
        .collect();
    condensation.sort_unstable();
    condensation.dedup();
    let mut is_root = vec![true; next];
    for &(_, b) in &condensation {
        is_root[b] = false;
    }
    SccDecomposition { component, members, condensation, is_root }
}
