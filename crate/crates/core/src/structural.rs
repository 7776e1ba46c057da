//! Matching-based structural controllability.
//!
//! The minimum input theorem ties the driver nodes of a digraph to the
//! unmatched nodes of a maximum matching of its bipartite representation:
//! `N_D = max(N - |M*|, 1)`. Everything in this module starts from the
//! canonical Hopcroft-Karp matching and, where a question ranges over all
//! maximum matchings, answers it with alternating-path arguments instead of
//! enumeration.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    bipartite_rep, hopcroft_karp, hopcroft_karp_from, max_weight_assignment,
    max_weight_cycle_partition, maximum_matching, reachable_from, scc_decompose, weak_components,
    DiGraph, Matching,
};

/// Minimum driver node set under the canonical maximum matching.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriverReport {
    pub n_nodes: usize,
    pub matching_size: usize,
    pub n_drivers: usize,
    /// Ascending node indices.
    pub drivers: Vec<usize>,
}

/// `max(N - |M*|, 1)`, with the empty graph needing no drivers.
pub fn driver_count(n_nodes: usize, matching_size: usize) -> usize {
    if n_nodes == 0 {
        0
    } else {
        (n_nodes - matching_size).max(1)
    }
}

pub fn min_driver_set(g: &DiGraph) -> DriverReport {
    let m = maximum_matching(&bipartite_rep(g));
    report_from_matching(g.n_nodes(), &m)
}

fn report_from_matching(n: usize, m: &Matching) -> DriverReport {
    let mut drivers = m.unmatched();
    if drivers.is_empty() && n > 0 {
        drivers.push(0);
    }
    DriverReport {
        n_nodes: n,
        matching_size: m.size(),
        n_drivers: driver_count(n, m.size()),
        drivers,
    }
}

/// Outcome of the structural controllability test for a given driver set.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Controllability {
    Controllable,
    /// No directed path from any driver reaches `node`.
    Inaccessible { node: usize },
    /// `set` has fewer in-neighbours than members. `in_neighbors` lists
    /// state nodes; `inputs` counts driver inputs among the in-neighbours.
    Dilation {
        set: Vec<usize>,
        in_neighbors: Vec<usize>,
        inputs: usize,
    },
}

impl Controllability {
    pub fn is_controllable(&self) -> bool {
        matches!(self, Controllability::Controllable)
    }
}

/// Lin's criterion: controllable iff there are no inaccessible nodes and no
/// dilations, with one independent input attached to each driver.
pub fn structural_controllability_check(g: &DiGraph, drivers: &[usize]) -> Result<Controllability> {
    if drivers.is_empty() {
        return Err(Error::EmptyDriverSet);
    }
    let n = g.n_nodes();
    if let Some(&bad) = drivers.iter().find(|&&d| d >= n) {
        return Err(Error::UnknownNode(bad.to_string()));
    }
    let reach = reachable_from(g, drivers);
    if let Some(node) = (0..n).find(|&i| !reach[i]) {
        return Ok(Controllability::Inaccessible { node });
    }
    // Left: state tails 0..n, then one input vertex per driver.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + drivers.len()];
    for e in g.edges() {
        adj[e.src].push(e.dst);
    }
    for (k, &d) in drivers.iter().enumerate() {
        adj[n + k].push(d);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    let (mate_l, mate_r) = hopcroft_karp(n + drivers.len(), n, &adj);
    let Some(free) = (0..n).find(|&h| mate_r[h].is_none()) else {
        return Ok(Controllability::Controllable);
    };
    // Hall violator: heads reachable from the free head by alternating paths,
    // and the tails they pass through.
    let mut in_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, heads) in adj.iter().enumerate() {
        for &h in heads {
            in_adj[h].push(t);
        }
    }
    let mut seen_head = vec![false; n];
    let mut seen_tail = vec![false; n + drivers.len()];
    let mut queue = VecDeque::from([free]);
    seen_head[free] = true;
    while let Some(h) = queue.pop_front() {
        for &t in &in_adj[h] {
            if seen_tail[t] {
                continue;
            }
            seen_tail[t] = true;
            let h2 = mate_l[t].expect("maximum matching saturates every tail next to a free head");
            if !seen_head[h2] {
                seen_head[h2] = true;
                queue.push_back(h2);
            }
        }
    }
    Ok(Controllability::Dilation {
        set: (0..n).filter(|&h| seen_head[h]).collect(),
        in_neighbors: (0..n).filter(|&t| seen_tail[t]).collect(),
        inputs: (n..n + drivers.len()).filter(|&t| seen_tail[t]).count(),
    })
}

/// Alternating-path structure of one maximum matching, enough to answer
/// "in some / in every maximum matching" questions for edges and nodes.
struct AlternatingStructure {
    matching: Matching,
    /// SCC id on the 2n-vertex oriented graph (tails 0..n, heads n..2n).
    comp: Vec<usize>,
    /// Reachable from a free tail: non-matching edges tail -> head, matching
    /// edges head -> tail.
    from_free_tail: Vec<bool>,
    /// Reachable from a free head in the reversed orientation.
    from_free_head: Vec<bool>,
}

impl AlternatingStructure {
    fn new(g: &DiGraph) -> Self {
        let n = g.n_nodes();
        let matching = maximum_matching(&bipartite_rep(g));
        let mut oriented = DiGraph::with_nodes(2 * n);
        for e in g.edges() {
            if matching.contains(e.src, e.dst) {
                oriented.add_edge(n + e.dst, e.src, 1.0).expect("simple");
            } else {
                oriented.add_edge(e.src, n + e.dst, 1.0).expect("simple");
            }
        }
        let comp = scc_decompose(&oriented).component;
        let free_tails: Vec<usize> = (0..n).filter(|&t| matching.head_of[t].is_none()).collect();
        let free_heads: Vec<usize> =
            (0..n).filter(|&h| matching.tail_of[h].is_none()).map(|h| n + h).collect();
        let from_free_tail = reachable_from(&oriented, &free_tails);
        let from_free_head = reachable_from(&oriented.transpose(), &free_heads);
        Self { matching, comp, from_free_tail, from_free_head }
    }

    fn n(&self) -> usize {
        self.matching.tail_of.len()
    }

    /// Edge `t -> h` belongs to at least one maximum matching.
    fn in_some(&self, t: usize, h: usize) -> bool {
        let n = self.n();
        if self.matching.contains(t, h) {
            return true;
        }
        self.comp[t] == self.comp[n + h] || self.from_free_tail[t] || self.from_free_head[n + h]
    }

    /// Edge `t -> h` belongs to every maximum matching.
    fn in_all(&self, t: usize, h: usize) -> bool {
        let n = self.n();
        self.matching.contains(t, h)
            && self.comp[t] != self.comp[n + h]
            && !self.from_free_tail[n + h]
            && !self.from_free_head[t]
    }

    /// Head copy of `h` is unmatched in at least one maximum matching.
    fn can_be_unmatched(&self, h: usize) -> bool {
        !self.matching.is_matched(h) || self.from_free_head[self.n() + h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkTag {
    /// In every maximum matching.
    Critical,
    /// In no maximum matching.
    Redundant,
    Ordinary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkClassification {
    /// One tag per edge, in edge order.
    pub tags: Vec<LinkTag>,
    pub critical: f64,
    pub redundant: f64,
    pub ordinary: f64,
}

/// Shares of three class counts whose left-to-right float sum is exactly 1
/// (all zero for empty input). The last nonempty class takes the remainder
/// `1 - (sum of the others)`, which rounds back to 1 when added.
fn exact_fractions(counts: [usize; 3]) -> [f64; 3] {
    let total: usize = counts.iter().sum();
    let mut out = [0.0; 3];
    let Some(last) = (0..3).rev().find(|&i| counts[i] > 0) else {
        return out;
    };
    for i in 0..last {
        out[i] = counts[i] as f64 / total as f64;
    }
    out[last] = 1.0 - out[..last].iter().sum::<f64>();
    out
}

pub fn classify_links(g: &DiGraph) -> LinkClassification {
    let s = AlternatingStructure::new(g);
    let tags: Vec<LinkTag> = g
        .edges()
        .iter()
        .map(|e| {
            if s.in_all(e.src, e.dst) {
                LinkTag::Critical
            } else if s.in_some(e.src, e.dst) {
                LinkTag::Ordinary
            } else {
                LinkTag::Redundant
            }
        })
        .collect();
    let count = |t: LinkTag| tags.iter().filter(|&&x| x == t).count();
    let [critical, redundant, ordinary] =
        exact_fractions([count(LinkTag::Critical), count(LinkTag::Redundant), count(LinkTag::Ordinary)]);
    LinkClassification { critical, redundant, ordinary, tags }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    /// Unmatched (a driver) in every maximum matching.
    Critical,
    /// A driver in some maximum matchings only.
    Intermittent,
    /// Matched in every maximum matching.
    Redundant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeClassification {
    pub roles: Vec<NodeRole>,
    pub critical: f64,
    pub intermittent: f64,
    pub redundant: f64,
}

pub fn classify_nodes(g: &DiGraph) -> NodeClassification {
    let s = AlternatingStructure::new(g);
    let n = g.n_nodes();
    let roles: Vec<NodeRole> = (0..n)
        .map(|h| {
            let ever_matched = g.in_neighbors(h).iter().any(|&t| s.in_some(t, h));
            if !ever_matched {
                NodeRole::Critical
            } else if s.can_be_unmatched(h) {
                NodeRole::Intermittent
            } else {
                NodeRole::Redundant
            }
        })
        .collect();
    let count = |r: NodeRole| roles.iter().filter(|&&x| x == r).count();
    let [critical, intermittent, redundant] =
        exact_fractions([count(NodeRole::Critical), count(NodeRole::Intermittent), count(NodeRole::Redundant)]);
    NodeClassification { critical, intermittent, redundant, roles }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletionTag {
    /// Removing the node raises `N_D`.
    Critical,
    /// Removing the node leaves `N_D` unchanged.
    Ordinary,
    /// Removing the node lowers `N_D`.
    Redundant,
}

/// Driver count after deleting each node in turn. The canonical matching
/// minus the deleted node's edges is re-augmented rather than recomputed.
pub fn classify_nodes_deletion(g: &DiGraph) -> Vec<DeletionTag> {
    let n = g.n_nodes();
    let base = maximum_matching(&bipartite_rep(g));
    let nd = driver_count(n, base.size());
    (0..n)
        .map(|v| {
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
            for e in g.edges() {
                if e.src != v && e.dst != v {
                    adj[e.src].push(e.dst);
                }
            }
            for a in adj.iter_mut() {
                a.sort_unstable();
            }
            let mut mate_l = base.head_of.clone();
            let mut mate_r = base.tail_of.clone();
            if let Some(h) = mate_l[v].take() {
                mate_r[h] = None;
            }
            if let Some(t) = mate_r[v].take() {
                mate_l[t] = None;
            }
            let (mate_l, _) = hopcroft_karp_from(&adj, mate_l, mate_r);
            let size = mate_l.iter().filter(|m| m.is_some()).count();
            let nd_after = driver_count(n - 1, size);
            match nd_after.cmp(&nd) {
                std::cmp::Ordering::Greater => DeletionTag::Critical,
                std::cmp::Ordering::Equal => DeletionTag::Ordinary,
                std::cmp::Ordering::Less => DeletionTag::Redundant,
            }
        })
        .collect()
}

/// Decomposition of the driver count into sources, external dilations and
/// internal dilations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlProfile {
    pub n_sources: usize,
    pub n_sinks: usize,
    pub n_external: usize,
    pub n_internal: usize,
    pub eta_s: f64,
    pub eta_e: f64,
    pub eta_i: f64,
}

pub fn control_profile(g: &DiGraph) -> ControlProfile {
    let n = g.n_nodes();
    let nd = min_driver_set(g).n_drivers;
    let n_sources = (0..n).filter(|&i| g.in_degree(i) == 0).count();
    let n_sinks = (0..n).filter(|&i| g.out_degree(i) == 0).count();
    let n_external = n_sinks.saturating_sub(n_sources);
    let n_internal = nd - n_sources - n_external;
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    ControlProfile {
        n_sources,
        n_sinks,
        n_external,
        n_internal,
        eta_s: frac(n_sources),
        eta_e: frac(n_external),
        eta_i: frac(n_internal),
    }
}

/// Generic dimension of the subspace controllable from `controlled`
/// (Hosoe): the maximum-weight cycle partition of the accessible part.
pub fn control_centrality(g: &DiGraph, controlled: &[usize]) -> Result<usize> {
    if controlled.is_empty() {
        return Err(Error::EmptyDriverSet);
    }
    let reach = reachable_from(g, controlled);
    let (sub, map) = g.induced_subgraph(&reach);
    let mut inputs: Vec<usize> = controlled
        .iter()
        .map(|&c| map.iter().position(|&o| o == c).expect("controlled nodes are reachable"))
        .collect();
    inputs.sort_unstable();
    inputs.dedup();
    Ok(max_weight_cycle_partition(&sub, &inputs).weight)
}

/// Minimum actuator placement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActuatorReport {
    pub n_drivers: usize,
    /// Number of root strongly connected components.
    pub beta: usize,
    /// Maximum assignability index.
    pub alpha: usize,
    pub n_actuators: usize,
    pub drivers: Vec<usize>,
    pub actuators: Vec<usize>,
}

/// `N_da = N_D + beta - alpha`, where alpha is maximised over maximum
/// matchings by a two-level weighted matching: real edges weigh `N + 1`,
/// and one virtual vertex per root SCC may claim a single head inside its
/// component at weight 1. Cardinality is never traded for assignability.
pub fn min_actuators(g: &DiGraph) -> ActuatorReport {
    let n = g.n_nodes();
    if n == 0 {
        return ActuatorReport {
            n_drivers: 0,
            beta: 0,
            alpha: 0,
            n_actuators: 0,
            drivers: vec![],
            actuators: vec![],
        };
    }
    let scc = scc_decompose(g);
    let roots = scc.roots();
    let beta = roots.len();
    let rows = n + beta;
    // Columns: n heads, then one "stay unmatched" column per row.
    let cols = n + rows;
    let big = (n + 1) as i64;
    let mut w: Vec<Vec<Option<i64>>> = vec![vec![None; cols]; rows];
    for e in g.edges() {
        w[e.src][e.dst] = Some(big);
    }
    for (k, &c) in roots.iter().enumerate() {
        for &h in &scc.members[c] {
            w[n + k][h] = Some(1);
        }
    }
    for (r, row) in w.iter_mut().enumerate() {
        row[n + r] = Some(0);
    }
    let (_, assign) = max_weight_assignment(&w).expect("unmatched columns keep it feasible");
    let mut head_matched = vec![false; n];
    let mut size = 0;
    for &h in assign.iter().take(n) {
        if h < n {
            head_matched[h] = true;
            size += 1;
        }
    }
    let mut drivers: Vec<usize> = (0..n).filter(|&h| !head_matched[h]).collect();
    if drivers.is_empty() {
        // Perfect matching: the single driver may sit in any root SCC.
        drivers.push(scc.members[roots[0]][0]);
    }
    let mut has_driver = vec![false; scc.n_components()];
    for &d in &drivers {
        has_driver[scc.component[d]] = true;
    }
    let alpha = roots.iter().filter(|&&c| has_driver[c]).count();
    let mut actuators = drivers.clone();
    for &c in &roots {
        if !has_driver[c] {
            actuators.push(scc.members[c][0]);
        }
    }
    actuators.sort_unstable();
    let n_drivers = driver_count(n, size);
    ActuatorReport {
        n_drivers,
        beta,
        alpha,
        n_actuators: n_drivers + beta - alpha,
        drivers,
        actuators,
    }
}

/// Drivers for switchboard (edge) dynamics: every divergent node
/// (`k_out > k_in`) plus the lowest-index node of each balanced weakly
/// connected component that has at least one edge.
pub fn switchboard_drivers(g: &DiGraph) -> Vec<usize> {
    let n = g.n_nodes();
    let comp = weak_components(g);
    let n_comp = comp.iter().map(|&c| c + 1).max().unwrap_or(0);
    let mut all_balanced = vec![true; n_comp];
    let mut has_edge = vec![false; n_comp];
    let mut representative = vec![usize::MAX; n_comp];
    for v in 0..n {
        let c = comp[v];
        if g.out_degree(v) != g.in_degree(v) {
            all_balanced[c] = false;
        }
        if g.out_degree(v) > 0 {
            has_edge[c] = true;
        }
        representative[c] = representative[c].min(v);
    }
    let mut drivers: Vec<usize> = (0..n).filter(|&v| g.out_degree(v) > g.in_degree(v)).collect();
    for c in 0..n_comp {
        if all_balanced[c] && has_edge[c] {
            drivers.push(representative[c]);
        }
    }
    drivers.sort_unstable();
    drivers
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{directed_cycle, directed_path, gnp_directed};

    fn g(n: usize, e: &[(usize, usize)]) -> DiGraph {
        DiGraph::from_edges(n, e).unwrap()
    }

    fn star() -> DiGraph {
        g(3, &[(0, 1), (0, 2)])
    }

    /// All maximum matchings by exhaustive search over edge subsets.
    fn all_maximum_matchings(gr: &DiGraph) -> Vec<Vec<bool>> {
        let edges = gr.edges();
        let l = edges.len();
        let mut best = 0;
        let mut out: Vec<Vec<bool>> = Vec::new();
        for mask in 0u32..(1 << l) {
            let mut tail = vec![false; gr.n_nodes()];
            let mut head = vec![false; gr.n_nodes()];
            let mut ok = true;
            for (k, e) in edges.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    if tail[e.src] || head[e.dst] {
                        ok = false;
                        break;
                    }
                    tail[e.src] = true;
                    head[e.dst] = true;
                }
            }
            if !ok {
                continue;
            }
            let size = mask.count_ones() as usize;
            if size > best {
                best = size;
                out.clear();
            }
            if size == best {
                out.push((0..l).map(|k| mask >> k & 1 == 1).collect());
            }
        }
        out
    }

    #[test]
    fn driver_examples() {
        let p = min_driver_set(&directed_path(3));
        assert_eq!((p.n_drivers, p.drivers.clone()), (1, vec![0]));
        let s = min_driver_set(&star());
        assert_eq!((s.n_drivers, s.drivers.clone()), (2, vec![0, 2]));
        let c = min_driver_set(&directed_cycle(3));
        assert_eq!((c.n_drivers, c.drivers.clone()), (1, vec![0]));
    }

    #[test]
    fn lin_check_examples() {
        match structural_controllability_check(&star(), &[0]).unwrap() {
            Controllability::Dilation { set, in_neighbors, inputs } => {
                assert_eq!(set, vec![1, 2]);
                assert_eq!(in_neighbors, vec![0]);
                assert_eq!(inputs, 0);
            }
            other => panic!("expected dilation, got {other:?}"),
        }
        assert!(structural_controllability_check(&star(), &[0, 2]).unwrap().is_controllable());
        assert_eq!(
            structural_controllability_check(&DiGraph::with_nodes(2), &[0]).unwrap(),
            Controllability::Inaccessible { node: 1 }
        );
        assert_eq!(structural_controllability_check(&star(), &[]), Err(Error::EmptyDriverSet));
    }

    #[test]
    fn link_examples() {
        let p = classify_links(&directed_path(3));
        assert_eq!(p.tags, vec![LinkTag::Critical, LinkTag::Critical]);
        let diamond = g(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let d = classify_links(&diamond);
        assert_eq!(d.tags[2], LinkTag::Ordinary);
        assert_eq!(d.tags[3], LinkTag::Ordinary);
    }

    #[test]
    fn link_classes_match_enumeration() {
        for seed in 0..300 {
            let n = 2 + (seed % 5) as usize;
            let gr = gnp_directed(n, 0.35, true, seed);
            if gr.n_edges() > 16 {
                continue;
            }
            let all = all_maximum_matchings(&gr);
            let got = classify_links(&gr);
            for (k, tag) in got.tags.iter().enumerate() {
                let count = all.iter().filter(|m| m[k]).count();
                let want = if count == all.len() {
                    LinkTag::Critical
                } else if count == 0 {
                    LinkTag::Redundant
                } else {
                    LinkTag::Ordinary
                };
                assert_eq!(*tag, want, "seed {seed} edge {k}");
            }
        }
    }

    #[test]
    fn node_roles_match_enumeration() {
        for seed in 0..300 {
            let n = 2 + (seed % 5) as usize;
            let gr = gnp_directed(n, 0.35, true, 1000 + seed);
            if gr.n_edges() > 16 {
                continue;
            }
            let all = all_maximum_matchings(&gr);
            let roles = classify_nodes(&gr).roles;
            for h in 0..n {
                let matched = |m: &Vec<bool>| gr.edges().iter().enumerate().any(|(k, e)| m[k] && e.dst == h);
                let times = all.iter().filter(|m| matched(m)).count();
                let want = if times == 0 {
                    NodeRole::Critical
                } else if times == all.len() {
                    NodeRole::Redundant
                } else {
                    NodeRole::Intermittent
                };
                assert_eq!(roles[h], want, "seed {seed} node {h}");
            }
        }
    }

    #[test]
    fn node_role_examples() {
        use NodeRole::*;
        assert_eq!(classify_nodes(&star()).roles, vec![Critical, Intermittent, Intermittent]);
        assert_eq!(classify_nodes(&directed_cycle(3)).roles, vec![Redundant; 3]);
        assert_eq!(classify_nodes(&directed_path(3)).roles, vec![Critical, Redundant, Redundant]);
    }

    #[test]
    fn deletion_examples() {
        let p = classify_nodes_deletion(&directed_path(3));
        assert_eq!(p[1], DeletionTag::Critical);
        let s = classify_nodes_deletion(&star());
        assert_eq!(s, vec![DeletionTag::Ordinary, DeletionTag::Redundant, DeletionTag::Redundant]);
    }

    #[test]
    fn deletion_matches_recomputation() {
        for seed in 0..50 {
            let gr = gnp_directed(12, 0.15, false, seed);
            let tags = classify_nodes_deletion(&gr);
            let nd = min_driver_set(&gr).n_drivers;
            for v in 0..12 {
                let mut keep = vec![true; 12];
                keep[v] = false;
                let (sub, _) = gr.induced_subgraph(&keep);
                let after = min_driver_set(&sub).n_drivers;
                let want = match after.cmp(&nd) {
                    std::cmp::Ordering::Greater => DeletionTag::Critical,
                    std::cmp::Ordering::Equal => DeletionTag::Ordinary,
                    std::cmp::Ordering::Less => DeletionTag::Redundant,
                };
                assert_eq!(tags[v], want);
            }
        }
    }

    #[test]
    fn profile_examples() {
        let p = control_profile(&directed_path(3));
        assert_eq!((p.n_sources, p.n_external, p.n_internal), (1, 0, 0));
        let s = control_profile(&star());
        assert_eq!((s.n_sources, s.n_external, s.n_internal), (1, 1, 0));
        let c = control_profile(&directed_cycle(3));
        assert_eq!((c.n_sources, c.n_external, c.n_internal), (0, 0, 1));
        assert!((c.eta_i - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn centrality_examples() {
        assert_eq!(control_centrality(&directed_cycle(3), &[1]).unwrap(), 3);
        assert_eq!(control_centrality(&directed_path(5), &[0]).unwrap(), 5);
        assert_eq!(control_centrality(&directed_path(5), &[3]).unwrap(), 2);
        assert_eq!(control_centrality(&star(), &[]), Err(Error::EmptyDriverSet));
    }

    #[test]
    fn actuator_examples() {
        // x1 -> x2, x1 -> x4, x4 -> x3, x5 -> x5 (0-based).
        let fig = g(5, &[(0, 1), (0, 3), (3, 2), (4, 4)]);
        let r = min_actuators(&fig);
        assert_eq!((r.n_drivers, r.beta, r.alpha, r.n_actuators), (2, 2, 1, 3));
        assert!(r.actuators == vec![0, 1, 4] || r.actuators == vec![0, 3, 4]);
        let path = min_actuators(&directed_path(4));
        assert_eq!(path.n_actuators, 1);
        let two_cycles = g(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]);
        let t = min_actuators(&two_cycles);
        assert_eq!((t.n_drivers, t.beta, t.alpha, t.n_actuators), (1, 2, 1, 2));
    }

    /// Smallest S such that every node is reachable from S and some
    /// matching leaves only members of S unmatched.
    fn brute_actuators(gr: &DiGraph) -> usize {
        let n = gr.n_nodes();
        for size in 1..=n {
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let s: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                if reachable_from(gr, &s).iter().any(|&r| !r) {
                    continue;
                }
                let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + size];
                for e in gr.edges() {
                    adj[e.src].push(e.dst);
                }
                for (k, &d) in s.iter().enumerate() {
                    adj[n + k].push(d);
                }
                let (_, mate_r) = hopcroft_karp(n + size, n, &adj);
                if mate_r.iter().all(|m| m.is_some()) {
                    return size;
                }
            }
        }
        unreachable!("all nodes as actuators always works")
    }

    #[test]
    fn actuators_match_brute_force() {
        for seed in 0..100 {
            let n = 2 + (seed % 9) as usize;
            let gr = gnp_directed(n, 0.2, true, 500 + seed);
            let r = min_actuators(&gr);
            assert_eq!(r.n_actuators, brute_actuators(&gr), "seed {seed}");
            assert_eq!(r.actuators.len(), r.n_actuators);
            assert!(r.n_drivers <= r.n_actuators && r.n_actuators <= r.n_drivers + r.beta);
            let check = structural_controllability_check(&gr, &r.actuators).unwrap();
            assert!(check.is_controllable(), "seed {seed}: {check:?}");
        }
    }

    #[test]
    fn switchboard_examples() {
        assert_eq!(switchboard_drivers(&star()), vec![0]);
        assert_eq!(switchboard_drivers(&directed_cycle(3)), vec![0]);
        let conv = g(3, &[(0, 2), (1, 2)]);
        assert_eq!(switchboard_drivers(&conv), vec![0, 1]);
    }
}
