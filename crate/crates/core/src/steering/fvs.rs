use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{scc_decompose, topological_order, DiGraph};
use crate::ode::{distance, integrate, OdeSystem, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FvsMode {
    Exact,
    Heuristic,
}

/// Largest graph the exhaustive search accepts.
pub const EXACT_MAX: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FvsResult {
    /// Ascending.
    pub nodes: Vec<usize>,
    /// Topological order of the remaining nodes, certifying acyclicity.
    pub order: Vec<usize>,
    /// No proper subset is a feedback vertex set.
    pub minimal: bool,
    /// The set is a minimum one.
    pub exact: bool,
}

fn mask_of(n: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

/// Removing `set` leaves no directed cycle (self-loops are cycles).
pub fn is_fvs(g: &DiGraph, set: &[usize]) -> bool {
    topological_order(g, &mask_of(g.n_nodes(), set)).is_some()
}

fn is_minimal(g: &DiGraph, set: &[usize]) -> bool {
    (0..set.len()).all(|k| {
        let rest: Vec<usize> = set.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &v)| v).collect();
        !is_fvs(g, &rest)
    })
}

fn finish(g: &DiGraph, mut nodes: Vec<usize>, exact: bool) -> FvsResult {
    nodes.sort_unstable();
    let order = topological_order(g, &mask_of(g.n_nodes(), &nodes)).expect("feedback vertex set leaves a DAG");
    let minimal = exact || is_minimal(g, &nodes);
    FvsResult { nodes, order, minimal, exact }
}

/// Minimum (exhaustive, `N <= 15`) or minimal (greedy) feedback vertex set.
///
/// The greedy pass repeatedly takes, inside the nontrivial strongly
/// connected components of what remains, the node with the largest product
/// of in- and out-degree there, after first taking every self-looped node.
/// A reinsertion pass then drops any node whose return keeps the remainder
/// acyclic.
pub fn fvs_find(g: &DiGraph, mode: FvsMode) -> Result<FvsResult> {
    let n = g.n_nodes();
    match mode {
        FvsMode::Exact => {
            if n > EXACT_MAX {
                return Err(Error::InvalidArgument(format!("exact search is limited to {EXACT_MAX} nodes, got {n}")));
            }
            for size in 0..=n {
                let mut pick: Vec<usize> = (0..size).collect();
                loop {
                    if is_fvs(g, &pick) {
                        return Ok(finish(g, pick, true));
                    }
                    // Next combination in lexicographic order.
                    let Some(i) = (0..size).rev().find(|&i| pick[i] < n - size + i) else { break };
                    pick[i] += 1;
                    for j in i + 1..size {
                        pick[j] = pick[j - 1] + 1;
                    }
                }
            }
            unreachable!("removing every node leaves an acyclic graph")
        }
        FvsMode::Heuristic => {
            let mut removed = vec![false; n];
            let mut chosen = Vec::new();
            for e in g.edges() {
                if e.src == e.dst && !removed[e.src] {
                    removed[e.src] = true;
                    chosen.push(e.src);
                }
            }
            loop {
                let keep: Vec<bool> = removed.iter().map(|r| !r).collect();
                let (sub, map) = g.induced_subgraph(&keep);
                let scc = scc_decompose(&sub);
                let mut best: Option<(usize, usize)> = None;
                for members in scc.members.iter().filter(|m| m.len() > 1) {
                    for &v in members {
                        let c = scc.component[v];
                        let din = sub.in_neighbors(v).iter().filter(|&&w| scc.component[w] == c).count();
                        let dout = sub.out_neighbors(v).iter().filter(|&&w| scc.component[w] == c).count();
                        let score = din * dout;
                        if best.is_none_or(|(s, b)| score > s || (score == s && map[v] < b)) {
                            best = Some((score, map[v]));
                        }
                    }
                }
                match best {
                    None => break,
                    Some((_, v)) => {
                        removed[v] = true;
                        chosen.push(v);
                    }
                }
            }
            for &v in chosen.clone().iter().rev() {
                removed[v] = false;
                if topological_order(g, &removed).is_none() {
                    removed[v] = true;
                } else {
                    chosen.retain(|&w| w != v);
                }
            }
            let mut res = finish(g, chosen, false);
            res.minimal = true;
            debug_assert!(is_minimal(g, &res.nodes));
            Ok(res)
        }
    }
}

/// Prescribed tracks for the clamped nodes plus the point of the target
/// attractor reached at the final sample time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClampTarget {
    pub t: Vec<f64>,
    pub tracks: BTreeMap<usize, Vec<f64>>,
    pub attractor: Vec<f64>,
}

impl ClampTarget {
    /// Samples a full trajectory of the free system started on the target
    /// attractor.
    pub fn from_orbit(sys: &OdeSystem, start: &[f64], t: &[f64], clamped: &[usize]) -> Result<Self> {
        let states = integrate(|t, x, d| sys.eval_into(t, x, &[], d), t[0], start, t, Tolerances::default())?;
        let tracks = clamped.iter().map(|&i| (i, states.iter().map(|s| s[i]).collect())).collect();
        Ok(Self { t: t.to_vec(), tracks, attractor: states.last().expect("nonempty grid").clone() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClampTrace {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub terminal_distance: f64,
}

/// Integrates `sys` from `x0` while the nodes in `clamped` follow their
/// prescribed tracks: equal to the samples at sample times and linear in
/// between.
pub fn fvs_clamp(sys: &OdeSystem, clamped: &[usize], target: &ClampTarget, x0: &[f64]) -> Result<ClampTrace> {
    let n = sys.dim;
    if x0.len() != n || target.attractor.len() != n {
        return Err(Error::DimensionMismatch(format!("states must have {n} entries")));
    }
    for &c in clamped {
        match target.tracks.get(&c) {
            Some(tr) if tr.len() == target.t.len() && c < n => {}
            _ => return Err(Error::MissingTrajectory(c)),
        }
    }
    let mut x = x0.to_vec();
    for &c in clamped {
        x[c] = target.tracks[&c][0];
    }
    let mut tr = ClampTrace { t: vec![target.t[0]], x: vec![x.clone()], terminal_distance: 0.0 };
    for k in 1..target.t.len() {
        let (t0, t1) = (target.t[k - 1], target.t[k]);
        let slopes: Vec<(usize, f64)> =
            clamped.iter().map(|&c| (c, (target.tracks[&c][k] - target.tracks[&c][k - 1]) / (t1 - t0))).collect();
        x = integrate(
            |t, x, d| {
                sys.eval_into(t, x, &[], d);
                for &(c, s) in &slopes {
                    d[c] = s;
                }
            },
            t0,
            &x,
            &[t1],
            Tolerances::default(),
        )?
        .remove(0);
        for &c in clamped {
            x[c] = target.tracks[&c][k];
        }
        tr.t.push(t1);
        tr.x.push(x.clone());
    }
    tr.terminal_distance = distance(&x, &target.attractor);
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{directed_cycle, directed_path, gnp_directed};
    use crate::ode::{find_attractors, time_grid, toggle_switch};
    use std::sync::Arc;

    #[test]
    fn cycles_and_dags() {
        let c = fvs_find(&directed_cycle(5), FvsMode::Exact).unwrap();
        assert_eq!(c.nodes.len(), 1);
        assert!(fvs_find(&directed_path(5), FvsMode::Heuristic).unwrap().nodes.is_empty());
        assert!(fvs_find(&directed_path(5), FvsMode::Exact).unwrap().nodes.is_empty());
        let looped = DiGraph::from_edges(2, &[(0, 0), (0, 1)]).unwrap();
        assert_eq!(fvs_find(&looped, FvsMode::Heuristic).unwrap().nodes, vec![0]);
        assert!(fvs_find(&DiGraph::with_nodes(16), FvsMode::Exact).is_err());
    }

    #[test]
    fn heuristic_close_to_exact() {
        for seed in 0..60 {
            let n = 4 + (seed % 9) as usize;
            let g = gnp_directed(n, 0.3, seed % 3 == 0, seed);
            let ex = fvs_find(&g, FvsMode::Exact).unwrap();
            let he = fvs_find(&g, FvsMode::Heuristic).unwrap();
            assert!(is_fvs(&g, &he.nodes) && is_fvs(&g, &ex.nodes));
            assert!(is_minimal(&g, &he.nodes));
            assert!(he.nodes.len() <= ex.nodes.len() + 2, "seed {seed}");
            assert!(he.nodes.len() >= ex.nodes.len());
            let removed = mask_of(n, &he.nodes);
            assert_eq!(he.order.len(), removed.iter().filter(|r| !**r).count());
        }
    }

    fn toggle_states() -> (OdeSystem, Vec<f64>, Vec<f64>) {
        let sys = toggle_switch(3.0, 2.0);
        let starts = vec![vec![3.0, 0.1], vec![0.1, 3.0]];
        let a = find_attractors(&sys, &starts, 80.0, 1e-6).unwrap();
        (sys, a[0].0.clone(), a[1].0.clone())
    }

    #[test]
    fn clamping_one_gene_switches_attractor() {
        let (sys, s1, s3) = toggle_states();
        assert!(s1[0] > s1[1] && s3[0] < s3[1]);
        let g = DiGraph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        let f = fvs_find(&g, FvsMode::Exact).unwrap();
        assert_eq!(f.nodes, vec![0]);
        let t = time_grid(30.0, 300);
        let target = ClampTarget::from_orbit(&sys, &s3, &t, &f.nodes).unwrap();
        let tr = fvs_clamp(&sys, &f.nodes, &target, &s1).unwrap();
        assert!(tr.terminal_distance < 1e-3, "{}", tr.terminal_distance);
        for (k, x) in tr.x.iter().enumerate() {
            assert_eq!(x[0].to_bits(), target.tracks[&0][k].to_bits());
        }
    }

    #[test]
    fn empty_clamp_stays_put() {
        let (sys, s1, _) = toggle_states();
        let t = time_grid(30.0, 30);
        let target = ClampTarget::from_orbit(&sys, &s1, &t, &[]).unwrap();
        let tr = fvs_clamp(&sys, &[], &target, &s1).unwrap();
        assert!(tr.terminal_distance < 1e-6);
    }

    #[test]
    fn non_fvs_clamp_fails_somewhere() {
        // Two independent toggles; clamping one gene of the first leaves the
        // second cycle free.
        let one = toggle_switch(3.0, 2.0);
        let sys = OdeSystem::new(
            "double-toggle",
            4,
            vec![],
            Arc::new(move |t, x, d| {
                one.eval_into(t, &x[..2], &[], &mut d[..2]);
                one.eval_into(t, &x[2..], &[], &mut d[2..]);
            }),
        );
        let g = DiGraph::from_edges(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        assert!(!is_fvs(&g, &[0]));
        let (_, s1, s3) = toggle_states();
        let goal = [s3.clone(), s3.clone()].concat();
        let t = time_grid(30.0, 300);
        let target = ClampTarget::from_orbit(&sys, &goal, &t, &[0]).unwrap();
        let failures = [[s1.clone(), s1.clone()].concat(), [s1.clone(), s3.clone()].concat()]
            .iter()
            .filter(|x0| fvs_clamp(&sys, &[0], &target, x0).unwrap().terminal_distance > 1e-3)
            .count();
        assert!(failures >= 1);
        let full = ClampTarget::from_orbit(&sys, &goal, &t, &[0, 2]).unwrap();
        let x0 = [s1.clone(), s1].concat();
        assert!(fvs_clamp(&sys, &[0, 2], &full, &x0).unwrap().terminal_distance < 1e-3);
        assert_eq!(fvs_clamp(&sys, &[1], &full, &x0), Err(Error::MissingTrajectory(1)));
    }
}
