//! Sensor placement: inference diagrams of reaction networks, root-SCC
//! sensor sets, target observability, dominating sets for power-grid style
//! observation, and a linear state observer.

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::DenseSystem;
use crate::graph::generate::{rng, shuffle};
use crate::graph::{connected_components, reachable_from, scc_decompose, DiGraph, UnGraph};
use crate::structural::{min_driver_set, DriverReport};

/// One elementary reaction `sum a_i S_i -> sum b_i S_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reaction {
    pub label: String,
    pub rate: f64,
    /// `(species index, coefficient)` consumed.
    pub reactants: Vec<(usize, u32)>,
    /// `(species index, coefficient)` produced.
    pub products: Vec<(usize, u32)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ReactionSystem {
    pub species: Vec<String>,
    pub reactions: Vec<Reaction>,
}

impl ReactionSystem {
    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    fn intern(&mut self, name: &str) -> usize {
        self.species_index(name).unwrap_or_else(|| {
            self.species.push(name.to_string());
            self.species.len() - 1
        })
    }

    /// `Gamma[(i, j)]`: net change of species `i` in reaction `j`.
    pub fn stoichiometry(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.species.len(), self.reactions.len());
        for (j, r) in self.reactions.iter().enumerate() {
            for &(i, a) in &r.reactants {
                g[(i, j)] -= a as f64;
            }
            for &(i, b) in &r.products {
                g[(i, j)] += b as f64;
            }
        }
        g
    }

    /// Mass-action right-hand side `dx_i/dt = sum_j Gamma_ij k_j prod x^a`.
    pub fn rhs(&self, x: &[f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.species.len()];
        for r in &self.reactions {
            let v = r.reactants.iter().fold(r.rate, |acc, &(i, a)| acc * x[i].powi(a as i32));
            for &(i, a) in &r.reactants {
                dx[i] -= a as f64 * v;
            }
            for &(i, b) in &r.products {
                dx[i] += b as f64 * v;
            }
        }
        dx
    }
}

/// Parses reaction lines `label[=rate]: a A + b B -> c C`.
///
/// `<->` adds the reverse reaction too. Its label is the second entry of a
/// `k1,k2` label pair, or the first label with `_rev` appended, and it takes
/// the same rate unless `=r1,r2` is given. `0` denotes an empty side. A line
/// `species: A B C` fixes the species order; otherwise species are numbered
/// by first appearance. `#` starts a comment.
pub fn parse_reactions(text: &str) -> Result<ReactionSystem> {
    let mut sys = ReactionSystem::default();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: &str| Error::Parse { line: line_no, message: m.to_string() };
        let (head, body) = line.split_once(':').ok_or_else(|| err("expected `label: reaction`"))?;
        if head.trim() == "species" {
            for s in body.split_whitespace() {
                sys.intern(s);
            }
            continue;
        }
        let (labels, rates) = match head.split_once('=') {
            Some((l, r)) => (l, Some(r)),
            None => (head, None),
        };
        let labels: Vec<String> = labels.split(',').map(|s| s.trim().to_string()).collect();
        if labels.iter().any(String::is_empty) || labels.len() > 2 {
            return Err(err("expected one or two reaction labels"));
        }
        let rates: Vec<f64> = match rates {
            Some(r) => r
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| err(&format!("rate {t:?}: {e}"))))
                .collect::<Result<_>>()?,
            None => vec![1.0],
        };
        let (arrow, reversible) = if body.contains("<->") { ("<->", true) } else { ("->", false) };
        let (lhs, rhs) = body.split_once(arrow).ok_or_else(|| err("missing `->` or `<->`"))?;
        if rhs.contains("->") {
            return Err(err("more than one arrow"));
        }
        let left = parse_side(&mut sys, lhs).map_err(|m| err(&m))?;
        let right = parse_side(&mut sys, rhs).map_err(|m| err(&m))?;
        if !reversible && (labels.len() > 1 || rates.len() > 1) {
            return Err(err("two labels or rates given for an irreversible reaction"));
        }
        sys.reactions.push(Reaction {
            label: labels[0].clone(),
            rate: rates[0],
            reactants: left.clone(),
            products: right.clone(),
        });
        if reversible {
            sys.reactions.push(Reaction {
                label: labels.get(1).cloned().unwrap_or_else(|| format!("{}_rev", labels[0])),
                rate: *rates.get(1).unwrap_or(&rates[0]),
                reactants: right,
                products: left,
            });
        }
    }
    Ok(sys)
}

fn parse_side(sys: &mut ReactionSystem, side: &str) -> std::result::Result<Vec<(usize, u32)>, String> {
    let side = side.trim();
    if side == "0" || side.is_empty() {
        return Ok(vec![]);
    }
    let mut terms: Vec<(usize, u32)> = Vec::new();
    for term in side.split('+') {
        let parts: Vec<&str> = term.split_whitespace().collect();
        let (coef, name) = match parts.as_slice() {
            [name] => {
                // Allow a glued coefficient such as `2A`.
                let digits: String = name.chars().take_while(char::is_ascii_digit).collect();
                if digits.is_empty() || digits.len() == name.len() {
                    (1, *name)
                } else {
                    (digits.parse::<u32>().map_err(|e| e.to_string())?, &name[digits.len()..])
                }
            }
            [c, name] => (c.parse::<u32>().map_err(|e| format!("coefficient {c:?}: {e}"))?, *name),
            _ => return Err(format!("cannot read term {term:?}")),
        };
        if coef == 0 {
            return Err(format!("zero coefficient in {term:?}"));
        }
        let i = sys.intern(name);
        match terms.iter_mut().find(|t| t.0 == i) {
            Some(t) => t.1 += coef,
            None => terms.push((i, coef)),
        }
    }
    Ok(terms)
}

/// Inference diagram of a mass-action system: `i -> j` when `x_j` appears
/// in the balance equation of `x_i`, i.e. `x_j` is a reactant of some
/// reaction that changes `x_i`. Node labels are species names.
pub fn inference_diagram(sys: &ReactionSystem) -> DiGraph {
    let mut g = DiGraph::new();
    for s in &sys.species {
        g.add_node(s);
    }
    let gamma = sys.stoichiometry();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (j, r) in sys.reactions.iter().enumerate() {
        for i in 0..sys.species.len() {
            if gamma[(i, j)] != 0.0 {
                for &(l, _) in &r.reactants {
                    edges.insert((i, l));
                }
            }
        }
    }
    for (i, l) in edges {
        g.add_edge(i, l, 1.0).expect("deduplicated");
    }
    g
}

/// Inference diagram from a Jacobian sparsity pattern: `i -> j` when
/// `J[(i, j)] != 0`.
pub fn inference_from_sparsity(j: &DMatrix<f64>) -> Result<DiGraph> {
    let n = j.nrows();
    if j.ncols() != n {
        return Err(Error::DimensionMismatch(format!("Jacobian is {}x{}", n, j.ncols())));
    }
    let mut g = DiGraph::with_nodes(n);
    for i in 0..n {
        for k in 0..n {
            if j[(i, k)] != 0.0 {
                g.add_edge(i, k, 1.0).expect("one entry per pair");
            }
        }
    }
    Ok(g)
}

/// The system digraph used for feedback-vertex-set control is the
/// transpose of the inference diagram.
pub fn system_digraph(inference: &DiGraph) -> DiGraph {
    inference.transpose()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorReport {
    /// Members of each root SCC, ascending, ordered by lowest member.
    pub root_sccs: Vec<Vec<usize>>,
    pub n_sensors: usize,
    /// Lowest-index member of each root SCC.
    pub sensors: Vec<usize>,
    /// Members of size-one root SCCs; these are always sensors.
    pub pure_products: Vec<usize>,
    /// Number of minimal sensor sets, the product of root-SCC sizes
    /// (saturating).
    pub multiplicity: u64,
}

/// Necessary sensors: one node from each root SCC of the inference diagram.
pub fn min_sensors(g_inf: &DiGraph) -> SensorReport {
    let scc = scc_decompose(g_inf);
    let root_sccs: Vec<Vec<usize>> = scc.roots().into_iter().map(|c| scc.members[c].clone()).collect();
    SensorReport {
        n_sensors: root_sccs.len(),
        sensors: root_sccs.iter().map(|m| m[0]).collect(),
        pure_products: root_sccs.iter().filter(|m| m.len() == 1).map(|m| m[0]).collect(),
        multiplicity: root_sccs.iter().fold(1u64, |acc, m| acc.saturating_mul(m.len() as u64)),
        root_sccs,
    }
}

/// True when `sensors` hits every root SCC of the inference diagram.
pub fn is_sensor_set(g_inf: &DiGraph, sensors: &[usize]) -> bool {
    let scc = scc_decompose(g_inf);
    scc.roots().into_iter().all(|c| scc.members[c].iter().any(|v| sensors.contains(v)))
}

/// Structural minimum sensors of a state digraph from the dual
/// controllability problem: the drivers of the transposed graph.
pub fn sensors_via_duality(g: &DiGraph) -> DriverReport {
    min_driver_set(&g.transpose())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSensor {
    pub sensor: usize,
    /// Total size of the SCCs the sensor reaches.
    pub cost: usize,
}

/// Cheapest single sensor that reaches every target. Targets themselves are
/// not candidates, so the sensor infers the targets from another node.
pub fn target_sensor(g_inf: &DiGraph, targets: &[usize]) -> Result<TargetSensor> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument("no target nodes".into()));
    }
    let n = g_inf.n_nodes();
    if let Some(&t) = targets.iter().find(|&&t| t >= n) {
        return Err(Error::UnknownNode(t.to_string()));
    }
    let scc = scc_decompose(g_inf);
    // Nodes with a path to every target: intersect reverse reachability.
    let rev = g_inf.transpose();
    let mut reaches_all = vec![true; n];
    for &t in targets {
        let r = reachable_from(&rev, &[t]);
        reaches_all.iter_mut().zip(&r).for_each(|(a, &b)| *a &= b);
    }
    let mut best: Option<TargetSensor> = None;
    for v in (0..n).filter(|&v| reaches_all[v] && !targets.contains(&v)) {
        let reach = reachable_from(g_inf, &[v]);
        let mut seen = vec![false; scc.n_components()];
        let mut cost = 0;
        for w in (0..n).filter(|&w| reach[w]) {
            let c = scc.component[w];
            if !seen[c] {
                seen[c] = true;
                cost += scc.members[c].len();
            }
        }
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(TargetSensor { sensor: v, cost });
        }
    }
    best.ok_or(Error::NoPathToTarget)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominatingSet {
    /// Ascending.
    pub nodes: Vec<usize>,
    /// True when leaf removal alone finished the graph, which makes the set
    /// a minimum dominating set.
    pub exact: bool,
}

/// Minimum dominating set by generalised leaf removal.
///
/// Rules, applied until none fires: an isolated unobserved node is
/// occupied; an unobserved leaf has its neighbour occupied, which observes
/// the neighbour's neighbourhood and removes it; edges between observed
/// nodes are dropped; an observed node with a single (necessarily
/// unobserved) neighbour loses that edge; isolated observed nodes leave.
/// If a core survives, the node covering most unobserved nodes (lowest
/// index on ties) is occupied and leaf removal resumes.
pub fn mds_solve(g: &UnGraph) -> DominatingSet {
    let n = g.n_nodes();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).iter().copied().collect()).collect();
    let mut observed = vec![false; n];
    let mut alive = vec![true; n];
    let mut occupied = Vec::new();
    let mut exact = true;
    let mut work: BTreeSet<usize> = (0..n).collect();

    fn detach(adj: &mut [BTreeSet<usize>], v: usize, work: &mut BTreeSet<usize>) {
        let nb: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for w in nb {
            adj[w].remove(&v);
            work.insert(w);
        }
    }

    fn occupy(
        v: usize,
        adj: &mut [BTreeSet<usize>],
        observed: &mut [bool],
        alive: &mut [bool],
        occupied: &mut Vec<usize>,
        work: &mut BTreeSet<usize>,
    ) {
        occupied.push(v);
        observed[v] = true;
        alive[v] = false;
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        detach(adj, v, work);
        for w in nb {
            if observed[w] {
                continue;
            }
            observed[w] = true;
            // Edges between two observed nodes carry no information.
            let obs_nb: Vec<usize> = adj[w].iter().copied().filter(|&x| observed[x]).collect();
            for x in obs_nb {
                adj[w].remove(&x);
                adj[x].remove(&w);
                work.insert(x);
            }
            work.insert(w);
        }
    }

    loop {
        while let Some(v) = work.pop_first() {
            if !alive[v] {
                continue;
            }
            match (observed[v], adj[v].len()) {
                (false, 0) => occupy(v, &mut adj, &mut observed, &mut alive, &mut occupied, &mut work),
                (true, 0) => alive[v] = false,
                (false, 1) => {
                    let j = *adj[v].first().expect("one neighbour");
                    occupy(j, &mut adj, &mut observed, &mut alive, &mut occupied, &mut work);
                }
                (true, 1) => {
                    let j = *adj[v].first().expect("one neighbour");
                    adj[v].remove(&j);
                    adj[j].remove(&v);
                    work.insert(j);
                    alive[v] = false;
                }
                _ => {}
            }
        }
        let pick = (0..n)
            .filter(|&v| alive[v])
            .map(|v| {
                let gain = usize::from(!observed[v]) + adj[v].iter().filter(|&&w| !observed[w]).count();
                (gain, std::cmp::Reverse(v))
            })
            .max();
        match pick {
            None => break,
            Some((_, std::cmp::Reverse(v))) => {
                exact = false;
                occupy(v, &mut adj, &mut observed, &mut alive, &mut occupied, &mut work);
            }
        }
    }
    occupied.sort_unstable();
    DominatingSet { nodes: occupied, exact }
}

/// Every node is in `set` or adjacent to it.
pub fn is_dominating(g: &UnGraph, set: &[usize]) -> bool {
    let mut covered = vec![false; g.n_nodes()];
    for &v in set {
        covered[v] = true;
        for &w in g.neighbors(v) {
            covered[w] = true;
        }
    }
    covered.into_iter().all(|c| c)
}

/// Largest connected observed component when the first `k` nodes of
/// `order` carry measurement units, as a fraction of all nodes.
fn observed_fraction(g: &UnGraph, order: &[usize], k: usize) -> f64 {
    let n = g.n_nodes();
    if n == 0 {
        return 0.0;
    }
    let mut observed = vec![false; n];
    for &v in &order[..k] {
        observed[v] = true;
        for &w in g.neighbors(v) {
            observed[w] = true;
        }
    }
    let largest = connected_components(g, &observed).iter().map(Vec::len).max().unwrap_or(0);
    largest as f64 / n as f64
}

/// Mean fraction of the largest observable component with `floor(phi N)`
/// uniformly placed units, over `trials` placements.
pub fn observability_transition(g: &UnGraph, phi: f64, trials: usize, seed: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::InvalidArgument(format!("phi must lie in [0, 1], got {phi}")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let n = g.n_nodes();
    let k = (phi * n as f64).floor() as usize;
    // Collected before summing so the result does not depend on scheduling.
    let fractions: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut order: Vec<usize> = (0..n).collect();
            shuffle(&mut order, &mut rng(seed.wrapping_add(t)));
            observed_fraction(g, &order, k)
        })
        .collect();
    Ok(fractions.iter().sum::<f64>() / trials as f64)
}

/// Smallest `phi` at which the mean largest observable component reaches
/// one half. Each trial fixes one random node order and places units on
/// its prefix, so the curve is monotone and bisection on `phi` is exact up
/// to `1/N`.
pub fn observability_threshold(g: &UnGraph, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let n = g.n_nodes();
    let orders: Vec<Vec<usize>> = (0..trials as u64)
        .map(|t| {
            let mut order: Vec<usize> = (0..n).collect();
            shuffle(&mut order, &mut rng(seed.wrapping_add(t)));
            order
        })
        .collect();
    let mean_at = |k: usize| {
        let f: Vec<f64> = orders.par_iter().map(|o| observed_fraction(g, o, k)).collect();
        f.iter().sum::<f64>() / trials as f64
    };
    let (mut lo, mut hi) = (0usize, n);
    if mean_at(hi) < 0.5 {
        return Ok(1.0);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if mean_at(mid) >= 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObserverTrace {
    pub t: Vec<f64>,
    /// `|x(t) - z(t)|`.
    pub error: Vec<f64>,
}

/// Co-simulates `x' = A x + B u` and `z' = A z + L (y - C z) + B u` with
/// `y = C x`, using RK4 on `n_steps` uniform steps.
pub fn luenberger_observe(
    sys: &DenseSystem,
    gain: &DMatrix<f64>,
    x0: &DVector<f64>,
    z0: &DVector<f64>,
    input: impl Fn(f64) -> DVector<f64>,
    horizon: f64,
    n_steps: usize,
) -> Result<ObserverTrace> {
    let n = sys.n();
    let c = sys.c.as_ref().ok_or_else(|| Error::DimensionMismatch("system has no output matrix".into()))?;
    if gain.nrows() != n || gain.ncols() != c.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "L is {}x{}, expected {}x{}",
            gain.nrows(),
            gain.ncols(),
            n,
            c.nrows()
        )));
    }
    if x0.len() != n || z0.len() != n {
        return Err(Error::DimensionMismatch("initial states must have N entries".into()));
    }
    if n_steps == 0 || !(horizon > 0.0) {
        return Err(Error::InvalidArgument("need a positive horizon and step count".into()));
    }
    let m = sys.b.ncols();
    let rhs = |t: f64, s: &DVector<f64>| -> DVector<f64> {
        let u = input(t);
        let bu = if m == 0 { DVector::zeros(n) } else { &sys.b * u };
        let x = s.rows(0, n);
        let z = s.rows(n, n);
        let mut d = DVector::zeros(2 * n);
        d.rows_mut(0, n).copy_from(&(&sys.a * x + &bu));
        d.rows_mut(n, n).copy_from(&(&sys.a * z + gain * (c * x - c * z) + &bu));
        d
    };
    let mut s = DVector::zeros(2 * n);
    s.rows_mut(0, n).copy_from(x0);
    s.rows_mut(n, n).copy_from(z0);
    let h = horizon / n_steps as f64;
    let mut trace = ObserverTrace { t: Vec::with_capacity(n_steps + 1), error: Vec::with_capacity(n_steps + 1) };
    for k in 0..=n_steps {
        let t = k as f64 * h;
        trace.t.push(t);
        trace.error.push((s.rows(0, n) - s.rows(n, n)).norm());
        if k < n_steps {
            let k1 = rhs(t, &s);
            let k2 = rhs(t + h / 2.0, &(&s + &k1 * (h / 2.0)));
            let k3 = rhs(t + h / 2.0, &(&s + &k2 * (h / 2.0)));
            let k4 = rhs(t + h, &(&s + &k3 * h));
            s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
    }
    Ok(trace)
}

/// Maps species or node labels to indices, failing on unknown names.
pub fn resolve_labels(labels: &[String], names: &[&str]) -> Result<Vec<usize>> {
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    names
        .iter()
        .map(|n| index.get(n).copied().ok_or_else(|| Error::UnknownNode(n.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{complete, directed_path, gnp_directed, gnp_undirected, star};

    /// Eleven species A..K (x1..x11) with three root SCCs of sizes 1, 2, 3.
    pub const ELEVEN_SPECIES: &str = "\
species: A B C D E F G H I J K
k1,k2: A + B <-> C
k3: C -> D + F
k4,k5: D <-> E
k6,k7: G + H <-> I
k8: A -> J
k9: J + K -> G
";

    #[test]
    fn parses_reactions() {
        let s = parse_reactions(ELEVEN_SPECIES).unwrap();
        assert_eq!(s.species.len(), 11);
        assert_eq!(s.reactions.len(), 9);
        assert_eq!(s.reactions[1].label, "k2");
        assert_eq!(s.reactions[1].reactants, vec![(2, 1)]);
        let g = s.stoichiometry();
        assert_eq!((g.nrows(), g.ncols()), (11, 9));
        assert_eq!(g[(0, 0)], -1.0);
        let t = parse_reactions("k=2.5: 2A -> 0\nr: 3 B <-> A").unwrap();
        assert_eq!(t.reactions[0].rate, 2.5);
        assert_eq!(t.reactions[0].reactants, vec![(0, 2)]);
        assert_eq!(t.reactions[2].label, "r_rev");
        assert!(matches!(parse_reactions("k: A -> B -> C"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_reactions("\nA -> B"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn inference_of_single_conversion() {
        let s = parse_reactions("k: A -> B").unwrap();
        let g = inference_diagram(&s);
        assert!(g.has_edge(1, 0) && g.has_edge(0, 0));
        assert_eq!(g.n_edges(), 2);
        assert_eq!(min_sensors(&g).sensors, vec![1]);
    }

    #[test]
    fn reversible_pair_is_one_component() {
        let s = parse_reactions("k1,k2: A <-> B").unwrap();
        let r = min_sensors(&inference_diagram(&s));
        assert_eq!(r.root_sccs, vec![vec![0, 1]]);
    }

    #[test]
    fn inference_matches_numeric_jacobian_sparsity() {
        let s = parse_reactions(ELEVEN_SPECIES).unwrap();
        let g = inference_diagram(&s);
        let x: Vec<f64> = (0..11).map(|i| 0.3 + 0.17 * i as f64).collect();
        let f0 = s.rhs(&x);
        for j in 0..11 {
            let mut xp = x.clone();
            xp[j] += 1e-6;
            let f1 = s.rhs(&xp);
            for i in 0..11 {
                let dep = ((f1[i] - f0[i]) / 1e-6).abs() > 1e-6;
                assert_eq!(dep, g.has_edge(i, j), "d f_{i} / d x_{j}");
            }
        }
    }

    #[test]
    fn eleven_species_sensors() {
        let g = inference_diagram(&parse_reactions(ELEVEN_SPECIES).unwrap());
        let r = min_sensors(&g);
        let mut sizes: Vec<usize> = r.root_sccs.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 2, 3]);
        assert_eq!(r.n_sensors, 3);
        assert_eq!(r.multiplicity, 6);
        assert_eq!(r.sensors, vec![3, 5, 6]);
        assert_eq!(r.pure_products, vec![5]);
        assert!(is_sensor_set(&g, &[4, 5, 6]));
        assert!(!is_sensor_set(&g, &[0, 5, 6]));
    }

    #[test]
    fn multiplicity_recount() {
        for seed in 0..30 {
            let g = gnp_directed(7, 0.2, false, seed);
            let r = min_sensors(&g);
            // Count minimal sensor sets by brute force.
            let count = (0u32..(1 << 7))
                .filter(|m| m.count_ones() as usize == r.n_sensors)
                .filter(|m| is_sensor_set(&g, &(0..7).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>()))
                .count();
            assert_eq!(count as u64, r.multiplicity);
        }
    }

    #[test]
    fn trivial_sensor_sets() {
        assert_eq!(min_sensors(&crate::graph::generate::directed_cycle(4)).n_sensors, 1);
        assert_eq!(min_sensors(&DiGraph::with_nodes(5)).n_sensors, 5);
    }

    #[test]
    fn duality() {
        assert_eq!(sensors_via_duality(&directed_path(3)).drivers, vec![2]);
        for seed in 0..50 {
            let g = gnp_directed(9, 0.2, true, seed);
            assert_eq!(sensors_via_duality(&g).n_drivers, min_driver_set(&g.transpose()).n_drivers);
        }
        let sym = DiGraph::from_edges(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]).unwrap();
        assert_eq!(sensors_via_duality(&sym).n_drivers, min_driver_set(&sym).n_drivers);
    }

    #[test]
    fn target_sensors() {
        let g = inference_diagram(&parse_reactions(ELEVEN_SPECIES).unwrap());
        // E reaches {D, E}, C, A and B.
        let r = target_sensor(&g, &[3]).unwrap();
        assert_eq!(r, TargetSensor { sensor: 4, cost: 5 });
        // Target inside the size-3 component {G, H, I}.
        let r = target_sensor(&g, &[8]).unwrap();
        assert!([6, 7].contains(&r.sensor));
        let src = DiGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(target_sensor(&src, &[0]), Err(Error::NoPathToTarget));
        assert!(target_sensor(&src, &[]).is_err());
    }

    fn brute_mds(g: &UnGraph) -> usize {
        let n = g.n_nodes();
        (0..=n)
            .find(|&k| {
                (0u32..(1 << n))
                    .filter(|m| m.count_ones() as usize == k)
                    .any(|m| is_dominating(g, &(0..n).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>()))
            })
            .unwrap()
    }

    #[test]
    fn mds_examples() {
        assert_eq!(mds_solve(&star(6)).nodes, vec![0]);
        assert!(mds_solve(&star(6)).exact);
        let p3 = UnGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(mds_solve(&p3), DominatingSet { nodes: vec![1], exact: true });
        assert_eq!(mds_solve(&UnGraph::with_nodes(3)).nodes, vec![0, 1, 2]);
    }

    #[test]
    fn mds_exact_on_core_free_graphs() {
        let mut checked = 0;
        let mut seed = 0;
        while checked < 50 {
            seed += 1;
            let n = 6 + (seed % 11) as usize;
            let g = gnp_undirected(n, 1.6 / n as f64, seed);
            let r = mds_solve(&g);
            assert!(is_dominating(&g, &r.nodes));
            if r.exact {
                assert_eq!(r.nodes.len(), brute_mds(&g), "seed {seed}");
                checked += 1;
            }
        }
    }

    #[test]
    fn mds_on_cored_graphs_is_valid() {
        for seed in 0..20 {
            let g = gnp_undirected(12, 0.4, seed);
            let r = mds_solve(&g);
            assert!(is_dominating(&g, &r.nodes));
            assert!(r.nodes.len() >= brute_mds(&g));
        }
        let k5 = complete(5);
        assert_eq!(mds_solve(&k5).nodes.len(), 1);
    }

    #[test]
    fn transition_examples() {
        let k = complete(20);
        assert_eq!(observability_transition(&k, 1.0 / 20.0, 5, 0).unwrap(), 1.0);
        let e = UnGraph::with_nodes(10);
        assert!((observability_transition(&e, 0.5, 5, 0).unwrap() - 0.1).abs() < 1e-12);
        assert!(observability_transition(&e, 1.5, 5, 0).is_err());
    }

    #[test]
    fn adding_units_never_shrinks_component() {
        let g = gnp_undirected(300, 3.0 / 300.0, 2);
        let mut order: Vec<usize> = (0..300).collect();
        shuffle(&mut order, &mut rng(5));
        let mut prev = 0.0;
        for k in (0..=300).step_by(10) {
            let f = observed_fraction(&g, &order, k);
            assert!(f >= prev);
            prev = f;
        }
    }

    #[test]
    fn denser_graphs_need_fewer_units() {
        let sparse = crate::graph::generate::erdos_renyi_undirected(5000, 4.0, 1);
        let dense = crate::graph::generate::erdos_renyi_undirected(5000, 8.0, 1);
        let a = observability_threshold(&sparse, 5, 0).unwrap();
        let b = observability_threshold(&dense, 5, 0).unwrap();
        assert!(b < a, "{b} vs {a}");
    }

    fn observer_system(c: DMatrix<f64>) -> DenseSystem {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -0.5]);
        DenseSystem::new(a, DMatrix::from_row_slice(2, 1, &[0.0, 1.0]), Some(c)).unwrap()
    }

    #[test]
    fn observer_tracks_exactly_from_true_state() {
        let s = observer_system(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
        let l = DMatrix::from_row_slice(2, 1, &[1.5, 0.5]);
        let x0 = DVector::from_vec(vec![1.0, -1.0]);
        let tr = luenberger_observe(&s, &l, &x0, &x0, |t| DVector::from_element(1, t.sin()), 5.0, 500).unwrap();
        assert!(tr.error.iter().all(|e| *e < 1e-12));
    }

    #[test]
    fn observer_error_decays_at_placed_rate() {
        // A - L C = [[-1, 1], [0, -1]]: a double pole at -1, no oscillation.
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let s = DenseSystem::new(a, DMatrix::zeros(2, 0), Some(c)).unwrap();
        let l = DMatrix::zeros(2, 1);
        let tr = luenberger_observe(&s, &l, &DVector::from_vec(vec![0.0, 1.0]), &DVector::zeros(2), |_| DVector::zeros(0), 20.0, 2000).unwrap();
        // ||e(t)|| = e^-t sqrt(1 + t^2); strip the polynomial factor.
        let rate = |k: usize| (tr.error[k] / (1.0 + tr.t[k].powi(2)).sqrt()).ln();
        let slope = (rate(2000) - rate(1000)) / (tr.t[2000] - tr.t[1000]);
        assert!((slope + 1.0).abs() < 1e-3, "{slope}");
    }

    #[test]
    fn hidden_mode_keeps_error() {
        // Second state never reaches the output and does not decay.
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let s = DenseSystem::new(a, DMatrix::zeros(2, 0), Some(c)).unwrap();
        let l = DMatrix::from_row_slice(2, 1, &[3.0, 3.0]);
        let tr = luenberger_observe(&s, &l, &DVector::from_vec(vec![1.0, 1.0]), &DVector::zeros(2), |_| DVector::zeros(0), 30.0, 3000).unwrap();
        assert!(*tr.error.last().unwrap() > 1e-3);
        assert!(luenberger_observe(&s, &DMatrix::zeros(3, 1), &DVector::zeros(2), &DVector::zeros(2), |_| DVector::zeros(0), 1.0, 10).is_err());
    }
}
