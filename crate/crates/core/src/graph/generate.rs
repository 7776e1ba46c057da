//! Random and deterministic graph generators used by the analyses,
//! examples and validation suites. All take an explicit seed.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DiGraph, UnGraph};
use crate::error::{Error, Result};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Directed Erdős–Rényi graph with `round(mean_degree * n / 2)` distinct
/// edges and no self-loops. `mean_degree` counts in- plus out-degree, so each
/// direction is Poisson with mean `mean_degree / 2` for large `n`.
pub fn erdos_renyi_directed(n: usize, mean_degree: f64, seed: u64) -> DiGraph {
    let mut r = rng(seed);
    let max_edges = n.saturating_mul(n.saturating_sub(1));
    let l = ((mean_degree * n as f64 / 2.0).round() as usize).min(max_edges);
    let mut seen = HashSet::with_capacity(l);
    let mut edges = Vec::with_capacity(l);
    while edges.len() < l {
        let s = r.random_range(0..n);
        let d = r.random_range(0..n);
        if s != d && seen.insert((s, d)) {
            edges.push((s, d));
        }
    }
    DiGraph::from_edges(n, &edges).expect("distinct edges")
}

/// Undirected Erdős–Rényi graph with `round(mean_degree * n / 2)` edges.
pub fn erdos_renyi_undirected(n: usize, mean_degree: f64, seed: u64) -> UnGraph {
    let mut r = rng(seed);
    let max_edges = n * n.saturating_sub(1) / 2;
    let l = ((mean_degree * n as f64 / 2.0).round() as usize).min(max_edges);
    let mut seen = HashSet::with_capacity(l);
    let mut edges = Vec::with_capacity(l);
    while edges.len() < l {
        let a = r.random_range(0..n);
        let b = r.random_range(0..n);
        if a != b && seen.insert((a.min(b), a.max(b))) {
            edges.push((a, b));
        }
    }
    UnGraph::from_edges(n, &edges).expect("distinct edges")
}

/// Each ordered pair (including self-loops when `loops`) present with
/// probability `p`. Used for small exhaustive-style validation.
pub fn gnp_directed(n: usize, p: f64, loops: bool, seed: u64) -> DiGraph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for s in 0..n {
        for d in 0..n {
            if (s != d || loops) && r.random::<f64>() < p {
                edges.push((s, d));
            }
        }
    }
    DiGraph::from_edges(n, &edges).expect("distinct edges")
}

pub fn gnp_undirected(n: usize, p: f64, seed: u64) -> UnGraph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.random::<f64>() < p {
                edges.push((a, b));
            }
        }
    }
    UnGraph::from_edges(n, &edges).expect("distinct edges")
}

/// Barabási–Albert preferential attachment: start from a clique on `m + 1`
/// nodes, every new node attaches `m` distinct edges. Mean degree ≈ `2m`.
pub fn barabasi_albert(n: usize, m: usize, seed: u64) -> UnGraph {
    assert!(m >= 1 && n > m, "need n > m >= 1");
    let mut r = rng(seed);
    let mut edges = Vec::new();
    let mut targets: Vec<usize> = Vec::new();
    for a in 0..=m {
        for b in a + 1..=m {
            edges.push((a, b));
            targets.push(a);
            targets.push(b);
        }
    }
    for v in m + 1..n {
        let mut chosen = Vec::with_capacity(m);
        while chosen.len() < m {
            let t = targets[r.random_range(0..targets.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((t, v));
            targets.push(t);
            targets.push(v);
        }
    }
    UnGraph::from_edges(n, &edges).expect("distinct edges")
}

/// Directed static-model scale-free graph: node `i` has fitness
/// `(i + 1)^(-1/(gamma - 1))`; `round(mean_degree * n / 2)` edges are drawn
/// with tail and head chosen proportionally to fitness, rejecting
/// self-loops and repeats.
pub fn static_model_directed(n: usize, mean_degree: f64, gamma: f64, seed: u64) -> DiGraph {
    assert!(gamma > 2.0, "static model needs gamma > 2");
    let alpha = 1.0 / (gamma - 1.0);
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    for i in 0..n {
        acc += ((i + 1) as f64).powf(-alpha);
        cumulative.push(acc);
    }
    let mut r = rng(seed);
    let pick = |r: &mut ChaCha8Rng| {
        let x = r.random::<f64>() * acc;
        cumulative.partition_point(|&c| c < x).min(n - 1)
    };
    let l = (mean_degree * n as f64 / 2.0).round() as usize;
    let mut seen = HashSet::with_capacity(l);
    let mut edges = Vec::with_capacity(l);
    let mut attempts = 0usize;
    while edges.len() < l && attempts < 1000 * l.max(1) {
        attempts += 1;
        let s = pick(&mut r);
        let d = pick(&mut r);
        if s != d && seen.insert((s, d)) {
            edges.push((s, d));
        }
    }
    DiGraph::from_edges(n, &edges).expect("distinct edges")
}

/// Directed configuration model: in- and out-stubs paired uniformly at
/// random. A stub pair forming a self-loop or repeated edge has its head
/// redrawn by swapping with another stub, up to 100 attempts per pair.
pub fn configuration_model_directed(
    out_degrees: &[usize],
    in_degrees: &[usize],
    seed: u64,
) -> Result<DiGraph> {
    let n = out_degrees.len();
    if in_degrees.len() != n {
        return Err(Error::DimensionMismatch("degree sequences differ in length".into()));
    }
    let total_out: usize = out_degrees.iter().sum();
    let total_in: usize = in_degrees.iter().sum();
    if total_out != total_in {
        return Err(Error::InvalidArgument(format!(
            "stub counts differ: {total_out} out vs {total_in} in"
        )));
    }
    let mut r = rng(seed);
    let tails: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, out_degrees[i])).collect();
    let mut heads: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, in_degrees[i])).collect();
    shuffle(&mut heads, &mut r);
    const ATTEMPTS: usize = 100;
    let l = tails.len();
    let mut seen: HashSet<(usize, usize)> = HashSet::with_capacity(l);
    for k in 0..l {
        let mut tries = 0;
        while tails[k] == heads[k] || seen.contains(&(tails[k], heads[k])) {
            if tries == ATTEMPTS {
                return Err(Error::RejectionFailure { attempts: ATTEMPTS });
            }
            tries += 1;
            let j = r.random_range(0..l);
            if j == k {
                continue;
            }
            let mine = (tails[k], heads[j]);
            if mine.0 == mine.1 || seen.contains(&mine) {
                continue;
            }
            if j < k {
                // Swapping with a placed pair must keep that pair valid too.
                let theirs = (tails[j], heads[k]);
                if theirs.0 == theirs.1 || theirs == mine || seen.contains(&theirs) {
                    continue;
                }
                seen.remove(&(tails[j], heads[j]));
                seen.insert(theirs);
            }
            heads.swap(k, j);
        }
        seen.insert((tails[k], heads[k]));
    }
    let edges: Vec<(usize, usize)> = tails.into_iter().zip(heads).collect();
    DiGraph::from_edges(n, &edges)
}

pub fn shuffle<T>(v: &mut [T], r: &mut impl Rng) {
    for i in (1..v.len()).rev() {
        let j = r.random_range(0..=i);
        v.swap(i, j);
    }
}

/// Poisson sample by inversion (fine for the small means used here).
pub fn poisson(mean: f64, r: &mut impl Rng) -> usize {
    let l = (-mean).exp();
    let mut k = 0usize;
    let mut p = r.random::<f64>();
    while p > l {
        k += 1;
        p *= r.random::<f64>();
    }
    k
}

/// Undirected path `0 - 1 - ... - (n-1)`.
pub fn chain(n: usize) -> UnGraph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    UnGraph::from_edges(n, &edges).expect("simple")
}

pub fn ring(n: usize) -> UnGraph {
    assert!(n >= 3);
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    UnGraph::from_edges(n, &edges).expect("simple")
}

/// Star with hub 0.
pub fn star(n: usize) -> UnGraph {
    let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
    UnGraph::from_edges(n, &edges).expect("simple")
}

pub fn complete(n: usize) -> UnGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            edges.push((a, b));
        }
    }
    UnGraph::from_edges(n, &edges).expect("simple")
}

/// Directed path `0 -> 1 -> ... -> (n-1)`.
pub fn directed_path(n: usize) -> DiGraph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    DiGraph::from_edges(n, &edges).expect("simple")
}

pub fn directed_cycle(n: usize) -> DiGraph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    DiGraph::from_edges(n, &edges).expect("simple")
}
