//! Synchronizability of coupled oscillators, pinning control toward a
//! reference trajectory and flocking with leaders.

mod vicsek;

pub use vicsek::{
    consensus_run, order_parameter, vicsek_leader_run, vicsek_order_parameter, vicsek_step, LeaderTrace, OrderStats,
    VicsekParams, VicsekState,
};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::generate::rng;
use crate::graph::{DiGraph, UnGraph};
use crate::ode::{integrate, time_grid, OdeSystem, Tolerances};

const ROW_SUM_TOL: f64 = 1e-12;

fn assert_zero_rows(m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        let s: f64 = m.row(i).iter().sum();
        let scale = m.row(i).iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        assert!(s.abs() <= ROW_SUM_TOL * scale, "row {i} sums to {s}");
    }
}

/// Coupling matrix of an undirected graph: its Laplacian.
pub fn coupling_matrix(g: &UnGraph) -> DMatrix<f64> {
    let l = g.laplacian();
    assert_zero_rows(&l);
    l
}

/// Coupling matrix of a weighted digraph where an edge `j -> i` of weight
/// `w` lets node `j` drive node `i`: `g_ij = -w`, `g_ii = sum_j w_ji`.
pub fn coupling_matrix_directed(g: &DiGraph) -> DMatrix<f64> {
    let n = g.n_nodes();
    let mut m = DMatrix::zeros(n, n);
    for e in g.edges().iter().filter(|e| e.src != e.dst) {
        m[(e.dst, e.src)] -= e.weight;
        m[(e.dst, e.dst)] += e.weight;
    }
    assert_zero_rows(&m);
    m
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    m.nrows() == m.ncols() && (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

/// Eigenvalues sorted by real part (then imaginary part).
fn sorted_spectrum(m: &DMatrix<f64>) -> Vec<(f64, f64)> {
    let mut ev: Vec<(f64, f64)> = if is_symmetric(m) {
        m.clone().symmetric_eigenvalues().iter().map(|&v| (v, 0.0)).collect()
    } else {
        crate::exact::general_eigenvalues(m).iter().map(|c| (c.re, c.im)).collect()
    };
    ev.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    ev
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenRatio {
    /// Real part of the second-smallest eigenvalue.
    pub lambda2: f64,
    /// Real part of the largest eigenvalue.
    pub lambda_max: f64,
    pub ratio: f64,
}

/// `R = Re lambda_N / Re lambda_2` of a zero-row-sum coupling matrix;
/// smaller means easier to synchronize.
pub fn msf_eigenratio(coupling: &DMatrix<f64>) -> Result<EigenRatio> {
    let n = coupling.nrows();
    if n < 2 || coupling.ncols() != n {
        return Err(Error::DimensionMismatch(format!("coupling matrix must be square with N >= 2, got {}x{}", n, coupling.ncols())));
    }
    assert_zero_rows(coupling);
    let ev = sorted_spectrum(coupling);
    let (l2, ln) = (ev[1].0, ev[n - 1].0);
    if l2 <= 1e-10 * ln.abs().max(1.0) {
        return Err(Error::DisconnectedGraph(l2));
    }
    Ok(EigenRatio { lambda2: l2, lambda_max: ln, ratio: ln / l2 })
}

/// Coupling matrix, gain and pinned nodes of a pinning-controlled network.
#[derive(Debug, Clone, PartialEq)]
pub struct PinningConfig {
    pub sigma: f64,
    /// Per-node control gains; only pinned entries matter.
    pub kappa: Vec<f64>,
    pub pinned: Vec<usize>,
    pub coupling: DMatrix<f64>,
}

impl PinningConfig {
    pub fn uniform(coupling: DMatrix<f64>, sigma: f64, kappa: f64, pinned: Vec<usize>) -> Self {
        let n = coupling.nrows();
        Self { sigma, kappa: vec![kappa; n], pinned, coupling }
    }

    fn validate(&self) -> Result<()> {
        let n = self.coupling.nrows();
        if self.coupling.ncols() != n || self.kappa.len() != n {
            return Err(Error::DimensionMismatch("coupling must be square and kappa of length N".into()));
        }
        if let Some(&p) = self.pinned.iter().find(|&&p| p >= n) {
            return Err(Error::UnknownNode(p.to_string()));
        }
        if self.pinned.is_empty() {
            return Err(Error::NoPinnedNodes);
        }
        if self.pinned.iter().any(|&p| !(self.kappa[p] > 0.0)) {
            return Err(Error::InvalidArgument("pinned nodes need positive gains".into()));
        }
        assert_zero_rows(&self.coupling);
        Ok(())
    }

    fn pinned_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.coupling.nrows()];
        for &p in &self.pinned {
            m[p] = true;
        }
        m
    }
}

/// The `(N+1) x (N+1)` matrix of the network extended by a virtual node
/// carrying the reference trajectory: `g_ij + delta_i kappa_i` on the
/// diagonal block, `-delta_i kappa_i` in the last column, zero last row.
pub fn extended_matrix(cfg: &PinningConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let n = cfg.coupling.nrows();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&cfg.coupling);
    for &p in &cfg.pinned {
        m[(p, p)] += cfg.kappa[p];
        m[(p, n)] -= cfg.kappa[p];
    }
    assert_zero_rows(&m);
    Ok(m)
}

/// Eigenratio `Re lambda_{N+1} / Re lambda_2` of the extended matrix. The
/// coupling gain scales every eigenvalue alike and so cancels.
pub fn pinning_eigenratio(cfg: &PinningConfig) -> Result<EigenRatio> {
    let m = extended_matrix(cfg)?;
    let n = cfg.coupling.nrows();
    // With a zero last row the spectrum is {0} plus that of the top block.
    let block = m.view((0, 0), (n, n)).into_owned();
    let ev = sorted_spectrum(&block);
    let (l2, ln) = (ev[0].0, ev[n - 1].0);
    if l2 <= 1e-12 * ln.abs().max(1.0) {
        return Err(Error::DisconnectedGraph(l2));
    }
    Ok(EigenRatio { lambda2: l2, lambda_max: ln, ratio: ln / l2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PinningStrategy {
    /// Highest degree first, lower index on ties.
    Degree,
    Random,
}

/// The `round(fraction N)` nodes (at least one) to pin.
pub fn pinning_nodes(g: &UnGraph, fraction: f64, strategy: PinningStrategy, seed: u64) -> Vec<usize> {
    let n = g.n_nodes();
    let k = ((fraction * n as f64).round() as usize).clamp(1, n.max(1));
    let mut order: Vec<usize> = (0..n).collect();
    match strategy {
        PinningStrategy::Degree => order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v)),
        PinningStrategy::Random => order.shuffle(&mut rng(seed)),
    }
    order.truncate(k);
    order.sort_unstable();
    order
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncTrace {
    pub t: Vec<f64>,
    /// `max_i |x_i - s|`.
    pub error: Vec<f64>,
    /// Gains of the pinned nodes at each sample (constant unless adaptive).
    pub gains: Vec<Vec<f64>>,
}

/// Simulates `x_i' = f(x_i) - sigma sum_j g_ij H x_j + delta_i sigma kappa_i
/// H (s - x_i)` alongside the reference `s' = f(s)`, with `H` the diagonal
/// output map `coupling_dims`. With `adaptive = Some(q)` pinned gains obey
/// `kappa_i' = q_i |x_i - s|`.
pub fn pinning_sync_simulate(
    cfg: &PinningConfig,
    osc: &OdeSystem,
    coupling_dims: &[f64],
    s0: &[f64],
    x0: &[Vec<f64>],
    horizon: f64,
    n_samples: usize,
    adaptive: Option<&[f64]>,
) -> Result<SyncTrace> {
    let n = cfg.coupling.nrows();
    let d = osc.dim;
    if cfg.kappa.len() != n || coupling_dims.len() != d || s0.len() != d || x0.len() != n || x0.iter().any(|x| x.len() != d) {
        return Err(Error::DimensionMismatch("oscillator, coupling and initial states disagree".into()));
    }
    if adaptive.is_some_and(|q| q.len() != n) {
        return Err(Error::DimensionMismatch("adaptive rates need one entry per node".into()));
    }
    let pinned = if cfg.pinned.is_empty() { vec![false; n] } else { cfg.pinned_mask() };
    let n_p = cfg.pinned.len();
    // Layout: nodes, reference, then the pinned gains.
    let mut y0: Vec<f64> = x0.concat();
    y0.extend_from_slice(s0);
    y0.extend(cfg.pinned.iter().map(|&p| cfg.kappa[p]));
    let sigma = cfg.sigma;
    let g = &cfg.coupling;
    let neighbors: Vec<Vec<(usize, f64)>> =
        (0..n).map(|i| (0..n).filter(|&j| g[(i, j)] != 0.0).map(|j| (j, g[(i, j)])).collect()).collect();
    let slot: Vec<Option<usize>> = {
        let mut s = vec![None; n];
        for (k, &p) in cfg.pinned.iter().enumerate() {
            s[p] = Some(k);
        }
        s
    };
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let s = &y[n * d..n * d + d];
        let gains = &y[n * d + d..];
        osc.eval_into(t, s, &[], &mut dy[n * d..n * d + d]);
        for i in 0..n {
            let xi = &y[i * d..(i + 1) * d];
            let out = &mut dy[i * d..(i + 1) * d];
            osc.eval_into(t, xi, &[], out);
            for &(j, gij) in &neighbors[i] {
                for c in 0..d {
                    out[c] -= sigma * gij * coupling_dims[c] * y[j * d + c];
                }
            }
            if pinned[i] {
                let k = slot[i].expect("pinned node has a gain slot");
                for c in 0..d {
                    out[c] += sigma * gains[k] * coupling_dims[c] * (s[c] - xi[c]);
                }
            }
        }
        for (k, &p) in cfg.pinned.iter().enumerate() {
            dy[n * d + d + k] = match adaptive {
                Some(q) => q[p] * crate::ode::distance(&y[p * d..(p + 1) * d], s),
                None => 0.0,
            };
        }
    };
    let times = time_grid(horizon, n_samples);
    let ys = integrate(rhs, 0.0, &y0, &times, Tolerances::default())?;
    let error = ys
        .iter()
        .map(|y| {
            let s = &y[n * d..n * d + d];
            (0..n).map(|i| crate::ode::distance(&y[i * d..(i + 1) * d], s)).fold(0.0, f64::max)
        })
        .collect();
    let gains = ys.iter().map(|y| y[n * d + d..n * d + d + n_p].to_vec()).collect();
    Ok(SyncTrace { t: times, error, gains })
}
