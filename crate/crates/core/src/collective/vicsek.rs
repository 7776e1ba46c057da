use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::generate::rng;
use crate::graph::UnGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VicsekParams {
    pub n: usize,
    /// Side of the periodic box.
    pub l: f64,
    pub v0: f64,
    /// Interaction radius.
    pub r: f64,
    /// Noise amplitude; headings receive uniform noise in `[-eta/2, eta/2]`.
    pub eta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VicsekState {
    pub params: VicsekParams,
    pub step: u64,
    pub pos: Vec<[f64; 2]>,
    /// Headings in `(-pi, pi]`.
    pub theta: Vec<f64>,
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn wrap_pos(x: f64, l: f64) -> f64 {
    let w = x.rem_euclid(l);
    if w >= l {
        0.0
    } else {
        w
    }
}

/// Noise for every agent at one step. Agent `i` reads the `i`-th draw of a
/// ChaCha stream keyed by `(seed, step)`, so the values do not depend on
/// evaluation order.
fn step_noise(seed: u64, step: u64, n: usize, eta: f64) -> Vec<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(step);
    (0..n).map(|_| eta * (r.random::<f64>() - 0.5)).collect()
}

impl VicsekState {
    /// Uniform positions and headings drawn from `params.seed`.
    pub fn random(params: VicsekParams) -> Self {
        let mut r = rng(params.seed);
        let pos = (0..params.n).map(|_| [r.random::<f64>() * params.l, r.random::<f64>() * params.l]).collect();
        let theta = (0..params.n).map(|_| wrap_angle(r.random_range(-PI..PI))).collect();
        Self { params, step: 0, pos, theta }
    }

    /// Neighbour lists within distance `< r` under periodic boundaries,
    /// built from cells of side at least `r`. Each list includes the agent.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        neighbor_lists(&self.pos, self.params.l, self.params.r)
    }
}

fn min_image(d: f64, l: f64) -> f64 {
    d - l * (d / l).round()
}

fn neighbor_lists(pos: &[[f64; 2]], l: f64, r: f64) -> Vec<Vec<usize>> {
    let n = pos.len();
    let close = |i: usize, j: usize| {
        let dx = min_image(pos[i][0] - pos[j][0], l);
        let dy = min_image(pos[i][1] - pos[j][1], l);
        dx * dx + dy * dy < r * r
    };
    if !(r > 0.0) {
        return (0..n).map(|i| vec![i]).collect();
    }
    // Cells no smaller than r; more cells than about one per agent only
    // costs memory.
    let cells = ((l / r).floor() as usize).min(((n as f64).sqrt() as usize).max(3));
    if cells < 3 {
        return (0..n).map(|i| (0..n).filter(|&j| j == i || close(i, j)).collect()).collect();
    }
    let side = l / cells as f64;
    let cell_of = |p: &[f64; 2]| {
        let cx = ((p[0] / side) as usize).min(cells - 1);
        let cy = ((p[1] / side) as usize).min(cells - 1);
        (cx, cy)
    };
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for (i, p) in pos.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        grid[cy * cells + cx].push(i);
    }
    (0..n)
        .map(|i| {
            let (cx, cy) = cell_of(&pos[i]);
            let mut out = Vec::new();
            for dy in [cells - 1, 0, 1] {
                for dx in [cells - 1, 0, 1] {
                    let c = ((cy + dy) % cells) * cells + (cx + dx) % cells;
                    out.extend(grid[c].iter().copied().filter(|&j| j == i || close(i, j)));
                }
            }
            out.sort_unstable();
            out
        })
        .collect()
}

/// One update: each heading becomes the direction of the summed unit
/// vectors of its neighbours (itself included) plus noise; agents then move
/// by `v0` along the new heading.
pub fn vicsek_step(state: &VicsekState) -> VicsekState {
    let p = state.params;
    let nb = state.neighbors();
    let noise = step_noise(p.seed, state.step, p.n, p.eta);
    let theta: Vec<f64> = (0..p.n)
        .map(|i| {
            let (s, c) = nb[i].iter().fold((0.0, 0.0), |(s, c), &j| (s + state.theta[j].sin(), c + state.theta[j].cos()));
            wrap_angle(s.atan2(c) + noise[i])
        })
        .collect();
    let pos = state
        .pos
        .iter()
        .zip(&theta)
        .map(|(q, &t)| [wrap_pos(q[0] + p.v0 * t.cos(), p.l), wrap_pos(q[1] + p.v0 * t.sin(), p.l)])
        .collect();
    VicsekState { params: p, step: state.step + 1, pos, theta }
}

/// `|sum of unit heading vectors| / N`.
pub fn order_parameter(theta: &[f64]) -> f64 {
    if theta.is_empty() {
        return 0.0;
    }
    let (s, c) = theta.iter().fold((0.0, 0.0), |(s, c), t| (s + t.sin(), c + t.cos()));
    s.hypot(c) / theta.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStats {
    /// Order parameter after every step, transient included.
    pub trace: Vec<f64>,
    pub mean: f64,
    /// Standard error of the post-transient samples.
    pub stderr: f64,
    pub transient: usize,
}

/// Runs `steps` updates from a random start and averages the order
/// parameter after `transient` steps (default `steps / 2`).
pub fn vicsek_order_parameter(params: VicsekParams, steps: usize, transient: Option<usize>) -> OrderStats {
    let transient = transient.unwrap_or(steps / 2).min(steps.saturating_sub(1));
    let mut s = VicsekState::random(params);
    let mut trace = Vec::with_capacity(steps);
    for _ in 0..steps {
        s = vicsek_step(&s);
        trace.push(order_parameter(&s.theta));
    }
    let tail = &trace[transient..];
    let (mean, stderr) = mean_stderr(tail);
    OrderStats { trace, mean, stderr, transient }
}

pub(crate) fn mean_stderr(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeaderTrace {
    pub theta0: f64,
    /// `max_i |theta_i - theta0|` before the first and after every step.
    pub max_deviation: Vec<f64>,
}

/// Followers average their own heading, their neighbours' and, when within
/// range, the leader's fixed heading `theta0` (plain arithmetic means, no
/// angle wrapping). The leader moves at `v0` along `theta0`.
pub fn vicsek_leader_run(params: VicsekParams, theta0: f64, steps: usize) -> LeaderTrace {
    let p = params;
    let mut s = VicsekState::random(p);
    let mut leader = {
        let mut r = rng(p.seed ^ 0x5eed);
        [r.random::<f64>() * p.l, r.random::<f64>() * p.l]
    };
    let dev = |th: &[f64]| th.iter().map(|t| (t - theta0).abs()).fold(0.0, f64::max);
    let mut tr = LeaderTrace { theta0, max_deviation: vec![dev(&s.theta)] };
    for step in 0..steps as u64 {
        let mut all = s.pos.clone();
        all.push(leader);
        let nb = neighbor_lists(&all, p.l, p.r);
        let noise = step_noise(p.seed, step, p.n, p.eta);
        let theta: Vec<f64> = (0..p.n)
            .map(|i| {
                let (mut sum, mut cnt) = (0.0, 0.0);
                for &j in &nb[i] {
                    sum += if j == p.n { theta0 } else { s.theta[j] };
                    cnt += 1.0;
                }
                sum / cnt + noise[i]
            })
            .collect();
        s.pos = s
            .pos
            .iter()
            .zip(&theta)
            .map(|(q, &t)| [wrap_pos(q[0] + p.v0 * t.cos(), p.l), wrap_pos(q[1] + p.v0 * t.sin(), p.l)])
            .collect();
        s.theta = theta;
        leader = [wrap_pos(leader[0] + p.v0 * theta0.cos(), p.l), wrap_pos(leader[1] + p.v0 * theta0.sin(), p.l)];
        tr.max_deviation.push(dev(&s.theta));
    }
    tr
}

/// Scalar averaging on a fixed graph, `theta_i <- (theta_i + sum_j
/// theta_j) / (1 + k_i)`. Returns the headings after every step, the start
/// included.
pub fn consensus_run(g: &UnGraph, theta: &[f64], steps: usize) -> Vec<Vec<f64>> {
    let mut out = vec![theta.to_vec()];
    for _ in 0..steps {
        let cur = out.last().expect("nonempty");
        let next = (0..g.n_nodes())
            .map(|i| (cur[i] + g.neighbors(i).iter().map(|&j| cur[j]).sum::<f64>()) / (1.0 + g.degree(i) as f64))
            .collect();
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{gnp_undirected, ring};

    fn params(n: usize, l: f64, eta: f64, seed: u64) -> VicsekParams {
        VicsekParams { n, l, v0: 0.03, r: 1.0, eta, seed }
    }

    #[test]
    fn cell_lists_match_brute_force() {
        let s = VicsekState::random(params(400, 10.0, 0.0, 3));
        let nb = s.neighbors();
        for i in 0..400 {
            let want: Vec<usize> = (0..400)
                .filter(|&j| {
                    let dx = min_image(s.pos[i][0] - s.pos[j][0], 10.0);
                    let dy = min_image(s.pos[i][1] - s.pos[j][1], 10.0);
                    dx * dx + dy * dy < 1.0
                })
                .collect();
            assert_eq!(nb[i], want);
        }
    }

    #[test]
    fn global_average_without_noise() {
        let mut p = params(20, 2.0, 0.0, 1);
        p.r = 2.0 * 2f64.sqrt();
        let s = vicsek_step(&VicsekState::random(p));
        assert!(s.theta.iter().all(|t| (t - s.theta[0]).abs() < 1e-12));
    }

    #[test]
    fn lone_agent_moves_by_noise_only() {
        let p = params(1, 5.0, 0.4, 2);
        let s0 = VicsekState::random(p);
        let s1 = vicsek_step(&s0);
        let d = wrap_angle(s1.theta[0] - s0.theta[0]);
        assert!(d.abs() <= 0.2 && d != 0.0);
    }

    #[test]
    fn distant_agents_ignore_each_other() {
        let p = params(2, 10.0, 0.3, 7);
        let mut s = VicsekState::random(p);
        s.pos = vec![[1.0, 1.0], [6.0, 6.0]];
        let both = vicsek_step(&s);
        let mut alone = VicsekState { params: VicsekParams { n: 1, ..p }, ..s.clone() };
        alone.pos.truncate(1);
        alone.theta.truncate(1);
        assert_eq!(vicsek_step(&alone).theta[0], both.theta[0]);
    }

    #[test]
    fn state_stays_in_domain_and_is_reproducible() {
        let p = params(100, 3.0, 2.0, 9);
        let mut a = VicsekState::random(p);
        for _ in 0..50 {
            a = vicsek_step(&a);
            assert!(a.pos.iter().flatten().all(|&x| (0.0..3.0).contains(&x)));
            assert!(a.theta.iter().all(|&t| t > -PI && t <= PI));
            let phi = order_parameter(&a.theta);
            assert!((0.0..=1.0 + 1e-12).contains(&phi));
        }
        let mut b = VicsekState::random(p);
        for _ in 0..50 {
            b = vicsek_step(&b);
        }
        assert_eq!(a, b);
    }

    #[test]
    fn ordered_and_disordered_regimes() {
        let ordered = vicsek_order_parameter(params(300, 5.0, 0.1, 1), 1000, None);
        let disordered = vicsek_order_parameter(params(300, 25.0, 5.0, 1), 1000, None);
        assert!(ordered.mean > 0.7, "{}", ordered.mean);
        assert!(disordered.mean < 0.3, "{}", disordered.mean);
    }

    #[test]
    fn leader_alignment() {
        let p = VicsekParams { n: 30, l: 2.0, v0: 0.03, r: 1.0, eta: 0.0, seed: 5 };
        let tr = vicsek_leader_run(p, 0.7, 500);
        assert!(tr.max_deviation[500] < 1e-2, "{}", tr.max_deviation[500]);
    }

    #[test]
    fn no_range_no_alignment() {
        let p = VicsekParams { n: 30, l: 2.0, v0: 0.03, r: 0.0, eta: 0.0, seed: 5 };
        let tr = vicsek_leader_run(p, 0.7, 50);
        assert!(tr.max_deviation.iter().all(|&d| d == tr.max_deviation[0]));
    }

    #[test]
    fn consensus_spread_shrinks() {
        let g = gnp_undirected(15, 0.3, 2);
        assert_eq!(crate::graph::connected_components(&g, &[true; 15]).len(), 1);
        let mut r = rng(0);
        let th: Vec<f64> = (0..15).map(|_| r.random_range(-PI..PI)).collect();
        let run = consensus_run(&g, &th, 200);
        let spread = |v: &Vec<f64>| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        for w in run.windows(2).take(30) {
            assert!(spread(&w[1]) < spread(&w[0]));
        }
        assert!(spread(run.last().unwrap()) < 1e-6);
        let r2 = consensus_run(&ring(4), &[0.0, 1.0, 2.0, 3.0], 1);
        assert!((r2[1][0] - 4.0 / 3.0).abs() < 1e-15);
    }
}
