//! Control energy of linear systems through the finite-horizon
//! controllability Gramian.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::DenseSystem;

/// Condition number beyond which a Gramian is flagged.
pub const ILL_CONDITIONED: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct GramianResult {
    pub horizon: f64,
    /// `W(T) = int_0^T e^{A t} B B^T e^{A^T t} dt`.
    pub w: DMatrix<f64>,
    /// `H(T) = e^{-A T} W(T) e^{-A^T T}`.
    pub h: DMatrix<f64>,
    /// Eigenvalues of `H`, ascending.
    pub eta: Vec<f64>,
    /// Eigenvectors of `H`, columns matching `eta`.
    pub eta_vectors: DMatrix<f64>,
    /// `e^{A T}`.
    pub exp_at: DMatrix<f64>,
    /// `sigma_max(W) / sigma_min(W)`, infinite when `W` is singular.
    pub condition: f64,
    pub ill_conditioned: bool,
    /// Numerically rank deficient: `eta_min <= N eps eta_max`.
    pub singular: bool,
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Sorted eigen-decomposition of a symmetric matrix.
fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), idx.len(), |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// `(int_0^T e^{A t} Q e^{A^T t} dt, e^{A T})`.
///
/// A short step `T / 2^k` with `|A| T / 2^k <= 1/2` is done exactly with the
/// exponential of `[[-A, Q], [0, A^T]]`, whose blocks give `e^{A^T d}` and
/// `e^{-A d} W(d)`. The horizon is then reached by doubling,
/// `W(2t) = W(t) + e^{A t} W(t) e^{A^T t}`, which stays accurate for long
/// horizons where the single block exponential loses all precision.
fn gramian_by_doubling(a: &DMatrix<f64>, q: &DMatrix<f64>, horizon: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let norm = a.norm();
    let mut k = 0u32;
    while norm * horizon / 2f64.powi(k as i32) > 0.5 && k < 60 {
        k += 1;
    }
    let d = horizon / 2f64.powi(k as i32);
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(-a * d));
    m.view_mut((0, n), (n, n)).copy_from(&(q * d));
    m.view_mut((n, n), (n, n)).copy_from(&(a.transpose() * d));
    let e = m.exp();
    let f12 = e.view((0, n), (n, n)).into_owned();
    let mut step = e.view((n, n), (n, n)).transpose();
    let mut w = symmetrize(&(&step * f12));
    for _ in 0..k {
        w = symmetrize(&(&w + &step * &w * step.transpose()));
        step = &step * &step;
    }
    (w, step)
}

/// Controllability Gramian over `[0, T]`, together with
/// `H(T) = int_0^T e^{-A t} B B^T e^{-A^T t} dt`, which equals
/// `e^{-A T} W(T) e^{-A^T T}`.
pub fn gramian(sys: &DenseSystem, horizon: f64) -> Result<GramianResult> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    let n = sys.n();
    let q = &sys.b * sys.b.transpose();
    let (w, exp_at) = gramian_by_doubling(&sys.a, &q, horizon);
    let (h, _) = gramian_by_doubling(&(-&sys.a), &q, horizon);
    let (eta, eta_vectors) = sym_eigen(&h);
    let (w_eig, _) = sym_eigen(&w);
    let (wmin, wmax) = (w_eig.first().copied().unwrap_or(0.0), w_eig.last().copied().unwrap_or(0.0));
    let condition = if wmin > 0.0 { wmax / wmin } else { f64::INFINITY };
    let eta_max = eta.last().copied().unwrap_or(0.0);
    let singular = eta.first().is_none_or(|&e0| e0 <= n as f64 * f64::EPSILON * eta_max);
    Ok(GramianResult {
        horizon,
        w,
        h,
        eta,
        eta_vectors,
        exp_at,
        condition,
        ill_conditioned: condition > ILL_CONDITIONED,
        singular,
    })
}

/// Minimum energy `v^T W^{-1} v` of reaching `x_f` from `x_i`, with
/// `v = x_f - e^{A T} x_i`.
pub fn min_energy(sys: &DenseSystem, x_i: &DVector<f64>, x_f: &DVector<f64>, horizon: f64) -> Result<f64> {
    let g = gramian(sys, horizon)?;
    let (_, e) = solve_gramian(&g, x_i, x_f)?;
    Ok(e)
}

fn check_state(n: usize, x: &DVector<f64>, name: &str) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch(format!("{name} has {} entries, system has {n}", x.len())));
    }
    Ok(())
}

/// `(W^{-1} v, v^T W^{-1} v)`.
fn solve_gramian(g: &GramianResult, x_i: &DVector<f64>, x_f: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let n = g.w.nrows();
    check_state(n, x_i, "x_i")?;
    check_state(n, x_f, "x_f")?;
    if g.singular {
        return Err(Error::SingularGramian { min_eigenvalue: g.eta.first().copied().unwrap_or(0.0) });
    }
    let v = x_f - &g.exp_at * x_i;
    let chol = g.w.clone().cholesky().ok_or(Error::SingularGramian {
        min_eigenvalue: g.eta.first().copied().unwrap_or(0.0),
    })?;
    let lambda = chol.solve(&v);
    let e = v.dot(&lambda);
    Ok((lambda, e))
}

/// Sampled optimal control and the trajectory it produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlTrace {
    pub t: Vec<f64>,
    /// `u[k]` is the input vector at `t[k]`.
    pub u: Vec<Vec<f64>>,
    pub x: Vec<Vec<f64>>,
    /// `v^T W^{-1} v`.
    pub energy: f64,
    /// Trapezoidal quadrature of `|u(t)|^2` on the grid.
    pub energy_quadrature: f64,
    /// `|x(T) - x_f|`.
    pub terminal_error: f64,
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// `u(t) = B^T e^{A^T (T - t)} W^{-1}(T) v`, sampled on `n_steps + 1`
/// uniform points. State and costate `z(t) = e^{A^T (T-t)} W^{-1} v` are
/// integrated together with classical RK4, so `u = B^T z` at every node.
pub fn min_energy_input(
    sys: &DenseSystem,
    x_i: &DVector<f64>,
    x_f: &DVector<f64>,
    horizon: f64,
    n_steps: usize,
) -> Result<ControlTrace> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be positive".into()));
    }
    let g = gramian(sys, horizon)?;
    let (lambda, energy) = solve_gramian(&g, x_i, x_f)?;
    let n = sys.n();
    let a = &sys.a;
    let bbt = &sys.b * sys.b.transpose();
    let at = a.transpose();
    let rhs = |s: &DVector<f64>| -> DVector<f64> {
        let x = s.rows(0, n);
        let z = s.rows(n, n);
        let mut d = DVector::zeros(2 * n);
        d.rows_mut(0, n).copy_from(&(a * x + &bbt * z));
        d.rows_mut(n, n).copy_from(&(-(&at * z)));
        d
    };
    let mut s = DVector::zeros(2 * n);
    s.rows_mut(0, n).copy_from(x_i);
    s.rows_mut(n, n).copy_from(&(g.exp_at.transpose() * &lambda));
    let h = horizon / n_steps as f64;
    let mut trace = ControlTrace {
        t: Vec::with_capacity(n_steps + 1),
        u: Vec::with_capacity(n_steps + 1),
        x: Vec::with_capacity(n_steps + 1),
        energy,
        energy_quadrature: 0.0,
        terminal_error: 0.0,
        condition: g.condition,
        ill_conditioned: g.ill_conditioned,
    };
    for k in 0..=n_steps {
        let u = sys.b.transpose() * s.rows(n, n);
        trace.t.push(k as f64 * h);
        trace.u.push(u.iter().copied().collect());
        trace.x.push(s.rows(0, n).iter().copied().collect());
        if k < n_steps {
            let k1 = rhs(&s);
            let k2 = rhs(&(&s + &k1 * (h / 2.0)));
            let k3 = rhs(&(&s + &k2 * (h / 2.0)));
            let k4 = rhs(&(&s + &k3 * h));
            s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
    }
    let sq: Vec<f64> = trace.u.iter().map(|u| u.iter().map(|v| v * v).sum()).collect();
    trace.energy_quadrature = sq.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
    trace.terminal_error = (s.rows(0, n) - x_f).norm();
    Ok(trace)
}

/// CSV with header `t,u1..uM,x1..xN`.
pub fn trace_csv(trace: &ControlTrace) -> String {
    let m = trace.u.first().map_or(0, Vec::len);
    let n = trace.x.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|i| format!("u{i}")));
    header.extend((1..=n).map(|i| format!("x{i}")));
    let mut out = header.join(",") + "\n";
    for k in 0..trace.t.len() {
        let mut row = vec![format!("{}", trace.t[k])];
        row.extend(trace.u[k].iter().map(|v| format!("{v}")));
        row.extend(trace.x[k].iter().map(|v| format!("{v}")));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyBounds {
    /// `1 / eta_max`.
    pub e_min: f64,
    /// `1 / eta_min`; `None` when the Gramian is singular.
    pub e_max: Option<f64>,
    pub singular: bool,
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// Rayleigh-Ritz bounds on the energy needed to drive a unit initial state
/// to the origin.
pub fn energy_bounds(sys: &DenseSystem, horizon: f64) -> Result<EnergyBounds> {
    let g = gramian(sys, horizon)?;
    let eta_max = g.eta.last().copied().unwrap_or(0.0);
    if eta_max <= 0.0 {
        return Err(Error::SingularGramian { min_eigenvalue: eta_max });
    }
    Ok(EnergyBounds {
        e_min: 1.0 / eta_max,
        e_max: if g.singular { None } else { Some(1.0 / g.eta[0]) },
        singular: g.singular,
        condition: g.condition,
        ill_conditioned: g.ill_conditioned,
    })
}

/// Energy `1 / eta_i` along each eigen-direction of `H`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenEnergy {
    pub energy: f64,
    /// Node with the largest weight in the eigen-direction.
    pub dominant_node: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySpectrum {
    /// Ascending energies.
    pub energies: Vec<EigenEnergy>,
    /// Log-binned density `(bin centre, density)`.
    pub density: Vec<(f64, f64)>,
}

pub fn energy_spectrum(sys: &DenseSystem, horizon: f64, bins: usize) -> Result<EnergySpectrum> {
    let g = gramian(sys, horizon)?;
    if g.singular {
        return Err(Error::SingularGramian { min_eigenvalue: g.eta.first().copied().unwrap_or(0.0) });
    }
    let mut energies: Vec<EigenEnergy> = g
        .eta
        .iter()
        .enumerate()
        .map(|(k, &eta)| {
            let col = g.eta_vectors.column(k);
            let dominant_node = (0..col.len())
                .max_by(|&i, &j| col[i].abs().total_cmp(&col[j].abs()).then(j.cmp(&i)))
                .unwrap_or(0);
            EigenEnergy { energy: 1.0 / eta, dominant_node }
        })
        .collect();
    energies.sort_by(|x, y| x.energy.total_cmp(&y.energy));
    let values: Vec<f64> = energies.iter().map(|e| e.energy).collect();
    Ok(EnergySpectrum { density: log_binned_density(&values, bins), energies })
}

/// Histogram on logarithmic bins, normalised to unit area.
pub fn log_binned_density(values: &[f64], bins: usize) -> Vec<(f64, f64)> {
    let positive: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0 && v.is_finite()).collect();
    if positive.is_empty() || bins == 0 {
        return vec![];
    }
    let lo = positive.iter().copied().fold(f64::INFINITY, f64::min).ln();
    let hi = positive.iter().copied().fold(0.0, f64::max).ln();
    if hi - lo < 1e-12 {
        return vec![(positive[0], 1.0)];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in &positive {
        let b = (((v.ln() - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let total = positive.len() as f64;
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(b, &c)| {
            let (l, r) = ((lo + b as f64 * width).exp(), (lo + (b + 1) as f64 * width).exp());
            ((l * r).sqrt(), c as f64 / (total * (r - l)))
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// CSV `E,density`.
pub fn spectrum_csv(s: &EnergySpectrum) -> String {
    let mut out = String::from("E,density\n");
    for (e, d) in &s.density {
        out.push_str(&format!("{e},{d}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::input_matrix;
    use crate::graph::generate::rng;
    use rand::Rng;

    fn chain_with_loops(n: usize, loop_weight: f64) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = loop_weight;
            if i > 0 {
                a[(i, i - 1)] = 1.0;
            }
        }
        a
    }

    fn single(a: DMatrix<f64>) -> DenseSystem {
        let n = a.nrows();
        DenseSystem::new(a, input_matrix(n, &[0]), None).unwrap()
    }

    /// Vectorised Lyapunov solve `A W + W A^T + B B^T = 0`.
    fn lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
        let n = a.nrows();
        let id = DMatrix::<f64>::identity(n, n);
        let k = id.kronecker(a) + a.kronecker(&id);
        let rhs = DVector::from_iterator(n * n, q.iter().map(|v| -v));
        let sol = k.lu().solve(&rhs).unwrap();
        DMatrix::from_column_slice(n, n, sol.as_slice())
    }

    #[test]
    fn scalar_integrator() {
        let s = DenseSystem::new(DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, 1.0), None).unwrap();
        let g = gramian(&s, 2.5).unwrap();
        assert!((g.w[(0, 0)] - 2.5).abs() < 1e-12);
        let tr = min_energy_input(&s, &DVector::from_element(1, 0.0), &DVector::from_element(1, 1.0), 2.5, 100).unwrap();
        assert!((tr.energy - 0.4).abs() < 1e-12);
        assert!(tr.u.iter().all(|u| (u[0] - 0.4).abs() < 1e-12));
        assert!(tr.terminal_error < 1e-12);
    }

    #[test]
    fn definiteness() {
        let chain2 = single(chain_with_loops(2, 0.0));
        let g = gramian(&chain2, 1.0).unwrap();
        assert!(g.eta[0] > 0.0 && !g.singular);
        let star = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let g = gramian(&single(star), 1.0).unwrap();
        assert!(g.singular && g.eta[0] < 1e-12);
        assert!(matches!(gramian(&chain2, 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn free_evolution_costs_nothing() {
        let s = single(chain_with_loops(3, -1.0));
        let xi = DVector::from_vec(vec![1.0, -0.5, 0.3]);
        let g = gramian(&s, 1.5).unwrap();
        let xf = &g.exp_at * &xi;
        let tr = min_energy_input(&s, &xi, &xf, 1.5, 200).unwrap();
        assert!(tr.energy.abs() < 1e-20);
        assert!(tr.u.iter().all(|u| u[0].abs() < 1e-9));
    }

    #[test]
    fn reaches_targets_with_consistent_energy() {
        let s = single(chain_with_loops(3, -1.0));
        let xi = DVector::from_vec(vec![0.2, 0.4, -0.1]);
        for target in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            let xf = DVector::from_row_slice(&target);
            let tr = min_energy_input(&s, &xi, &xf, 3.0, 1000).unwrap();
            assert!(tr.terminal_error < 1e-6 * (1.0 + xf.norm()), "{}", tr.terminal_error);
            assert!((tr.energy_quadrature - tr.energy).abs() / tr.energy < 1e-4);
        }
    }

    #[test]
    fn matches_lyapunov_for_stable_systems() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 0.3, 0.0, 0.5, -2.0, 0.1, 0.0, 0.7, -1.5]);
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let s = DenseSystem::new(a.clone(), b.clone(), None).unwrap();
        let w = gramian(&s, 40.0).unwrap().w;
        let l = lyapunov(&a, &(&b * b.transpose()));
        assert!((&w - &l).norm() / l.norm() < 1e-6);
    }

    #[test]
    fn small_horizon_scaling() {
        let s = single(chain_with_loops(5, -1.0));
        let pts: Vec<(f64, f64)> = (0..9)
            .map(|k| {
                let t = 10f64.powf(-3.0 + 2.0 * k as f64 / 8.0);
                (t, energy_bounds(&s, t).unwrap().e_min)
            })
            .collect();
        assert!((log_log_slope(&pts) + 1.0).abs() < 0.1);
    }

    #[test]
    fn large_horizon_decay_for_negative_definite() {
        // Symmetric negative definite A with B = I: E_max ~ exp(2 lambda_1 T).
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.2, 0.2, -2.0]);
        let s = DenseSystem::new(a.clone(), DMatrix::identity(2, 2), None).unwrap();
        let l1 = a.clone().symmetric_eigen().eigenvalues.max();
        let (t1, t2) = (8.0, 10.0);
        let e1 = energy_bounds(&s, t1).unwrap().e_max.unwrap();
        let e2 = energy_bounds(&s, t2).unwrap().e_max.unwrap();
        let rate = (e2.ln() - e1.ln()) / (t2 - t1);
        assert!((rate - 2.0 * l1).abs() < 1e-3, "{rate} vs {}", 2.0 * l1);
    }

    #[test]
    fn rayleigh_ritz() {
        let s = single(chain_with_loops(4, -0.5));
        let t = 2.0;
        let b = energy_bounds(&s, t).unwrap();
        let mut r = rng(4);
        let zero = DVector::zeros(4);
        for _ in 0..200 {
            let mut x = DVector::from_fn(4, |_, _| r.random_range(-1.0..1.0));
            x /= x.norm();
            let e = min_energy(&s, &x, &zero, t).unwrap();
            let emax = b.e_max.unwrap();
            assert!(e >= b.e_min * (1.0 - 1e-10) && e <= emax * (1.0 + 1e-10));
        }
    }

    #[test]
    fn isotropic_spectrum() {
        let s = DenseSystem::new(-DMatrix::identity(4, 4), DMatrix::identity(4, 4), None).unwrap();
        let sp = energy_spectrum(&s, 1.0, 10).unwrap();
        let e0 = sp.energies[0].energy;
        assert!(sp.energies.iter().all(|e| (e.energy - e0).abs() < 1e-10 * e0));
    }

    #[test]
    fn single_driver_chain_spectrum_grows_exponentially() {
        let range = |n: usize| {
            let sp = energy_spectrum(&single(chain_with_loops(n, -1.0)), 1.0, 5).unwrap();
            (sp.energies.last().unwrap().energy / sp.energies[0].energy).ln()
        };
        let (r3, r4, r5) = (range(3), range(4), range(5));
        assert!(r4 - r3 > 2.0 && r5 - r4 > 2.0, "{r3} {r4} {r5}");
    }

    #[test]
    fn singular_inputs_are_reported() {
        let star = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let s = single(star);
        let b = energy_bounds(&s, 1.0).unwrap();
        assert!(b.singular && b.e_max.is_none());
        let z = DVector::zeros(3);
        assert!(matches!(min_energy_input(&s, &z, &DVector::from_element(3, 1.0), 1.0, 10), Err(Error::SingularGramian { .. })));
    }

    #[test]
    fn csv_headers() {
        let s = single(chain_with_loops(2, -1.0));
        let tr = min_energy_input(&s, &DVector::zeros(2), &DVector::from_element(2, 1.0), 1.0, 4).unwrap();
        assert!(trace_csv(&tr).starts_with("t,u1,x1,x2\n0,"));
        assert_eq!(trace_csv(&tr).lines().count(), 6);
    }
}
