//! Continuous-time dynamical systems and the integrators shared by the
//! steering and synchronization analyses.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type VectorField = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;

/// `x' = F(t, x) + u`, with the input `u` entering additively on every
/// coordinate. An empty input slice means `u = 0`.
#[derive(Clone)]
pub struct OdeSystem {
    pub name: String,
    pub dim: usize,
    pub params: Vec<f64>,
    field: VectorField,
    jacobian: Option<JacobianFn>,
}

impl fmt::Debug for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("params", &self.params)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl OdeSystem {
    pub fn new(name: &str, dim: usize, params: Vec<f64>, field: VectorField) -> Self {
        Self { name: name.to_string(), dim, params, field, jacobian: None }
    }

    pub fn with_jacobian(mut self, jacobian: JacobianFn) -> Self {
        self.jacobian = Some(jacobian);
        self
    }

    pub fn eval_into(&self, t: f64, x: &[f64], u: &[f64], out: &mut [f64]) {
        (self.field)(t, x, out);
        for (o, ui) in out.iter_mut().zip(u) {
            *o += ui;
        }
    }

    pub fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, x, u, &mut out);
        out
    }

    /// Analytic Jacobian of `F` when one was supplied, central differences
    /// otherwise.
    pub fn jacobian(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        match &self.jacobian {
            Some(j) => j(t, x),
            None => self.fd_jacobian(t, x),
        }
    }

    pub fn fd_jacobian(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        let mut j = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        for k in 0..n {
            let h = 1e-6 * x[k].abs().max(1.0);
            xp[k] = x[k] + h;
            let fp = self.eval(t, &xp, &[]);
            xp[k] = x[k] - h;
            let fm = self.eval(t, &xp, &[]);
            xp[k] = x[k];
            for i in 0..n {
                j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        j
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }
}

/// Rossler oscillator with parameters `[a, b, c]`.
pub fn rossler(a: f64, b: f64, c: f64) -> OdeSystem {
    OdeSystem::new(
        "rossler",
        3,
        vec![a, b, c],
        Arc::new(move |_, x, d| {
            d[0] = -x[1] - x[2];
            d[1] = x[0] + a * x[1];
            d[2] = b + x[2] * (x[0] - c);
        }),
    )
    .with_jacobian(Arc::new(move |_, x| {
        DMatrix::from_row_slice(3, 3, &[0.0, -1.0, -1.0, 1.0, a, 0.0, x[2], 0.0, x[0] - c])
    }))
}

/// Mutually repressing gene pair `x_i' = alpha / (1 + x_j^n) - x_i`.
pub fn toggle_switch(alpha: f64, hill: f64) -> OdeSystem {
    let rep = move |y: f64| alpha / (1.0 + y.max(0.0).powf(hill));
    let drep = move |y: f64| {
        let y = y.max(0.0);
        -alpha * hill * y.powf(hill - 1.0) / (1.0 + y.powf(hill)).powi(2)
    };
    OdeSystem::new(
        "toggle",
        2,
        vec![alpha, hill],
        Arc::new(move |_, x, d| {
            d[0] = rep(x[1]) - x[0];
            d[1] = rep(x[0]) - x[1];
        }),
    )
    .with_jacobian(Arc::new(move |_, x| DMatrix::from_row_slice(2, 2, &[-1.0, drep(x[1]), drep(x[0]), -1.0])))
}

/// One-dimensional double well `x' = x - x^3` with attractors at `+-1`.
pub fn bistable() -> OdeSystem {
    OdeSystem::new("bistable", 1, vec![], Arc::new(|_, x, d| d[0] = x[0] - x[0].powi(3)))
        .with_jacobian(Arc::new(|_, x| DMatrix::from_element(1, 1, 1.0 - 3.0 * x[0] * x[0])))
}

/// Linear system `x' = A x`.
pub fn linear(a: DMatrix<f64>) -> OdeSystem {
    let n = a.nrows();
    let jac = a.clone();
    OdeSystem::new(
        "linear",
        n,
        a.iter().copied().collect(),
        Arc::new(move |_, x, d| {
            for i in 0..n {
                d[i] = (0..n).map(|k| a[(i, k)] * x[k]).sum();
            }
        }),
    )
    .with_jacobian(Arc::new(move |_, _| jac.clone()))
}

/// Looks up a built-in system by name, applying `name=value` overrides to
/// its parameters.
pub fn toy_system(name: &str, overrides: &[(String, f64)]) -> Result<OdeSystem> {
    let (names, mut values): (&[&str], Vec<f64>) = match name {
        "rossler" => (&["a", "b", "c"], vec![0.2, 0.2, 5.7]),
        "toggle" => (&["alpha", "n"], vec![3.0, 2.0]),
        "bistable" => (&[], vec![]),
        _ => return Err(Error::InvalidArgument(format!("unknown system {name:?}; expected rossler, toggle or bistable"))),
    };
    for (key, v) in overrides {
        let k = names
            .iter()
            .position(|n| n == key)
            .ok_or_else(|| Error::InvalidArgument(format!("system {name} has no parameter {key:?}")))?;
        values[k] = *v;
    }
    Ok(match name {
        "rossler" => rossler(values[0], values[1], values[2]),
        "toggle" => toggle_switch(values[0], values[1]),
        _ => bistable(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { atol: 1e-9, rtol: 1e-6, max_steps: 10_000_000 }
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand-Prince integration of `x' = f(t, x)` from `(t0, x0)`,
/// returning the state at each of the ascending `times` (all `>= t0`).
/// Steps are shortened to land on the requested times exactly.
pub fn integrate<F>(mut f: F, t0: f64, x0: &[f64], times: &[f64], tol: Tolerances) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = x0.len();
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut x = x0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut xn = vec![0.0; n];
    let span = times.last().map_or(0.0, |&tf| tf - t0).abs();
    let mut h = (span * 1e-3).max(1e-6);
    let mut steps = 0usize;
    f(t, &x, &mut k[0]);
    for &target in times {
        if target < t - 1e-12 * t.abs().max(1.0) {
            return Err(Error::InvalidArgument("output times must be ascending and not before t0".into()));
        }
        while target - t > 1e-14 * t.abs().max(1.0) {
            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::NonConvergence { residual: h, iterations: steps });
            }
            let last = h >= target - t;
            let hs = if last { target - t } else { h };
            for s in 1..7 {
                for i in 0..n {
                    stage[i] = x[i] + hs * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                f(t + C[s] * hs, &stage, &mut k[s]);
            }
            // Stage 7 is evaluated at the 5th-order solution (FSAL).
            xn.copy_from_slice(&stage);
            let mut err = 0.0f64;
            for i in 0..n {
                let e = hs * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                let sc = tol.atol + tol.rtol * x[i].abs().max(xn[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                return Err(Error::NonConvergence { residual: f64::INFINITY, iterations: steps });
            }
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                x.copy_from_slice(&xn);
                k.swap(0, 6);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let hn = hs * factor;
            h = if err <= 1.0 && last { h.max(hn) } else { hn };
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::NonConvergence { residual: err, iterations: steps });
            }
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Integrates a system with zero input and returns the states at `times`.
pub fn trajectory(sys: &OdeSystem, x0: &[f64], t0: f64, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    integrate(|t, x, d| sys.eval_into(t, x, &[], d), t0, x0, times, Tolerances::default())
}

/// Uniform grid `0, dt, ..., n dt`.
pub fn time_grid(horizon: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| horizon * k as f64 / n as f64).collect()
}

/// Distinct end states reached from `starts` after time `horizon`, merged
/// when closer than `tol`. Each entry is the end state and the indices of
/// the starts that reach it.
pub fn find_attractors(sys: &OdeSystem, starts: &[Vec<f64>], horizon: f64, tol: f64) -> Result<Vec<(Vec<f64>, Vec<usize>)>> {
    let mut found: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for (s, x0) in starts.iter().enumerate() {
        let end = trajectory(sys, x0, 0.0, &[horizon])?.pop().expect("one output");
        match found.iter_mut().find(|(a, _)| distance(a, &end) < tol) {
            Some((_, members)) => members.push(s),
            None => found.push((end, vec![s])),
        }
    }
    Ok(found)
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
