use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{distance, integrate, OdeSystem, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PyragasTrace {
    pub t: Vec<f64>,
    /// Observed output `y = x[output]`.
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    /// Largest `|y(t) - y(t - tau)|` over the last tenth of the run.
    pub mismatch: f64,
    pub final_state: Vec<f64>,
}

/// Delayed feedback `u = K [y(t) - y(t - tau)]` added to the `output`
/// coordinate; with this sign a stabilising gain is negative. Fixed-step RK4 with step `tau / ceil(tau / dt)`; delayed
/// values between grid points are cubic interpolants. The history on
/// `[-tau, 0]` is the uncontrolled orbit from `x0`.
pub fn pyragas_feedback(
    sys: &OdeSystem,
    output: usize,
    gain: f64,
    tau: f64,
    horizon: f64,
    x0: &[f64],
    dt: f64,
) -> Result<PyragasTrace> {
    let d = sys.dim;
    if output >= d || x0.len() != d {
        return Err(Error::DimensionMismatch(format!("output {output} and x0 must fit dimension {d}")));
    }
    if !(tau > 0.0) || !(dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidArgument("tau, dt and the horizon must be positive".into()));
    }
    let m = ((tau / dt).ceil() as usize).max(4);
    let h = tau / m as f64;
    let n_steps = (horizon / h).round() as usize;

    // `fed[s]` is the delayed output at RK stage `s`; `k` the gain.
    let rk4 = |t: f64, x: &[f64], k: f64, fed: [f64; 3]| -> Vec<f64> {
        let f = |t: f64, x: &[f64], u: f64| {
            let mut e = vec![0.0; d];
            e[output] = u;
            sys.eval(t, x, &e)
        };
        let add = |a: &[f64], k: &[f64], s: f64| a.iter().zip(k).map(|(a, k)| a + s * k).collect::<Vec<_>>();
        // Each stage feeds back the output of its own state.
        let k1 = f(t, x, k * (x[output] - fed[0]));
        let x2 = add(x, &k1, h / 2.0);
        let k2 = f(t + h / 2.0, &x2, k * (x2[output] - fed[1]));
        let x3 = add(x, &k2, h / 2.0);
        let k3 = f(t + h / 2.0, &x3, k * (x3[output] - fed[1]));
        let x4 = add(x, &k3, h);
        let k4 = f(t + h, &x4, k * (x4[output] - fed[2]));
        (0..d).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
    };

    // hist[j] is the state at time (j - m - 1) h; one sample before -tau
    // keeps the interpolation stencil centred from the first step.
    let mut hist: Vec<Vec<f64>> = Vec::with_capacity(m + n_steps + 2);
    hist.push(x0.to_vec());
    for j in 0..=m {
        let next = rk4((j as f64 - m as f64 - 1.0) * h, &hist[j], 0.0, [0.0; 3]);
        hist.push(next);
    }
    let mut tr = PyragasTrace { t: Vec::new(), y: Vec::new(), u: Vec::new(), mismatch: 0.0, final_state: vec![] };
    for k in 0..=n_steps {
        let t = k as f64 * h;
        let x = hist[m + 1 + k].clone();
        // Output at time (j - 1) h - tau.
        let yd = |j: usize| hist[j][output];
        let now = x[output];
        tr.t.push(t);
        tr.y.push(now);
        tr.u.push(gain * (now - yd(k + 1)));
        if k == n_steps {
            break;
        }
        // Lagrange cubic at the midpoint of the delayed step.
        let mid = (-yd(k) + 9.0 * yd(k + 1) + 9.0 * yd(k + 2) - yd(k + 3)) / 16.0;
        let next = rk4(t, &x, gain, [yd(k + 1), mid, yd(k + 2)]);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonConvergence { residual: f64::INFINITY, iterations: k });
        }
        hist.push(next);
    }
    let tail = (tr.t.len() / 10).max(1);
    tr.mismatch = (tr.t.len() - tail..tr.t.len()).map(|k| (tr.y[k] - hist[k + 1][output]).abs()).fold(0.0, f64::max);
    tr.final_state = hist.pop().expect("nonempty");
    Ok(tr)
}

/// A periodic orbit found on the Poincare section `y = 0`, `y' < 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Upo {
    pub period: f64,
    pub point: Vec<f64>,
    /// `|P(s) - s|` for the section map `P` at the returned point.
    pub close_return: f64,
}

fn tight() -> Tolerances {
    Tolerances { atol: 1e-12, rtol: 1e-11, ..Tolerances::default() }
}

/// Next downward crossing of `y = 0` and the time taken.
fn section_return(sys: &OdeSystem, x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let f = |t: f64, x: &[f64], d: &mut [f64]| sys.eval_into(t, x, &[], d);
    let dt = 0.02;
    let mut t = 0.0;
    let mut cur = x.to_vec();
    for _ in 0..5000 {
        let next = integrate(f, 0.0, &cur, &[dt], tight())?.pop().expect("one output");
        if cur[1] > 0.0 && next[1] <= 0.0 {
            let (mut a, mut b) = (0.0, dt);
            let mut at_a = cur.clone();
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let s = integrate(f, 0.0, &at_a, &[mid - a], tight())?.pop().expect("one output");
                if s[1] > 0.0 {
                    at_a = s;
                    a = mid;
                } else {
                    b = mid;
                }
                if b - a < 1e-14 {
                    break;
                }
            }
            let mut s = integrate(f, 0.0, &at_a, &[b - a], tight())?.pop().expect("one output");
            s[1] = 0.0;
            return Ok((s, t + b));
        }
        cur = next;
        t += dt;
    }
    Err(Error::NonConvergence { residual: f64::INFINITY, iterations: 5000 })
}

/// Period-1 unstable orbit of a three-dimensional rotating flow such as
/// Rossler's: the closest return among section points seeds a Newton
/// iteration on the section map `(x, z) -> (x', z')`.
pub fn rossler_upo(sys: &OdeSystem, x0: &[f64]) -> Result<Upo> {
    if sys.dim != 3 {
        return Err(Error::DimensionMismatch("section search needs a 3-dimensional flow".into()));
    }
    let mut x = integrate(|t, x, d| sys.eval_into(t, x, &[], d), 0.0, x0, &[200.0], Tolerances::default())?.remove(0);
    let mut points = Vec::new();
    for _ in 0..200 {
        let (s, _) = section_return(sys, &x)?;
        points.push(s.clone());
        x = s;
    }
    let start = (0..points.len() - 1)
        .min_by(|&i, &j| distance(&points[i], &points[i + 1]).total_cmp(&distance(&points[j], &points[j + 1])))
        .expect("at least two returns");
    let map = |s: &DVector<f64>| -> Result<(DVector<f64>, f64)> {
        let (p, t) = section_return(sys, &[s[0], 0.0, s[1]])?;
        Ok((DVector::from_vec(vec![p[0], p[2]]), t))
    };
    let mut s = DVector::from_vec(vec![points[start][0], points[start][2]]);
    for _ in 0..40 {
        let (p, t) = map(&s)?;
        let g = &p - &s;
        if g.norm() < 1e-10 {
            return Ok(Upo { period: t, point: vec![s[0], 0.0, s[1]], close_return: g.norm() });
        }
        let mut jac = DMatrix::zeros(2, 2);
        for k in 0..2 {
            let mut sp = s.clone();
            let hk = 1e-7 * s[k].abs().max(1e-3);
            sp[k] += hk;
            let (pp, _) = map(&sp)?;
            let col = ((&pp - &sp) - &g) / hk;
            jac.set_column(k, &col);
        }
        let step = jac.lu().solve(&(-&g)).ok_or(Error::NonConvergence { residual: g.norm(), iterations: 0 })?;
        s += step;
    }
    let (p, t) = map(&s)?;
    let r = (&p - &s).norm();
    if r < 1e-3 {
        Ok(Upo { period: t, point: vec![s[0], 0.0, s[1]], close_return: r })
    } else {
        Err(Error::NonConvergence { residual: r, iterations: 40 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{linear, rossler};
    use std::f64::consts::PI;

    #[test]
    fn periodic_start_has_no_mismatch() {
        let osc = linear(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let tr = pyragas_feedback(&osc, 0, -0.5, 2.0 * PI, 60.0, &[1.0, 0.0], 0.01).unwrap();
        assert!(tr.mismatch < 1e-8, "{}", tr.mismatch);
    }

    #[test]
    fn zero_gain_means_zero_control() {
        let sys = rossler(0.2, 0.2, 5.7);
        let tr = pyragas_feedback(&sys, 1, 0.0, 5.0, 20.0, &[1.0, 1.0, 0.0], 0.01).unwrap();
        assert!(tr.u.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn rossler_period_one_orbit() {
        let sys = rossler(0.2, 0.2, 5.7);
        let upo = rossler_upo(&sys, &[1.0, 1.0, 0.0]).unwrap();
        assert!((upo.period - 5.88).abs() < 0.05, "{upo:?}");
        assert!(upo.close_return < 1e-3);
    }

    #[test]
    fn feedback_stabilizes_rossler_orbit() {
        let sys = rossler(0.2, 0.2, 5.7);
        let upo = rossler_upo(&sys, &[1.0, 1.0, 0.0]).unwrap();
        let best = [-0.05, -0.1, -0.15, -0.2, -0.3, -0.4, -0.5]
            .iter()
            .map(|&k| pyragas_feedback(&sys, 1, k, upo.period, 400.0, &[1.0, 1.0, 0.0], 0.01).unwrap().mismatch)
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-2, "{best}");
    }
}
