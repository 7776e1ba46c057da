//! Steering nonlinear systems: open-loop entrainment, small-parameter chaos
//! control, delayed feedback, compensatory initial-state shifts and
//! feedback-vertex-set clamping.

mod compensate;
mod fvs;
mod ogy;
mod pyragas;

pub use compensate::{compensatory_perturbation, variational_matrix, Compensation, CompensationSpec};
pub use fvs::{fvs_clamp, fvs_find, is_fvs, ClampTarget, ClampTrace, FvsMode, FvsResult, EXACT_MAX};
pub use ogy::{henon_fixed_point, henon_lyapunov, ogy_stabilize_henon, HenonParams, OgyTrace};
pub use pyragas::{pyragas_feedback, rossler_upo, PyragasTrace, Upo};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{integrate, time_grid, OdeSystem, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HublerTrace {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    /// `|x(t) - g(t)|`.
    pub error: Vec<f64>,
}

/// Open-loop entrainment `u(t) = B^-1 [g'(t) - F(g(t))]` applied to
/// `x' = F(x) + B u`, sampled on `n_samples + 1` uniform times.
pub fn hubler_input(
    sys: &OdeSystem,
    b: &DMatrix<f64>,
    goal: impl Fn(f64) -> Vec<f64>,
    goal_rate: impl Fn(f64) -> Vec<f64>,
    x0: &[f64],
    horizon: f64,
    n_samples: usize,
) -> Result<HublerTrace> {
    let n = sys.dim;
    if b.nrows() != n || b.ncols() != n || x0.len() != n {
        return Err(Error::DimensionMismatch(format!("B must be {n}x{n} and x0 of length {n}")));
    }
    let lu = b.clone().lu();
    let sv = b.singular_values();
    if sv.min() <= f64::EPSILON * n as f64 * sv.max() {
        return Err(Error::SingularB);
    }
    let control = |t: f64| -> DVector<f64> {
        let g = goal(t);
        let f = sys.eval(t, &g, &[]);
        let rhs = DVector::from_iterator(n, goal_rate(t).iter().zip(&f).map(|(a, b)| a - b));
        lu.solve(&rhs).expect("B is invertible")
    };
    let times = time_grid(horizon, n_samples);
    let xs = integrate(
        |t, x, d| {
            let bu = b * control(t);
            sys.eval_into(t, x, bu.as_slice(), d);
        },
        0.0,
        x0,
        &times,
        Tolerances::default(),
    )?;
    let u = times.iter().map(|&t| control(t).as_slice().to_vec()).collect();
    let error = times.iter().zip(&xs).map(|(&t, x)| crate::ode::distance(x, &goal(t))).collect();
    Ok(HublerTrace { t: times, x: xs, u, error })
}
