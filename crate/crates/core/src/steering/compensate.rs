use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{distance, integrate, time_grid, OdeSystem, Tolerances};

/// Which coordinates may be shifted and by how much in total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompensationSpec {
    pub control_set: Vec<usize>,
    /// Bounds on the cumulative shift of each control coordinate.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Success radius around the target.
    pub kappa: f64,
    /// Time window in which the orbit must enter the success ball.
    pub horizon: f64,
    pub budget: usize,
}

impl CompensationSpec {
    /// All coordinates perturbable without bounds.
    pub fn free(dim: usize, kappa: f64, horizon: f64, budget: usize) -> Self {
        Self {
            control_set: (0..dim).collect(),
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
            kappa,
            horizon,
            budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Compensation {
    pub x0: Vec<f64>,
    pub shift: Vec<f64>,
    pub iterations: usize,
    pub success: bool,
    /// Closest approach to the target from the returned `x0`.
    pub closest: f64,
}

const SAMPLES: usize = 2000;

/// State at `t` and the flow derivative `d x(t) / d x0`.
pub fn variational_matrix(sys: &OdeSystem, x0: &[f64], t: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = sys.dim;
    let mut y0 = x0.to_vec();
    y0.extend(DMatrix::<f64>::identity(n, n).iter());
    if t == 0.0 {
        return Ok((x0.to_vec(), DMatrix::identity(n, n)));
    }
    let y = integrate(
        |t, y, d| {
            let (x, m) = y.split_at(n);
            sys.eval_into(t, x, &[], &mut d[..n]);
            let j = sys.jacobian(t, x);
            let m = DMatrix::from_column_slice(n, n, m);
            d[n..].copy_from_slice((j * m).as_slice());
        },
        0.0,
        &y0,
        &[t],
        Tolerances::default(),
    )?
    .remove(0);
    Ok((y[..n].to_vec(), DMatrix::from_column_slice(n, n, &y[n..])))
}

/// Iteratively shifts `x0` so that its orbit enters the `kappa`-ball around
/// `target`. Each iteration finds the closest approach `t_c`, linearises the
/// flow there and takes the least-squares shift on the control set, capped
/// at a tenth of `|target - x0|` and projected onto the bounds.
pub fn compensatory_perturbation(sys: &OdeSystem, x0: &[f64], target: &[f64], spec: &CompensationSpec) -> Result<Compensation> {
    let n = sys.dim;
    if x0.len() != n || target.len() != n {
        return Err(Error::DimensionMismatch(format!("states must have {n} entries")));
    }
    let k = spec.control_set.len();
    if spec.lower.len() != k || spec.upper.len() != k || spec.control_set.iter().any(|&i| i >= n) {
        return Err(Error::DimensionMismatch("control set and bounds disagree".into()));
    }
    if k == 0 || spec.lower.iter().zip(&spec.upper).any(|(l, u)| l > u || *l > 0.0 || *u < 0.0) {
        return Err(Error::InfeasibleConstraints);
    }
    let cap = 0.1 * distance(target, x0);
    let times = time_grid(spec.horizon, SAMPLES);
    let mut shift = vec![0.0; k];
    let mut x = x0.to_vec();
    for it in 0..=spec.budget {
        let orbit = integrate(|t, x, d| sys.eval_into(t, x, &[], d), 0.0, &x, &times, Tolerances::default())?;
        let (ic, closest) = orbit
            .iter()
            .map(|s| distance(s, target))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty orbit");
        if closest < spec.kappa {
            return Ok(Compensation { x0: x, shift, iterations: it, success: true, closest });
        }
        if it == spec.budget {
            break;
        }
        let (xc, m) = variational_matrix(sys, &x, times[ic])?;
        let ms = DMatrix::from_fn(n, k, |r, c| m[(r, spec.control_set[c])]);
        let want = DVector::from_iterator(n, target.iter().zip(&xc).map(|(a, b)| a - b));
        let mut step = ms.svd(true, true).solve(&want, 1e-12).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        let mut moved = 0.0f64;
        for c in 0..k {
            let new = (shift[c] + step[c]).clamp(spec.lower[c], spec.upper[c]);
            moved = moved.max((new - shift[c]).abs());
            shift[c] = new;
        }
        if moved < 1e-12 {
            return Err(Error::InfeasibleConstraints);
        }
        x = x0.to_vec();
        for (c, &i) in spec.control_set.iter().enumerate() {
            x[i] += shift[c];
        }
    }
    Err(Error::NoCompensation { iterations: spec.budget })
}
