use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::generate::rng;

/// Henon map `X' = p + b Y - X^2`, `Y' = X` under state-triggered parameter
/// kicks `p = p0 + dp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HenonParams {
    pub p0: f64,
    pub b: f64,
    /// Radius of the control region around the fixed point. Kicks that
    /// would exceed the cap are skipped, so the effective region is the
    /// strip `|C z| <= cap` inside this disc.
    pub delta: f64,
    /// Gain row `C`; the kick is `dp = C z` with `z` the offset from the
    /// fixed point.
    pub gain: [f64; 2],
    /// Largest admissible `|dp|`.
    pub cap: f64,
}

impl HenonParams {
    /// Deadbeat gain on the unstable direction, kicks capped at 1% of `p0`.
    pub fn new(p0: f64, b: f64) -> Self {
        let x = henon_fixed_point(p0, b);
        // Eigenvalues of [[-2x, b], [1, 0]] solve l^2 + 2x l - b = 0.
        let root = (x * x + b).sqrt();
        let stable = if (-x + root).abs() < 1.0 { -x + root } else { -x - root };
        // With dp = C z the closed loop has trace -2x + c1 and determinant
        // -(b + c2); c2 = -b removes the unstable eigenvalue, c1 keeps the
        // stable one.
        let gain = [2.0 * x + stable, -b];
        Self { p0, b, delta: 1.0, gain, cap: 0.01 * p0 }
    }
}

/// Fixed point `x*` of the Henon map, the positive root of
/// `x^2 + (1 - b) x - p = 0`.
pub fn henon_fixed_point(p: f64, b: f64) -> f64 {
    (-(1.0 - b) + ((1.0 - b).powi(2) + 4.0 * p).sqrt()) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OgyTrace {
    pub fixed_point: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dp: Vec<f64>,
    /// First step from which the orbit stays within `1e-3` of the fixed
    /// point until the end of the run.
    pub capture_step: usize,
    /// Largest `|x - x*|` over the 100 steps after capture.
    pub post_capture_deviation: f64,
    pub max_kick: f64,
}

/// Steps after the capture window during which the hold is checked.
pub const HOLD_STEPS: usize = 100;

/// Runs the controlled map for `n_steps + HOLD_STEPS` iterations from `x0`,
/// or from a random point on the attractor drawn with `seed`.
pub fn ogy_stabilize_henon(hp: &HenonParams, x0: Option<[f64; 2]>, n_steps: usize, seed: u64) -> Result<OgyTrace> {
    if !(hp.delta > 0.0) || !(hp.cap >= 0.0) {
        return Err(Error::InvalidArgument("delta must be positive and the kick cap nonnegative".into()));
    }
    let xs = henon_fixed_point(hp.p0, hp.b);
    let (mut x, mut y) = match x0 {
        Some([x, y]) => (x, y),
        None => attractor_point(hp.p0, hp.b, seed),
    };
    let total = n_steps + HOLD_STEPS;
    let mut tr = OgyTrace {
        fixed_point: xs,
        x: Vec::with_capacity(total + 1),
        y: Vec::with_capacity(total + 1),
        dp: Vec::with_capacity(total),
        capture_step: 0,
        post_capture_deviation: 0.0,
        max_kick: 0.0,
    };
    tr.x.push(x);
    tr.y.push(y);
    for _ in 0..total {
        let (z1, z2) = (x - xs, y - xs);
        let mut dp = 0.0;
        if z1.hypot(z2) <= hp.delta {
            let kick = hp.gain[0] * z1 + hp.gain[1] * z2;
            if kick.abs() <= hp.cap {
                dp = kick;
            }
        }
        assert!(dp.abs() <= hp.cap, "kick exceeds cap");
        (x, y) = (hp.p0 + dp + hp.b * y - x * x, x);
        if !x.is_finite() || x.abs() > 1e6 {
            return Err(Error::NoCapture { steps: n_steps });
        }
        tr.dp.push(dp);
        tr.max_kick = tr.max_kick.max(dp.abs());
        tr.x.push(x);
        tr.y.push(y);
    }
    let near = |k: usize| (tr.x[k] - xs).abs() < 1e-3 && (tr.y[k] - xs).abs() < 1e-3;
    let mut start = total + 1;
    while start > 0 && near(start - 1) {
        start -= 1;
    }
    if start > n_steps {
        return Err(Error::NoCapture { steps: n_steps });
    }
    tr.capture_step = start;
    tr.post_capture_deviation = tr.x[start..start + HOLD_STEPS].iter().map(|v| (v - xs).abs()).fold(0.0, f64::max);
    Ok(tr)
}

fn attractor_point(p: f64, b: f64, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let (mut x, mut y) = (r.random_range(-0.1..0.1), r.random_range(-0.1..0.1));
    for _ in 0..1000 {
        (x, y) = (p + b * y - x * x, x);
    }
    (x, y)
}

/// Largest Lyapunov exponent of the uncontrolled map from two nearby
/// orbits renormalised every step.
pub fn henon_lyapunov(p: f64, b: f64, n_steps: usize, seed: u64) -> f64 {
    let d0 = 1e-9;
    let (mut x, mut y) = attractor_point(p, b, seed);
    let (mut xp, mut yp) = (x + d0, y);
    let mut sum = 0.0;
    for _ in 0..n_steps {
        (x, y) = (p + b * y - x * x, x);
        (xp, yp) = (p + b * yp - xp * xp, xp);
        let d = (xp - x).hypot(yp - y);
        sum += (d / d0).ln();
        xp = x + (xp - x) * d0 / d;
        yp = y + (yp - y) * d0 / d;
    }
    sum / n_steps as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_oracle() {
        let x = henon_fixed_point(1.4, 0.3);
        assert!((x - (-0.7 + 6.09f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((x * x + 0.7 * x - 1.4).abs() < 1e-14);
        assert!((x - 0.8839).abs() < 1e-4);
    }

    #[test]
    fn gain_places_closed_loop_eigenvalues() {
        let hp = HenonParams::new(1.4, 0.3);
        let x = henon_fixed_point(1.4, 0.3);
        // Closed loop [[-2x + c1, b + c2], [1, 0]].
        let tr = -2.0 * x + hp.gain[0];
        let det = -(0.3 + hp.gain[1]);
        assert!(det.abs() < 1e-15);
        assert!(tr.abs() < 1.0);
    }

    #[test]
    fn uncontrolled_lyapunov() {
        let l = henon_lyapunov(1.4, 0.3, 200_000, 3);
        assert!((l - 0.42).abs() < 0.03, "{l}");
    }

    #[test]
    fn captures_and_holds() {
        let hp = HenonParams::new(1.4, 0.3);
        let mut captured = 0;
        for seed in 0..10 {
            if let Ok(tr) = ogy_stabilize_henon(&hp, None, 2000, seed) {
                assert!(tr.max_kick <= hp.cap);
                assert!(tr.post_capture_deviation < 1e-3);
                captured += 1;
            }
        }
        assert!(captured >= 8, "{captured}");
    }

    #[test]
    fn no_control_no_capture() {
        let mut hp = HenonParams::new(1.4, 0.3);
        hp.cap = 0.0;
        assert!(matches!(ogy_stabilize_henon(&hp, None, 2000, 1), Err(Error::NoCapture { .. })));
    }

    #[test]
    fn start_at_fixed_point_is_captured_immediately() {
        let hp = HenonParams::new(1.4, 0.3);
        let x = henon_fixed_point(1.4, 0.3);
        let tr = ogy_stabilize_henon(&hp, Some([x, x]), 10, 0).unwrap();
        assert_eq!(tr.capture_step, 0);
    }
}
