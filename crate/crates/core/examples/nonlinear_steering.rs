//! Steering nonlinear systems between attractors: open-loop entrainment,
//! a compensatory shift of the initial state, and clamping a feedback
//! vertex set of a genetic toggle switch.
//!
//! Run with `cargo run --release --example nonlinear_steering`.

use nalgebra::DMatrix;
use netctl::graph::DiGraph;
use netctl::ode::{bistable, find_attractors, rossler, time_grid, toggle_switch};
use netctl::steering::{
    compensatory_perturbation, fvs_clamp, fvs_find, hubler_input, ClampTarget, CompensationSpec, FvsMode,
};

fn main() -> netctl::Result<()> {
    // Entrain the Rossler flow onto a circle in the (x, y) plane.
    let sys = rossler(0.2, 0.2, 5.7);
    let goal = |t: f64| vec![2.0 * t.cos(), 2.0 * t.sin(), 0.5];
    let rate = |t: f64| vec![-2.0 * t.sin(), 2.0 * t.cos(), 0.0];
    let tr = hubler_input(&sys, &DMatrix::identity(3, 3), goal, rate, &goal(0.0), 20.0, 2000)?;
    let worst = tr.error.iter().copied().fold(0.0, f64::max);
    println!("entrainment onto a circle: largest tracking error {worst:.2e}");

    // Cross the barrier of x' = x - x^3 with positive shifts only.
    let spec = CompensationSpec { lower: vec![0.0], upper: vec![1.0], ..CompensationSpec::free(1, 1e-2, 20.0, 50) };
    let c = compensatory_perturbation(&bistable(), &[-0.5], &[1.0], &spec)?;
    println!("bistable switch: start shifted by {:+.3} after {} iterations", c.shift[0], c.iterations);

    // Toggle switch: two mutually repressing genes.
    let toggle = toggle_switch(3.0, 2.0);
    let found = find_attractors(&toggle, &[vec![3.0, 0.1], vec![0.1, 3.0]], 80.0, 1e-6)?;
    let (hi, lo) = (&found[0].0, &found[1].0);
    println!("toggle attractors: {hi:.3?} and {lo:.3?}");
    let g = DiGraph::from_edges(2, &[(0, 1), (1, 0)])?;
    let fvs = fvs_find(&g, FvsMode::Exact)?;
    let t = time_grid(30.0, 300);
    let target = ClampTarget::from_orbit(&toggle, lo, &t, &fvs.nodes)?;
    let run = fvs_clamp(&toggle, &fvs.nodes, &target, hi)?;
    println!("clamping gene {:?}: distance to the other attractor {:.2e}", fvs.nodes, run.terminal_distance);
    Ok(())
}
