//! Gramian, minimum-energy input and energy bounds for a directed chain
//! driven from its head, and the growth of the worst-case energy with the
//! chain length.
//!
//! Run with `cargo run --example control_energy`.

use nalgebra::{DMatrix, DVector};
use netctl::energy::{energy_bounds, energy_spectrum, gramian, log_log_slope, min_energy_input};
use netctl::exact::DenseSystem;

/// Chain `0 -> 1 -> ... -> n-1` with unit weights and self-decay `-d`.
fn chain(n: usize, d: f64) -> DMatrix<f64> {
    let mut a = DMatrix::from_diagonal_element(n, n, -d);
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    a
}

fn main() -> netctl::Result<()> {
    let sys = DenseSystem::with_drivers(chain(4, 1.0), &[0])?;
    let g = gramian(&sys, 2.0)?;
    let eta: Vec<String> = g.eta.iter().map(|v| format!("{v:.3e}")).collect();
    println!("gramian eigenvalues (T = 2): {}", eta.join(", "));

    let target = DVector::from_vec(vec![1.0, 1.0, 1.0, 1.0]);
    let tr = min_energy_input(&sys, &DVector::zeros(4), &target, 2.0, 2000)?;
    println!(
        "steer 0 -> 1: energy {:.4} (quadrature {:.4}), terminal error {:.1e}",
        tr.energy, tr.energy_quadrature, tr.terminal_error
    );

    println!("\nworst-case energy against chain length, T = 1:");
    let mut points = Vec::new();
    for n in 2..=6 {
        let b = energy_bounds(&DenseSystem::with_drivers(chain(n, 1.0), &[0])?, 1.0)?;
        let e_max = b.e_max.unwrap_or(f64::INFINITY);
        println!("  N = {n}: E_min = {:.3e}, E_max = {:.3e}", b.e_min, e_max);
        points.push((n as f64, e_max));
    }
    println!("log-log slope of E_max: {:.2}", log_log_slope(&points));

    let s = energy_spectrum(&DenseSystem::with_drivers(chain(6, 1.0), &[0, 3])?, 1.0, 6)?;
    println!("\nenergy spectrum with drivers {{0, 3}}:");
    for e in &s.energies {
        println!("  E = {:.3e} along node {}", e.energy, e.dominant_node);
    }
    Ok(())
}
