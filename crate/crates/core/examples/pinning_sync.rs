//! Synchronisability and pinning control: eigenratios of coupling
//! matrices, pinned eigenratios against the pinning gain, and a simulated
//! ring of Rossler oscillators pinned to a reference orbit.
//!
//! Run with `cargo run --release --example pinning_sync`.

use netctl::collective::{
    coupling_matrix, msf_eigenratio, pinning_eigenratio, pinning_nodes, pinning_sync_simulate, PinningConfig,
    PinningStrategy,
};
use netctl::graph::generate::{barabasi_albert, complete, ring, star};
use netctl::ode::{rossler, trajectory};

fn main() -> netctl::Result<()> {
    for (name, g) in [("ring(20)", ring(20)), ("star(20)", star(20)), ("complete(20)", complete(20))] {
        let r = msf_eigenratio(&coupling_matrix(&g))?;
        println!("{name:<13} lambda_2 = {:.4}  lambda_N = {:.2}  R = {:.2}", r.lambda2, r.lambda_max, r.ratio);
    }

    let ba = barabasi_albert(1000, 3, 0);
    let c = coupling_matrix(&ba);
    println!("\nBA N = 1000, 5% pinned:");
    for strategy in [PinningStrategy::Degree, PinningStrategy::Random] {
        let pinned = pinning_nodes(&ba, 0.05, strategy, 0);
        let ratios: Vec<String> = [0.1, 1.0, 10.0, 100.0]
            .iter()
            .map(|&k| pinning_eigenratio(&PinningConfig::uniform(c.clone(), 1.0, k, pinned.clone())).map(|r| format!("{:.0}", r.ratio)))
            .collect::<netctl::Result<_>>()?;
        println!("  {strategy:?}: R over kappa = 0.1, 1, 10, 100: {}", ratios.join(", "));
    }

    let osc = rossler(0.2, 0.2, 5.7);
    let s0 = trajectory(&osc, &[1.0, 1.0, 1.0], 0.0, &[100.0])?.remove(0);
    let x0: Vec<Vec<f64>> = (0..10).map(|i| s0.iter().map(|v| v + 0.1 * (i as f64 - 4.5)).collect()).collect();
    let cfg = PinningConfig::uniform(coupling_matrix(&ring(10)), 1.0, 0.01, vec![0, 5]);
    let fixed = pinning_sync_simulate(&cfg, &osc, &[1.0; 3], &s0, &x0, 100.0, 100, None)?;
    let adaptive = pinning_sync_simulate(&cfg, &osc, &[1.0; 3], &s0, &x0, 100.0, 100, Some(&[1.0; 10]))?;
    println!("\nRossler ring, two pinned nodes, kappa_0 = 0.01:");
    println!("  fixed gains:    final error {:.2e}", fixed.error.last().unwrap_or(&f64::NAN));
    println!(
        "  adaptive gains: final error {:.2e}, gains grew to {:.3?}",
        adaptive.error.last().unwrap_or(&f64::NAN),
        adaptive.gains.last().unwrap_or(&vec![])
    );
    Ok(())
}
