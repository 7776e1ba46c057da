//! Stabilising unstable orbits inside chaotic attractors: OGY kicks on the
//! Henon map and delayed feedback on the Rossler flow.
//!
//! Run with `cargo run --release --example chaos_control`.

use netctl::ode::rossler;
use netctl::steering::{henon_lyapunov, ogy_stabilize_henon, pyragas_feedback, rossler_upo, HenonParams};

fn main() -> netctl::Result<()> {
    println!("Henon map, p = 1.4, b = 0.3: Lyapunov exponent {:.3}", henon_lyapunov(1.4, 0.3, 100_000, 0));
    let hp = HenonParams::new(1.4, 0.3);
    for seed in 0..5 {
        match ogy_stabilize_henon(&hp, None, 2000, seed) {
            Ok(tr) => println!(
                "  seed {seed}: captured at step {:>4}, largest kick {:.4} (cap {:.4})",
                tr.capture_step, tr.max_kick, hp.cap
            ),
            Err(e) => println!("  seed {seed}: {e}"),
        }
    }

    let sys = rossler(0.2, 0.2, 5.7);
    let upo = rossler_upo(&sys, &[1.0, 1.0, 0.0])?;
    println!("\nRossler period-one orbit: T = {:.4}", upo.period);
    for k in [0.0, -0.05, -0.2, -0.5] {
        let tr = pyragas_feedback(&sys, 1, k, upo.period, 400.0, &[1.0, 1.0, 0.0], 0.01)?;
        let u_end = tr.u.last().copied().unwrap_or(0.0);
        println!("  K = {k:+.2}: |y(t) - y(t - T)| = {:.2e}, final control {u_end:+.2e}", tr.mismatch);
    }
    Ok(())
}
