//! Vicsek flocking: the order parameter against noise, and followers
//! aligning with a leader of fixed heading.
//!
//! Run with `cargo run --release --example flocking`.

use netctl::collective::{vicsek_leader_run, vicsek_order_parameter, VicsekParams};

fn main() {
    println!("N = 300, L = 7, v0 = 0.03, r = 1:");
    for eta in [0.1, 1.0, 2.0, 3.0, 4.0, 5.0] {
        let p = VicsekParams { n: 300, l: 7.0, v0: 0.03, r: 1.0, eta, seed: 1 };
        let s = vicsek_order_parameter(p, 1000, None);
        println!("  eta = {eta:.1}: phi = {:.3} +/- {:.3}", s.mean, s.stderr);
    }

    let p = VicsekParams { n: 30, l: 2.0, v0: 0.03, r: 1.0, eta: 0.0, seed: 0 };
    let tr = vicsek_leader_run(p, 0.5, 500);
    println!("\nleader heading 0.5, largest follower deviation:");
    for k in [0, 10, 50, 100, 500] {
        println!("  step {k:>3}: {:.3e}", tr.max_deviation[k]);
    }
}
