//! Exact driver counts from eigenvalue multiplicities for weighted and
//! symmetric networks, where structural counts can be too optimistic.
//!
//! Run with `cargo run --example exact_drivers`.

use netctl::exact::{eigen_table, kalman_rank, pbh_min_drivers, self_loop_sweep, DenseSystem};
use netctl::graph::generate::{complete, erdos_renyi_undirected, ring, star};
use netctl::graph::UnGraph;
use netctl::structural::min_driver_set;

fn report(name: &str, g: &UnGraph) -> netctl::Result<()> {
    let a = g.adjacency_matrix();
    let p = pbh_min_drivers(&a)?;
    let structural = min_driver_set(&g.to_digraph()).n_drivers;
    let sys = DenseSystem::with_drivers(a, &p.unit_input_drivers)?;
    println!(
        "{name:<14} N = {:>3}  exact N_D = {:>3}  structural = {:>3}  lambda_M = {:+.3}  kalman ok: {}",
        g.n_nodes(),
        p.n_drivers,
        structural,
        p.lambda_re,
        kalman_rank(&sys).controllable
    );
    Ok(())
}

fn main() -> netctl::Result<()> {
    report("star", &star(10))?;
    report("ring", &ring(12))?;
    report("complete", &complete(8))?;
    report("ER <k>=2", &erdos_renyi_undirected(200, 2.0, 1))?;

    let t = eigen_table(&star(6).adjacency_matrix())?;
    println!("\nstar(6) eigenvalues:");
    for c in &t.clusters {
        println!("  {:+.4}  algebraic {}  geometric {}", c.re, c.algebraic, c.geometric);
    }

    // Identical self-loops on every node only shift the spectrum; mixing
    // two loop weights breaks degeneracies.
    let a = erdos_renyi_undirected(100, 2.0, 3).adjacency_matrix();
    let seeds: Vec<u64> = (0..5).collect();
    for (w, d) in [(vec![1.0], vec![1.0]), (vec![1.0, 0.0], vec![0.5, 0.5]), (vec![1.0, 2.0, 0.0], vec![0.3, 0.3, 0.4])] {
        let s = self_loop_sweep(&a, &w, &d, &seeds)?;
        println!("self-loops {w:?} at {d:?}: mean n_D = {:.3}", s.mean_n_d);
    }
    Ok(())
}
