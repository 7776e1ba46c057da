//! Cavity estimate of the driver fraction against sampled networks for
//! Erdos-Renyi and static scale-free ensembles, with the large-degree
//! asymptote alongside.
//!
//! Run with `cargo run --release --example cavity_sweep`.

use netctl::cavity::{cavity_sweep, nd_asymptotic, Ensemble};

fn main() -> netctl::Result<()> {
    let seeds: Vec<u64> = (0..5).collect();
    for ens in [Ensemble::ErdosRenyi, Ensemble::StaticScaleFree { gamma: 3.0 }] {
        println!("{ens:?}");
        println!("{:>6} {:>10} {:>10} {:>8} {:>10}", "<k>", "cavity", "sampled", "stderr", "asymptote");
        let rows = cavity_sweep(ens, &[1.0, 2.0, 4.0, 6.0, 8.0], 5000, &seeds)?;
        for r in rows {
            println!(
                "{:>6} {:>10.5} {:>10.5} {:>8.5} {:>10.5}",
                r.k_mean,
                r.n_d_cavity,
                r.n_d_simulated.unwrap_or(f64::NAN),
                r.stderr.unwrap_or(f64::NAN),
                nd_asymptotic(ens, r.k_mean)
            );
        }
        println!();
    }
    Ok(())
}
