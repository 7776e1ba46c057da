//! Driver nodes of a small regulatory network and of a random digraph:
//! matching-based drivers, the controllability check, link and node
//! classes, the control profile and actuator placement.
//!
//! Run with `cargo run --example structural_drivers`.

use netctl::graph::generate::erdos_renyi_directed;
use netctl::graph::parse_digraph;
use netctl::structural::{
    classify_links, classify_nodes, control_profile, min_actuators, min_driver_set, structural_controllability_check,
};

fn main() -> netctl::Result<()> {
    let text = include_str!("data/regulation.edges");
    let g = parse_digraph(text)?;
    let report = min_driver_set(&g);
    let names: Vec<&str> = report.drivers.iter().map(|&i| g.label(i)).collect();
    println!("regulation network: N = {}, drivers {:?}", g.n_nodes(), names);

    // Unmatched nodes fix how many inputs are needed. An input may also
    // have to touch a matched cycle that no driver reaches, which is the
    // case for the cycle x1 -> x2 -> x3 here.
    let verdict = structural_controllability_check(&g, &report.drivers)?;
    println!("one input per driver only: {verdict:?}");
    let act = min_actuators(&g);
    let names: Vec<&str> = act.actuators.iter().map(|&i| g.label(i)).collect();
    let verdict = structural_controllability_check(&g, &act.actuators)?;
    println!("actuators {names:?}: controllable {}", verdict.is_controllable());

    let links = classify_links(&g);
    for (e, tag) in g.edges().iter().zip(&links.tags) {
        println!("  {} -> {}: {:?}", g.label(e.src), g.label(e.dst), tag);
    }
    let nodes = classify_nodes(&g);
    println!(
        "node classes: critical {:.2}, intermittent {:.2}, redundant {:.2}",
        nodes.critical, nodes.intermittent, nodes.redundant
    );

    println!("actuators: {} (drivers {}, root SCCs {})", act.n_actuators, act.n_drivers, act.beta);

    println!("\nrandom digraphs, N = 2000:");
    println!("{:>6} {:>8} {:>8} {:>8} {:>8}", "<k>", "n_D", "eta_s", "eta_e", "eta_i");
    for k in [1.0, 2.0, 4.0, 8.0] {
        let g = erdos_renyi_directed(2000, k, 7);
        let r = min_driver_set(&g);
        let p = control_profile(&g);
        println!(
            "{k:>6} {:>8.4} {:>8.3} {:>8.3} {:>8.3}",
            r.n_drivers as f64 / 2000.0,
            p.eta_s,
            p.eta_e,
            p.eta_i
        );
    }
    Ok(())
}
