//! Sensor placement for a reaction network and for an undirected grid:
//! inference diagram, root-SCC sensors, a target sensor, a dominating set
//! and the observability transition of a random graph.
//!
//! Run with `cargo run --release --example sensor_placement`.

use netctl::graph::generate::erdos_renyi_undirected;
use netctl::graph::parse_ungraph;
use netctl::observability::{
    inference_diagram, mds_solve, min_sensors, observability_threshold, observability_transition, parse_reactions,
    target_sensor,
};

fn main() -> netctl::Result<()> {
    let sys = parse_reactions(include_str!("data/eleven_species.rxn"))?;
    println!("{} species, {} elementary reactions", sys.species.len(), sys.reactions.len());
    let g = inference_diagram(&sys);
    let r = min_sensors(&g);
    let name = |i: &usize| g.label(*i).to_string();
    println!("root SCCs: {:?}", r.root_sccs.iter().map(|c| c.iter().map(name).collect::<Vec<_>>()).collect::<Vec<_>>());
    println!("sensors {:?}, {} equivalent choices", r.sensors.iter().map(name).collect::<Vec<_>>(), r.multiplicity);

    let d = g.indices_of(&["D"])?;
    let t = target_sensor(&g, &d)?;
    println!("cheapest sensor for D: {} (reaches {} species)", g.label(t.sensor), t.cost);

    let grid = parse_ungraph(include_str!("data/grid.edges"))?;
    let m = mds_solve(&grid);
    println!("\n3x3 grid dominating set: {:?} (exact: {})", m.nodes, m.exact);

    let er = erdos_renyi_undirected(5000, 4.0, 11);
    println!("\nER N = 5000, <k> = 4, largest observable component:");
    for phi in [0.05, 0.1, 0.15, 0.2, 0.3] {
        println!("  phi = {phi:.2}: {:.3}", observability_transition(&er, phi, 10, 0)?);
    }
    println!("half-observed at phi = {:.3}", observability_threshold(&er, 10, 0)?);
    Ok(())
}
