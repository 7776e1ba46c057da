//! Luenberger observer reconstructing the state of a third-order system
//! from its first coordinate.
//!
//! Run with `cargo run --example state_observer`.

use nalgebra::{DMatrix, DVector};
use netctl::exact::DenseSystem;
use netctl::observability::luenberger_observe;

fn main() -> netctl::Result<()> {
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, -1.0, -2.0, -3.0]);
    let b = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
    let c = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
    let sys = DenseSystem::new(a, b, Some(c))?;
    let l = DMatrix::from_column_slice(3, 1, &[3.0, 3.0, -6.0]);
    let x0 = DVector::from_vec(vec![1.0, -1.0, 0.5]);
    let z0 = DVector::zeros(3);
    let tr = luenberger_observe(&sys, &l, &x0, &z0, |t| DVector::from_element(1, t.sin()), 10.0, 1000)?;
    for k in (0..=1000).step_by(100) {
        println!("t = {:>5.1}  |x - z| = {:.3e}", tr.t[k], tr.error[k]);
    }
    Ok(())
}
