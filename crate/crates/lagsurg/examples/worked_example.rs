//! The immersed-circle worked example, end to end.
//!
//! An immersed circle with three self-intersection points bounds a central
//! region of area 2, three lobes of area 1, and a strip through its 0-cell.
//! The candidate cochain `b_0 = i q^{1/2} 1_grey + i q^{-1/2}(x + xp + xpp)`
//! is weakly bounding with disk potential `W_0 = i q^{1/2}`, and the
//! surgery at `x` (neck area 1/2, local system weight i) preserves both.
//!
//! Run with `cargo run --example worked_example`.

use lagsurg::examples::immersed_circle;
use lagsurg::mc;
use lagsurg::surgery::{psi, TransformOptions};

fn main() {
    let bundle = immersed_circle();

    println!("== before surgery ==");
    let residual = mc::mc_residual(&bundle.algebra, &bundle.candidate).unwrap();
    for (name, v) in residual.iter() {
        println!("residual[{name}] = {v}");
    }
    let (w0, flat0) = mc::potential(&bundle.algebra, &bundle.candidate).unwrap();
    println!("W_0 = {w0} (projectively flat: {flat0})");

    // The cochain transform in the dimension-1 example regime simply
    // removes the smoothed corner; the surgered atlas is written by hand.
    let mut opts = TransformOptions::default();
    opts.example_mode = true;
    let data = bundle.surgery.as_ref().unwrap();
    let b_eps = psi(&bundle.algebra, &bundle.candidate, data, &opts).unwrap();
    println!("\n== the transformed cochain ==");
    for (name, v) in b_eps.iter() {
        println!("b_eps[{name}] = {v}");
    }

    println!("\n== after surgery ==");
    let (alg_eps, cand_eps) = bundle.surgered.as_ref().unwrap();
    assert!(b_eps.approx_eq(&cand_eps.b, 1e-12));
    for (label, y) in alg_eps.local_system() {
        println!("y_eps[{label}] = {y}");
    }
    let residual = mc::mc_residual(alg_eps, cand_eps).unwrap();
    for (name, v) in residual.iter() {
        println!("residual[{name}] = {v}");
    }
    let (w_eps, flat_eps) = mc::potential(alg_eps, cand_eps).unwrap();
    println!("W_eps = {w_eps} (projectively flat: {flat_eps})");
}
