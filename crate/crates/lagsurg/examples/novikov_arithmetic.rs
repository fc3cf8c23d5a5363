//! Arithmetic in the truncated Novikov field.
//!
//! Elements are finite sums `sum_j c_j q^{e_j}` with complex coefficients
//! and exact rational exponents, truncated at a fixed order.  Units (lowest
//! exponent with nonzero coefficient) invert, and units of valuation zero
//! have logarithms and exponentials as truncated series.
//!
//! Run with `cargo run --example novikov_arithmetic`.

use num_complex::Complex64;
use lagsurg::novikov::{r, NovikovElement};

fn main() {
    let trunc = r(4, 1);

    // 1 + 2 q^{1/2} - q^{3/2}, truncated at q^4.
    let a = NovikovElement::one()
        + NovikovElement::monomial(r(1, 2), Complex64::new(2.0, 0.0))
        + NovikovElement::monomial(r(3, 2), Complex64::new(-1.0, 0.0));
    let a = a.truncate(trunc);
    println!("a       = {a}");

    let inv = a.invert().unwrap();
    println!("a^-1    = {inv}");
    println!("a a^-1  = {}", (a.clone() * inv).truncate(trunc));

    // log and exp are mutually inverse on valuation-zero units.
    let log = a.log_unit(0).unwrap();
    println!("log a   = {log}");
    let back = log.exp_series().unwrap();
    println!("exp log = {back}");
    assert!(back.approx_eq(&a, 1e-12));

    // Negative exponents participate in the valuation.
    let b = NovikovElement::monomial(r(-1, 2), Complex64::new(0.0, 1.0));
    let product = (a * b).truncate(trunc);
    println!("i q^(-1/2) a = {product}");
    println!("val_q = {}", product.val_q().unwrap());
}
