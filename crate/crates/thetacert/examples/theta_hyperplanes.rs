//! Theta values and the hyperplanes given by gradients of odd theta functions.
//!
//! Run with `cargo run --example theta_hyperplanes`.

use thetacert::linalg_cert::{ComplexMatrix, C64};
use thetacert::theta_eval::{theta_hyperplanes, theta_with_char, truncation_radius, RiemannMatrix};

fn main() {
    let tau = ComplexMatrix::from_rows(&[
        vec![C64::new(0.3, 1.1), C64::new(-0.2, 0.4)],
        vec![C64::new(-0.2, 0.4), C64::new(0.1, 0.9)],
    ])
    .unwrap();
    let rm = RiemannMatrix::new(tau, Some(ComplexMatrix::identity(2))).unwrap();
    println!("smallest eigenvalue of Im tau: {:.4}", rm.lambda_min());
    println!("lattice radius for 1e-14: {:.3}", truncation_radius(&rm, 1e-14).unwrap());

    let z = [C64::new(0.1, 0.0), C64::new(0.0, -0.2)];
    let v = theta_with_char(&[0, 1], &[1, 1], &z, &rm, 1e-14).unwrap();
    println!("theta[01;11](z) = {:.12} (tail <= {:.1e})", v.value, v.tail_bound);

    // Genus 2 has six odd characteristics, one hyperplane each.
    for h in theta_hyperplanes(&rm, 1e-13).unwrap() {
        let c: Vec<String> = h.coeffs.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
        println!("{}  [{}]", h.characteristic, c.join(", "));
    }
}
