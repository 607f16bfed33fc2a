//! The local conic model of a space curve and how well it tracks the curve.
//!
//! Run with `cargo run --example conic_jet`.

use thetacert::curve_local::{closest_point_oracle, conic_jet};
use thetacert::linalg_cert::matrix::{norm, sub_vec};
use thetacert::linalg_cert::{MachineEps, C64};
use thetacert::synthetic::{elliptic_quartic, elliptic_quartic_point};

fn main() {
    let ideal = elliptic_quartic();
    let p = elliptic_quartic_point(C64::new(0.4, -0.2));
    let jet = conic_jet(&p, &ideal, MachineEps::default()).unwrap();
    println!("|R| = {:.4}, r_x = {:.4e}, kappa0 = {:.4}, kappa1 = {:.4}", jet.c, jet.r_x, jet.kappa0, jet.kappa1);

    println!("{:>10} {:>12} {:>12}", "|x|", "|P_x - v_x|", "kappa0|x|^3");
    for f in [0.01, 0.1, 0.5, 0.9] {
        let x = C64::new(f * jet.r_x, 0.0);
        let px = jet.model(x);
        let vx = closest_point_oracle(&px, &ideal, 1e-15).unwrap();
        println!("{:10.3e} {:12.4e} {:12.4e}", x.norm(), norm(&sub_vec(&px, &vx)), jet.kappa0 * x.norm().powi(3));
    }
}
