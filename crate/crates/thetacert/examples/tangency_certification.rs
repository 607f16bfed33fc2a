//! Certify a noisy 4-tangent hyperplane of a genus-5 canonical curve.
//!
//! Run with `cargo run --example tangency_certification`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thetacert::curve_local::{conic_jet, project_to_curve};
use thetacert::linalg_cert::matrix::{normalize, projective_distance};
use thetacert::linalg_cert::{MachineEps, C64};
use thetacert::synthetic::{multitangent_genus5, random_vector};
use thetacert::tangency_cert::{certify_hyperplane, refine_step, solve_x_prime, HyperplaneCandidate, TangencyConfig};

fn nudge(v: &[C64], size: f64, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let d = normalize(&random_vector(rng, v.len()));
    normalize(&v.iter().zip(&d).map(|(a, b)| a + size * b).collect::<Vec<_>>())
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mc = multitangent_genus5(&mut rng);

    // Computed data: curve points near the contacts, and a nearby hyperplane.
    let noise = 1e-6;
    let points: Vec<Vec<C64>> = mc
        .points
        .iter()
        .map(|p| normalize(&project_to_curve(&nudge(p, noise, &mut rng), &mc.ideal, 1e-15).unwrap()))
        .collect();
    let (cand, _) = HyperplaneCandidate::new(nudge(&mc.hyperplane, noise, &mut rng), points, None).unwrap();

    let cert = certify_hyperplane(&cand, &mc.ideal, &TangencyConfig::default()).unwrap();
    println!("verdict: {:?} {}", cert.status.verdict, cert.status.reason);
    println!("eps_x = {:.3e}", cert.eps_x);
    println!("point bound      {:.3e}", cert.point_bound);
    println!("hyperplane bound {:.3e}, actual {:.3e}", cert.hyperplane_bound, projective_distance(&cand.coeffs, &mc.hyperplane));
    println!("odd: {:?}", cert.odd);

    // One refinement step from the same data.
    let jets: Vec<_> = cand.points.iter().map(|p| conic_jet(p, &mc.ideal, MachineEps::default()).unwrap()).collect();
    let x = solve_x_prime(&cand.coeffs, &jets, MachineEps::default()).unwrap();
    let step = refine_step(&cand.coeffs, &jets, &x, &mc.ideal).unwrap();
    println!(
        "refinement: residual {:.3e} -> {:.3e} (ratio {:.3}), distance to truth {:.3e}",
        step.residual_before,
        step.residual_after,
        step.ratio,
        projective_distance(&step.hyperplane, &mc.hyperplane)
    );
}
