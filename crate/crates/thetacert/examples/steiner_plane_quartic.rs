//! Steiner-set certification on the 28 bitangents of a plane quartic.
//!
//! Run with `cargo run --release --example steiner_plane_quartic`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thetacert::char2::TwoTorsion;
use thetacert::linalg_cert::MachineEps;
use thetacert::steiner_cert::{certify_steiner, IdealData, SteinerConfig, SyzygyThresholds, ThetaDivisor};
use thetacert::synthetic::{label_bitangents, plane_quartic};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pq = plane_quartic(&mut rng).expect("28 bitangents");
    // A level structure read off from which tetrads lie on conics.
    let labels = label_bitangents(&pq.bitangents, 1e-9).expect("consistent labelling");
    let thetas: Vec<ThetaDivisor> = pq
        .bitangents
        .iter()
        .zip(&labels)
        .map(|(b, ch)| ThetaDivisor { characteristic: *ch, points: b.contacts.to_vec(), accuracy: 1e-13 })
        .collect();

    let ideal = IdealData::new(3, vec![], vec![pq.coeffs.clone()]).unwrap();
    let cfg = SteinerConfig { thresholds: SyzygyThresholds { eps: 1e-8, a: 1e-4 }, eps: MachineEps::default() };
    let alphas: Vec<TwoTorsion> = TwoTorsion::all_nonzero(3).into_iter().step_by(7).collect();
    for v in certify_steiner(&thetas, &ideal, &alphas, &cfg).unwrap() {
        let m = &v.measurements;
        println!(
            "{}: {:?}  eps {:.2e}  A {:.2e}  B {:.2e}  tests {}",
            v.alpha,
            v.verdict,
            m.eps_measured,
            m.a_measured,
            m.b.unwrap_or(f64::NAN),
            m.tests
        );
    }
}
