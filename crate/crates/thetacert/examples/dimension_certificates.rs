//! Dimension bookkeeping and rank certificates on planted subspaces.
//!
//! Run with `cargo run --release --example dimension_certificates`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thetacert::char2::TwoTorsion;
use thetacert::dimension_cert::{all_steiner_cert, codimension_cert, dimension_table, SteinerKernel};
use thetacert::linalg_cert::MachineEps;
use thetacert::synthetic::{planted_kernels, planted_row_space};

fn main() {
    let eps = MachineEps::default();
    println!("{:>3} {:>8} {:>8} {:>8} {:>8}", "g", "d_alpha", "columns", "rank", "stacked");
    for g in 4..=9 {
        let t = dimension_table(g).unwrap();
        println!(
            "{g:3} {:8} {:8} {:8} {:8}",
            t.d_alpha,
            t.dim_sym2sym2_canonical,
            t.rank_target(),
            t.stacked_target()
        );
    }

    // A 60x40 matrix whose rows miss a 7-dimensional subspace, plus noise.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (m, _) = planted_row_space(&mut rng, 40, 7, 60, 1e-10);
    let errs = vec![1e-10; 60];
    for codim in [7, 6] {
        let c = codimension_cert(&m, &errs, codim, eps).unwrap();
        println!(
            "codim {codim}: {:?}  sigma_{} >= {:.3e}, kernel accuracy {:.3e}",
            c.verdict, c.rank_index, c.sigma_rank.lower, c.eps2prime
        );
    }

    // Eight 7-dimensional kernels inside the complement of a common 12-space.
    let (bases, _) = planted_kernels(&mut rng, 40, 12, 8, 7, 1e-10);
    let alphas = TwoTorsion::all_nonzero(3);
    let kernels: Vec<SteinerKernel> = bases
        .into_iter()
        .zip(alphas)
        .map(|(basis, alpha)| SteinerKernel { alpha, basis, eps2prime: 1e-10 })
        .collect();
    for target in [28, 29] {
        let s = all_steiner_cert(&kernels, target, eps).unwrap();
        println!("stacked rank {target}: {:?} (sigma lower {:.3e})", s.verdict, s.sigma_target.lower);
    }
}
