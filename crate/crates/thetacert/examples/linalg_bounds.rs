//! Singular value enclosures, pseudo-kernels and a bounded least-squares solve.
//!
//! Run with `cargo run --example linalg_bounds`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thetacert::linalg_cert::matrix::{norm, sub_vec};
use thetacert::linalg_cert::{
    pseudo_kernel_basis, sigma_interval_all, solve_ls_with_bound, svd, weyl_gap, ComplexMatrix, MachineEps, C64,
};
use thetacert::synthetic::{random_unitary, random_vector};

fn main() {
    let eps = MachineEps::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // A 6x4 matrix with singular values 3, 1, 0.5 and a tiny fourth one.
    let values = [3.0, 1.0, 0.5, 1e-9];
    let (u, v) = (random_unitary(&mut rng, 6), random_unitary(&mut rng, 4));
    let a = ComplexMatrix::from_fn(6, 4, |i, j| (0..4).map(|k| u[(i, k)] * values[k] * v[(j, k)].conj()).sum());

    // Suppose each row is only known to 1e-12.
    let row_errors = vec![1e-12; 6];
    let s = svd(&a).unwrap();
    for (k, b) in sigma_interval_all(&s, 6, &row_errors, eps).unwrap().iter().enumerate() {
        println!("sigma_{} in [{:.3e}, {:.3e}] (planted {:.1e})", k + 1, b.lower, b.upper, values[k]);
    }

    let kernel = pseudo_kernel_basis(&a, 1e-6, eps).unwrap();
    println!("pseudo-kernel below 1e-6 has dimension {}", kernel.dim);

    let e = ComplexMatrix::from_fn(6, 4, |i, j| C64::new(1e-10 * (i as f64 - j as f64), 0.0));
    println!("Weyl bound for |sigma_i(A+E) - sigma_i(A)|: {:.3e}", weyl_gap(&a, &e, 0, eps).unwrap());

    // A well-conditioned tall system: the bound covers the actual deviation.
    let b = ComplexMatrix::from_fn(6, 3, |i, j| u[(i, j)] * (j + 1) as f64);
    let x0 = random_vector(&mut rng, 3);
    let y = b.matvec(&x0).unwrap();
    let dy: Vec<C64> = y.iter().map(|z| z * 1e-9).collect();
    let y_noisy: Vec<C64> = y.iter().zip(&dy).map(|(p, q)| p + q).collect();
    let sol = solve_ls_with_bound(&b, &y_noisy, 1.0, 1e-15, norm(&dy), eps).unwrap();
    println!(
        "least squares: deviation {:.3e} within bound {:.3e}",
        norm(&sub_vec(&sol.solution, &x0)),
        sol.bound
    );
}
