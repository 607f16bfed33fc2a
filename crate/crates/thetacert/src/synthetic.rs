//! Reference geometries with exactly known answers, used by the examples,
//! the test suites and the CLI self-check.

use rand::Rng;

use crate::char2::Characteristic;
use crate::curve_local::QuadricIdeal;
use crate::monomials::MonomialBasis;
use crate::linalg_cert::matrix::{dot, normalize, ComplexMatrix, C64, ONE, ZERO};
use crate::linalg_cert::MachineEps;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Elliptic normal quartic in P³: `Σxᵢ² = 0`, `x₁² + 2x₂² + 3x₃² = 0`.
pub fn elliptic_quartic() -> QuadricIdeal {
    QuadricIdeal::new(vec![ComplexMatrix::identity(4), ComplexMatrix::from_real_diag(&[0.0, 1.0, 2.0, 3.0])])
        .expect("valid quadrics")
}

/// Unit point of [`elliptic_quartic`] with affine coordinate `x₁/x₀ = s`.
pub fn elliptic_quartic_point(s: C64) -> Vec<C64> {
    let s2 = s * s;
    let x3 = (2.0 + s2).sqrt();
    let x2 = (-3.0 - 2.0 * s2).sqrt();
    normalize(&[ONE, s, x2, x3])
}

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| random_complex(rng)).collect()
}

pub fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    normalize(&random_vector(rng, n))
}

/// Haar-like random unitary by Gram–Schmidt on a random complex matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = random_vector(rng, n);
        for b in &cols {
            let p = dot(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        let nv = crate::linalg_cert::matrix::norm(&v);
        if nv > 1e-3 {
            cols.push(v.iter().map(|z| z / nv).collect());
        }
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// A canonical genus-5 curve (three quadrics in P⁴) together with a
/// hyperplane tangent to it at four known points.
#[derive(Debug, Clone)]
pub struct MultitangentCurve {
    pub ideal: QuadricIdeal,
    /// Unit coefficients `h` of the hyperplane `hᵀx = 0`.
    pub hyperplane: Vec<C64>,
    /// Unit tangency points.
    pub points: Vec<Vec<C64>>,
}

fn sym_outer(a: &[C64], b: &[C64]) -> ComplexMatrix {
    let n = a.len();
    ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (a[i] * b[j] + a[j] * b[i]))
}

fn unit(n: usize, k: usize) -> Vec<C64> {
    let mut e = vec![ZERO; n];
    e[k] = ONE;
    e
}

/// Builds a random [`MultitangentCurve`].
///
/// In coordinates `x₀…x₄` the hyperplane is `x₄ = 0`. On it the net restricts
/// to `x₀x₁`, `x₂x₃` and a quadric `q` tangent to each of the four lines
/// `{xᵢ = xⱼ = 0}`, `i ∈ {0,1}`, `j ∈ {2,3}`: the diagonal of `q` is `aᵢ²` and
/// the matching cross terms are `±aᵢaⱼ`. One minus sign keeps `q` from being a
/// square modulo the other two, so the four contact points span the
/// hyperplane. Extra `x₄·L(x)` terms make the curve generic, and random
/// changes of basis of the net and of coordinates hide the structure.
pub fn multitangent_genus5<R: Rng>(rng: &mut R) -> MultitangentCurve {
    let n = 5;
    let a: Vec<C64> = (0..4)
        .map(|_| {
            let z = random_complex(rng);
            z / z.norm() * rng.gen_range(0.5..1.5)
        })
        .collect();
    let mut q3 = ComplexMatrix::zeros(n, n);
    for i in 0..4 {
        q3[(i, i)] = a[i] * a[i];
    }
    for &(i, j, s) in &[(1, 3, 1.0), (1, 2, 1.0), (0, 3, 1.0), (0, 2, -1.0)] {
        q3[(i, j)] = s * a[i] * a[j];
        q3[(j, i)] = s * a[i] * a[j];
    }
    let (z01, z23) = (random_complex(rng), random_complex(rng));
    q3[(0, 1)] = z01;
    q3[(1, 0)] = z01;
    q3[(2, 3)] = z23;
    q3[(3, 2)] = z23;
    let e = |k: usize| unit(n, k);
    let base = [sym_outer(&e(0), &e(1)), sym_outer(&e(2), &e(3)), q3];
    let e4 = e(4);
    let with_tail: Vec<ComplexMatrix> =
        base.iter().map(|q| q.add(&sym_outer(&e4, &random_vector(rng, n))).expect("shape")).collect();
    let mix = random_unitary(rng, 3);
    let net: Vec<ComplexMatrix> = (0..3)
        .map(|k| {
            let mut q = ComplexMatrix::zeros(n, n);
            for (l, ql) in with_tail.iter().enumerate() {
                q = q.add(&ql.scale(mix[(k, l)])).expect("shape");
            }
            q
        })
        .collect();
    let contact = [
        [ZERO, a[3], ZERO, -a[1]],
        [ZERO, a[2], -a[1], ZERO],
        [a[3], ZERO, ZERO, -a[0]],
        [a[2], ZERO, a[0], ZERO],
    ];

    let u = random_unitary(rng, n);
    let uc = ComplexMatrix::from_fn(n, n, |i, j| u[(i, j)].conj());
    let uh = u.adjoint();
    let eps = MachineEps::default();
    let quadrics: Vec<ComplexMatrix> = net
        .iter()
        .map(|q| {
            let moved = uc.matmul(q).and_then(|m| m.matmul(&uh)).expect("shape");
            let moved = ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (moved[(i, j)] + moved[(j, i)]));
            let scale = crate::linalg_cert::svd_with_eps(&moved, eps).expect("finite").sigma_max();
            moved.scale(C64::new(1.0 / scale, 0.0))
        })
        .collect();
    let ideal = QuadricIdeal::new(quadrics).expect("symmetric");
    let hyperplane = normalize(&uc.matvec(&e4).expect("shape"));
    let points = contact
        .iter()
        .map(|p| normalize(&u.matvec(&[p[0], p[1], p[2], p[3], ZERO]).expect("shape")))
        .collect();
    MultitangentCurve { ideal, hyperplane, points }
}

/// A bitangent line of a plane quartic with its two contact points.
#[derive(Debug, Clone, PartialEq)]
pub struct Bitangent {
    /// Unit coefficients `ℓ` of the line `ℓᵀx = 0`.
    pub line: Vec<C64>,
    pub contacts: [Vec<C64>; 2],
}

/// A smooth plane quartic (canonical genus-3 curve) with its 28 bitangents.
#[derive(Debug, Clone)]
pub struct PlaneQuartic {
    /// Unit coefficient vector in the lexicographic degree-4 basis of 3 variables.
    pub coeffs: Vec<C64>,
    pub bitangents: Vec<Bitangent>,
}

// Coefficients of F(x, a·x + b, 1) as a polynomial in x, lowest degree first.
fn restricted_quartic(f: &[C64], basis: &MonomialBasis, a: C64, b: C64) -> [C64; 5] {
    let mut out = [ZERO; 5];
    for (m, &c) in f.iter().enumerate() {
        let e = basis.exponents(m);
        let (i, j) = (e[0] as usize, e[1] as usize);
        // (a x + b)^j = Σ_k C(j,k) a^k b^(j−k) x^k
        for k in 0..=j {
            let bin = crate::monomials::binomial(j as i64, k as i64) as f64;
            out[i + k] += c * bin * a.powu(k as u32) * b.powu((j - k) as u32);
        }
    }
    out
}

// The four conditions for F restricted to y = a·x + b to equal c₄(x² + u·x + v)².
fn bitangent_system(f: &[C64], basis: &MonomialBasis, z: &[C64; 4]) -> [C64; 4] {
    let [a, b, u, v] = *z;
    let c = restricted_quartic(f, basis, a, b);
    [c[3] - 2.0 * u * c[4], c[2] - (u * u + 2.0 * v) * c[4], c[1] - 2.0 * u * v * c[4], c[0] - v * v * c[4]]
}

fn newton_bitangent(f: &[C64], basis: &MonomialBasis, start: [C64; 4]) -> Option<[C64; 4]> {
    let eps = MachineEps::default();
    let mut z = start;
    for _ in 0..60 {
        let r = bitangent_system(f, basis, &z);
        let rn = r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !rn.is_finite() || z.iter().any(|x| x.norm() > 1e6) {
            return None;
        }
        if rn < 1e-15 {
            return Some(z);
        }
        let h = 1e-7;
        let cols: Vec<Vec<C64>> = (0..4)
            .map(|k| {
                let mut zp = z;
                let mut zm = z;
                zp[k] += h;
                zm[k] -= h;
                let rp = bitangent_system(f, basis, &zp);
                let rm = bitangent_system(f, basis, &zm);
                (0..4).map(|i| (rp[i] - rm[i]) / (2.0 * h)).collect()
            })
            .collect();
        let jac = ComplexMatrix::from_columns(&cols).ok()?;
        let rhs: Vec<C64> = r.iter().map(|x| -x).collect();
        let (d, _) = crate::linalg_cert::lstsq(&jac, &rhs, eps).ok()?;
        let dn = crate::linalg_cert::matrix::norm(&d);
        let scale = if dn > 1.0 { 1.0 / dn } else { 1.0 };
        for k in 0..4 {
            z[k] += scale * d[k];
        }
        if dn < 1e-15 {
            break;
        }
    }
    let r = bitangent_system(f, basis, &z);
    (r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() < 1e-12).then_some(z)
}

// Coefficients of F∘σ, where σ permutes the variables.
fn permute_form(f: &[C64], basis: &MonomialBasis, perm: [usize; 3]) -> Vec<C64> {
    let mut out = vec![ZERO; f.len()];
    for (m, &c) in f.iter().enumerate() {
        let e = basis.exponents(m);
        let mut pe = [0u16; 3];
        for v in 0..3 {
            pe[perm[v]] = e[v];
        }
        out[basis.position(&pe).expect("same degree")] += c;
    }
    out
}

/// Random plane quartic with all 28 bitangents found by Newton's method
/// from random starts in three affine charts. Returns `None` if fewer than
/// 28 were found.
pub fn plane_quartic<R: Rng>(rng: &mut R) -> Option<PlaneQuartic> {
    let basis = MonomialBasis::new(3, 4);
    let coeffs = random_unit(rng, basis.len());
    let mut found: Vec<Bitangent> = Vec::new();
    for perm in [[0, 1, 2], [1, 0, 2], [2, 1, 0]] {
        // In permuted coordinates x′ᵥ = x_{perm[v]}.
        let f = permute_form(&coeffs, &basis, perm);
        for _ in 0..3000 {
            if found.len() == 28 {
                break;
            }
            let start = [0; 4].map(|_| random_complex(rng) * 2.0);
            let Some([a, b, u, v]) = newton_bitangent(&f, &basis, start) else { continue };
            let unpermute = |w: [C64; 3]| {
                let mut o = vec![ZERO; 3];
                for k in 0..3 {
                    o[perm[k]] = w[k];
                }
                normalize(&o)
            };
            let line = unpermute([a, -ONE, b]);
            if found.iter().any(|t| crate::linalg_cert::matrix::projective_distance(&t.line, &line) < 1e-8) {
                continue;
            }
            let disc = (u * u - 4.0 * v).sqrt();
            let contacts = [(-u + disc) * 0.5, (-u - disc) * 0.5].map(|x| unpermute([x, a * x + b, ONE]));
            found.push(Bitangent { line, contacts });
        }
    }
    if found.len() != 28 {
        return None;
    }
    found.sort_by(|p, q| {
        let (x, y) = (p.line[0] / p.line[1], q.line[0] / q.line[1]);
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    Some(PlaneQuartic { coeffs, bitangents: found })
}

/// Smallest singular value of the conic evaluation matrix on the eight
/// contact points of four bitangents: near zero exactly for syzygetic tetrads.
pub fn tetrad_conic_sigma(b: &[&Bitangent; 4]) -> f64 {
    let pts: Vec<Vec<C64>> = b.iter().flat_map(|t| t.contacts.iter().cloned()).collect();
    let m = MonomialBasis::new(3, 2).evaluation_matrix(&pts);
    let s = crate::linalg_cert::svd(&m).expect("finite");
    s.all_values()[5]
}

/// Assigns odd genus-3 characteristics to the bitangents so that syzygetic
/// tetrads of characteristics are exactly the tetrads whose contact points
/// lie on a conic. Backtracking search; `None` if no assignment exists.
pub fn label_bitangents(bitangents: &[Bitangent], threshold: f64) -> Option<Vec<Characteristic>> {
    let n = bitangents.len();
    let odd = crate::char2::odd_characteristics(3).ok()?;
    if odd.len() != n {
        return None;
    }
    let mut syz = std::collections::HashSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                for l in (k + 1)..n {
                    let t = [&bitangents[i], &bitangents[j], &bitangents[k], &bitangents[l]];
                    if tetrad_conic_sigma(&t) < threshold {
                        syz.insert([i, j, k, l]);
                    }
                }
            }
        }
    }
    let key = |c: &Characteristic| ((c.eps_bits() as u32) << 8) | c.delta_bits() as u32;
    let keys: Vec<u32> = odd.iter().map(key).collect();
    let mut assign: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn search(
        pos: usize,
        n: usize,
        keys: &[u32],
        syz: &std::collections::HashSet<[usize; 4]>,
        assign: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if pos == n {
            return true;
        }
        for c in 0..n {
            if used[c] {
                continue;
            }
            let kc = keys[c];
            let mut ok = true;
            'outer: for i in 0..pos {
                for j in (i + 1)..pos {
                    for k in (j + 1)..pos {
                        let zero = keys[assign[i]] ^ keys[assign[j]] ^ keys[assign[k]] ^ kc == 0;
                        if zero != syz.contains(&[i, j, k, pos]) {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
            }
            if ok {
                used[c] = true;
                assign.push(c);
                if search(pos + 1, n, keys, syz, assign, used) {
                    return true;
                }
                assign.pop();
                used[c] = false;
            }
        }
        false
    }
    search(0, n, &keys, &syz, &mut assign, &mut used).then(|| assign.iter().map(|&c| odd[c]).collect())
}

/// Rows spanning a random subspace of codimension `codim` in `C^n`, each row
/// displaced by noise of norm exactly `noise`. Returns the matrix and an
/// orthonormal basis of the exact kernel.
pub fn planted_row_space<R: Rng>(
    rng: &mut R,
    n: usize,
    codim: usize,
    rows: usize,
    noise: f64,
) -> (ComplexMatrix, Vec<Vec<C64>>) {
    let u = random_unitary(rng, n);
    let kernel: Vec<Vec<C64>> = (0..codim).map(|j| u.column(j)).collect();
    let span: Vec<Vec<C64>> = (codim..n).map(|j| u.column(j)).collect();
    let out: Vec<Vec<C64>> = (0..rows)
        .map(|_| {
            let mut row = vec![ZERO; n];
            for b in &span {
                let w = random_complex(rng);
                for (r, x) in row.iter_mut().zip(b) {
                    // Rows are conjugated basis vectors so that Mv = 0 on the kernel.
                    *r += w * x.conj();
                }
            }
            let e = normalize(&random_vector(rng, n));
            row.iter().zip(&e).map(|(r, x)| r + x * noise).collect()
        })
        .collect();
    (ComplexMatrix::from_rows(&out).expect("rows"), kernel)
}

/// `m` random `d`-dimensional subspaces of the orthogonal complement of a
/// random `common`-dimensional subspace of `C^n`; every basis vector is
/// displaced by noise of norm exactly `noise`. Returns the noisy bases and
/// the exact common subspace.
pub fn planted_kernels<R: Rng>(
    rng: &mut R,
    n: usize,
    common: usize,
    m: usize,
    d: usize,
    noise: f64,
) -> (Vec<Vec<Vec<C64>>>, Vec<Vec<C64>>) {
    let u = random_unitary(rng, n);
    let shared: Vec<Vec<C64>> = (0..common).map(|j| u.column(j)).collect();
    let rest: Vec<Vec<C64>> = (common..n).map(|j| u.column(j)).collect();
    let bases = (0..m)
        .map(|_| {
            let w = random_unitary(rng, rest.len());
            (0..d)
                .map(|k| {
                    let mut v = vec![ZERO; n];
                    for (j, b) in rest.iter().enumerate() {
                        for (x, y) in v.iter_mut().zip(b) {
                            *x += w[(j, k)] * y;
                        }
                    }
                    let e = normalize(&random_vector(rng, n));
                    v.iter().zip(&e).map(|(x, y)| x + y * noise).collect()
                })
                .collect()
        })
        .collect();
    (bases, shared)
}
