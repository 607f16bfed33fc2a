use super::*;
use crate::char2::TwoTorsion;
use crate::linalg_cert::matrix::{ONE, ZERO};
use crate::monomials::evaluate_form;
use crate::synthetic::{elliptic_quartic, elliptic_quartic_point, plane_quartic, label_bitangents, random_unit, PlaneQuartic};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The four points of the elliptic quartic on the plane `x₁ = s·x₀`.
fn section(s: C64) -> Vec<Vec<C64>> {
    let base = elliptic_quartic_point(s);
    let mut out = Vec::new();
    for s2 in [1.0, -1.0] {
        for s3 in [1.0, -1.0] {
            out.push(vec![base[0], base[1], s2 * base[2], s3 * base[3]]);
        }
    }
    out
}

fn quartic_ideal() -> IdealData {
    IdealData::from_quadrics(&elliptic_quartic())
}

fn dp(points: Vec<Vec<C64>>) -> DivisorPoints {
    DivisorPoints::new(points).unwrap()
}

fn exact(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

#[test]
fn md_single_point_is_unit_row() {
    let e = vec![vec![ONE, ZERO, ZERO, ZERO, ZERO, ZERO]];
    let m = build_md(&e, 2);
    assert_eq!(m.shape(), (1, 21));
    assert_eq!(m[(0, 0)], ONE);
    assert!((1..21).all(|j| m[(0, j)] == ZERO));
}

#[test]
fn md_on_curve_has_ideal_kernel() {
    let pts: Vec<Vec<C64>> = [c(0.3, 0.1), c(-0.5, 0.4), c(1.2, -0.3), c(0.1, 0.9), c(-0.8, -0.6), c(0.6, 0.6), c(2.0, 0.2), c(-1.4, 0.5)]
        .iter()
        .map(|&s| elliptic_quartic_point(s))
        .collect();
    let s = crate::linalg_cert::svd(&build_md(&pts, 2)).unwrap();
    let v = s.all_values();
    assert_eq!(v.len(), 10);
    assert!(v[8] < 1e-13 && v[9] < 1e-13);
    assert!(v[7] > 1e-4);
}

#[test]
fn gap_vanishes_on_ideal() {
    let ideal = quartic_ideal();
    let pts = section(c(0.4, -0.2));
    for q in ideal.quadrics() {
        let unit = normalize(q);
        assert!(gap(&pts, &unit, 2) < 1e-14);
    }
}

#[test]
fn gap_matches_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let b = MonomialBasis::new(4, 2);
    for _ in 0..20 {
        let pts: Vec<Vec<C64>> = (0..5).map(|_| random_unit(&mut rng, 4)).collect();
        let p = random_unit(&mut rng, b.len());
        let direct = pts.iter().map(|x| evaluate_form(&p, &b, x).norm_sqr()).sum::<f64>().sqrt();
        assert!((gap(&pts, &p, 2) - direct).abs() < 1e-14);
    }
    // Single point and the dual monomial: |p(x)|.
    let x = normalize(&[c(0.5, 0.1), c(0.2, -0.3), c(0.7, 0.0), c(0.1, 0.1)]);
    let mut p = vec![ZERO; b.len()];
    p[4] = ONE; // x₁²
    assert!((gap(&[x.clone()], &p, 2) - (x[1] * x[1]).norm()).abs() < 1e-16);
}

#[test]
fn sections_are_syzygetic() {
    let ideal = quartic_ideal();
    let d1 = dp(section(c(0.4, 0.1)));
    let d2 = dp(section(c(-0.7, 0.3)));
    let v = syzygy_test(&d1, &d2, ideal.dim_i2(), &exact(8), SyzygyThresholds::default(), MachineEps::default()).unwrap();
    assert_eq!(v.kind, SyzygyKind::ApproxSyzygetic, "{v:?}");
    let same = syzygy_test(&d1, &d1, ideal.dim_i2(), &exact(8), SyzygyThresholds::default(), MachineEps::default()).unwrap();
    assert_eq!(same.kind, SyzygyKind::ApproxSyzygetic);
}

#[test]
fn random_points_are_azygetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let th = SyzygyThresholds { eps: 1e-8, a: 1e-3 };
    for _ in 0..20 {
        let d1 = dp((0..4).map(|_| random_unit(&mut rng, 4)).collect());
        let d2 = dp((0..4).map(|_| random_unit(&mut rng, 4)).collect());
        let v = syzygy_test(&d1, &d2, 2, &exact(8), th, MachineEps::default()).unwrap();
        assert_eq!(v.kind, SyzygyKind::NumericallyAzygetic, "{v:?}");
    }
}

#[test]
fn point_errors_widen_the_enclosure() {
    let d1 = dp(section(c(0.4, 0.1)));
    let d2 = dp(section(c(-0.7, 0.3)));
    let tight = syzygy_test(&d1, &d2, 2, &exact(8), SyzygyThresholds::default(), MachineEps::default()).unwrap();
    let loose = syzygy_test(&d1, &d2, 2, &vec![1e-6; 8], SyzygyThresholds::default(), MachineEps::default()).unwrap();
    assert!(loose.sigma_used.width() > tight.sigma_used.width());
    assert_eq!(loose.kind, SyzygyKind::Indeterminate);
}

#[test]
fn divisor_validation() {
    assert_eq!(DivisorPoints::new(vec![]), Err(SteinerError::EmptyDivisor));
    let p = vec![ONE, ZERO];
    let q = vec![c(0.0, 1.0), ZERO];
    assert_eq!(DivisorPoints::new(vec![p.clone(), q]), Err(SteinerError::Duplicate(0, 1)));
    assert!(matches!(DivisorPoints::new(vec![p, vec![ONE]]), Err(SteinerError::Dimension { .. })));
    let d = dp(vec![vec![c(2.0, 0.0), ZERO], vec![ZERO, ONE]]);
    assert!((norm(&d.points()[0]) - 1.0).abs() < 1e-16);
    assert!((d.min_separation() - std::f64::consts::SQRT_2).abs() < 1e-15);
}

#[test]
fn thresholds_must_be_ordered() {
    let d = dp(section(c(0.2, 0.2)));
    let th = SyzygyThresholds { eps: 0.5, a: 0.1 };
    assert!(matches!(syzygy_test(&d, &d, 2, &exact(8), th, MachineEps::default()), Err(SteinerError::Malformed(_))));
}

#[test]
fn b_for_two_sections() {
    let ideal = quartic_ideal();
    let d1 = dp(section(c(0.4, 0.1)));
    let d3 = dp(section(c(-0.7, 0.3)));
    let b = compute_b(&d1, &d3, &ideal, &exact(8), MachineEps::default()).unwrap();
    assert_eq!(b.dim_v, 8);
    assert!(b.audit_residual < 1e-10, "{}", b.audit_residual);
    assert!(b.b > 1e-6, "{}", b.b);
    // The syzygy quadric is (x₁ − s₁x₀)(x₁ − s₃x₀) modulo the ideal.
    let q = syzygy_quadric(&d1.sum(&d3), &ideal, MachineEps::default()).unwrap();
    assert!(gap(&d1.sum(&d3), &q, 2) < 1e-12);
}

#[test]
fn b_dimension_audit_rejects_wrong_degree() {
    let ideal = quartic_ideal();
    let d1 = dp(section(c(0.4, 0.1)));
    let d3 = dp(section(c(-0.7, 0.3))[..3].to_vec());
    assert!(matches!(
        compute_b(&d1, &d3, &ideal, &exact(7), MachineEps::default()),
        Err(SteinerError::DimensionAudit { .. }) | Err(SteinerError::Denominator { .. })
    ));
}

#[test]
fn weak_transitivity_reference_value() {
    // Direct substitution for g = 6, norms 3, ε = 1e-8, B = 2e-4.
    let num = 5f64.sqrt() * (2.0 + 2.0 * 2f64.sqrt()) * 3.0 * 1e-8;
    let den = 2f64.sqrt() - 20f64.sqrt() * 3.0 * (1e-8 / 2e-4);
    let w = weak_transitivity_bound(6, 3.0, 2.5, 1e-8, 2e-4).unwrap();
    assert!((w - num / den).abs() < 1e-22);
    assert!((w - 2.2914e-7).abs() < 1e-10);
    assert_eq!(weak_transitivity_bound(6, 3.0, 3.0, 0.0, 2e-4).unwrap(), 0.0);
    assert!(weak_transitivity_bound(6, 3.0, 3.0, 1e-4, 2e-4).is_err());
}

#[test]
fn b_matrix_side_is_four_g_minus_four() {
    for g in 3..10 {
        let deg = 2 * (2 * g - 2);
        assert_eq!(deg, 4 * (g - 1));
    }
    assert_eq!(4 * (6 - 1), 20);
}

proptest! {
    #[test]
    fn gap_sandwich(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = MonomialBasis::new(3, 2);
        let pts: Vec<Vec<C64>> = (0..4).map(|_| random_unit(&mut rng, 3)).collect();
        let p = random_unit(&mut rng, b.len());
        let vals: Vec<f64> = pts.iter().map(|x| evaluate_form(&p, &b, x).norm()).collect();
        let g = gap(&pts, &p, 2);
        let mx = vals.iter().cloned().fold(0.0, f64::max);
        let sum: f64 = vals.iter().sum();
        prop_assert!(g >= mx * (1.0 - 1e-14) && g <= sum * (1.0 + 1e-14));
    }

    #[test]
    fn transitivity_monotone(e1 in 1e-10f64..1e-8, e2 in 1e-10f64..1e-8, n1 in 0.5f64..3.0, n2 in 0.5f64..3.0, b in 1e-4f64..1e-2) {
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let (nlo, nhi) = (n1.min(n2), n1.max(n2));
        let w = |e: f64, n: f64, b: f64| weak_transitivity_bound(6, n, n, e, b).unwrap();
        prop_assert!(w(lo, nlo, b) <= w(hi, nlo, b));
        prop_assert!(w(lo, nlo, b) <= w(lo, nhi, b));
        prop_assert!(w(lo, nlo, b) >= w(lo, nlo, b * 2.0));
    }

    #[test]
    fn syzygy_invariant_under_order_and_phase(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<C64>> = (0..8).map(|_| random_unit(&mut rng, 4)).collect();
        let base = syzygy_test(&dp(pts[..4].to_vec()), &dp(pts[4..].to_vec()), 2, &exact(8),
            SyzygyThresholds { eps: 1e-8, a: 1e-3 }, MachineEps::default()).unwrap();
        let mut moved = pts.clone();
        moved.reverse();
        for (k, p) in moved.iter_mut().enumerate() {
            let ph = C64::from_polar(1.0, 0.7 * k as f64);
            for z in p.iter_mut() { *z *= ph; }
        }
        let other = syzygy_test(&dp(moved[..4].to_vec()), &dp(moved[4..].to_vec()), 2, &exact(8),
            SyzygyThresholds { eps: 1e-8, a: 1e-3 }, MachineEps::default()).unwrap();
        prop_assert_eq!(base.kind, other.kind);
        prop_assert!((base.sigma_used.computed - other.sigma_used.computed).abs() < 1e-12);
    }
}

struct Genus3 {
    pq: PlaneQuartic,
    labels: Vec<Characteristic>,
}

fn genus3() -> &'static Genus3 {
    static DATA: OnceLock<Genus3> = OnceLock::new();
    DATA.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pq = plane_quartic(&mut rng).expect("bitangents");
        let labels = label_bitangents(&pq.bitangents, 1e-9).expect("labels");
        Genus3 { pq, labels }
    })
}

fn genus3_thetas(labels: &[Characteristic]) -> Vec<ThetaDivisor> {
    genus3()
        .pq
        .bitangents
        .iter()
        .zip(labels)
        .map(|(b, ch)| ThetaDivisor { characteristic: *ch, points: b.contacts.to_vec(), accuracy: 1e-13 })
        .collect()
}

fn genus3_ideal() -> IdealData {
    IdealData::new(3, vec![], vec![genus3().pq.coeffs.clone()]).unwrap()
}

fn genus3_config() -> SteinerConfig {
    SteinerConfig { thresholds: SyzygyThresholds { eps: 1e-8, a: 1e-4 }, eps: MachineEps::default() }
}

#[test]
fn plane_quartic_steiner_sets_certify() {
    let data = genus3();
    let thetas = genus3_thetas(&data.labels);
    let alphas: Vec<TwoTorsion> = TwoTorsion::all_nonzero(3).into_iter().step_by(9).collect();
    let out = certify_steiner(&thetas, &genus3_ideal(), &alphas, &genus3_config()).unwrap();
    assert_eq!(out.len(), alphas.len());
    for v in &out {
        assert!(v.is_pass(), "{}: {:?} {:?}", v.alpha, v.verdict, v.measurements);
        assert_eq!(v.pairs.len(), 6);
        let m = &v.measurements;
        assert!(m.eps_measured < 1e-8);
        assert!(m.b.unwrap() > 0.0);
        assert!(m.transitivity_bound.unwrap() < m.a_measured);
    }
}

#[test]
fn genus3_b_audit() {
    let data = genus3();
    let thetas = genus3_thetas(&data.labels);
    // Two disjoint pairs with the same label are syzygetic.
    let alpha = CharPair::new(thetas[0].characteristic, thetas[1].characteristic).unwrap().label();
    let mut partner = None;
    for i in 2..28 {
        for j in (i + 1)..28 {
            if CharPair::new(thetas[i].characteristic, thetas[j].characteristic).unwrap().label() == alpha {
                partner = Some((i, j));
            }
        }
    }
    let (i, j) = partner.unwrap();
    let d1 = dp([thetas[0].points.clone(), thetas[1].points.clone()].concat());
    let d3 = dp([thetas[i].points.clone(), thetas[j].points.clone()].concat());
    let b = compute_b(&d1, &d3, &genus3_ideal(), &exact(8), MachineEps::default()).unwrap();
    assert_eq!(b.dim_v, 8);
    assert!(b.audit_residual < 1e-10);
    assert!(b.b > 0.0);
}

#[test]
fn swapped_labels_fail() {
    let data = genus3();
    let mut labels = data.labels.clone();
    labels.swap(0, 5);
    let thetas = genus3_thetas(&labels);
    let alpha = CharPair::new(labels[0], labels[1]).unwrap().label();
    let out = certify_steiner(&thetas, &genus3_ideal(), &[alpha], &genus3_config()).unwrap();
    assert!(matches!(out[0].verdict, PartitionVerdict::Fail { .. }), "{:?}", out[0].verdict);
}

#[test]
fn steiner_input_validation() {
    let data = genus3();
    let thetas = genus3_thetas(&data.labels);
    assert!(matches!(
        certify_steiner(&thetas, &genus3_ideal(), &[], &genus3_config()),
        Err(SteinerError::Malformed(_))
    ));
    assert!(matches!(certify_steiner(&[], &genus3_ideal(), &[], &genus3_config()), Err(SteinerError::Malformed(_))));
    let mut dup = thetas.clone();
    dup[1].characteristic = dup[0].characteristic;
    let alpha = TwoTorsion::all_nonzero(3)[0];
    assert!(matches!(certify_steiner(&dup, &genus3_ideal(), &[alpha], &genus3_config()), Err(SteinerError::Malformed(_))));
}

#[test]
fn steiner_is_deterministic() {
    let data = genus3();
    let thetas = genus3_thetas(&data.labels);
    let alpha = [TwoTorsion::all_nonzero(3)[7]];
    let a = certify_steiner(&thetas, &genus3_ideal(), &alpha, &genus3_config()).unwrap();
    let b = certify_steiner(&thetas, &genus3_ideal(), &alpha, &genus3_config()).unwrap();
    assert_eq!(a, b);
}
