use super::*;
use crate::curve_local::{closest_point_oracle, conic_jet};
use crate::linalg_cert::matrix::{align_phase, projective_distance, sub_vec, ONE, ZERO};
use crate::synthetic::{elliptic_quartic, elliptic_quartic_point, multitangent_genus5, random_vector, MultitangentCurve};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn perturb(v: &[C64], size: f64, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let d = normalize(&random_vector(rng, v.len()));
    normalize(&v.iter().zip(&d).map(|(a, b)| a + size * b).collect::<Vec<_>>())
}

fn noisy_candidate(mc: &MultitangentCurve, size: f64, rng: &mut ChaCha8Rng) -> HyperplaneCandidate {
    let pts = mc.points.iter().map(|p| perturb(p, size, rng)).collect();
    HyperplaneCandidate::new(perturb(&mc.hyperplane, size, rng), pts, None).unwrap().0
}

fn true_point_error(cand: &HyperplaneCandidate, mc: &MultitangentCurve) -> f64 {
    cand.points
        .iter()
        .map(|p| mc.points.iter().map(|q| projective_distance(p, q)).fold(f64::INFINITY, f64::min).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn jets_at(points: &[Vec<C64>], ideal: &QuadricIdeal) -> Vec<ConicJet> {
    points.iter().map(|p| conic_jet(p, ideal, MachineEps::default()).unwrap()).collect()
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mc = multitangent_genus5(&mut rng);
    let jets = jets_at(&mc.points, &mc.ideal);
    let j = jacobian_f(&jets);
    let n = jets.len();
    let h = 1e-6;
    let f0 = f_conic(&jets, &vec![ZERO; n]);
    for col in 0..n {
        let mut xp = vec![ZERO; n];
        let mut xm = vec![ZERO; n];
        xp[col] = C64::new(h, 0.0);
        xm[col] = C64::new(-h, 0.0);
        let fp = f_conic(&jets, &xp);
        let fm = f_conic(&jets, &xm);
        for row in 0..n {
            let fd = (fp[row] - fm[row]) / (2.0 * h);
            assert!((fd - j[(row, col)]).norm() < 1e-7, "({row},{col}) {fd} vs {}", j[(row, col)]);
        }
    }
    // Exact tangency: F vanishes at the origin.
    assert!(norm(&f0) < 1e-12);
}

#[test]
fn exact_input_gives_zero_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mc = multitangent_genus5(&mut rng);
    let jets = jets_at(&mc.points, &mc.ideal);
    let x = solve_x_prime(&mc.hyperplane, &jets, MachineEps::default()).unwrap();
    assert!(norm(&x) < 1e-12, "{}", norm(&x));
}

#[test]
fn eps_jf_vanishes_without_errors() {
    let z = [0.0; 4];
    assert_eq!(eps_jf_bound(&z, &z, &z, &[1.0; 4], 5, MachineEps::default()), 0.0);
    let small = eps_jf_bound(&[1e-9; 4], &[1e-9; 4], &[1e-9; 4], &[1.0; 4], 5, MachineEps::default());
    let big = eps_jf_bound(&[1e-6; 4], &[1e-6; 4], &[1e-6; 4], &[1.0; 4], 5, MachineEps::default());
    assert!(small > 0.0 && big > small);
}

#[test]
fn eps_bounds_are_monotone() {
    let base = Eps1Inputs { t_norm: 1.0, theta: 1e-12, sigma_g_upper: 1e-9, sigma_gm1_lower: 0.5, e_mt: 1e-9 };
    let a = eps1_bound(&base).unwrap();
    let b = eps1_bound(&Eps1Inputs { sigma_g_upper: 1e-7, ..base }).unwrap();
    let c = eps1_bound(&Eps1Inputs { theta: 1e-10, ..base }).unwrap();
    assert!(b > a && c > a);
    assert!(eps1_bound(&Eps1Inputs { e_mt: 0.6, ..base }).is_err());

    let base2 = Eps2Inputs { y_norm: 1.0, eps_mr: 1e-8, sigma_lower: 0.3, xi_t: 1.0, eps1: 1e-8, q_m: 1.0, delta_r: 0.0 };
    let a = eps2_bound(&base2).unwrap();
    let b = eps2_bound(&Eps2Inputs { eps1: 1e-6, ..base2 }).unwrap();
    let c = eps2_bound(&Eps2Inputs { sigma_lower: 0.1, ..base2 }).unwrap();
    assert!(b > a && c > a);
    assert!(eps2_bound(&Eps2Inputs { eps_mr: 0.4, ..base2 }).is_err());
}

#[test]
fn chord_matches_geometry() {
    for s in [0.0, 1e-8, 0.3, 0.9] {
        let angle = f64::asin(s);
        let chord = 2.0 * (0.5 * angle).sin();
        assert!((chord_from_sine(s) - chord).abs() < 1e-14);
    }
}

#[test]
fn oddness_thresholds() {
    assert_eq!(oddness_from_values(&[1.0, 0.8, 0.5, 0.2, 0.0], 1e-12), Some(true));
    assert_eq!(oddness_from_values(&[1.0, 0.8, 0.5, 1e-14, 0.0], 1e-12), Some(false));
    assert_eq!(oddness_from_values(&[1.0, 0.8, 0.5, 5e-12, 0.0], 1e-12), None);
    assert_eq!(oddness_from_values(&[1.0], 1e-12), None);
}

#[test]
fn two_dimensional_kernel_is_not_odd() {
    // Rows spanning a 3-space in C⁵ leave a 2-dimensional kernel.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let basis: Vec<Vec<C64>> = (0..3).map(|_| random_vector(&mut rng, 5)).collect();
    let rows: Vec<Vec<C64>> = (0..4)
        .map(|_| {
            let w = random_vector(&mut rng, 3);
            (0..5).map(|k| (0..3).map(|b| w[b] * basis[b][k]).sum()).collect()
        })
        .collect();
    let m = ComplexMatrix::from_rows(&rows).unwrap();
    assert_eq!(oddness_check_matrix(&m, 0.0, MachineEps::default()).unwrap(), Some(false));

    let full = ComplexMatrix::from_rows(&(0..4).map(|_| random_vector(&mut rng, 5)).collect::<Vec<_>>()).unwrap();
    assert_eq!(oddness_check_matrix(&full, 0.0, MachineEps::default()).unwrap(), Some(true));
}

#[test]
fn garbage_point_fails_at_newton() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mc = multitangent_genus5(&mut rng);
    let mut cand = noisy_candidate(&mc, 1e-10, &mut rng);
    cand.points[2] = normalize(&random_vector(&mut rng, 5));
    let cert = certify_hyperplane(&cand, &mc.ideal, &TangencyConfig::default()).unwrap();
    assert_eq!(cert.status.verdict, Verdict::Fail);
    assert_eq!(cert.status.stage, Some(Stage::Newton));
}

#[test]
fn wrong_shapes_are_rejected() {
    let c = [ONE, ZERO, ZERO];
    assert!(matches!(
        HyperplaneCandidate::new(c.to_vec(), vec![c.to_vec()], None),
        Err(TangencyError::PointCount { .. })
    ));
    assert!(matches!(
        HyperplaneCandidate::new(c.to_vec(), vec![c.to_vec(), vec![ONE]], None),
        Err(TangencyError::Dimension { .. })
    ));
    assert!(matches!(
        HyperplaneCandidate::new(c.to_vec(), vec![c.to_vec(), vec![ZERO; 3]], None),
        Err(TangencyError::ZeroVector)
    ));
}

#[test]
fn candidates_roundtrip_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mc = multitangent_genus5(&mut rng);
    let cand = noisy_candidate(&mc, 0.0, &mut rng);
    let text = serde_json::to_string(&vec![cand.clone()]).unwrap();
    let back = parse_candidates(&text).unwrap();
    assert_eq!(back, vec![cand]);
    assert!(parse_candidates("[{\"coeffs\": 3}]").is_err());
}

#[test]
fn noisy_synthetic_passes_with_valid_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for trial in 0..6 {
        let mc = multitangent_genus5(&mut rng);
        let cand = noisy_candidate(&mc, 1e-8, &mut rng);
        let cert = certify_hyperplane(&cand, &mc.ideal, &TangencyConfig::default()).unwrap();
        assert_eq!(cert.status.verdict, Verdict::Pass, "trial {trial}: {:?}", cert.status);
        assert_eq!(cert.odd, Some(true));
        let pe = true_point_error(&cand, &mc);
        let he = projective_distance(&cand.coeffs, &mc.hyperplane);
        assert!(cert.point_bound >= pe, "trial {trial}: {} < {pe}", cert.point_bound);
        assert!(cert.hyperplane_bound >= he, "trial {trial}: {} < {he}", cert.hyperplane_bound);
        assert!(cert.point_bound < 1e-3 && cert.hyperplane_bound < 1e-2);
        let lc = cert.diagnostics.lemma_check.unwrap();
        assert_eq!(lc.lhs, norm(&cert.x_prime));
        assert!(lc.rhs.is_finite());
    }
}

#[test]
fn certification_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mc = multitangent_genus5(&mut rng);
    let cand = noisy_candidate(&mc, 1e-8, &mut rng);
    let a = certify_hyperplane(&cand, &mc.ideal, &TangencyConfig::default()).unwrap();
    let b = certify_hyperplane(&cand, &mc.ideal, &TangencyConfig::default()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn refinement_reduces_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..4 {
        let mc = multitangent_genus5(&mut rng);
        let cand = noisy_candidate(&mc, 1e-6, &mut rng);
        let jets = jets_at(&cand.points, &mc.ideal);
        let x = solve_x_prime(&cand.coeffs, &jets, MachineEps::default()).unwrap();
        let step = refine_step(&cand.coeffs, &jets, &x, &mc.ideal).unwrap();
        assert!(step.accepted);
        assert!(step.ratio <= 0.9, "ratio {}", step.ratio);
        assert!(projective_distance(&step.hyperplane, &mc.hyperplane) < projective_distance(&cand.coeffs, &mc.hyperplane));
    }
}

#[test]
fn refinement_keeps_exact_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mc = multitangent_genus5(&mut rng);
    let jets = jets_at(&mc.points, &mc.ideal);
    let x = vec![ZERO; 4];
    let step = refine_step(&mc.hyperplane, &jets, &x, &mc.ideal).unwrap();
    assert!(!step.accepted);
    assert_eq!(step.hyperplane, normalize(&mc.hyperplane));
}

#[test]
fn planted_jet_errors_within_bounds() {
    // Compare the computed jet at a perturbed point against the exact jet
    // at the nearest curve point, with phases matched.
    let ideal = elliptic_quartic();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let cfg = TangencyConfig::default();
    for (k, s0) in [C64::new(0.3, 0.2), C64::new(-0.7, 0.5), C64::new(1.1, -0.4)].iter().enumerate() {
        let p = elliptic_quartic_point(*s0);
        for size in [1e-9, 1e-7] {
            let pt = perturb(&p, size, &mut rng);
            let a = analyze_point(&pt, &ideal, &cfg).unwrap();
            let near = closest_point_oracle(&pt, &ideal, 1e-15).unwrap();
            let near = align_phase(&normalize(&near), &a.jet.p);
            assert!(norm(&sub_vec(&near, &a.jet.p)) <= a.eps0, "case {k}: eps0");
            let exact = conic_jet(&near, &ideal, MachineEps::default()).unwrap();
            let t = align_phase(&exact.t, &a.jet.t);
            let dt = norm(&sub_vec(&t, &a.jet.t));
            assert!(dt <= a.eps1, "case {k}: {dt} > {}", a.eps1);
            let phase = dot(&exact.t, &a.jet.t);
            let phase = phase / phase.norm();
            let r: Vec<C64> = exact.r.iter().map(|z| z * phase * phase).collect();
            let dr = norm(&sub_vec(&r, &a.jet.r));
            assert!(dr <= a.eps2, "case {k}: {dr} > {}", a.eps2);
            assert!(a.eps1 < 1e3 * size && a.eps2 < 1e4 * size);
        }
    }
}

fn newton_on_models(jets: &[ConicJet]) -> Vec<C64> {
    let n = jets.len();
    let mut x = vec![ZERO; n];
    let h = 1e-7;
    for _ in 0..30 {
        let f = f_conic(jets, &x);
        if norm(&f) < 1e-15 {
            break;
        }
        let cols: Vec<Vec<C64>> = (0..n)
            .map(|j| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fp = f_conic(jets, &xp);
                let fm = f_conic(jets, &xm);
                fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
            })
            .collect();
        let j = ComplexMatrix::from_columns(&cols).unwrap();
        let (d, _) = lstsq(&j, &f, MachineEps::default()).unwrap();
        x = x.iter().zip(&d).map(|(a, b)| a - b).collect();
    }
    x
}

#[test]
fn tilted_configuration_matches_model_root() {
    // Slide each tangency point along the curve and take the hyperplane
    // through the moved points; the linear step should recover the slide.
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mc = multitangent_genus5(&mut rng);
    let delta = 1e-5;
    let moved: Vec<Vec<C64>> = mc
        .points
        .iter()
        .map(|p| {
            let jet = conic_jet(p, &mc.ideal, MachineEps::default()).unwrap();
            let q = project_to_curve(&jet.model(C64::new(delta, 0.5 * delta)), &mc.ideal, 1e-15).unwrap();
            normalize(&q)
        })
        .collect();
    let h = normalize(&wedge(&moved));
    let jets = jets_at(&moved, &mc.ideal);
    let x = solve_x_prime(&h, &jets, MachineEps::default()).unwrap();
    let root = newton_on_models(&jets);
    let diff = norm(&sub_vec(&x, &root));
    assert!(norm(&root) > 0.1 * delta);
    assert!(diff < 50.0 * delta * delta, "diff {diff}");

    let cand = HyperplaneCandidate::new(h, moved, None).unwrap().0;
    let cert = certify_hyperplane(&cand, &mc.ideal, &TangencyConfig::default()).unwrap();
    assert_eq!(cert.status.verdict, Verdict::Pass, "{:?}", cert.status);
    assert!(norm(&sub_vec(&cert.x_prime, &root)) <= cert.eps_x + 50.0 * delta * delta);
    assert!(cert.point_bound >= true_point_error(&cand, &mc));
    assert!(cert.hyperplane_bound >= projective_distance(&cand.coeffs, &mc.hyperplane));
}

#[test]
fn nan_fields_serialize_as_null() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mc = multitangent_genus5(&mut rng);
    let mut cand = noisy_candidate(&mc, 0.0, &mut rng);
    cand.points[0] = normalize(&random_vector(&mut rng, 5));
    let cert = certify_hyperplane(&cand, &mc.ideal, &TangencyConfig::default()).unwrap();
    let v: serde_json::Value = serde_json::to_value(&cert).unwrap();
    assert!(v["eps_x"].is_null());
    assert_eq!(v["status"]["verdict"], "Fail");
}

