use super::*;
use crate::char2::odd_characteristics;
use crate::dimension_cert::certify_dimensions;
use crate::linalg_cert::matrix::normalize;
use crate::synthetic::{random_unit, random_vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const G5_CURVE: &str = include_str!("../../fixtures/genus5/curve.json");
const G5_HYPS: &str = include_str!("../../fixtures/genus5/hyperplanes.json");
const EQ_CURVE: &str = include_str!("../../fixtures/elliptic_quartic/curve.json");
const EQ_HYPS: &str = include_str!("../../fixtures/elliptic_quartic/hyperplanes.json");
const RIEMANN_G1: &str = include_str!("../../fixtures/riemann_g1.json");

fn g5() -> Model {
    ingest_str(G5_CURVE, G5_HYPS, None).unwrap()
}

fn perturbed(model: &Model, size: f64, seed: u64) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = model.clone();
    let mut bump = |v: &[C64]| {
        let d = normalize(&random_vector(&mut rng, v.len()));
        normalize(&v.iter().zip(&d).map(|(a, b)| a + b * size).collect::<Vec<_>>())
    };
    for h in &mut m.hyperplanes {
        h.coeffs = bump(&h.coeffs);
        h.points = h.points.iter().map(|p| bump(p)).collect();
    }
    let (c, h) = m.to_files();
    ingest_str(&c, &h, None).unwrap()
}

#[test]
fn elliptic_fixture_loads_with_no_candidates() {
    let m = ingest_str(EQ_CURVE, EQ_HYPS, None).unwrap();
    assert_eq!(m.g(), 4);
    assert_eq!(m.ideal.len(), 2);
    assert_eq!(m.curve_id, "elliptic-quartic");
    assert!(m.hyperplanes.is_empty());
    let r = run_pipeline(&m, &PipelineConfig::default(), Stages::All).unwrap();
    assert_eq!(r.overall, Verdict::Indeterminate);
    assert_eq!(r.tangency.items.len(), 0);
    assert!(r.tangency.reason.is_some());
}

#[test]
fn genus5_fixture_certifies() {
    let m = g5();
    assert!(m.stats.within_budget, "{:?}", m.stats);
    let r = run_pipeline(&m, &PipelineConfig::default(), Stages::Tangency).unwrap();
    assert_eq!(r.overall, Verdict::Pass);
    let t = &r.tangency.items[0];
    assert!(t.point_bound.unwrap() < 1e-6 && t.hyperplane_bound.unwrap() < 1e-6);
    assert!(r.steiner.is_none() && r.dimensions.is_none());
    // The later stages lack data and cannot pass.
    let all = run_pipeline(&m, &PipelineConfig::default(), Stages::All).unwrap();
    assert_eq!(all.overall, Verdict::Indeterminate);
    assert_eq!(all.steiner.as_ref().unwrap().verdict, Verdict::Indeterminate);
    assert_eq!(all.dimensions.as_ref().unwrap().verdict, Verdict::Indeterminate);
}

#[test]
fn perturbed_candidate_fails_and_names_stage() {
    let m = perturbed(&g5(), 1e-3, 5);
    assert!(!m.stats.within_budget);
    let r = run_pipeline(&m, &PipelineConfig::default(), Stages::Tangency).unwrap();
    let t = &r.tangency.items[0];
    assert_ne!(t.verdict, Verdict::Pass, "{t:?}");
    assert!(t.stage.is_some());
    assert_ne!(r.overall, Verdict::Pass);
    assert!(render_text(&r).contains(t.stage.as_deref().unwrap()));
}

#[test]
fn corrupted_json_reports_line() {
    let bad = G5_HYPS.replacen("\"g\": 5,", "\"g\": 5,,", 1);
    match ingest_str(G5_CURVE, &bad, None) {
        Err(PipelineError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    let e = ingest_str("{\"g\": 4,\n \"quadrics\": [", EQ_HYPS, None).unwrap_err();
    assert!(e.to_string().contains("line 2"), "{e}");
}

#[test]
fn dimension_and_schema_checks() {
    assert!(matches!(ingest_str(G5_CURVE, EQ_HYPS, None), Err(PipelineError::Dimension(_))));
    let future = EQ_HYPS.replacen("\"schema\": 1", "\"schema\": 9", 1);
    assert!(matches!(ingest_str(EQ_CURVE, &future, None), Err(PipelineError::Schema { .. })));
    let mut v: Value = serde_json::from_str(G5_HYPS).unwrap();
    let h = v["hyperplanes"][0].clone();
    v["hyperplanes"] = Value::Array(vec![h.clone(), h]);
    assert!(matches!(ingest_str(G5_CURVE, &v.to_string(), None), Err(PipelineError::Schema { .. })));
    let mut short: Value = serde_json::from_str(G5_HYPS).unwrap();
    short["hyperplanes"][0]["points"].as_array_mut().unwrap().pop();
    assert!(matches!(ingest_str(G5_CURVE, &short.to_string(), None), Err(PipelineError::Dimension(_))));
}

#[test]
fn non_unit_inputs_are_renormalized_with_warning() {
    let mut v: Value = serde_json::from_str(G5_HYPS).unwrap();
    for z in v["hyperplanes"][0]["coeffs"].as_array_mut().unwrap() {
        let re = z[0].as_f64().unwrap();
        let im = z[1].as_f64().unwrap();
        *z = serde_json::json!([2.0 * re, 2.0 * im]);
    }
    let m = ingest_str(G5_CURVE, &v.to_string(), None).unwrap();
    assert_eq!(m.stats.renormalized, 1);
    assert_eq!(m.stats.warnings.len(), 1);
    let orig = g5();
    let d: f64 = m.hyperplanes[0].coeffs.iter().zip(&orig.hyperplanes[0].coeffs).map(|(a, b)| (a - b).norm()).sum();
    assert!(d < 1e-15);
}

#[test]
fn model_round_trips_through_files() {
    let m = g5();
    let (c, h) = m.to_files();
    let back = ingest_str(&c, &h, None).unwrap();
    assert_eq!(back.ideal, m.ideal);
    assert_eq!(back.hyperplanes, m.hyperplanes);
    assert_eq!(back.curve_id, m.curve_id);
    assert_eq!(back.stats, m.stats);
    let (c2, h2) = back.to_files();
    assert_eq!((c, h), (c2, h2));
}

#[test]
fn json_is_identical_across_runs_and_thread_counts() {
    let m = g5();
    let one = PipelineConfig { threads: Some(1), ..Default::default() };
    let four = PipelineConfig { threads: Some(4), ..Default::default() };
    let a = run_pipeline(&m, &one, Stages::All).unwrap();
    let b = run_pipeline(&m, &four, Stages::All).unwrap();
    let c = run_pipeline(&m, &one, Stages::All).unwrap();
    // Thread count is part of the recorded config; everything else agrees.
    let strip = |r: &CertificationReport| {
        let mut r = r.clone();
        r.config.threads = None;
        report_render(&r, Format::Json)
    };
    assert_eq!(report_render(&a, Format::Json), report_render(&c, Format::Json));
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn canonical_json_format() {
    let r = run_pipeline(&g5(), &PipelineConfig::default(), Stages::Tangency).unwrap();
    let s = report_render(&r, Format::Json);
    assert!(!s.trim_end().contains('\n') && !s.contains(": "));
    let v: Value = serde_json::from_str(&s).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(s.starts_with("{\"config\":"));
    // Seventeen significant digits for every float.
    assert!(s.contains("\"azygetic_a\":2.0000000000000001e-1"));
    let back: CertificationReport = serde_json::from_str(&s).unwrap();
    assert_eq!(back.overall, r.overall);
}

#[test]
fn text_summary_lists_properties() {
    let r = run_pipeline(&g5(), &PipelineConfig::default(), Stages::All).unwrap();
    let t = report_render(&r, Format::Text);
    for p in ["Property A:", "Property B:", "Property C:"] {
        assert!(t.contains(p), "{t}");
    }
    assert!(t.contains("overall: INDETERMINATE"));
}

#[test]
fn csv_has_one_row_per_sigma_table() {
    let mut r = run_pipeline(&g5(), &PipelineConfig::default(), Stages::Tangency).unwrap();
    assert_eq!(report_render(&r, Format::CsvSigma), "");
    let g = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let hyps: Vec<LabeledHyperplane> = odd_characteristics(g)
        .unwrap()
        .into_iter()
        .map(|ch| LabeledHyperplane { characteristic: ch, coeffs: random_unit(&mut rng, g), accuracy: 1e-9 })
        .collect();
    let alphas: Vec<TwoTorsion> = TwoTorsion::all_nonzero(g).into_iter().take(3).collect();
    let rep = certify_dimensions(g, &hyps, &alphas, None, MachineEps::default()).unwrap();
    r.dimensions = Some(DimensionSection { verdict: Verdict::Fail, reason: None, report: Some(rep) });
    let csv = report_render(&r, Format::CsvSigma);
    assert_eq!(csv.lines().count(), sigma_table_count(&r));
    assert_eq!(sigma_table_count(&r), 4);
    let first = csv.lines().next().unwrap();
    assert_eq!(first.split(',').count(), 2 + 231);
}

#[test]
fn subsets_and_config_validation() {
    let m = g5();
    let cfg = PipelineConfig { hyperplane_subset: Some(vec![]), ..Default::default() };
    let r = run_pipeline(&m, &cfg, Stages::Tangency).unwrap();
    assert_eq!(r.overall, Verdict::Indeterminate);
    let cfg = PipelineConfig { hyperplane_subset: Some(vec![3]), ..Default::default() };
    assert!(matches!(run_pipeline(&m, &cfg, Stages::Tangency), Err(PipelineError::Config(_))));
    let cfg = PipelineConfig { syzygetic_eps: 0.5, azygetic_a: 0.2, ..Default::default() };
    assert!(cfg.validate().is_err());
    let cfg = PipelineConfig { threads: Some(0), ..Default::default() };
    assert!(cfg.validate().is_err());
    assert!(PipelineConfig::default().validate().is_ok());
}

#[test]
fn list_parsers() {
    assert_eq!(parse_index_list("0, 3,5-7,3").unwrap(), vec![0, 3, 5, 6, 7]);
    assert!(parse_index_list("4-2").is_err());
    assert!(parse_index_list("x").is_err());
    let t = parse_two_torsion("100;011", 3).unwrap();
    assert_eq!(t.to_string(), "[100;011]");
    assert_eq!(parse_two_torsion("[100;011]", 3).unwrap(), t);
    assert!(parse_two_torsion("000;000", 3).is_err());
    assert!(parse_two_torsion("10;011", 3).is_err());
}

#[test]
fn combine_is_fail_closed() {
    use Verdict::*;
    assert_eq!(combine([Pass, Pass]), Pass);
    assert_eq!(combine([Pass, Indeterminate]), Indeterminate);
    assert_eq!(combine([Indeterminate, Fail, Pass]), Fail);
    assert_eq!(combine([]), Pass);
}

#[test]
fn genus_one_skeleton() {
    let s = emit_theta_inputs(RIEMANN_G1, 1e-12).unwrap();
    assert_eq!(s.g, 1);
    assert_eq!(s.hyperplanes.len(), 1);
    assert!((norm_of(&s.hyperplanes[0].coeffs) - 1.0).abs() < 1e-15);
    let text = serde_json::to_string(&s).unwrap();
    assert_eq!(parse_skeleton(&text).unwrap(), s);
}

fn norm_of(v: &[C64]) -> f64 {
    crate::linalg_cert::matrix::norm(v)
}

#[test]
fn genus_six_skeleton_count() {
    let g = 6;
    let tau: Vec<Vec<[f64; 2]>> =
        (0..g).map(|i| (0..g).map(|j| if i == j { [0.1, 1.5] } else { [0.05, 0.1] }).collect()).collect();
    let tau1: Vec<Vec<[f64; 2]>> = (0..g).map(|i| (0..g).map(|j| if i == j { [1.0, 0.0] } else { [0.0, 0.0] }).collect()).collect();
    let text = serde_json::json!({"schema": 1, "g": g, "tau": tau, "tau1": tau1}).to_string();
    let s = emit_theta_inputs(&text, 1e-6).unwrap();
    assert_eq!(s.hyperplanes.len(), 2016);
}

#[test]
fn riemann_errors() {
    let no_tau1 = r#"{"g": 1, "tau": [[[0.0, 1.0]]]}"#;
    assert!(matches!(emit_theta_inputs(no_tau1, 1e-10), Err(PipelineError::Theta(_))));
    let singular = r#"{"g": 1, "tau": [[[0.0, 1.0]]], "tau1": [[[0.0, 0.0]]]}"#;
    assert!(matches!(emit_theta_inputs(singular, 1e-10), Err(PipelineError::Theta(_))));
    let wrong = r#"{"g": 2, "tau": [[[0.0, 1.0]]]}"#;
    assert!(matches!(parse_riemann(wrong), Err(PipelineError::Dimension(_))));
}
