//! Ingestion of curve and hyperplane files, staged certification and report
//! rendering.
//!
//! Files are JSON with an explicit `"g"` and `"schema"`; complex numbers are
//! `[re, im]` pairs (plain numbers are read as reals).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::char2::{Characteristic, TwoTorsion};
use crate::curve_local::{eval_ideal, solve_t, CurveError, QuadricIdeal};
use crate::dimension_cert::{certify_dimensions, dimension_table, DimensionReport, LabeledHyperplane, Properties};
use crate::linalg_cert::matrix::{dot_plain, ComplexMatrix, C64};
use crate::linalg_cert::MachineEps;
use crate::steiner_cert::{certify_steiner, IdealData, SteinerConfig, SyzygyThresholds, ThetaDivisor};
use crate::tangency_cert::{certify_hyperplane, HyperplaneCandidate, TangencyConfig, Verdict};
use crate::theta_eval::{theta_hyperplanes, RiemannMatrix, ThetaError};

pub const SCHEMA_VERSION: u32 = 1;

/// Input budget: `|H′ᵀP′|`, ideal residual at the points, tangential residual.
pub const INCIDENCE_BUDGET: f64 = 1e-10;
pub const IDEAL_BUDGET: f64 = 1e-11;
pub const TANGENCY_BUDGET: f64 = 1e-6;
/// Inputs further than this from unit norm are renormalized with a warning.
pub const UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{file}: parse error at line {line}, column {column}: {message}")]
    Parse { file: String, line: usize, column: usize, message: String },
    #[error("{file}: {message}")]
    Schema { file: String, message: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

fn parse_json<T: for<'de> Deserialize<'de>>(file: &str, text: &str) -> Result<T, PipelineError> {
    serde_json::from_str(text).map_err(|e| PipelineError::Parse {
        file: file.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn schema_error(file: &str, message: impl Into<String>) -> PipelineError {
    PipelineError::Schema { file: file.to_string(), message: message.into() }
}

fn check_schema(file: &str, schema: Option<u32>) -> Result<(), PipelineError> {
    match schema {
        None => Ok(()),
        Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(schema_error(file, format!("unsupported schema version {v}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub machine_eps: MachineEps,
    pub syzygetic_eps: f64,
    pub azygetic_a: f64,
    pub newton_accept: f64,
    /// Tolerance for theta lattice sums when emitting hyperplanes.
    pub theta_tol: f64,
    pub hyperplane_subset: Option<Vec<usize>>,
    pub steiner_subset: Option<Vec<TwoTorsion>>,
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            machine_eps: MachineEps::default(),
            syzygetic_eps: 1e-8,
            azygetic_a: 0.2,
            newton_accept: 1e-3,
            theta_tol: 1e-12,
            hyperplane_subset: None,
            steiner_subset: None,
            threads: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let positive = [
            ("syzygetic_eps", self.syzygetic_eps),
            ("azygetic_a", self.azygetic_a),
            ("newton_accept", self.newton_accept),
            ("theta_tol", self.theta_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PipelineError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.syzygetic_eps >= self.azygetic_a {
            return Err(PipelineError::Config(format!(
                "syzygetic_eps {} must be below azygetic_a {}",
                self.syzygetic_eps, self.azygetic_a
            )));
        }
        if self.threads == Some(0) {
            return Err(PipelineError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parses index lists such as `0,3,5-9`.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>, PipelineError> {
    let mut out = BTreeSet::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || PipelineError::Config(format!("bad index range '{part}'"));
        if let Some((a, b)) = part.split_once('-') {
            let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.insert(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out.into_iter().collect())
}

/// Parses a two-torsion point written as `eps;delta` bit strings, e.g. `100;011`.
pub fn parse_two_torsion(s: &str, g: usize) -> Result<TwoTorsion, PipelineError> {
    let bad = || PipelineError::Config(format!("bad two-torsion point '{s}', expected e.g. 100;011"));
    let t = s.trim().trim_start_matches('[').trim_end_matches(']');
    let (e, d) = t.split_once(';').ok_or_else(bad)?;
    if e.len() != g || d.len() != g {
        return Err(bad());
    }
    let bits = |x: &str| -> Result<Vec<u8>, PipelineError> {
        x.chars().map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(bad()),
        })
        .collect()
    };
    let c = Characteristic::new(&bits(e)?, &bits(d)?).map_err(|_| bad())?;
    let t = TwoTorsion { genus: g as u8, eps: c.eps_bits(), delta: c.delta_bits() };
    if t.is_zero() {
        return Err(bad());
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneFile {
    #[serde(default)]
    pub schema: Option<u32>,
    pub g: usize,
    pub hyperplanes: Vec<HyperplaneCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannFile {
    #[serde(default)]
    pub schema: Option<u32>,
    pub g: usize,
    pub tau: Vec<Vec<C64>>,
    #[serde(default)]
    pub tau1: Option<Vec<Vec<C64>>>,
}

#[derive(Deserialize)]
struct CurveHeader {
    #[serde(default)]
    schema: Option<u32>,
    #[serde(default)]
    id: Option<String>,
    g: usize,
}

/// Uncertified hyperplane coefficients computed from theta gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSkeleton {
    pub schema: u32,
    pub g: usize,
    pub hyperplanes: Vec<SkeletonEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonEntry {
    pub characteristic: Characteristic,
    pub coeffs: Vec<C64>,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputStats {
    pub max_incidence: f64,
    pub max_ideal_residual: f64,
    pub max_tangential_residual: f64,
    pub renormalized: usize,
    pub within_budget: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub curve_sha256: String,
    pub hyperplanes_sha256: String,
    pub riemann_sha256: Option<String>,
}

/// Validated inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub curve_id: String,
    pub ideal: QuadricIdeal,
    pub hyperplanes: Vec<HyperplaneCandidate>,
    pub riemann: Option<RiemannMatrix>,
    pub stats: InputStats,
    pub provenance: Provenance,
}

impl Model {
    pub fn g(&self) -> usize {
        self.ideal.g()
    }

    /// Curve and hyperplane files that ingest back to this model.
    pub fn to_files(&self) -> (String, String) {
        let mut curve: Value = serde_json::from_str(&self.ideal.to_json()).expect("curve json");
        curve["schema"] = SCHEMA_VERSION.into();
        curve["id"] = self.curve_id.clone().into();
        let h = HyperplaneFile { schema: Some(SCHEMA_VERSION), g: self.g(), hyperplanes: self.hyperplanes.clone() };
        (curve.to_string(), serde_json::to_string(&h).expect("hyperplane json"))
    }
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|e| PipelineError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn ingest(curve: &Path, hyperplanes: &Path, riemann: Option<&Path>) -> Result<Model, PipelineError> {
    let riemann_text = riemann.map(read).transpose()?;
    let default_id = curve.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut m = ingest_str(&read(curve)?, &read(hyperplanes)?, riemann_text.as_deref())?;
    if m.curve_id.is_empty() {
        m.curve_id = default_id;
    }
    Ok(m)
}

/// Parses the matrix rows of a Riemann file entry.
fn matrix_from_rows(file: &str, what: &str, rows: &[Vec<C64>], g: usize) -> Result<ComplexMatrix, PipelineError> {
    if rows.len() != g || rows.iter().any(|r| r.len() != g) {
        return Err(PipelineError::Dimension(format!("{file}: {what} must be {g}×{g}")));
    }
    ComplexMatrix::from_rows(rows).map_err(|e| schema_error(file, e.to_string()))
}

pub fn parse_riemann(text: &str) -> Result<RiemannMatrix, PipelineError> {
    let f: RiemannFile = parse_json("riemann", text)?;
    check_schema("riemann", f.schema)?;
    let tau = matrix_from_rows("riemann", "tau", &f.tau, f.g)?;
    let tau1 = f.tau1.as_ref().map(|t| matrix_from_rows("riemann", "tau1", t, f.g)).transpose()?;
    Ok(RiemannMatrix::new(tau, tau1)?)
}

pub fn ingest_str(curve: &str, hyperplanes: &str, riemann: Option<&str>) -> Result<Model, PipelineError> {
    let header: CurveHeader = parse_json("curve", curve)?;
    check_schema("curve", header.schema)?;
    let ideal = QuadricIdeal::from_json(curve).map_err(|e| match e {
        CurveError::Parse(m) => schema_error("curve", m),
        other => other.into(),
    })?;
    if ideal.g() != header.g {
        return Err(PipelineError::Dimension(format!("curve declares g = {}, quadrics are {}×{}", header.g, ideal.g(), ideal.g())));
    }
    let hf: HyperplaneFile = parse_json("hyperplanes", hyperplanes)?;
    check_schema("hyperplanes", hf.schema)?;
    let g = ideal.g();
    if hf.g != g {
        return Err(PipelineError::Dimension(format!("hyperplanes declare g = {}, curve has g = {g}", hf.g)));
    }
    let mut warnings = Vec::new();
    let mut renormalized = 0;
    let mut cands = Vec::with_capacity(hf.hyperplanes.len());
    let mut seen = BTreeSet::new();
    for (i, h) in hf.hyperplanes.into_iter().enumerate() {
        let (c, dev) = HyperplaneCandidate::new(h.coeffs, h.points, h.characteristic)
            .map_err(|e| PipelineError::Dimension(format!("hyperplane {i}: {e}")))?;
        if let Some(ch) = c.characteristic {
            if ch.genus() != g {
                return Err(PipelineError::Dimension(format!("hyperplane {i}: characteristic of genus {}", ch.genus())));
            }
            if !seen.insert(ch) {
                return Err(schema_error("hyperplanes", format!("hyperplane {i}: duplicate characteristic {ch}")));
            }
        }
        if dev > UNIT_TOLERANCE {
            renormalized += 1;
            warnings.push(format!("hyperplane {i}: vectors renormalized (deviation {dev:.3e})"));
        }
        cands.push(c);
    }
    let riemann_matrix = riemann.map(parse_riemann).transpose()?;
    if let Some(r) = &riemann_matrix {
        if r.genus() != g {
            return Err(PipelineError::Dimension(format!("riemann matrix has g = {}, curve has g = {g}", r.genus())));
        }
    }
    let stats = input_stats(&ideal, &cands, warnings, renormalized);
    Ok(Model {
        curve_id: header.id.unwrap_or_default(),
        ideal,
        hyperplanes: cands,
        riemann: riemann_matrix,
        stats,
        provenance: Provenance {
            curve_sha256: sha256_hex(curve),
            hyperplanes_sha256: sha256_hex(hyperplanes),
            riemann_sha256: riemann.map(sha256_hex),
        },
    })
}

fn input_stats(ideal: &QuadricIdeal, cands: &[HyperplaneCandidate], mut warnings: Vec<String>, renormalized: usize) -> InputStats {
    let (mut inc, mut res, mut tan): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for c in cands {
        for p in &c.points {
            inc = inc.max(dot_plain(&c.coeffs, p).norm());
            if let Ok(e) = eval_ideal(p, ideal) {
                res = res.max(e.norm);
            }
            match solve_t(p, ideal, MachineEps::default()) {
                Ok(t) => tan = tan.max(dot_plain(&c.coeffs, &t.t).norm()),
                Err(_) => tan = f64::INFINITY,
            }
        }
    }
    let within_budget = inc < INCIDENCE_BUDGET && res < IDEAL_BUDGET && tan < TANGENCY_BUDGET;
    if !cands.is_empty() && !within_budget {
        warnings.push(format!(
            "input residuals outside budget: incidence {inc:.3e}, ideal {res:.3e}, tangential {tan:.3e}"
        ));
    }
    InputStats {
        max_incidence: inc,
        max_ideal_residual: res,
        max_tangential_residual: tan,
        renormalized,
        within_budget,
        warnings,
    }
}

/// Uncertified hyperplanes from theta gradients at the origin.
pub fn emit_theta_inputs(riemann: &str, tol: f64) -> Result<ThetaSkeleton, PipelineError> {
    let r = parse_riemann(riemann)?;
    let hyps = theta_hyperplanes(&r, tol)?;
    Ok(ThetaSkeleton {
        schema: SCHEMA_VERSION,
        g: r.genus(),
        hyperplanes: hyps
            .into_iter()
            .map(|h| SkeletonEntry { characteristic: h.characteristic, coeffs: h.coeffs, tail_bound: h.tail_bound })
            .collect(),
    })
}

pub fn parse_skeleton(text: &str) -> Result<ThetaSkeleton, PipelineError> {
    let s: ThetaSkeleton = parse_json("skeleton", text)?;
    check_schema("skeleton", Some(s.schema))?;
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stages {
    Tangency,
    Steiner,
    Dimensions,
    All,
}

impl Stages {
    fn steiner(self) -> bool {
        matches!(self, Stages::Steiner | Stages::All)
    }

    fn dims(self) -> bool {
        matches!(self, Stages::Dimensions | Stages::All)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencySummary {
    pub index: usize,
    pub characteristic: Option<Characteristic>,
    pub verdict: Verdict,
    pub stage: Option<String>,
    pub reason: String,
    pub eps0_max: Option<f64>,
    pub point_bound: Option<f64>,
    pub hyperplane_bound: Option<f64>,
    pub odd: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinerSummary {
    pub alpha: TwoTorsion,
    pub verdict: Verdict,
    pub detail: String,
    pub pairs: usize,
    pub eps_measured: f64,
    pub a_measured: Option<f64>,
    pub b: Option<f64>,
    pub norm_max: f64,
    pub transitivity_bound: Option<f64>,
    pub tests: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageResult<T> {
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub items: Vec<T>,
}

impl<T> StageResult<T> {
    fn skipped(verdict: Verdict, reason: impl Into<String>) -> Self {
        Self { verdict, reason: Some(reason.into()), items: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSection {
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub report: Option<DimensionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub schema: u32,
    pub curve_id: String,
    pub g: usize,
    pub input: InputStats,
    pub tangency: StageResult<TangencySummary>,
    pub steiner: Option<StageResult<SteinerSummary>>,
    pub dimensions: Option<DimensionSection>,
    pub properties: Option<Properties>,
    pub overall: Verdict,
    pub notes: Vec<String>,
    pub provenance: Provenance,
    pub config: PipelineConfig,
}

/// Combines stage verdicts: any FAIL fails, otherwise any INDETERMINATE wins.
pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Pass;
    for v in verdicts {
        match v {
            Verdict::Fail => return Verdict::Fail,
            Verdict::Indeterminate => out = Verdict::Indeterminate,
            Verdict::Pass => {}
        }
    }
    out
}

const TARGET_NOTE: &str = "stacked-kernel target rank is dim Sym²H⁰(2K), the codimension of the intersection";

pub fn run_pipeline(model: &Model, cfg: &PipelineConfig, stages: Stages) -> Result<CertificationReport, PipelineError> {
    cfg.validate()?;
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PipelineError::Config(e.to_string()))?;
            pool.install(|| run_stages(model, cfg, stages))
        }
        None => run_stages(model, cfg, stages),
    }
}

fn run_stages(model: &Model, cfg: &PipelineConfig, stages: Stages) -> Result<CertificationReport, PipelineError> {
    use rayon::prelude::*;
    let g = model.g();
    let indices: Vec<usize> = match &cfg.hyperplane_subset {
        Some(s) => {
            if let Some(&bad) = s.iter().find(|&&i| i >= model.hyperplanes.len()) {
                return Err(PipelineError::Config(format!(
                    "subset index {bad} out of range ({} hyperplanes)",
                    model.hyperplanes.len()
                )));
            }
            s.clone()
        }
        None => (0..model.hyperplanes.len()).collect(),
    };
    let tcfg = TangencyConfig { eps: cfg.machine_eps, newton_accept: cfg.newton_accept };
    let certs: Vec<(usize, Result<crate::tangency_cert::TangencyCertificate, String>)> = indices
        .par_iter()
        .map(|&i| (i, certify_hyperplane(&model.hyperplanes[i], &model.ideal, &tcfg).map_err(|e| e.to_string())))
        .collect();
    let finite = |x: f64| if x.is_finite() { Some(x) } else { None };
    let summaries: Vec<TangencySummary> = certs
        .iter()
        .map(|(i, r)| match r {
            Ok(c) => TangencySummary {
                index: *i,
                characteristic: c.characteristic,
                verdict: c.status.verdict,
                stage: c.status.stage.map(|s| format!("{s:?}")),
                reason: c.status.reason.clone(),
                eps0_max: c.eps0.iter().copied().reduce(f64::max).and_then(finite),
                point_bound: finite(c.point_bound),
                hyperplane_bound: finite(c.hyperplane_bound),
                odd: c.odd,
            },
            Err(e) => TangencySummary {
                index: *i,
                characteristic: model.hyperplanes[*i].characteristic,
                verdict: Verdict::Indeterminate,
                stage: Some("Input".into()),
                reason: e.clone(),
                eps0_max: None,
                point_bound: None,
                hyperplane_bound: None,
                odd: None,
            },
        })
        .collect();
    let tangency = if summaries.is_empty() {
        StageResult::skipped(Verdict::Indeterminate, "no hyperplane candidates")
    } else {
        StageResult { verdict: combine(summaries.iter().map(|s| s.verdict)), reason: None, items: summaries }
    };

    let passed: Vec<(usize, &crate::tangency_cert::TangencyCertificate)> = certs
        .iter()
        .filter_map(|(i, r)| r.as_ref().ok().filter(|c| c.status.verdict == Verdict::Pass).map(|c| (*i, c)))
        .collect();
    let labeled: Vec<Labeled> =
        passed.iter().filter_map(|(i, c)| c.characteristic.map(|ch| (ch, *i, *c))).collect();
    let alphas: Vec<TwoTorsion> = cfg.steiner_subset.clone().unwrap_or_else(|| labels_present(&labeled, g).into_iter().collect());
    let mut notes = Vec::new();

    let steiner = if stages.steiner() {
        Some(run_steiner(model, cfg, &labeled, &alphas))
    } else {
        None
    };

    let dimensions = if stages.dims() {
        notes.push(TARGET_NOTE.to_string());
        Some(run_dims(model, cfg, &labeled, &alphas))
    } else {
        None
    };
    let properties = dimensions.as_ref().and_then(|d| d.report.as_ref().map(|r| r.properties));

    let mut all = vec![tangency.verdict];
    all.extend(steiner.as_ref().map(|s| s.verdict));
    all.extend(dimensions.as_ref().map(|d| d.verdict));
    let overall = combine(all);
    let mut input = model.stats.clone();
    input.warnings.sort();
    Ok(CertificationReport {
        schema: SCHEMA_VERSION,
        curve_id: model.curve_id.clone(),
        g,
        input,
        tangency,
        steiner,
        dimensions,
        properties,
        overall,
        notes,
        provenance: model.provenance.clone(),
        config: cfg.clone(),
    })
}

type Labeled<'a> = (Characteristic, usize, &'a crate::tangency_cert::TangencyCertificate);

fn labels_present(labeled: &[Labeled], g: usize) -> BTreeSet<TwoTorsion> {
    let mut set = BTreeSet::new();
    for (k, (a, _, _)) in labeled.iter().enumerate() {
        for (b, _, _) in &labeled[k + 1..] {
            set.insert(TwoTorsion { genus: g as u8, eps: a.eps_bits() ^ b.eps_bits(), delta: a.delta_bits() ^ b.delta_bits() });
        }
    }
    set
}

fn run_steiner(model: &Model, cfg: &PipelineConfig, labeled: &[Labeled], alphas: &[TwoTorsion]) -> StageResult<SteinerSummary> {
    let g = model.g();
    let labels = (1usize << (2 * g)) - 1;
    if labeled.len() < 2 || alphas.is_empty() {
        return StageResult::skipped(Verdict::Indeterminate, "fewer than two certified, labelled hyperplanes");
    }
    let present = labels_present(labeled, g);
    if present.len() != labels {
        return StageResult::skipped(
            Verdict::Indeterminate,
            format!("certified hyperplanes cover {} of {labels} Steiner labels", present.len()),
        );
    }
    let thetas: Vec<ThetaDivisor> = labeled
        .iter()
        .map(|(ch, i, c)| ThetaDivisor {
            characteristic: *ch,
            points: model.hyperplanes[*i].points.clone(),
            accuracy: c.point_bound,
        })
        .collect();
    let scfg = SteinerConfig {
        thresholds: SyzygyThresholds { eps: cfg.syzygetic_eps, a: cfg.azygetic_a },
        eps: cfg.machine_eps,
    };
    match certify_steiner(&thetas, &IdealData::from_quadrics(&model.ideal), alphas, &scfg) {
        Ok(vs) => {
            let items: Vec<SteinerSummary> = vs
                .into_iter()
                .map(|v| SteinerSummary {
                    alpha: v.alpha,
                    verdict: match &v.verdict {
                        crate::char2::PartitionVerdict::Pass => Verdict::Pass,
                        crate::char2::PartitionVerdict::Fail { .. } => Verdict::Fail,
                        crate::char2::PartitionVerdict::Indeterminate { .. } => Verdict::Indeterminate,
                    },
                    detail: format!("{:?}", v.verdict),
                    pairs: v.pairs.len(),
                    eps_measured: v.measurements.eps_measured,
                    a_measured: Some(v.measurements.a_measured).filter(|x| x.is_finite()),
                    b: v.measurements.b,
                    norm_max: v.measurements.norm_max,
                    transitivity_bound: v.measurements.transitivity_bound,
                    tests: v.measurements.tests,
                })
                .collect();
            StageResult { verdict: combine(items.iter().map(|s| s.verdict)), reason: None, items }
        }
        Err(e) => StageResult::skipped(Verdict::Indeterminate, e.to_string()),
    }
}

fn run_dims(model: &Model, cfg: &PipelineConfig, labeled: &[Labeled], alphas: &[TwoTorsion]) -> DimensionSection {
    let g = model.g();
    let skip = |reason: String| DimensionSection { verdict: Verdict::Indeterminate, reason: Some(reason), report: None };
    match dimension_table(g) {
        Ok(t) if t.certifiable() => {}
        Ok(t) => return skip(format!("expected codimension {} at genus {g} is not positive", t.d_alpha)),
        Err(e) => return skip(e.to_string()),
    }
    if alphas.is_empty() {
        return skip("no labelled pairs among certified hyperplanes".into());
    }
    let hyps: Vec<LabeledHyperplane> = labeled
        .iter()
        .map(|(ch, i, c)| LabeledHyperplane {
            characteristic: *ch,
            coeffs: model.hyperplanes[*i].coeffs.clone(),
            accuracy: c.hyperplane_bound,
        })
        .collect();
    match certify_dimensions(g, &hyps, alphas, None, cfg.machine_eps) {
        Ok(r) => {
            let p = r.properties;
            DimensionSection { verdict: combine([p.a, p.b, p.c]), reason: None, report: Some(r) }
        }
        Err(e) => skip(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
    CsvSigma,
}

pub fn report_render(report: &CertificationReport, format: Format) -> String {
    match format {
        Format::Json => {
            let v = serde_json::to_value(report).expect("report serializes");
            let mut out = String::new();
            write_canonical(&v, &mut out);
            out.push('\n');
            out
        }
        Format::Text => render_text(report),
        Format::CsvSigma => render_csv(report),
    }
}

/// Sorted keys (maps are ordered), no whitespace, floats with 17 significant digits.
fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or(f64::NAN);
                let _ = write!(out, "{x:.16e}");
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(a) => {
            out.push('[');
            for (k, x) in a.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_canonical(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            out.push('{');
            for (k, (key, x)) in m.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("key"));
                out.push(':');
                write_canonical(x, out);
            }
            out.push('}');
        }
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Indeterminate => "INDETERMINATE",
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into())
}

fn render_text(r: &CertificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "curve {} (g = {})", r.curve_id, r.g);
    let _ = writeln!(s, "overall: {}", verdict_str(r.overall));
    let passed = r.tangency.items.iter().filter(|t| t.verdict == Verdict::Pass).count();
    let _ = writeln!(s, "tangency: {} ({passed}/{} certified)", verdict_str(r.tangency.verdict), r.tangency.items.len());
    if let Some(reason) = &r.tangency.reason {
        let _ = writeln!(s, "  {reason}");
    }
    for t in &r.tangency.items {
        let ch = t.characteristic.map(|c| c.to_string()).unwrap_or_else(|| "-".into());
        let _ = write!(s, "  #{} {ch} {}", t.index, verdict_str(t.verdict));
        if t.verdict == Verdict::Pass {
            let _ = writeln!(s, " points {} hyperplane {}", opt(t.point_bound), opt(t.hyperplane_bound));
        } else {
            let _ = writeln!(s, " at {}: {}", t.stage.as_deref().unwrap_or("-"), t.reason);
        }
    }
    match &r.steiner {
        None => s.push_str("steiner: not run\n"),
        Some(st) => {
            let _ = writeln!(s, "steiner: {}", verdict_str(st.verdict));
            if let Some(reason) = &st.reason {
                let _ = writeln!(s, "  {reason}");
            }
            for v in &st.items {
                let _ = writeln!(
                    s,
                    "  alpha {} {} eps {:.3e} A {} B {}",
                    v.alpha,
                    verdict_str(v.verdict),
                    v.eps_measured,
                    opt(v.a_measured),
                    opt(v.b)
                );
            }
        }
    }
    match &r.dimensions {
        None => s.push_str("dimensions: not run\n"),
        Some(d) => {
            let _ = writeln!(s, "dimensions: {}", verdict_str(d.verdict));
            if let Some(reason) = &d.reason {
                let _ = writeln!(s, "  {reason}");
            }
        }
    }
    let (a, b, c) = match &r.properties {
        Some(p) => (verdict_str(p.a), verdict_str(p.b), verdict_str(p.c)),
        None => ("NOT RUN", "NOT RUN", "NOT RUN"),
    };
    let _ = writeln!(s, "Property A: {a}\nProperty B: {b}\nProperty C: {c}");
    for n in r.input.warnings.iter().chain(&r.notes) {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

/// One line per stored singular-value table: `name,count,σ₁,σ₂,…`.
fn render_csv(r: &CertificationReport) -> String {
    let mut s = String::new();
    let mut line = |name: String, values: &[f64]| {
        let _ = write!(s, "{name},{}", values.len());
        for v in values {
            let _ = write!(s, ",{v:.16e}");
        }
        s.push('\n');
    };
    if let Some(rep) = r.dimensions.as_ref().and_then(|d| d.report.as_ref()) {
        for c in &rep.per_alpha {
            line(format!("alpha {}", c.alpha), &c.cert.singular_values);
        }
        if let Some(st) = &rep.stacked {
            line("stacked".into(), &st.singular_values);
        }
    }
    s
}

/// Number of singular-value tables a report stores.
pub fn sigma_table_count(r: &CertificationReport) -> usize {
    r.dimensions
        .as_ref()
        .and_then(|d| d.report.as_ref())
        .map(|rep| rep.per_alpha.len() + usize::from(rep.stacked.is_some()))
        .unwrap_or(0)
}

#[cfg(test)]
mod tests;
