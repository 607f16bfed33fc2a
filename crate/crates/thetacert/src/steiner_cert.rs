//! Numerical certification of Steiner sets.
//!
//! Pairs of odd theta characteristics are represented by the contact points
//! of their two hyperplanes. Two such pairs are syzygetic exactly when the
//! union of their contact points is cut out by a quadric outside the ideal,
//! which shows up as an extra small singular value of the degree-2
//! evaluation matrix on those points.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::char2::{partition_certify, CharPair, Characteristic, Outcome, PartitionVerdict, TwoTorsion};
use crate::curve_local::QuadricIdeal;
use crate::linalg_cert::matrix::{dot, norm, normalize, projective_distance, ComplexMatrix, C64};
use crate::linalg_cert::{sigma_radius, svd_with_eps, LinalgError, MachineEps, SigmaBounds};
use crate::monomials::{ideal_quadric_vectors, multiply, MonomialBasis};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SteinerError {
    #[error("divisor has no points")]
    EmptyDivisor,
    #[error("point of length {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("points {0} and {1} of a divisor coincide")]
    Duplicate(usize, usize),
    #[error("zero vector in divisor")]
    ZeroVector,
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("{what}: denominator {value:e} is not positive")]
    Denominator { what: &'static str, value: f64 },
    #[error("expected a {expected}-dimensional complement, found {found}")]
    DimensionAudit { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Ordered support of an effective divisor, unit representatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisorPoints {
    points: Vec<Vec<C64>>,
    min_separation: f64,
}

impl DivisorPoints {
    pub fn new(points: Vec<Vec<C64>>) -> Result<Self, SteinerError> {
        let first = points.first().ok_or(SteinerError::EmptyDivisor)?;
        let n = first.len();
        let mut unit = Vec::with_capacity(points.len());
        for p in &points {
            if p.len() != n {
                return Err(SteinerError::Dimension { expected: n, found: p.len() });
            }
            let np = norm(p);
            if !(np > 0.0) || !np.is_finite() {
                return Err(SteinerError::ZeroVector);
            }
            unit.push(normalize(p));
        }
        let mut min_separation = f64::INFINITY;
        for i in 0..unit.len() {
            for j in (i + 1)..unit.len() {
                let d = projective_distance(&unit[i], &unit[j]);
                if d < 1e-14 {
                    return Err(SteinerError::Duplicate(i, j));
                }
                min_separation = min_separation.min(d);
            }
        }
        Ok(Self { points: unit, min_separation })
    }

    pub fn points(&self) -> &[Vec<C64>] {
        &self.points
    }

    pub fn degree(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Smallest pairwise projective distance.
    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// Support of the sum of two divisors (points of `other` appended).
    pub fn sum(&self, other: &Self) -> Vec<Vec<C64>> {
        self.points.iter().chain(&other.points).cloned().collect()
    }
}

/// Evaluation of every degree-`k` monomial (lexicographic) at every point.
pub fn build_md(points: &[Vec<C64>], k: usize) -> ComplexMatrix {
    let n = points.first().map_or(0, |p| p.len());
    MonomialBasis::new(n, k).evaluation_matrix(points)
}

/// `|M_D·V_p| = √Σ|p(x)|²` over the support.
pub fn gap(points: &[Vec<C64>], p: &[C64], k: usize) -> f64 {
    let m = build_md(points, k);
    norm(&m.matvec(p).expect("coefficient vector matches basis"))
}

/// Low-degree slices of a curve ideal: quadric generators in degree 2 and any
/// further generators needed in degree 4 (coefficient vectors in the
/// lexicographic monomial bases).
#[derive(Debug, Clone, PartialEq)]
pub struct IdealData {
    nvars: usize,
    quadrics: Vec<Vec<C64>>,
    quartics: Vec<Vec<C64>>,
}

impl IdealData {
    pub fn new(nvars: usize, quadrics: Vec<Vec<C64>>, quartics: Vec<Vec<C64>>) -> Result<Self, SteinerError> {
        let n2 = MonomialBasis::new(nvars, 2).len();
        let n4 = MonomialBasis::new(nvars, 4).len();
        for q in &quadrics {
            if q.len() != n2 {
                return Err(SteinerError::Dimension { expected: n2, found: q.len() });
            }
        }
        for q in &quartics {
            if q.len() != n4 {
                return Err(SteinerError::Dimension { expected: n4, found: q.len() });
            }
        }
        Ok(Self { nvars, quadrics, quartics })
    }

    /// Ideal generated by quadrics.
    pub fn from_quadrics(ideal: &QuadricIdeal) -> Self {
        Self { nvars: ideal.g(), quadrics: ideal_quadric_vectors(ideal), quartics: Vec::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn dim_i2(&self) -> usize {
        self.quadrics.len()
    }

    pub fn quadrics(&self) -> &[Vec<C64>] {
        &self.quadrics
    }

    /// Spanning set of the degree-4 part: quadric generators times all
    /// degree-2 monomials, plus the extra quartic generators.
    pub fn degree4_span(&self) -> Vec<Vec<C64>> {
        let b2 = MonomialBasis::new(self.nvars, 2);
        let b4 = MonomialBasis::new(self.nvars, 4);
        let mut out = Vec::new();
        for q in &self.quadrics {
            for m in 0..b2.len() {
                let mut e = vec![C64::new(0.0, 0.0); b2.len()];
                e[m] = C64::new(1.0, 0.0);
                out.push(multiply(q, &b2, &e, &b2, &b4));
            }
        }
        out.extend(self.quartics.iter().cloned());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SyzygyKind {
    ApproxSyzygetic,
    NumericallyAzygetic,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyzygyVerdict {
    pub kind: SyzygyKind,
    /// Enclosure of the `(dim I₂ + 1)`-th smallest singular value.
    pub sigma_used: SigmaBounds,
    /// Upper bound on the operator norm of the evaluation matrix.
    pub op_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyzygyThresholds {
    pub eps: f64,
    pub a: f64,
}

impl Default for SyzygyThresholds {
    fn default() -> Self {
        Self { eps: 1e-8, a: 0.2 }
    }
}

/// Bound on a degree-`k` monomial row error for a unit point known to `δ`.
pub fn monomial_row_error(delta: f64, k: i32) -> f64 {
    (1.0 + delta).powi(k) - 1.0
}

/// Classifies the pair `(dᵢ, dⱼ)` from the evaluation matrix on `dᵢ + dⱼ`.
///
/// `accuracy[r]` bounds the distance of the r-th point of the concatenated
/// support from the true point (after phase alignment).
pub fn syzygy_test(
    di: &DivisorPoints,
    dj: &DivisorPoints,
    dim_i2: usize,
    accuracy: &[f64],
    thresholds: SyzygyThresholds,
    eps: MachineEps,
) -> Result<SyzygyVerdict, SteinerError> {
    if !(thresholds.eps > 0.0 && thresholds.a > thresholds.eps) {
        return Err(SteinerError::Malformed(format!("thresholds eps={} A={}", thresholds.eps, thresholds.a)));
    }
    let pts = di.sum(dj);
    if accuracy.len() != pts.len() {
        return Err(SteinerError::Dimension { expected: pts.len(), found: accuracy.len() });
    }
    let m = build_md(&pts, 2);
    let s = svd_with_eps(&m, eps)?;
    let all = s.all_values();
    let idx = all.len().checked_sub(dim_i2 + 1).ok_or(SteinerError::Malformed("ideal larger than Sym²".into()))?;
    let errs: f64 = accuracy.iter().map(|&d| monomial_row_error(d, 2).powi(2)).sum::<f64>().sqrt();
    let rad = sigma_radius(s.sigma_max(), errs, pts.len(), eps);
    let sigma = SigmaBounds::new(all[idx], rad);
    let kind = if sigma.upper < thresholds.eps {
        SyzygyKind::ApproxSyzygetic
    } else if sigma.lower > thresholds.a {
        SyzygyKind::NumericallyAzygetic
    } else {
        SyzygyKind::Indeterminate
    };
    Ok(SyzygyVerdict { kind, sigma_used: sigma, op_norm: s.sigma_max() + rad })
}

fn gram_schmidt(vs: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &out {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nw = norm(&w);
        if nw > 1e-10 * norm(v).max(1e-300) {
            out.push(w.iter().map(|z| z / nw).collect());
        }
    }
    out
}

fn project_out(v: &[C64], onb: &[Vec<C64>]) -> Vec<C64> {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for b in onb {
            let c = dot(b, &w);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
    }
    w
}

/// Unit quadric spanning the extra kernel direction of `M₁₃`, orthogonal to `I₂`.
pub fn syzygy_quadric(points: &[Vec<C64>], ideal: &IdealData, eps: MachineEps) -> Result<Vec<C64>, SteinerError> {
    let m = build_md(points, 2);
    let s = svd_with_eps(&m, eps)?;
    let cols = s.all_values().len();
    let idx = cols.checked_sub(ideal.dim_i2() + 1).ok_or(SteinerError::Malformed("ideal larger than Sym²".into()))?;
    let i2 = gram_schmidt(ideal.quadrics());
    let q = project_out(&s.right_vector(idx), &i2);
    let nq = norm(&q);
    if !(nq > 1e-6) {
        return Err(SteinerError::Denominator { what: "syzygy quadric after projection", value: nq });
    }
    Ok(q.iter().map(|z| z / nq).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BResult {
    /// Lower bound on the smallest singular value of the square evaluation matrix.
    pub b: f64,
    pub b_computed: f64,
    pub dim_v: usize,
    /// Largest `|⟨s, w⟩|/|s|` over spanning vectors `s` and basis vectors `w` of V.
    pub audit_residual: f64,
}

/// The constant controlling weak transitivity for the syzygetic pair `(d1, d3)`.
///
/// `V` is the unitary complement in `Sym⁴` of `H⁰(2K)·Q₁₃` and the degree-4
/// part of the ideal, with `H⁰(2K)` the complement of `I₂` in `Sym²`.
pub fn compute_b(
    d1: &DivisorPoints,
    d3: &DivisorPoints,
    ideal: &IdealData,
    accuracy: &[f64],
    eps: MachineEps,
) -> Result<BResult, SteinerError> {
    let pts = d1.sum(d3);
    let n = ideal.nvars();
    let b2 = MonomialBasis::new(n, 2);
    let b4 = MonomialBasis::new(n, 4);
    let q13 = syzygy_quadric(&pts, ideal, eps)?;
    let i2 = gram_schmidt(ideal.quadrics());
    let h2k = crate::linalg_cert::matrix::orthogonal_complement(&i2, b2.len());
    let mut span: Vec<Vec<C64>> = h2k.iter().map(|h| multiply(h, &b2, &q13, &b2, &b4)).collect();
    span.extend(ideal.degree4_span());
    let conj_rows: Vec<Vec<C64>> = span.iter().map(|r| r.iter().map(|z| z.conj()).collect()).collect();
    let sm = svd_with_eps(&ComplexMatrix::from_rows(&conj_rows)?, eps)?;
    let all = sm.all_values();
    let expected = pts.len();
    let tol = 1e-9 * sm.sigma_max();
    let found = all.iter().filter(|&&v| v <= tol).count();
    if found != expected || b4.len() < expected || all[b4.len() - expected - 1] <= 1e3 * tol {
        return Err(SteinerError::DimensionAudit { expected, found });
    }
    let basis: Vec<Vec<C64>> = (b4.len() - expected..b4.len()).map(|j| sm.right_vector(j)).collect();
    let mut audit: f64 = 0.0;
    for s in &span {
        let ns = norm(s);
        if ns == 0.0 {
            continue;
        }
        for w in &basis {
            audit = audit.max(dot(s, w).norm() / ns);
        }
    }
    let ev = b4.evaluation_matrix(&pts);
    let square = ComplexMatrix::from_fn(expected, expected, |r, c| {
        ev.row(r).iter().zip(&basis[c]).map(|(a, b)| a * b).sum()
    });
    let sb = svd_with_eps(&square, eps)?;
    let b_computed = sb.all_values()[expected - 1];
    let errs: f64 = accuracy.iter().map(|&d| monomial_row_error(d, 4).powi(2)).sum::<f64>().sqrt();
    let rad = sigma_radius(sb.sigma_max(), errs, expected, eps);
    Ok(BResult { b: b_computed - rad, b_computed, dim_v: basis.len(), audit_residual: audit })
}

/// How approximately syzygetic the complementary pair is, given two
/// `eps`-approximately syzygetic pairs with evaluation norms `norm12`,
/// `norm34` and the constant `b`.
pub fn weak_transitivity_bound(g: usize, norm12: f64, norm34: f64, eps: f64, b: f64) -> Result<f64, SteinerError> {
    let m = norm12.max(norm34);
    let gm1 = (g - 1) as f64;
    let den = std::f64::consts::SQRT_2 - (4.0 * gm1).sqrt() * m * eps / b;
    if !(den > 0.0) || !(b > 0.0) {
        return Err(SteinerError::Denominator { what: "weak transitivity", value: den });
    }
    Ok(gm1.sqrt() * (2.0 + 2.0 * std::f64::consts::SQRT_2) * m * eps / den)
}

/// Contact points of one theta hyperplane with their accuracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaDivisor {
    pub characteristic: Characteristic,
    pub points: Vec<Vec<C64>>,
    /// Bound on the distance of each point from the true contact point.
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinerConfig {
    pub thresholds: SyzygyThresholds,
    pub eps: MachineEps,
}

impl Default for SteinerConfig {
    fn default() -> Self {
        Self { thresholds: SyzygyThresholds::default(), eps: MachineEps::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinerMeasurements {
    /// Largest upper enclosure among the syzygetic tests.
    pub eps_measured: f64,
    /// Smallest lower enclosure among the azygetic tests.
    pub a_measured: f64,
    pub b: Option<f64>,
    pub norm_max: f64,
    pub transitivity_bound: Option<f64>,
    pub tests: usize,
    /// Interpretation used for the syzygy quadric: the extra kernel direction
    /// of the evaluation matrix, made orthogonal to `I₂`.
    pub quadric_interpretation: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinerAlphaVerdict {
    pub alpha: TwoTorsion,
    pub pairs: Vec<CharPair>,
    pub verdict: PartitionVerdict,
    pub measurements: SteinerMeasurements,
}

impl SteinerAlphaVerdict {
    pub fn is_pass(&self) -> bool {
        self.verdict.is_pass()
    }
}

struct PairData {
    divisor: DivisorPoints,
    accuracy: Vec<f64>,
}

/// Certifies, for each requested `α`, that the available pairs labelled `α`
/// form a constituent of one Steiner set.
pub fn certify_steiner(
    thetas: &[ThetaDivisor],
    ideal: &IdealData,
    alphas: &[TwoTorsion],
    cfg: &SteinerConfig,
) -> Result<Vec<SteinerAlphaVerdict>, SteinerError> {
    let g = thetas.first().ok_or(SteinerError::Malformed("no theta divisors".into()))?.characteristic.genus();
    if alphas.is_empty() {
        return Err(SteinerError::Malformed("no Steiner sets requested".into()));
    }
    let mut by_char: BTreeMap<Characteristic, &ThetaDivisor> = BTreeMap::new();
    for t in thetas {
        if t.characteristic.genus() != g || !t.characteristic.is_odd() {
            return Err(SteinerError::Malformed(format!("characteristic {} is not odd of genus {g}", t.characteristic)));
        }
        if by_char.insert(t.characteristic, t).is_some() {
            return Err(SteinerError::Malformed(format!("duplicate characteristic {}", t.characteristic)));
        }
    }
    let chars: Vec<Characteristic> = by_char.keys().copied().collect();
    let mut by_label: BTreeMap<TwoTorsion, Vec<CharPair>> = BTreeMap::new();
    for (i, a) in chars.iter().enumerate() {
        for b in &chars[i + 1..] {
            let p = CharPair::new(*a, *b).map_err(|e| SteinerError::Malformed(e.to_string()))?;
            by_label.entry(p.label()).or_default().push(p);
        }
    }
    // Divisors are built only for the pairs a test touches.
    let pair_data = |p: &CharPair| -> Result<PairData, SteinerError> {
        let (ta, tb) = (by_char[&p.first()], by_char[&p.second()]);
        let mut pts = ta.points.clone();
        pts.extend(tb.points.iter().cloned());
        let mut accuracy = vec![ta.accuracy; ta.points.len()];
        accuracy.extend(vec![tb.accuracy; tb.points.len()]);
        Ok(PairData { divisor: DivisorPoints::new(pts)?, accuracy })
    };

    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let s = by_label.get(&alpha).cloned().unwrap_or_default();
        if s.is_empty() {
            return Err(SteinerError::Malformed(format!("no pairs carry label {alpha}")));
        }
        let ds = s[0];
        // One representative per label, disjoint from the distinguished pair when possible.
        let mut s_bar = Vec::new();
        let mut ib = 0;
        for (label, ps) in &by_label {
            let rep = if *label == alpha { ds } else { *ps.iter().find(|p| !p.shares_with(&ds)).unwrap_or(&ps[0]) };
            if *label == alpha {
                ib = s_bar.len();
            }
            s_bar.push(rep);
        }
        let mut needed: Vec<(CharPair, CharPair)> = Vec::new();
        needed.extend(s.iter().skip(1).map(|t| (ds, *t)));
        needed.extend(s_bar.iter().enumerate().filter(|(k, _)| *k != ib).map(|(_, t)| (ds, *t)));
        for i in 0..s_bar.len() {
            for j in (i + 1)..s_bar.len() {
                if !s_bar[i].shares_with(&s_bar[j]) {
                    needed.push((s_bar[i], s_bar[j]));
                }
            }
        }
        needed.sort();
        needed.dedup();
        let mut touched: Vec<CharPair> = needed.iter().flat_map(|&(a, b)| [a, b]).chain(s.iter().copied()).collect();
        touched.sort();
        touched.dedup();
        let pairs: BTreeMap<CharPair, PairData> =
            touched.iter().map(|p| Ok((*p, pair_data(p)?))).collect::<Result<_, SteinerError>>()?;
        let dim_i2 = ideal.dim_i2();
        let results: Vec<((CharPair, CharPair), Result<SyzygyVerdict, SteinerError>)> = needed
            .par_iter()
            .map(|&(a, b)| {
                let (pa, pb) = (&pairs[&a], &pairs[&b]);
                let mut acc = pa.accuracy.clone();
                acc.extend(pb.accuracy.iter().copied());
                ((a, b), syzygy_test(&pa.divisor, &pb.divisor, dim_i2, &acc, cfg.thresholds, cfg.eps))
            })
            .collect();
        let mut table: HashMap<(CharPair, CharPair), SyzygyVerdict> = HashMap::new();
        for (k, r) in results {
            table.insert(k, r?);
        }
        let lookup = |a: &CharPair, b: &CharPair| -> Option<SyzygyVerdict> {
            table.get(&(*a, *b)).or_else(|| table.get(&(*b, *a))).copied()
        };

        let syz: Vec<SyzygyVerdict> = s.iter().skip(1).filter_map(|t| lookup(&ds, t)).collect();
        let eps_measured = syz.iter().map(|v| v.sigma_used.upper).fold(0.0, f64::max);
        let a_measured = table
            .values()
            .filter(|v| v.kind == SyzygyKind::NumericallyAzygetic)
            .map(|v| v.sigma_used.lower)
            .fold(f64::INFINITY, f64::min);
        let norm_max = table.values().map(|v| v.op_norm).fold(0.0, f64::max);
        let mut b_min: Option<f64> = None;
        let mut bound = None;
        let transitivity = if s.len() == 1 {
            Outcome::Holds
        } else {
            let mut b_ok = true;
            for t in s.iter().skip(1) {
                let (pa, pb) = (&pairs[&ds], &pairs[t]);
                let mut acc = pa.accuracy.clone();
                acc.extend(pb.accuracy.iter().copied());
                match compute_b(&pa.divisor, &pb.divisor, ideal, &acc, cfg.eps) {
                    Ok(br) => b_min = Some(b_min.map_or(br.b, |x: f64| x.min(br.b))),
                    Err(_) => b_ok = false,
                }
            }
            match (b_ok, b_min) {
                (true, Some(b)) => match weak_transitivity_bound(g, norm_max, norm_max, eps_measured, b) {
                    Ok(w) => {
                        bound = Some(w);
                        if a_measured > w && cfg.thresholds.a > w {
                            Outcome::Holds
                        } else {
                            Outcome::Indeterminate
                        }
                    }
                    Err(_) => Outcome::Indeterminate,
                },
                _ => Outcome::Indeterminate,
            }
        };
        let as_outcome = |v: Option<SyzygyVerdict>, want: SyzygyKind| match v.map(|v| v.kind) {
            Some(k) if k == want => Outcome::Holds,
            Some(SyzygyKind::Indeterminate) | None => Outcome::Indeterminate,
            Some(_) => Outcome::Fails,
        };
        let verdict = partition_certify(
            g,
            &s,
            &s_bar,
            (ib, 0),
            transitivity,
            |a, b| as_outcome(lookup(a, b), SyzygyKind::NumericallyAzygetic),
            |a, b| as_outcome(lookup(a, b), SyzygyKind::ApproxSyzygetic),
        );
        out.push(SteinerAlphaVerdict {
            alpha,
            pairs: s.clone(),
            verdict,
            measurements: SteinerMeasurements {
                eps_measured,
                a_measured,
                b: b_min,
                norm_max,
                transitivity_bound: bound,
                tests: table.len(),
                quadric_interpretation: "extra kernel vector of M_13 projected off I_2",
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
