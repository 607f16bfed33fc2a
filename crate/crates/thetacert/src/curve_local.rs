//! Local geometry of a curve cut out by quadrics in Pᵍ⁻¹.
//!
//! At a smooth point `P` the matrix `M` with rows `PᵗQᵢ` has co-rank 2 (its
//! kernel holds `P` and the tangent direction). Appending the row `P†` leaves
//! the tangent `T` as the kernel, and appending `T†` makes the system for the
//! second-order coefficient `R` uniquely solvable. The triple gives the conic
//! model `x ↦ P + xT + x²R` of the curve near `P`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::linalg_cert::matrix::{dot, dot_plain, norm, normalize, ComplexMatrix, C64, ZERO};
use crate::linalg_cert::{svd_with_eps, AngleBound, LinalgError, MachineEps, SvdResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurveError {
    #[error("ideal has no quadrics")]
    Empty,
    #[error("quadric {index} is not {expected}×{expected}")]
    Dimension { index: usize, expected: usize },
    #[error("quadric {index} is not symmetric (defect {defect:e})")]
    NotSymmetric { index: usize, defect: f64 },
    #[error("point has length {found}, ideal lives in dimension {expected}")]
    PointLength { expected: usize, found: usize },
    #[error("need at least {needed} quadrics for this operation, have {found}")]
    TooFewQuadrics { needed: usize, found: usize },
    #[error("curve file: {0}")]
    Parse(String),
    #[error("no existence radius: sigma {sigma:e}, residual {residual:e}, quadratic constant {quad:e}")]
    NoNewtonRadius { sigma: f64, residual: f64, quad: f64 },
    #[error("second-order system is singular (sigma_min {0:e}); flex or singular point")]
    Degenerate(f64),
    #[error("W_T vanishes; flex-like point, conic constants undefined")]
    FlexLike,
    #[error("projection onto the curve did not converge (residual {0:e})")]
    NoConvergence(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A finite list of symmetric quadrics `Qᵢ` on Cᵍ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadricIdeal {
    g: usize,
    quadrics: Vec<ComplexMatrix>,
    op_norms: Vec<f64>,
    q_m: f64,
}

#[derive(Deserialize)]
struct CurveFile {
    g: usize,
    quadrics: Vec<Vec<Vec<Value>>>,
}

pub(crate) fn parse_complex(v: &Value) -> Result<C64, CurveError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(|x| C64::new(x, 0.0))
            .ok_or_else(|| CurveError::Parse(format!("bad number {n}"))),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or_else(|| CurveError::Parse(format!("bad entry {v}")))?;
            let im = a[1].as_f64().ok_or_else(|| CurveError::Parse(format!("bad entry {v}")))?;
            Ok(C64::new(re, im))
        }
        _ => Err(CurveError::Parse(format!("entry {v} is neither a number nor [re, im]"))),
    }
}

impl QuadricIdeal {
    pub fn new(quadrics: Vec<ComplexMatrix>) -> Result<Self, CurveError> {
        let g = quadrics.first().ok_or(CurveError::Empty)?.rows();
        let e = MachineEps::default().value();
        let mut op_norms = Vec::with_capacity(quadrics.len());
        for (index, q) in quadrics.iter().enumerate() {
            if q.shape() != (g, g) {
                return Err(CurveError::Dimension { index, expected: g });
            }
            let defect = q.sub(&q.transpose())?.max_abs();
            if defect > 4.0 * e * q.max_abs() {
                return Err(CurveError::NotSymmetric { index, defect });
            }
            let s = svd_with_eps(q, MachineEps::default())?;
            op_norms.push(s.sigma_max() + s.backward_error);
        }
        let q_m = op_norms.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(Self { g, quadrics, op_norms, q_m })
    }

    /// Parses `{"g": n, "quadrics": [[row, …], …]}` with integer, real or `[re, im]` entries.
    pub fn from_json(text: &str) -> Result<Self, CurveError> {
        let f: CurveFile = serde_json::from_str(text).map_err(|e| CurveError::Parse(e.to_string()))?;
        let mut qs = Vec::with_capacity(f.quadrics.len());
        for (index, q) in f.quadrics.iter().enumerate() {
            if q.len() != f.g || q.iter().any(|r| r.len() != f.g) {
                return Err(CurveError::Dimension { index, expected: f.g });
            }
            let rows: Vec<Vec<C64>> =
                q.iter().map(|r| r.iter().map(parse_complex).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
            qs.push(ComplexMatrix::from_rows(&rows)?);
        }
        if qs.is_empty() {
            return Err(CurveError::Empty);
        }
        Self::new(qs)
    }

    pub fn to_json(&self) -> String {
        let qs: Vec<Vec<Vec<[f64; 2]>>> = self
            .quadrics
            .iter()
            .map(|q| (0..self.g).map(|i| q.row(i).iter().map(|z| [z.re, z.im]).collect()).collect())
            .collect();
        serde_json::json!({ "g": self.g, "quadrics": qs }).to_string()
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn len(&self) -> usize {
        self.quadrics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quadrics.is_empty()
    }

    pub fn quadrics(&self) -> &[ComplexMatrix] {
        &self.quadrics
    }

    /// Upper bounds on the operator norms.
    pub fn op_norms(&self) -> &[f64] {
        &self.op_norms
    }

    /// `√Σ‖Qᵢ‖²` (operator norms).
    pub fn q_m(&self) -> f64 {
        self.q_m
    }

    /// `Σ cₖ Qₖ`.
    pub fn combination(&self, coeffs: &[C64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.g, self.g);
        for (q, &c) in self.quadrics.iter().zip(coeffs) {
            out = out.add(&q.scale(c)).expect("same shape");
        }
        out
    }

    /// The ideal in coordinates `y = U x` for unitary `U`.
    pub fn transform(&self, u: &ComplexMatrix) -> Result<Self, CurveError> {
        let uh = u.adjoint();
        let uc = ComplexMatrix::from_fn(self.g, self.g, |i, j| u[(i, j)].conj());
        let qs = self.quadrics.iter().map(|q| uc.matmul(q)?.matmul(&uh)).collect::<Result<Vec<_>, _>>()?;
        Self::new(qs.into_iter().map(symmetrize).collect())
    }

    pub fn scaled(&self, s: f64) -> Result<Self, CurveError> {
        Self::new(self.quadrics.iter().map(|q| q.scale(C64::new(s, 0.0))).collect())
    }

    fn check_point(&self, p: &[C64]) -> Result<(), CurveError> {
        if p.len() != self.g {
            return Err(CurveError::PointLength { expected: self.g, found: p.len() });
        }
        Ok(())
    }
}

fn symmetrize(q: ComplexMatrix) -> ComplexMatrix {
    let n = q.rows();
    ComplexMatrix::from_fn(n, n, |i, j| (q[(i, j)] + q[(j, i)]) * 0.5)
}

fn quad_form(q: &ComplexMatrix, a: &[C64], b: &[C64]) -> C64 {
    dot_plain(a, &q.matvec(b).expect("shape checked"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealEval {
    pub residuals: Vec<C64>,
    pub norm: f64,
}

/// `(PᵗQᵢP)ᵢ` and its Euclidean norm.
pub fn eval_ideal(p: &[C64], ideal: &QuadricIdeal) -> Result<IdealEval, CurveError> {
    ideal.check_point(p)?;
    let residuals: Vec<C64> = ideal.quadrics.iter().map(|q| quad_form(q, p, p)).collect();
    Ok(IdealEval { norm: norm(&residuals), residuals })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalMatrices {
    /// Rows `PᵗQᵢ`.
    pub m: ComplexMatrix,
    /// `M` with `P†` appended.
    pub m_t: ComplexMatrix,
    /// `M_T` with `T†` appended, when `T` was supplied.
    pub m_r: Option<ComplexMatrix>,
}

fn m_matrix(p: &[C64], ideal: &QuadricIdeal) -> ComplexMatrix {
    let rows: Vec<Vec<C64>> = ideal
        .quadrics
        .iter()
        .map(|q| q.transpose().matvec(p).expect("shape checked"))
        .collect();
    ComplexMatrix::from_rows(&rows).expect("equal rows")
}

fn conj(v: &[C64]) -> Vec<C64> {
    v.iter().map(|z| z.conj()).collect()
}

pub fn build_matrices(p: &[C64], t: Option<&[C64]>, ideal: &QuadricIdeal) -> Result<LocalMatrices, CurveError> {
    ideal.check_point(p)?;
    let m = m_matrix(p, ideal);
    let mut m_t = m.clone();
    m_t.push_row(&conj(p))?;
    let m_r = match t {
        Some(t) => {
            ideal.check_point(t)?;
            let mut r = m_t.clone();
            r.push_row(&conj(t))?;
            Some(r)
        }
        None => None,
    };
    Ok(LocalMatrices { m, m_t, m_r })
}

/// Separation of the lowest right singular value (padded with zeros for
/// wide matrices) from the rest of the spectrum.
pub fn lowest_vector_gap(s: &SvdResult) -> f64 {
    let all = s.all_values();
    let n = all.len();
    if n < 2 {
        return all.first().copied().unwrap_or(0.0);
    }
    let rows = s.left_vectors.rows();
    if rows >= n {
        (all[n - 2] - all[n - 1]).min(all[n - 1])
    } else {
        // Padded zero: the kernel is separated from the smallest true value.
        all[n - 2] - all[n - 1]
    }
}

/// Makes the first coordinate of non-negligible size real and positive.
pub fn fix_phase(v: &[C64]) -> Vec<C64> {
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    match v.iter().find(|z| z.norm() > 1e-6 * big) {
        Some(z) => {
            let ph = z.conj() / z.norm();
            v.iter().map(|w| w * ph).collect()
        }
        None => v.to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentSolve {
    pub t: Vec<C64>,
    /// All singular values of `M_T`, padded to length g.
    pub values: Vec<f64>,
    pub gap: f64,
    pub angle: AngleBound,
}

/// Lowest right singular vector of `M_T`.
pub fn solve_t(p: &[C64], ideal: &QuadricIdeal, eps: MachineEps) -> Result<TangentSolve, CurveError> {
    let mats = build_matrices(p, None, ideal)?;
    let s = svd_with_eps(&mats.m_t, eps)?;
    let g = ideal.g;
    let t = fix_phase(&s.right_vector(g - 1));
    let gap = lowest_vector_gap(&s);
    let angle = crate::linalg_cert::angle_bound(s.sigma_max(), gap, eps);
    Ok(TangentSolve { t, values: s.all_values().to_vec(), gap, angle })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderSolve {
    pub r: Vec<C64>,
    /// `|u†y|` for left basis vectors outside the column space of `M_R`.
    pub residual_report: Vec<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Minimum-norm solution of `M_R R = −½(TᵗQᵢT, …, 0, 0)`.
pub fn solve_r(p: &[C64], t: &[C64], ideal: &QuadricIdeal, eps: MachineEps) -> Result<SecondOrderSolve, CurveError> {
    let mats = build_matrices(p, Some(t), ideal)?;
    let m_r = mats.m_r.expect("t supplied");
    let mut y: Vec<C64> = ideal.quadrics.iter().map(|q| -0.5 * quad_form(q, t, t)).collect();
    y.push(ZERO);
    y.push(ZERO);
    let s = svd_with_eps(&m_r, eps)?;
    let g = ideal.g;
    let sigma_min = s.all_values()[g - 1];
    if !(sigma_min > 1e3 * s.backward_error) {
        return Err(CurveError::Degenerate(sigma_min));
    }
    let sol = crate::linalg_cert::solve_ls_with_bound(&m_r, &y, sigma_min, 0.0, 0.0, eps)?;
    Ok(SecondOrderSolve {
        r: sol.solution,
        residual_report: sol.residual_report,
        sigma_min,
        sigma_max: s.sigma_max(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonRadius {
    /// A true curve point lies within `r` of the input (in Cᵍ).
    pub r: f64,
    /// `|(P̃ᵗQ̃ᵢP̃)ᵢ|` over the combined quadrics.
    pub v: f64,
    /// Lower bound for `σ_{g−2}(M̃)`.
    pub sigma: f64,
    /// Upper bound for `√Σ‖Q̃ᵢ‖²`, the quadratic remainder constant.
    pub quad: f64,
    /// The `g − 2` quadrics `Q̃ᵢ = Σₖ conj(uₖᵢ) Qₖ` paired with the top singular values.
    pub top_quadrics: Vec<ComplexMatrix>,
}

/// Existence radius for a curve point near `p_tilde`.
///
/// Restricted to the span of the top `g − 2` right singular vectors of `M̃`
/// the map `z ↦ ((P̃+z)ᵗQ̃ᵢ(P̃+z))ᵢ` has linear part with inverse norm
/// `1/(2σ)` and quadratic part below `K|z|²`, so a fixed point exists in the
/// ball of radius `r` whenever `v + K r² ≤ 2σ r`. We return the smaller root
/// of `K r² − 2σ r + v`, inflated by `1 + 10⁻⁶`.
pub fn newton_radius(p_tilde: &[C64], ideal: &QuadricIdeal, eps: MachineEps) -> Result<NewtonRadius, CurveError> {
    ideal.check_point(p_tilde)?;
    let g = ideal.g;
    let k = g.saturating_sub(2);
    if ideal.len() < k || k == 0 {
        return Err(CurveError::TooFewQuadrics { needed: k.max(1), found: ideal.len() });
    }
    let m = m_matrix(p_tilde, ideal);
    let s = svd_with_eps(&m, eps)?;
    let sigma = (s.sigma(k - 1) - s.backward_error).max(0.0);
    let mut top = Vec::with_capacity(k);
    let mut vals = Vec::with_capacity(k);
    let mut quad_sq = 0.0;
    for i in 0..k {
        let u = s.left_vector(i);
        let q = ideal.combination(&conj(&u));
        vals.push(quad_form(&q, p_tilde, p_tilde));
        let qs = svd_with_eps(&q, eps)?;
        let n = qs.sigma_max() + qs.backward_error;
        quad_sq += n * n;
        top.push(q);
    }
    let v = norm(&vals) * (1.0 + 4.0 * g as f64 * eps.value());
    let quad = quad_sq.sqrt() * (1.0 + eps.value() * g as f64);
    let disc = sigma * sigma - quad * v;
    if !(sigma > 0.0) || disc < 0.0 {
        return Err(CurveError::NoNewtonRadius { sigma, residual: v, quad });
    }
    let r = if v == 0.0 { 0.0 } else { v / (sigma + disc.sqrt()) * (1.0 + 1e-6) };
    Ok(NewtonRadius { r, v, sigma, quad, top_quadrics: top })
}

/// Inputs to the conic-approximation constants. Interval ends allow the
/// caller to pass certified enclosures; exact callers pass equal ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConicInputs {
    pub g: usize,
    /// Lower bound on `σ_{g−2}(M)`.
    pub sigma_m: f64,
    /// Lower bound on `σ_{g−1}(M_T)`.
    pub sigma_mt: f64,
    /// Upper bound on `|R|`.
    pub r_norm: f64,
    pub w_t_lower: f64,
    pub w_t_upper: f64,
    /// Upper bound on `|W_R|`.
    pub w_r: f64,
    pub q_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConicConstants {
    pub r_x: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    /// The seven radii whose minimum is `r_x`.
    pub terms: [f64; 7],
}

pub fn conic_constants(inp: &ConicInputs) -> Result<ConicConstants, CurveError> {
    if !(inp.w_t_upper > 0.0) {
        return Err(CurveError::FlexLike);
    }
    if !(inp.sigma_m > 0.0) || !(inp.sigma_mt > 0.0) {
        return Err(CurveError::Degenerate(inp.sigma_m.min(inp.sigma_mt)));
    }
    let (sm, st, qm, wt) = (inp.sigma_m, inp.sigma_mt, inp.q_m, inp.w_t_upper);
    let g = inp.g as f64;
    let div = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::INFINITY };
    let terms = [
        div(1.0, 4.0 * inp.r_norm),
        sm / (2.0 * qm),
        div(inp.w_t_lower, 2.0 * inp.w_r),
        (sm * sm / (g * wt)).cbrt(),
        st / (8.0 * qm),
        (st * sm / (4.0 * (qm + 2.0) * wt)).cbrt(),
        sm / (qm + 1.0),
    ];
    let mut r_x = terms.iter().cloned().fold(f64::INFINITY, f64::min);
    // κ₀ is the existence radius of a zero near P_x at the largest admissible
    // |x|, divided by |x|³: the small root of q_m·r² − 2σ_x·r + |F| with
    // |F| ≤ 2|x|³|W_T| + |x|⁴|W_R| and σ_x ≥ σ_{g−2}(M) − q_m(|x| + |R||x|²).
    // Its limit as |x| → 0 is |W_T|/σ_{g−2}(M), which is sharp to leading
    // order and so cannot serve as a bound by itself.
    let mut kappa0 = f64::INFINITY;
    for _ in 0..64 {
        let sx = sm - qm * (r_x + inp.r_norm * r_x * r_x);
        let f = 2.0 * r_x.powi(3) * wt + r_x.powi(4) * inp.w_r;
        let disc = sx * sx - qm * f;
        if sx > 0.0 && disc > 0.0 {
            kappa0 = f / (sx + disc.sqrt()) / r_x.powi(3);
            break;
        }
        r_x *= 0.5;
    }
    if !kappa0.is_finite() {
        return Err(CurveError::Degenerate(sm));
    }
    Ok(ConicConstants { r_x, kappa0, kappa1: 8.0 * wt / st, terms })
}

/// Conic model of the curve at a point together with its constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConicJet {
    pub p: Vec<C64>,
    pub t: Vec<C64>,
    pub r: Vec<C64>,
    /// `|R|`.
    pub c: f64,
    pub w_t: Vec<C64>,
    pub w_r: Vec<C64>,
    pub q_m: f64,
    pub sigma_m: f64,
    pub sigma_mt: f64,
    pub sigma_mr: f64,
    pub r_x: f64,
    pub kappa0: f64,
    pub kappa1: f64,
}

impl ConicJet {
    /// `P + xT + x²R`.
    pub fn model(&self, x: C64) -> Vec<C64> {
        (0..self.p.len()).map(|k| self.p[k] + x * self.t[k] + x * x * self.r[k]).collect()
    }

    /// `T + 2xR`.
    pub fn model_derivative(&self, x: C64) -> Vec<C64> {
        (0..self.p.len()).map(|k| self.t[k] + 2.0 * x * self.r[k]).collect()
    }

    /// `R/|R|`.
    pub fn r_unit(&self) -> Vec<C64> {
        normalize(&self.r)
    }
}

/// `(TᵗQᵢR)ᵢ` and `(RᵗQᵢR)ᵢ`.
pub fn w_vectors(t: &[C64], r: &[C64], ideal: &QuadricIdeal) -> (Vec<C64>, Vec<C64>) {
    let wt = ideal.quadrics.iter().map(|q| quad_form(q, t, r)).collect();
    let wr = ideal.quadrics.iter().map(|q| quad_form(q, r, r)).collect();
    (wt, wr)
}

/// Computes `(P, T, R)` and the constants at a unit point assumed on the curve.
pub fn conic_jet(p: &[C64], ideal: &QuadricIdeal, eps: MachineEps) -> Result<ConicJet, CurveError> {
    let p = normalize(p);
    let g = ideal.g;
    let ts = solve_t(&p, ideal, eps)?;
    let rs = solve_r(&p, &ts.t, ideal, eps)?;
    let m = svd_with_eps(&m_matrix(&p, ideal), eps)?;
    let sigma_m = m.all_values()[g - 3];
    let sigma_mt = ts.values[g - 2];
    let (w_t, w_r) = w_vectors(&ts.t, &rs.r, ideal);
    let c = norm(&rs.r);
    let consts = conic_constants(&ConicInputs {
        g,
        sigma_m,
        sigma_mt,
        r_norm: c,
        w_t_lower: norm(&w_t),
        w_t_upper: norm(&w_t),
        w_r: norm(&w_r),
        q_m: ideal.q_m,
    })?;
    Ok(ConicJet {
        p,
        t: ts.t,
        r: rs.r,
        c,
        w_t,
        w_r,
        q_m: ideal.q_m,
        sigma_m,
        sigma_mt,
        sigma_mr: rs.sigma_min,
        r_x: consts.r_x,
        kappa0: consts.kappa0,
        kappa1: consts.kappa1,
    })
}

/// Gauss–Newton projection onto the cone over the curve: repeated
/// minimum-norm corrections of the linearized equations.
pub fn project_to_curve(p: &[C64], ideal: &QuadricIdeal, precision: f64) -> Result<Vec<C64>, CurveError> {
    ideal.check_point(p)?;
    let eps = MachineEps::default();
    let mut y = p.to_vec();
    let mut best = f64::INFINITY;
    for _ in 0..100 {
        let ev = eval_ideal(&y, ideal)?;
        if ev.norm <= precision * 1e-3 || ev.norm == 0.0 {
            return Ok(y);
        }
        if ev.norm >= best && ev.norm <= precision {
            return Ok(y);
        }
        best = best.min(ev.norm);
        let jac = m_matrix(&y, ideal).scale(C64::new(2.0, 0.0));
        let rhs: Vec<C64> = ev.residuals.iter().map(|z| -z).collect();
        let (z, _) = crate::linalg_cert::lstsq(&jac, &rhs, eps)?;
        y = y.iter().zip(&z).map(|(a, b)| a + b).collect();
    }
    let res = eval_ideal(&y, ideal)?.norm;
    if res <= precision {
        Ok(y)
    } else {
        Err(CurveError::NoConvergence(res))
    }
}

/// Locally closest point to `p_tilde` on the cone over the curve, found by
/// alternating tangent-plane projection and Gauss–Newton re-projection.
pub fn closest_point_oracle(p_tilde: &[C64], ideal: &QuadricIdeal, precision: f64) -> Result<Vec<C64>, CurveError> {
    closest_point_from(p_tilde, p_tilde, ideal, precision)
}

/// As [`closest_point_oracle`], starting the refinement at `seed`.
pub fn closest_point_from(
    p_tilde: &[C64],
    seed: &[C64],
    ideal: &QuadricIdeal,
    precision: f64,
) -> Result<Vec<C64>, CurveError> {
    ideal.check_point(p_tilde)?;
    let eps = MachineEps::default();
    let mut y = project_to_curve(seed, ideal, precision)?;
    for _ in 0..500 {
        let s = svd_with_eps(&m_matrix(&y, ideal), eps)?;
        let basis = s.lowest_right_vectors(2);
        let d: Vec<C64> = p_tilde.iter().zip(&y).map(|(a, b)| a - b).collect();
        let mut step = vec![ZERO; y.len()];
        for b in &basis {
            let c = dot(b, &d);
            for (s, bk) in step.iter_mut().zip(b) {
                *s += c * bk;
            }
        }
        let moved: Vec<C64> = y.iter().zip(&step).map(|(a, b)| a + b).collect();
        y = project_to_curve(&moved, ideal, precision)?;
        if norm(&step) <= 1e-3 * precision + 4.0 * eps.value() * norm(&y) {
            return Ok(y);
        }
    }
    Err(CurveError::NoConvergence(eval_ideal(&y, ideal)?.norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{elliptic_quartic, elliptic_quartic_point, random_unitary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eps() -> MachineEps {
        MachineEps::default()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn conic() -> QuadricIdeal {
        // x₀x₂ − x₁² = 0, parameterized by (1, s, s²).
        let q = ComplexMatrix::from_rows(&[
            vec![c(0., 0.), c(0., 0.), c(0.5, 0.)],
            vec![c(0., 0.), c(-1., 0.), c(0., 0.)],
            vec![c(0.5, 0.), c(0., 0.), c(0., 0.)],
        ])
        .unwrap();
        QuadricIdeal::new(vec![q]).unwrap()
    }

    fn gamma(s: C64) -> Vec<C64> {
        vec![c(1., 0.), s, s * s]
    }

    #[test]
    fn eval_identity_ideal() {
        let ideal = QuadricIdeal::new(vec![ComplexMatrix::identity(3)]).unwrap();
        let p = vec![c(1., 0.), c(0., 1.), c(0.5, 0.5)];
        let direct: C64 = p.iter().map(|z| z * z).sum();
        let ev = eval_ideal(&p, &ideal).unwrap();
        assert_eq!(ev.residuals[0], direct);
        assert_eq!(ev.norm, direct.norm());
        let null = vec![c(1., 0.), c(0., 1.), c(0., 0.)];
        assert_eq!(eval_ideal(&null, &ideal).unwrap().norm, 0.0);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let text = r#"{"g":3,"quadrics":[[[0,0,0.5],[0,-1,0],[0.5,0,0]], [[1,[0,1],0],[[0,1],2,0],[0,0,3]]]}"#;
        let ideal = QuadricIdeal::from_json(text).unwrap();
        assert_eq!(ideal.len(), 2);
        assert_eq!(ideal.quadrics()[1][(0, 1)], c(0., 1.));
        let again = QuadricIdeal::from_json(&ideal.to_json()).unwrap();
        assert_eq!(again, ideal);
        let asym = r#"{"g":2,"quadrics":[[[0,1],[0,0]]]}"#;
        assert!(matches!(QuadricIdeal::from_json(asym), Err(CurveError::NotSymmetric { .. })));
        assert!(matches!(QuadricIdeal::from_json(r#"{"g":2,"quadrics":[]}"#), Err(CurveError::Empty)));
        assert!(matches!(
            QuadricIdeal::from_json(r#"{"g":2,"quadrics":[[[0,"x"],[0,0]]]}"#),
            Err(CurveError::Parse(_))
        ));
    }

    #[test]
    fn matrices_shapes_and_mp() {
        let ideal = elliptic_quartic();
        let p = elliptic_quartic_point(c(0.3, 0.1));
        let mats = build_matrices(&p, Some(&p), &ideal).unwrap();
        assert_eq!(mats.m.shape(), (2, 4));
        assert_eq!(mats.m_t.shape(), (3, 4));
        assert_eq!(mats.m_r.as_ref().unwrap().shape(), (4, 4));
        let mp = mats.m.matvec(&p).unwrap();
        let ev = eval_ideal(&p, &ideal).unwrap();
        assert_eq!(mp, ev.residuals);
        for k in 0..4 {
            assert_eq!(mats.m_t[(2, k)], p[k].conj());
        }
    }

    #[test]
    fn on_curve_corank_two() {
        let ideal = elliptic_quartic();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = elliptic_quartic_point(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let res = eval_ideal(&p, &ideal).unwrap().norm;
            assert!(res < 1e-13);
            let s = svd_with_eps(&m_matrix(&p, &ideal), eps()).unwrap();
            assert!(s.all_values()[1] > 0.0);
            assert!(s.all_values()[2] < 1e3 * (res + eps().value() * s.sigma_max()));
        }
    }

    #[test]
    fn tangent_on_elliptic_quartic() {
        let ideal = elliptic_quartic();
        let p = elliptic_quartic_point(c(0.4, -0.2));
        let ts = solve_t(&p, &ideal, eps()).unwrap();
        assert!((norm(&ts.t) - 1.0).abs() < 1e-14);
        assert!(dot(&p, &ts.t).norm() < 1e-14);
        for q in ideal.quadrics() {
            assert!((2.0 * quad_form(q, &p, &ts.t)).norm() < 1e-12);
        }
        assert!(ts.angle.reliable);
        let first = ts.t.iter().find(|z| z.norm() > 1e-6).unwrap();
        assert!(first.im.abs() < 1e-15 && first.re > 0.0);
    }

    #[test]
    fn tangent_equivariance() {
        let ideal = elliptic_quartic();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_unitary(&mut rng, 4);
        let moved = ideal.transform(&u).unwrap();
        let p = elliptic_quartic_point(c(-0.3, 0.5));
        let up = u.matvec(&p).unwrap();
        assert!(eval_ideal(&up, &moved).unwrap().norm < 1e-13);
        let t = solve_t(&p, &ideal, eps()).unwrap().t;
        let t2 = solve_t(&up, &moved, eps()).unwrap().t;
        let ut = u.matvec(&t).unwrap();
        assert!(dot(&ut, &t2).norm() > 1.0 - 1e-12);
    }

    /// Second derivative of a parameterization `a(x)γ(s(x))` through `P`
    /// with velocity `T`, with the free parameters fixed by `R ⊥ P, T`.
    fn conic_r_oracle(s0: C64) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
        let g0 = gamma(s0);
        let g1 = vec![c(0., 0.), c(1., 0.), 2.0 * s0];
        let g2 = vec![c(0., 0.), c(0., 0.), c(2., 0.)];
        let a0 = 1.0 / norm(&g0);
        let p: Vec<C64> = g0.iter().map(|z| z * a0).collect();
        // Tangent: component of γ′ orthogonal to P, scaled to unit.
        let proj = dot(&p, &g1);
        let raw: Vec<C64> = g1.iter().zip(&p).map(|(a, b)| a - proj * b).collect();
        let scale = 1.0 / norm(&raw);
        let t = fix_phase(&raw.iter().map(|z| z * scale).collect::<Vec<_>>());
        // T = a′γ + a₀s′γ′: solve for (a′, s′) from two coordinates.
        let m = ComplexMatrix::from_columns(&[g0.clone(), g1.iter().map(|z| z * a0).collect()]).unwrap();
        let (sol, _) = crate::linalg_cert::lstsq(&m, &t, eps()).unwrap();
        let (a1, s1) = (sol[0], sol[1]);
        // φ″ = a″γ + (2a′s′ + a₀s″)γ′ + a₀s′²γ″; choose (a″, s″) so φ″ ⊥ P, T.
        let base: Vec<C64> = (0..3).map(|k| 2.0 * a1 * s1 * g1[k] + a0 * s1 * s1 * g2[k]).collect();
        let col_a = g0.clone();
        let col_s: Vec<C64> = g1.iter().map(|z| z * a0).collect();
        let sys = ComplexMatrix::from_rows(&[
            vec![dot(&p, &col_a), dot(&p, &col_s)],
            vec![dot(&t, &col_a), dot(&t, &col_s)],
        ])
        .unwrap();
        let rhs = vec![-dot(&p, &base), -dot(&t, &base)];
        let (free, _) = crate::linalg_cert::lstsq(&sys, &rhs, eps()).unwrap();
        let r: Vec<C64> = (0..3).map(|k| 0.5 * (base[k] + free[0] * col_a[k] + free[1] * col_s[k])).collect();
        (p, t, r)
    }

    #[test]
    fn second_order_matches_conic_parameterization() {
        let ideal = conic();
        for s0 in [c(0., 0.), c(0.7, 0.), c(-0.4, 0.9)] {
            let (p, t, r_exact) = conic_r_oracle(s0);
            let ts = solve_t(&p, &ideal, eps()).unwrap();
            assert!(dot(&ts.t, &t).norm() > 1.0 - 1e-13);
            let rs = solve_r(&p, &t, &ideal, eps()).unwrap();
            let diff = norm(&rs.r.iter().zip(&r_exact).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(diff < 1e-12, "s0 {s0}: {diff}");
        }
    }

    #[test]
    fn r_invariant_under_scaling() {
        let ideal = elliptic_quartic();
        let p = elliptic_quartic_point(c(0.2, 0.6));
        let t = solve_t(&p, &ideal, eps()).unwrap().t;
        let r1 = solve_r(&p, &t, &ideal, eps()).unwrap().r;
        let r2 = solve_r(&p, &t, &ideal.scaled(2.0).unwrap(), eps()).unwrap().r;
        for (a, b) in r1.iter().zip(&r2) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn equation_residuals_small() {
        let ideal = elliptic_quartic();
        let jet = conic_jet(&elliptic_quartic_point(c(0.5, 0.5)), &ideal, eps()).unwrap();
        for q in ideal.quadrics() {
            assert!((2.0 * quad_form(q, &jet.p, &jet.t)).norm() < 1e-12);
            assert!((quad_form(q, &jet.t, &jet.t) + 2.0 * quad_form(q, &jet.p, &jet.r)).norm() < 1e-12);
        }
        assert!(dot(&jet.p, &jet.r).norm() < 1e-13 && dot(&jet.t, &jet.r).norm() < 1e-13);
    }

    #[test]
    fn newton_radius_zero_on_curve() {
        let ideal = elliptic_quartic();
        let p = elliptic_quartic_point(c(0.1, 0.2));
        let nr = newton_radius(&p, &ideal, eps()).unwrap();
        assert!(nr.r < 1e-14);
        assert_eq!(nr.top_quadrics.len(), 2);
    }

    #[test]
    fn newton_radius_covers_offset() {
        let ideal = elliptic_quartic();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let p = elliptic_quartic_point(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let mats = build_matrices(&p, None, &ideal).unwrap();
            // Normal direction: top right singular vector of M.
            let s = svd_with_eps(&mats.m, eps()).unwrap();
            let nvec = s.right_vector(0);
            let pt: Vec<C64> = p.iter().zip(&nvec).map(|(a, b)| a + 1e-6 * b).collect();
            let nr = newton_radius(&pt, &ideal, eps()).unwrap();
            let closest = closest_point_oracle(&pt, &ideal, 1e-14).unwrap();
            let dist = norm(&pt.iter().zip(&closest).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(nr.r >= dist, "r {} dist {}", nr.r, dist);
            assert!(nr.r < 10.0 * dist);
        }
    }

    #[test]
    fn newton_radius_rejects_garbage() {
        let ideal = elliptic_quartic();
        let p = vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)];
        assert!(matches!(newton_radius(&p, &ideal, eps()), Err(CurveError::NoNewtonRadius { .. })));
    }

    #[test]
    fn constants_minimum_of_terms() {
        let inp = ConicInputs {
            g: 4,
            sigma_m: 0.5,
            sigma_mt: 0.4,
            r_norm: 1.0,
            w_t_lower: 0.3,
            w_t_upper: 0.3,
            w_r: 0.2,
            q_m: 3.0,
        };
        let k = conic_constants(&inp).unwrap();
        assert_eq!(k.r_x, k.terms.iter().cloned().fold(f64::INFINITY, f64::min));
        // Existence radius at r_x, computed independently.
        let x = k.r_x;
        let sx = 0.5 - 3.0 * (x + x * x);
        let f = 2.0 * 0.3 * x.powi(3) + 0.2 * x.powi(4);
        let r = k.kappa0 * x.powi(3);
        assert!((3.0 * r * r - 2.0 * sx * r + f).abs() < 1e-12 * f, "root of the existence quadratic");
        assert!(r < sx / 3.0, "smaller root");
        assert!(k.kappa0 > 0.3 / 0.5);
        assert_eq!(k.kappa1, 8.0 * 0.3 / 0.4);
        let doubled = conic_constants(&ConicInputs { w_r: 0.4, ..inp }).unwrap();
        assert!(doubled.r_x <= k.r_x);
        assert_eq!(
            conic_constants(&ConicInputs { w_t_lower: 0.0, w_t_upper: 0.0, ..inp }),
            Err(CurveError::FlexLike)
        );
    }

    #[test]
    fn closest_point_trivial_and_multistart() {
        let ideal = elliptic_quartic();
        let p = elliptic_quartic_point(c(0.3, -0.3));
        let back = closest_point_oracle(&p, &ideal, 1e-14).unwrap();
        assert!(norm(&back.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let off: Vec<C64> = p.iter().map(|z| z + c(rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3))).collect();
        let a = closest_point_oracle(&off, &ideal, 1e-14).unwrap();
        for _ in 0..5 {
            let seed: Vec<C64> =
                off.iter().map(|z| z + c(rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3))).collect();
            let b = closest_point_from(&off, &seed, &ideal, 1e-14).unwrap();
            assert!(norm(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>()) < 1e-13);
        }
    }

    #[test]
    fn closest_point_on_conic_closed_form() {
        // Real conic point plus a real normal offset: the foot point is the
        // original point (the offset is orthogonal to the cone tangent plane).
        let ideal = conic();
        let g0 = gamma(c(0.6, 0.));
        let g1 = vec![c(0., 0.), c(1., 0.), c(1.2, 0.)];
        let mut nrm = vec![g0[1] * g1[2] - g0[2] * g1[1], g0[2] * g1[0] - g0[0] * g1[2], g0[0] * g1[1] - g0[1] * g1[0]];
        nrm = normalize(&nrm);
        let pt: Vec<C64> = g0.iter().zip(&nrm).map(|(a, b)| a + 1e-3 * b).collect();
        let got = closest_point_oracle(&pt, &ideal, 1e-14).unwrap();
        let diff = norm(&got.iter().zip(&g0).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(diff < 1e-10, "{diff}");
    }

    #[test]
    fn conic_approximation_on_elliptic_quartic() {
        let ideal = elliptic_quartic();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..60 {
            let p = elliptic_quartic_point(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let jet = conic_jet(&p, &ideal, eps()).unwrap();
            let rad = jet.r_x * rng.gen_range(0.05..1.0);
            let x = C64::from_polar(rad, rng.gen_range(0.0..std::f64::consts::TAU));
            let px = jet.model(x);
            let v = closest_point_oracle(&px, &ideal, 1e-15).unwrap();
            let d = norm(&px.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(d <= jet.kappa0 * rad.powi(3) + 1e-14, "d {d} bound {}", jet.kappa0 * rad.powi(3));
        }
    }
}
