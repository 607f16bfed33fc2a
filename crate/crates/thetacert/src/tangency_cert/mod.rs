//! Certification that an approximate hyperplane is close to a true
//! hyperplane tangent to the curve at `g − 1` points.
//!
//! Each approximate point `P′ᵢ` is tied to a curve point `Pᵢ` by the Newton
//! radius (`ε₀`). The conic jets at `Pᵢ` differ from the computed ones by
//! `ε₁` (tangent) and `ε₂` (second-order term). The tangency condition is the
//! system `F_k(x) = det(∇v_k, v₁, …, vₙ) = 0` in the conic parameters, whose
//! linearization at the computed data gives `x′`. A fixed-point argument then
//! bounds `|x − x′| ≤ ε_x`, from which the distances of the input points and
//! hyperplane to the true tangency points and hyperplane follow.
//!
//! Conventions: a hyperplane is a coefficient vector `h` with `hᵀx = 0`
//! (bilinear, no conjugation); its Hermitian unit normal is `conj(h)/|h|`.

mod poly;

pub use poly::{eta, jacobian_majorant, mu, point_factor, tail2_value, wedge_majorant, Poly};

use serde::{Deserialize, Serialize};

use crate::char2::Characteristic;
use crate::curve_local::{
    build_matrices, conic_constants, eval_ideal, fix_phase, lowest_vector_gap, newton_radius, project_to_curve,
    solve_r, solve_t, w_vectors, ConicInputs, ConicJet, CurveError, QuadricIdeal,
};
use crate::linalg_cert::matrix::{det_columns, dot, dot_plain, norm, normalize, wedge, ComplexMatrix, C64};
use crate::linalg_cert::{angle_bound, lstsq, svd_with_eps, LinalgError, MachineEps, SVD_BACKWARD_CONSTANT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TangencyError {
    #[error("expected {expected} points, got {found}")]
    PointCount { expected: usize, found: usize },
    #[error("vector of length {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("zero vector in candidate")]
    ZeroVector,
    #[error("{what}: denominator {value:e} is not positive")]
    Denominator { what: &'static str, value: f64 },
    #[error("no valid eps_x below {limit:e}")]
    NoEpsX { limit: f64 },
    #[error("hyperplane file: {0}")]
    Parse(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Approximate theta hyperplane with its approximate tangency points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneCandidate {
    #[serde(default)]
    pub characteristic: Option<Characteristic>,
    pub coeffs: Vec<C64>,
    pub points: Vec<Vec<C64>>,
}

impl HyperplaneCandidate {
    /// Validates shapes and normalizes every vector; also returns the largest
    /// deviation from unit length seen in the input.
    pub fn new(
        coeffs: Vec<C64>,
        points: Vec<Vec<C64>>,
        characteristic: Option<Characteristic>,
    ) -> Result<(Self, f64), TangencyError> {
        let g = coeffs.len();
        if points.len() + 1 != g {
            return Err(TangencyError::PointCount { expected: g.saturating_sub(1), found: points.len() });
        }
        let mut dev: f64 = 0.0;
        let mut unit = |v: &[C64]| -> Result<Vec<C64>, TangencyError> {
            if v.len() != g {
                return Err(TangencyError::Dimension { expected: g, found: v.len() });
            }
            let n = norm(v);
            if !(n > 0.0) || !n.is_finite() {
                return Err(TangencyError::ZeroVector);
            }
            dev = dev.max((n - 1.0).abs());
            Ok(normalize(v))
        };
        let coeffs = unit(&coeffs)?;
        let points = points.iter().map(|p| unit(p)).collect::<Result<Vec<_>, _>>()?;
        Ok((Self { characteristic, coeffs, points }, dev))
    }

    pub fn genus(&self) -> usize {
        self.coeffs.len()
    }

    /// `|H′ᵀP′ᵢ|` per point.
    pub fn incidence_residuals(&self) -> Vec<f64> {
        self.points.iter().map(|p| dot_plain(&self.coeffs, p).norm()).collect()
    }
}

/// Parses a JSON list of candidates.
pub fn parse_candidates(text: &str) -> Result<Vec<HyperplaneCandidate>, TangencyError> {
    serde_json::from_str(text).map_err(|e| TangencyError::Parse(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Input,
    Newton,
    Tangent,
    SecondOrder,
    ConicConstants,
    Jacobian,
    EpsX,
    Bounds,
    Oddness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertStatus {
    pub verdict: Verdict,
    pub stage: Option<Stage>,
    pub reason: String,
}

impl CertStatus {
    pub fn pass() -> Self {
        Self { verdict: Verdict::Pass, stage: None, reason: String::new() }
    }

    fn at(verdict: Verdict, stage: Stage, reason: impl Into<String>) -> Self {
        Self { verdict, stage: Some(stage), reason: reason.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencyConfig {
    pub eps: MachineEps,
    /// Largest ε₀ accepted before declaring the point off the curve.
    pub newton_accept: f64,
}

impl Default for TangencyConfig {
    fn default() -> Self {
        Self { eps: MachineEps::default(), newton_accept: 1e-3 }
    }
}

fn pow1p(e: f64, n: f64) -> f64 {
    (n * e.ln_1p()).exp()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `√(2 − 2√(1 − s²))`: chord between unit vectors whose sine of angle is `s`.
fn chord_from_sine(s: f64) -> f64 {
    s * (2.0 / (1.0 + (1.0 - s * s).max(0.0).sqrt())).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eps1Inputs {
    /// `|T′|`.
    pub t_norm: f64,
    /// Angle bound for the computed singular vector.
    pub theta: f64,
    /// Upper bound on `σ_g(M_T)`.
    pub sigma_g_upper: f64,
    /// Lower bound on `σ_{g−1}(M_T)`.
    pub sigma_gm1_lower: f64,
    /// Bound on `‖M_T − M_T′‖`.
    pub e_mt: f64,
}

/// Phase-aligned bound on `|T − T′|`: the chord for the rounding angle plus
/// the chord for the kernel displacement `σ_g⁺/(σ_{g−1}⁻ − ‖E‖)`.
pub fn eps1_bound(inp: &Eps1Inputs) -> Result<f64, TangencyError> {
    let den = inp.sigma_gm1_lower - inp.e_mt;
    if !(den > 0.0) {
        return Err(TangencyError::Denominator { what: "eps1", value: den });
    }
    let s = inp.sigma_g_upper / den;
    if !(s < 1.0) {
        return Err(TangencyError::Denominator { what: "eps1 kernel ratio", value: 1.0 - s });
    }
    let th = inp.theta.min(std::f64::consts::PI);
    let half = (0.5 * th).sin();
    let angle = ((1.0 - inp.t_norm).powi(2) + 4.0 * inp.t_norm * half * half).sqrt();
    Ok(angle + chord_from_sine(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eps2Inputs {
    /// `½|(T′ᵗQᵢT′)ᵢ|`.
    pub y_norm: f64,
    /// Bound on `‖M_R − M_R′‖`.
    pub eps_mr: f64,
    /// Lower bound on `σ_g(M_R)`.
    pub sigma_lower: f64,
    /// Upper bound on `σ₁` of the matrix with rows `T′ᵗQⱼ`.
    pub xi_t: f64,
    pub eps1: f64,
    pub q_m: f64,
    /// Sum of the out-of-range residual components of the computed solve.
    pub delta_r: f64,
}

/// Bound on `|R − R′|` from least-squares continuity.
pub fn eps2_bound(inp: &Eps2Inputs) -> Result<f64, TangencyError> {
    let a = inp.sigma_lower;
    let den = a - inp.eps_mr;
    if !(den > 0.0) || !(a > 0.0) {
        return Err(TangencyError::Denominator { what: "eps2", value: den });
    }
    let dy = 0.5 * (2.0 * inp.xi_t * inp.eps1 + inp.eps1 * inp.eps1 * inp.q_m);
    let y = inp.y_norm + dy;
    Ok((inp.eps_mr * y / a + dy + inp.delta_r) / den)
}

/// Jacobian at 0 of `F_k(x) = det(∇v_k, v₁, …, vₙ)` on the conic models:
/// diagonal `2·det(Rᵢ, P₁, …, Pₙ)`, off-diagonal `det(Tᵢ, P₁, …, Tⱼ, …, Pₙ)`.
pub fn jacobian_f(jets: &[ConicJet]) -> ComplexMatrix {
    let n = jets.len();
    ComplexMatrix::from_fn(n, n, |i, j| {
        let mut cols: Vec<&[C64]> = Vec::with_capacity(n + 1);
        if i == j {
            cols.push(&jets[i].r);
            cols.extend(jets.iter().map(|jt| jt.p.as_slice()));
            2.0 * det_columns(&cols)
        } else {
            cols.push(&jets[i].t);
            for (k, jt) in jets.iter().enumerate() {
                cols.push(if k == j { &jt.t } else { &jt.p });
            }
            det_columns(&cols)
        }
    })
}

/// `F(x)` evaluated directly on the conic models `P + xT + x²R`.
pub fn f_conic(jets: &[ConicJet], x: &[C64]) -> Vec<C64> {
    let pts: Vec<Vec<C64>> = jets.iter().zip(x).map(|(j, &xi)| j.model(xi)).collect();
    jets.iter()
        .zip(x)
        .map(|(j, &xk)| {
            let d = j.model_derivative(xk);
            let mut cols: Vec<&[C64]> = vec![&d];
            cols.extend(pts.iter().map(|p| p.as_slice()));
            det_columns(&cols)
        })
        .collect()
}

/// Bound on `‖J_F − J_F′‖_F` from per-point jet errors.
pub fn eps_jf_bound(eps0: &[f64], eps1: &[f64], eps2: &[f64], r_norms: &[f64], g: usize, eps: MachineEps) -> f64 {
    let n = eps0.len();
    let prod_all: f64 = eps0.iter().map(|e| 1.0 + e).product();
    let mut total = 0.0;
    for i in 0..n {
        let e2 = eps2[i];
        total += 2.0 * e2 * (1.0 + e2) * prod_all;
        total += 2.0 * (r_norms[i] + e2) * ((1.0 + e2) * prod_all - 1.0);
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let others = prod_all / (1.0 + eps0[j]);
            total += (1.0 + eps1[i]) * (1.0 + eps1[j]) * others - 1.0;
        }
    }
    total * pow1p(eps.value(), (g * g * g) as f64)
}

/// Per-equation bound on `|F(0)ⱼ − F′(0)ⱼ|` from the jet errors.
pub fn wedge_perturbation(eps0: &[f64], eps1: &[f64]) -> Vec<f64> {
    let prod_all: f64 = eps0.iter().map(|e| 1.0 + e).product();
    eps1.iter().map(|e1| (1.0 + e1) * prod_all - 1.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsXInputs {
    pub x_prime: Vec<C64>,
    pub r_x: Vec<f64>,
    /// Upper bounds on `cᵢ = |Rᵢ|`.
    pub c_upper: Vec<f64>,
    /// Computed `|R′ᵢ|`.
    pub c_prime: Vec<f64>,
    pub kappa0: Vec<f64>,
    pub kappa1: Vec<f64>,
    /// Lower bound on `σ_{g−1}(J_F′)`.
    pub sigma_j: f64,
    pub eps_jf: f64,
    /// `|F′(0)|` as used for `x′`.
    pub y_norm: f64,
    /// Bound on the difference between the exact and used right-hand sides.
    pub wedge_residual: f64,
}

impl EpsXInputs {
    /// Right-hand side of the fixed-point inequality at `ε`.
    pub fn rhs(&self, e: f64, majorant: &Poly) -> f64 {
        let s = self.sigma_j;
        let sj = s - self.eps_jf;
        let rho: Vec<f64> = self.x_prime.iter().map(|z| z.norm() + e).collect();
        let tail = tail2_value(majorant, &rho) / sj;
        let own: f64 = self
            .x_prime
            .iter()
            .zip(&self.c_prime)
            .map(|(z, c)| {
                let a = z.norm();
                3.0 * c * a * a + 2.0 * c * c * a * a * a
            })
            .sum::<f64>()
            / s;
        tail + own + self.eps_jf * self.y_norm / (s * sj) + self.wedge_residual / sj
    }

    pub fn majorant(&self) -> Poly {
        jacobian_majorant(&self.c_upper, &self.kappa0, &self.kappa1)
    }

    /// Largest admissible ε (side condition `|x′ᵢ| + ε < r_{i,x}`).
    pub fn limit(&self) -> f64 {
        self.x_prime.iter().zip(&self.r_x).map(|(z, r)| r - z.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Smallest certified `ε_x` below the side-condition limit.
///
/// `rhs(ε) − ε` is convex (a polynomial with non-negative coefficients in
/// `|x′ᵢ| + ε`, minus `ε`), so the admissible set is an interval. A ternary
/// search finds its interior, then 64 bisection steps find its left end.
pub fn eps_x_bound(inp: &EpsXInputs) -> Result<f64, TangencyError> {
    if !(inp.sigma_j > inp.eps_jf) {
        return Err(TangencyError::Denominator { what: "sigma(J_F) - eps_JF", value: inp.sigma_j - inp.eps_jf });
    }
    let limit = inp.limit();
    let psi = inp.majorant();
    if !(limit > 0.0) {
        return Err(TangencyError::NoEpsX { limit });
    }
    let gap = |e: f64| inp.rhs(e, &psi) - e;
    let (mut a, mut b) = (0.0, limit * (1.0 - 1e-12));
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if gap(m1) < gap(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let mut hi = 0.5 * (a + b);
    if !(gap(hi) < 0.0) {
        return Err(TangencyError::NoEpsX { limit });
    }
    let mut lo = 0.0;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if inp.rhs(mid, &psi) < mid {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointBoundInputs {
    pub x_prime: Vec<C64>,
    pub eps_x: f64,
    pub eps0: Vec<f64>,
    pub eps1: Vec<f64>,
    pub eps2: Vec<f64>,
    /// `|R′ᵢ|`.
    pub r_prime: Vec<f64>,
    pub kappa0: Vec<f64>,
    pub g: usize,
}

/// Bound on `√Σᵢ dist(P′ᵢ, H∩C)²`.
pub fn point_bound(inp: &PointBoundInputs, eps: MachineEps) -> f64 {
    let ex = inp.eps_x;
    let mut near = 0.0;
    let mut model = 0.0;
    for i in 0..inp.x_prime.len() {
        let a = inp.x_prime[i].norm();
        let r2 = inp.r_prime[i] + inp.eps2[i];
        let term = inp.eps0[i]
            + ex
            + a * inp.eps1[i]
            + (2.0 * ex * a + ex * ex) * r2
            + a * a * inp.eps2[i]
            + inp.kappa0[i] * (a + ex).powi(3);
        near += term * term;
        let m = a + inp.r_prime[i] * a * a;
        model += m * m;
    }
    let n_ops = inp.g as f64 * factorial(inp.g);
    (near.sqrt() + model.sqrt()) * pow1p(eps.value(), n_ops)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperplaneBoundInputs {
    pub x_prime: Vec<C64>,
    pub eps_x: f64,
    /// `|⟨T′ᵢ, n_{H′}⟩| = |H′ᵀT′ᵢ|`.
    pub tangential: Vec<f64>,
    pub eps1: Vec<f64>,
    pub c_upper: Vec<f64>,
    pub kappa0: Vec<f64>,
    /// Projective distance bound between the span of the true points and `H′`.
    pub normal_shift: f64,
    /// Lower bound on `|∧Pᵢ|`.
    pub wedge_lower: f64,
    pub g: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperplaneBound {
    /// Bound on the part of `∧vᵢ − ∧Pᵢ` not parallel to `∧Pᵢ`.
    pub wedge_term: f64,
    /// Bound on the projective distance `|H − H′|`.
    pub bound: f64,
}

pub fn hyperplane_bound(inp: &HyperplaneBoundInputs, eps: MachineEps) -> Result<HyperplaneBound, TangencyError> {
    let n = inp.x_prime.len();
    let xn = norm(&inp.x_prime) + inp.eps_x;
    let lin: f64 = (0..n).map(|i| inp.tangential[i] + inp.eps1[i] + inp.normal_shift).sum();
    let rho: Vec<f64> = inp.x_prime.iter().map(|z| z.norm() + inp.eps_x).collect();
    let tail = tail2_value(&wedge_majorant(&inp.c_upper, &inp.kappa0), &rho);
    let wedge_term = xn * lin + tail;
    // Components along ∧P only rescale the wedge; they are controlled by λ.
    let lambda = (n as f64).sqrt() * xn / inp.wedge_lower;
    let den = (1.0 - lambda) * inp.wedge_lower;
    if !(den > 0.0) {
        return Err(TangencyError::Denominator { what: "hyperplane normalization", value: den });
    }
    let n_ops = inp.g as f64 * factorial(inp.g);
    let bound = (2.0 * wedge_term / den + inp.normal_shift) * pow1p(eps.value(), n_ops);
    Ok(HyperplaneBound { wedge_term, bound })
}

/// Oddness from the singular values of `M_T′` (padded to length g):
/// `Some(true)` when the second smallest clears `10·radius`, `Some(false)`
/// when it is inside the error radius, `None` in between.
pub fn oddness_from_values(values: &[f64], radius: f64) -> Option<bool> {
    let g = values.len();
    if g < 2 {
        return None;
    }
    let v = values[g - 2];
    if v > 10.0 * radius {
        Some(true)
    } else if v <= radius {
        Some(false)
    } else {
        None
    }
}

/// Oddness of a pseudo-kernel read off a matrix whose rows carry the given error.
pub fn oddness_check_matrix(m_t: &ComplexMatrix, row_error: f64, eps: MachineEps) -> Result<Option<bool>, TangencyError> {
    let s = svd_with_eps(m_t, eps)?;
    Ok(oddness_from_values(s.all_values(), s.backward_error + row_error))
}

/// Everything computed at one approximate point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointAnalysis {
    pub eps0: f64,
    pub newton_radius: f64,
    pub ideal_residual: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub theta: f64,
    /// `P′`, `T′`, `R′` with certified constants for the true point.
    pub jet: ConicJet,
    pub c_upper: f64,
    pub odd: Option<bool>,
    pub m_values: Vec<f64>,
    pub mt_values: Vec<f64>,
    pub mr_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct StageFailure {
    status: CertStatus,
}

fn fail(v: Verdict, stage: Stage, reason: impl std::fmt::Display) -> StageFailure {
    StageFailure { status: CertStatus::at(v, stage, reason.to_string()) }
}

/// Per-point part of the chain: ε₀, the computed jet, ε₁, ε₂ and the
/// conic-approximation constants of the nearby true point.
pub fn analyze_point(p: &[C64], ideal: &QuadricIdeal, cfg: &TangencyConfig) -> Result<PointAnalysis, CertStatus> {
    analyze_point_inner(p, ideal, cfg).map_err(|f| f.status)
}

fn analyze_point_inner(p: &[C64], ideal: &QuadricIdeal, cfg: &TangencyConfig) -> Result<PointAnalysis, StageFailure> {
    let eps = cfg.eps;
    let e = eps.value();
    let g = ideal.g();
    let p = normalize(p);
    let nr = newton_radius(&p, ideal, eps).map_err(|err| fail(Verdict::Fail, Stage::Newton, err))?;
    let resid = eval_ideal(&p, ideal).map_err(|err| fail(Verdict::Fail, Stage::Input, err))?.norm;
    // Renormalizing the nearby curve point at most doubles its distance.
    let eps0 = (2.0 * nr.r).max(resid) * (1.0 + 1e-12);
    if !(eps0 <= cfg.newton_accept) {
        return Err(fail(Verdict::Fail, Stage::Newton, format!("eps0 {eps0:e} above {:e}", cfg.newton_accept)));
    }
    let qsum: f64 = ideal.op_norms().iter().map(|q| (q + g as f64 * e).powi(2)).sum();
    let e_m = eps0 * qsum.sqrt();
    let e_mt = eps0 * (1.0 + qsum).sqrt();

    let mats = build_matrices(&p, None, ideal).map_err(|err| fail(Verdict::Fail, Stage::Input, err))?;
    let sm = svd_with_eps(&mats.m, eps).map_err(|err| fail(Verdict::Indeterminate, Stage::Tangent, err))?;
    let smt = svd_with_eps(&mats.m_t, eps).map_err(|err| fail(Verdict::Indeterminate, Stage::Tangent, err))?;
    let sigma_m_lower = sm.all_values()[g - 3] - sm.backward_error - e_m;
    let mt_all = smt.all_values();
    let rad_t = smt.backward_error + e_mt;
    let sigma_g_upper = mt_all[g - 1] + rad_t;
    let sigma_gm1_lower = mt_all[g - 2] - rad_t;
    let odd = oddness_from_values(mt_all, rad_t);

    let t = fix_phase(&smt.right_vector(g - 1));
    let ang = angle_bound(smt.sigma_max(), lowest_vector_gap(&smt), eps);
    if !ang.reliable {
        return Err(fail(Verdict::Indeterminate, Stage::Tangent, "clustered singular values of M_T"));
    }
    let eps1 = eps1_bound(&Eps1Inputs {
        t_norm: norm(&t),
        theta: ang.value,
        sigma_g_upper,
        sigma_gm1_lower,
        e_mt,
    })
    .map_err(|err| fail(Verdict::Indeterminate, Stage::Tangent, err))?;

    let rs = solve_r(&p, &t, ideal, eps).map_err(|err| fail(Verdict::Indeterminate, Stage::SecondOrder, err))?;
    let m_r = build_matrices(&p, Some(&t), ideal)
        .map_err(|err| fail(Verdict::Fail, Stage::Input, err))?
        .m_r
        .expect("tangent supplied");
    let smr = svd_with_eps(&m_r, eps).map_err(|err| fail(Verdict::Indeterminate, Stage::SecondOrder, err))?;
    let eps_mr = (1.0 + 2.0 * e) * (e_mt * e_mt + eps1 * eps1).sqrt()
        + SVD_BACKWARD_CONSTANT * g as f64 * smr.sigma_max() * e;
    let sigma_mr_lower = smr.all_values()[g - 1] - smr.backward_error - eps_mr;
    let tq = ComplexMatrix::from_rows(
        &ideal.quadrics().iter().map(|q| q.transpose().matvec(&t).expect("shape")).collect::<Vec<_>>(),
    )
    .expect("rows");
    let stq = svd_with_eps(&tq, eps).map_err(|err| fail(Verdict::Indeterminate, Stage::SecondOrder, err))?;
    let xi_t = stq.sigma_max() + stq.backward_error;
    let ttq: Vec<C64> = ideal.quadrics().iter().map(|q| dot_plain(&t, &q.matvec(&t).expect("shape"))).collect();
    let k = rs.residual_report.len();
    let delta_r = rs.residual_report.iter().sum::<f64>() * (1.0 + k as f64 * e);
    let eps2 = eps2_bound(&Eps2Inputs {
        y_norm: 0.5 * norm(&ttq),
        eps_mr,
        sigma_lower: sigma_mr_lower,
        xi_t,
        eps1,
        q_m: ideal.q_m(),
        delta_r,
    })
    .map_err(|err| fail(Verdict::Indeterminate, Stage::SecondOrder, err))?;

    let r = rs.r;
    let c_prime = norm(&r);
    let c_upper = c_prime + eps2;
    let (w_t, w_r) = w_vectors(&t, &r, ideal);
    let qm = ideal.q_m();
    let d_wt = qm * (eps1 * c_upper + (1.0 + eps1) * eps2) + 4.0 * g as f64 * e * qm * c_upper;
    let d_wr = qm * (2.0 * c_prime * eps2 + eps2 * eps2) + 4.0 * g as f64 * e * qm * c_upper * c_upper;
    let consts = conic_constants(&ConicInputs {
        g,
        sigma_m: sigma_m_lower,
        sigma_mt: sigma_gm1_lower,
        r_norm: c_upper,
        w_t_lower: (norm(&w_t) - d_wt).max(0.0),
        w_t_upper: norm(&w_t) + d_wt,
        w_r: norm(&w_r) + d_wr,
        q_m: qm,
    })
    .map_err(|err| fail(Verdict::Indeterminate, Stage::ConicConstants, err))?;

    let jet = ConicJet {
        p,
        t,
        r,
        c: c_prime,
        w_t,
        w_r,
        q_m: qm,
        sigma_m: sm.all_values()[g - 3],
        sigma_mt: mt_all[g - 2],
        sigma_mr: smr.all_values()[g - 1],
        r_x: consts.r_x,
        kappa0: consts.kappa0,
        kappa1: consts.kappa1,
    };
    Ok(PointAnalysis {
        eps0,
        newton_radius: nr.r,
        ideal_residual: resid,
        eps1,
        eps2,
        theta: ang.value,
        jet,
        c_upper,
        odd,
        m_values: sm.all_values().to_vec(),
        mt_values: mt_all.to_vec(),
        mr_values: smr.all_values().to_vec(),
    })
}

/// The existence check of the linear solve: `|x′|` against
/// `min rᵢ − Tail₂(Σμᵢηᵢ)(r)/σ(J_F)` at the conic radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub incidence: Vec<f64>,
    /// `√Σⱼ|H′ᵀT′ⱼ|²`.
    pub tangential_residual: f64,
    pub sigma_j: Vec<f64>,
    pub wedge_norm: f64,
    pub wedge_residual: f64,
    pub hyperplane_wedge_term: f64,
    pub lemma_check: Option<LemmaCheck>,
    /// Oddness is read off the pseudo-kernel dimension of `M_T′`; this
    /// criterion is assumed, not derived here.
    pub oddness_assumed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangencyCertificate {
    pub characteristic: Option<Characteristic>,
    pub points: Vec<PointAnalysis>,
    pub eps0: Vec<f64>,
    pub eps1: Vec<f64>,
    pub eps2: Vec<f64>,
    pub eps_jf: f64,
    pub x_prime: Vec<C64>,
    pub eps_x: f64,
    pub point_bound: f64,
    pub hyperplane_bound: f64,
    pub odd: Option<bool>,
    pub status: CertStatus,
    pub diagnostics: Diagnostics,
}

impl TangencyCertificate {
    fn empty(cand: &HyperplaneCandidate, status: CertStatus) -> Self {
        Self {
            characteristic: cand.characteristic,
            points: Vec::new(),
            eps0: Vec::new(),
            eps1: Vec::new(),
            eps2: Vec::new(),
            eps_jf: f64::NAN,
            x_prime: Vec::new(),
            eps_x: f64::NAN,
            point_bound: f64::NAN,
            hyperplane_bound: f64::NAN,
            odd: None,
            status,
            diagnostics: Diagnostics {
                incidence: cand.incidence_residuals(),
                tangential_residual: f64::NAN,
                sigma_j: Vec::new(),
                wedge_norm: f64::NAN,
                wedge_residual: f64::NAN,
                hyperplane_wedge_term: f64::NAN,
                lemma_check: None,
                oddness_assumed: true,
            },
        }
    }

    pub fn jets(&self) -> Vec<ConicJet> {
        self.points.iter().map(|p| p.jet.clone()).collect()
    }

    pub fn verdict(&self) -> Verdict {
        self.status.verdict
    }
}

/// Right-hand side `y′ⱼ = ⟨∧P′, H′⟩·(H′ᵀT′ⱼ)` and the exact `F′(0)ⱼ = det(T′ⱼ, P′₁, …)`.
pub fn linear_rhs(h: &[C64], jets: &[ConicJet]) -> (Vec<C64>, Vec<C64>) {
    let pts: Vec<Vec<C64>> = jets.iter().map(|j| j.p.clone()).collect();
    let c = wedge(&pts);
    let s = dot(h, &c);
    let y = jets.iter().map(|j| s * dot_plain(h, &j.t)).collect();
    let f0 = jets.iter().map(|j| dot_plain(&c, &j.t)).collect();
    (y, f0)
}

/// Linearized solution `x′ = −J_{F′}⁻¹ y′`.
pub fn solve_x_prime(h: &[C64], jets: &[ConicJet], eps: MachineEps) -> Result<Vec<C64>, TangencyError> {
    let j = jacobian_f(jets);
    let s = svd_with_eps(&j, eps)?;
    let n = jets.len();
    if !(s.all_values()[n - 1] > 1e3 * s.backward_error) {
        return Err(TangencyError::Denominator { what: "sigma_min(J_F')", value: s.all_values()[n - 1] });
    }
    let (y, _) = linear_rhs(h, jets);
    let (x, _) = lstsq(&j, &y, eps)?;
    Ok(x.into_iter().map(|z| -z).collect())
}

/// Runs the full chain on one candidate.
pub fn certify_hyperplane(
    cand: &HyperplaneCandidate,
    ideal: &QuadricIdeal,
    cfg: &TangencyConfig,
) -> Result<TangencyCertificate, TangencyError> {
    let g = ideal.g();
    if cand.genus() != g {
        return Err(TangencyError::Dimension { expected: g, found: cand.genus() });
    }
    let (cand, _) = HyperplaneCandidate::new(cand.coeffs.clone(), cand.points.clone(), cand.characteristic)?;
    let eps = cfg.eps;
    let e = eps.value();
    let n = g - 1;
    let mut cert = TangencyCertificate::empty(&cand, CertStatus::pass());
    for p in &cand.points {
        match analyze_point(p, ideal, cfg) {
            Ok(a) => cert.points.push(a),
            Err(status) => {
                cert.status = status;
                return Ok(cert);
            }
        }
    }
    cert.eps0 = cert.points.iter().map(|a| a.eps0).collect();
    cert.eps1 = cert.points.iter().map(|a| a.eps1).collect();
    cert.eps2 = cert.points.iter().map(|a| a.eps2).collect();
    let jets = cert.jets();
    let h = &cand.coeffs;

    let jm = jacobian_f(&jets);
    let sj = svd_with_eps(&jm, eps)?;
    cert.diagnostics.sigma_j = sj.all_values().to_vec();
    let sigma_j = sj.all_values()[n - 1] - SVD_BACKWARD_CONSTANT * n as f64 * sj.backward_error;
    let r_prime: Vec<f64> = jets.iter().map(|j| j.c).collect();
    cert.eps_jf = eps_jf_bound(&cert.eps0, &cert.eps1, &cert.eps2, &r_prime, g, eps);
    if !(sigma_j > cert.eps_jf) {
        cert.status = CertStatus::at(
            Verdict::Indeterminate,
            Stage::Jacobian,
            format!("sigma(J_F') {sigma_j:e} not above eps_JF {:e}", cert.eps_jf),
        );
        return Ok(cert);
    }
    let (y, f0) = linear_rhs(h, &jets);
    let (x, _) = lstsq(&jm, &y, eps)?;
    cert.x_prime = x.into_iter().map(|z| -z).collect();
    let tangential: Vec<f64> = jets.iter().map(|j| dot_plain(h, &j.t).norm()).collect();
    cert.diagnostics.tangential_residual = tangential.iter().map(|t| t * t).sum::<f64>().sqrt();

    let n_ops = g as f64 * factorial(g);
    let round = pow1p(e, n_ops) - 1.0;
    let pert = wedge_perturbation(&cert.eps0, &cert.eps1);
    let w: f64 = (0..n)
        .map(|j| {
            let d = (f0[j] - y[j]).norm() * (1.0 + 4.0 * g as f64 * e);
            let t = pert[j] * pow1p(e, (g * g * g) as f64) + d + round;
            t * t
        })
        .sum::<f64>()
        .sqrt();
    cert.diagnostics.wedge_residual = w;

    let c_upper: Vec<f64> = cert.points.iter().map(|a| a.c_upper).collect();
    let kappa0: Vec<f64> = jets.iter().map(|j| j.kappa0).collect();
    let kappa1: Vec<f64> = jets.iter().map(|j| j.kappa1).collect();
    let r_x: Vec<f64> = jets.iter().map(|j| j.r_x).collect();
    let ex_in = EpsXInputs {
        x_prime: cert.x_prime.clone(),
        r_x: r_x.clone(),
        c_upper: c_upper.clone(),
        c_prime: r_prime.clone(),
        kappa0: kappa0.clone(),
        kappa1,
        sigma_j,
        eps_jf: cert.eps_jf,
        y_norm: norm(&y),
        wedge_residual: w,
    };
    let psi = ex_in.majorant();
    let rmin = r_x.iter().cloned().fold(f64::INFINITY, f64::min);
    let lemma_rhs = rmin - tail2_value(&psi, &r_x) / (sigma_j - cert.eps_jf);
    let lhs = norm(&cert.x_prime);
    cert.diagnostics.lemma_check = Some(LemmaCheck { lhs, rhs: lemma_rhs, holds: lhs < lemma_rhs });

    cert.eps_x = match eps_x_bound(&ex_in) {
        Ok(v) => v,
        Err(err) => {
            cert.status = CertStatus::at(Verdict::Indeterminate, Stage::EpsX, err.to_string());
            return Ok(cert);
        }
    };

    cert.point_bound = point_bound(
        &PointBoundInputs {
            x_prime: cert.x_prime.clone(),
            eps_x: cert.eps_x,
            eps0: cert.eps0.clone(),
            eps1: cert.eps1.clone(),
            eps2: cert.eps2.clone(),
            r_prime,
            kappa0: kappa0.clone(),
            g,
        },
        eps,
    );

    let pts: Vec<Vec<C64>> = jets.iter().map(|j| j.p.clone()).collect();
    let c = wedge(&pts);
    let wn = norm(&c);
    cert.diagnostics.wedge_norm = wn;
    let delta_w = (cert.eps0.iter().map(|x| 1.0 + x).product::<f64>() - 1.0) * pow1p(e, n_ops) + round;
    let wedge_lower = wn - delta_w;
    if !(wedge_lower > 0.0) {
        cert.status = CertStatus::at(Verdict::Indeterminate, Stage::Bounds, "points nearly dependent");
        return Ok(cert);
    }
    let d_input = crate::linalg_cert::matrix::projective_distance(&c, h) + 10.0 * g as f64 * e;
    let normal_shift = 2.0 * delta_w / wn + d_input;
    match hyperplane_bound(
        &HyperplaneBoundInputs {
            x_prime: cert.x_prime.clone(),
            eps_x: cert.eps_x,
            tangential,
            eps1: cert.eps1.clone(),
            c_upper,
            kappa0,
            normal_shift,
            wedge_lower,
            g,
        },
        eps,
    ) {
        Ok(hb) => {
            cert.hyperplane_bound = hb.bound;
            cert.diagnostics.hyperplane_wedge_term = hb.wedge_term;
        }
        Err(err) => {
            cert.status = CertStatus::at(Verdict::Indeterminate, Stage::Bounds, err.to_string());
            return Ok(cert);
        }
    }

    let odds: Vec<Option<bool>> = cert.points.iter().map(|a| a.odd).collect();
    cert.odd = if odds.iter().any(|o| *o == Some(false)) {
        Some(false)
    } else if odds.iter().all(|o| *o == Some(true)) {
        Some(true)
    } else {
        None
    };
    cert.status = match cert.odd {
        Some(true) => CertStatus::pass(),
        Some(false) => CertStatus::at(Verdict::Fail, Stage::Oddness, "two-dimensional pseudo-kernel of M_T'"),
        None => CertStatus::at(Verdict::Indeterminate, Stage::Oddness, "pseudo-kernel threshold ambiguous"),
    };
    Ok(cert)
}

/// `√(Σⱼ|Ĥ·Tⱼ|² + Σᵢ|PᵢᵗQPᵢ|² + Σᵢ|Ĥ·Pᵢ|²)`: how far a configuration is
/// from an exact multitangent one.
pub fn configuration_residual(h: &[C64], points: &[Vec<C64>], ideal: &QuadricIdeal) -> Result<f64, TangencyError> {
    let hn = normalize(h);
    let mut total = 0.0;
    for p in points {
        let p = normalize(p);
        let t = solve_t(&p, ideal, MachineEps::default())?.t;
        total += dot_plain(&hn, &t).norm_sqr();
        total += eval_ideal(&p, ideal)?.norm.powi(2);
        total += dot_plain(&hn, &p).norm_sqr();
    }
    Ok(total.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refinement {
    pub hyperplane: Vec<C64>,
    pub points: Vec<Vec<C64>>,
    pub residual_before: f64,
    pub residual_after: f64,
    pub ratio: f64,
    pub accepted: bool,
}

/// One Newton-style update: move along each conic model by `x′ᵢ`, project
/// back to the curve and take the hyperplane through the new points.
pub fn refine_step(
    h: &[C64],
    jets: &[ConicJet],
    x_prime: &[C64],
    ideal: &QuadricIdeal,
) -> Result<Refinement, TangencyError> {
    let g = ideal.g();
    let floor = 10.0 * g as f64 * MachineEps::default().value();
    let before_pts: Vec<Vec<C64>> = jets.iter().map(|j| j.p.clone()).collect();
    let before = configuration_residual(h, &before_pts, ideal)?;
    let mut pts = Vec::with_capacity(jets.len());
    for (j, &x) in jets.iter().zip(x_prime) {
        let q = project_to_curve(&j.model(x), ideal, 1e-15)?;
        pts.push(normalize(&q));
    }
    let hh = normalize(&wedge(&pts));
    let after = configuration_residual(&hh, &pts, ideal)?;
    let ratio = after.max(floor) / before.max(floor);
    if ratio < 1.0 {
        Ok(Refinement {
            hyperplane: hh,
            points: pts,
            residual_before: before,
            residual_after: after,
            ratio,
            accepted: true,
        })
    } else {
        Ok(Refinement {
            hyperplane: normalize(h),
            points: before_pts,
            residual_before: before,
            residual_after: after,
            ratio,
            accepted: false,
        })
    }
}

#[cfg(test)]
mod tests;
