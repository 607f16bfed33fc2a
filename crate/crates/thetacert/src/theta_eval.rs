//! Riemann theta functions with characteristics.
//!
//! `θ[ε;δ](z|τ) = Σ_{n∈Zᵍ} exp(πi vᵀτv + 2πi vᵀ(z + δ/2))`, `v = n + ε/2`.
//!
//! # Truncation
//!
//! Write `Y = Im τ`, `y = Im z`, `λ` for the smallest eigenvalue of `Y` and
//! `c = −Y⁻¹y`. Every term has modulus `exp(−π wᵀYw) · exp(π yᵀY⁻¹y)` with
//! `w = v − c`, hence at most `exp(−πλ|w|²) · exp(π yᵀY⁻¹y)`. The sum keeps the
//! lattice points with `|w| ≤ R`.
//!
//! For the tail, give every lattice point its unit cube. On the cube around
//! `w`, `|x| − ρ ≤ |w|` with `ρ = √g/2`, so `exp(−πλ|w|²)` is at most the
//! cube integral of `f(x) = exp(−πλ max(|x| − ρ, 0)²)`. The cubes of the points
//! with `|w| > R` are disjoint and lie in `|x| ≥ R − ρ`, giving
//!
//! `tail ≤ S_{g−1} ∫_{max(R−ρ,0)}^∞ r^{g−1} f(r) dr`,
//!
//! with `S_{g−1}` the area of the unit sphere. After `r = t + ρ` the integral
//! is a polynomial times a Gaussian, evaluated in closed form through upper
//! incomplete gamma functions. Gradient terms carry an extra factor
//! `2π|v| ≤ 2π(r + ρ)` (at `z = 0`).

use crate::char2::{odd_characteristics, Characteristic};
use crate::linalg_cert::matrix::{normalize, ZERO};
use crate::linalg_cert::{lstsq, svd, ComplexMatrix, LinalgError, MachineEps, C64};
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThetaError {
    #[error("tau must be square g×g, got {0}×{1}")]
    NotSquare(usize, usize),
    #[error("tau is not symmetric (deviation {0:e})")]
    NotSymmetric(f64),
    #[error("imaginary part of tau is not positive definite")]
    NotPositiveDefinite,
    #[error("imaginary part of tau is nearly singular (smallest eigenvalue {0:e})")]
    Divergence(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("tau1 is missing")]
    MissingTau1,
    #[error("tau1 is numerically singular (smallest singular value {0:e})")]
    SingularTau1(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Period data: the normalized Riemann matrix and optionally the first period block.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannMatrix {
    tau: ComplexMatrix,
    tau1: Option<ComplexMatrix>,
    chol: Vec<f64>,
    lambda_min: f64,
}

impl RiemannMatrix {
    pub fn new(tau: ComplexMatrix, tau1: Option<ComplexMatrix>) -> Result<Self, ThetaError> {
        let (r, c) = tau.shape();
        if r != c || r == 0 {
            return Err(ThetaError::NotSquare(r, c));
        }
        let g = r;
        let mut asym: f64 = 0.0;
        for i in 0..g {
            for j in 0..g {
                asym = asym.max((tau[(i, j)] - tau[(j, i)]).norm());
            }
        }
        if asym > 1e-10 {
            return Err(ThetaError::NotSymmetric(asym));
        }
        if let Some(t1) = &tau1 {
            if t1.shape() != (g, g) {
                return Err(ThetaError::Dimension { expected: g, found: t1.rows() });
            }
        }
        let y: Vec<f64> = (0..g * g).map(|k| 0.5 * (tau[(k / g, k % g)].im + tau[(k % g, k / g)].im)).collect();
        let chol = cholesky(&y, g).ok_or(ThetaError::NotPositiveDefinite)?;
        let ym = ComplexMatrix::from_fn(g, g, |i, j| C64::new(y[i * g + j], 0.0));
        let s = svd(&ym)?;
        let lambda_min = *s.singular_values.last().unwrap();
        if lambda_min <= 1e-10 * s.sigma_max() || lambda_min <= 0.0 {
            return Err(ThetaError::Divergence(lambda_min));
        }
        Ok(Self { tau, tau1, chol, lambda_min })
    }

    pub fn genus(&self) -> usize {
        self.tau.rows()
    }

    pub fn tau(&self) -> &ComplexMatrix {
        &self.tau
    }

    pub fn tau1(&self) -> Option<&ComplexMatrix> {
        self.tau1.as_ref()
    }

    /// Smallest eigenvalue of `Im τ`.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    fn solve_y(&self, b: &[f64]) -> Vec<f64> {
        chol_solve(&self.chol, self.genus(), b)
    }
}

fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn chol_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    y
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    pub value: C64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientConstants {
    pub values: Vec<C64>,
    pub tail_bound: f64,
    /// Set for even characteristics, whose gradient at the origin vanishes.
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaHyperplane {
    pub characteristic: Characteristic,
    pub coeffs: Vec<C64>,
    pub tail_bound: f64,
}

// Upper bound on erfc(x) for x ≥ 0 (rational approximation with relative
// error below 1.2e-7, inflated accordingly).
fn erfc_upper(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.5 * x);
    let poly = -x * x - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807 + t * (-1.13520398 + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277))))))));
    (t * poly.exp() * (1.0 + 2e-7)).min(1.0)
}

// Γ(s, x) for s a positive half-integer, s = k/2.
fn upper_gamma_half(k: usize, x: f64) -> f64 {
    let (mut s, mut val) = if k % 2 == 0 { (1.0, (-x).exp()) } else { (0.5, PI.sqrt() * erfc_upper(x.sqrt())) };
    let target = k as f64 / 2.0;
    while s < target - 1e-9 {
        val = s * val + x.powf(s) * (-x).exp();
        s += 1.0;
    }
    val
}

// Γ(k/2) for k ≥ 1.
fn gamma_half(k: usize) -> f64 {
    upper_gamma_half(k, 0.0)
}

fn sphere_area(g: usize) -> f64 {
    2.0 * PI.powf(g as f64 / 2.0) / gamma_half(g)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

// ∫_T^∞ t^k e^{−a t²} dt.
fn gauss_moment_tail(k: usize, a: f64, t: f64) -> f64 {
    0.5 * a.powf(-((k + 1) as f64) / 2.0) * upper_gamma_half(k + 1, a * t * t)
}

/// Bound on `Σ_{lattice points w, |w| > R} |w|^m exp(−πλ|w|²)` over any shifted
/// integer lattice in dimension `g`, for `m ∈ {0, 1}` (uses `|w| ≤ r + ρ`).
pub fn lattice_tail_bound(g: usize, lambda: f64, radius: f64, with_norm_weight: bool) -> f64 {
    let rho = (g as f64).sqrt() / 2.0;
    let a = PI * lambda;
    let r0 = (radius - rho).max(0.0);
    let mut total = 0.0;
    // Inner part r ∈ [r0, ρ] where f = 1.
    if r0 < rho {
        let w = if with_norm_weight { 2.0 * rho } else { 1.0 };
        total += w * (rho.powi(g as i32) - r0.powi(g as i32)) / g as f64;
    }
    // Outer part, r = t + ρ, t ≥ t0. Weight (t+ρ)^{g−1} · (t+2ρ)^{m}.
    let t0 = (r0 - rho).max(0.0);
    let mut poly = vec![0.0; g + 1];
    for k in 0..g {
        poly[k] = binomial(g - 1, k) * rho.powi((g - 1 - k) as i32);
    }
    if with_norm_weight {
        let mut p2 = vec![0.0; g + 1];
        for k in 0..g {
            p2[k + 1] += poly[k];
            p2[k] += 2.0 * rho * poly[k];
        }
        poly = p2;
    }
    for (k, &c) in poly.iter().enumerate() {
        if c != 0.0 {
            total += c * gauss_moment_tail(k, a, t0);
        }
    }
    sphere_area(g) * total
}

fn radius_for(g: usize, lambda: f64, tol: f64, with_norm_weight: bool, scale: f64) -> f64 {
    let bound = |r: f64| scale * lattice_tail_bound(g, lambda, r, with_norm_weight);
    if bound(0.0) <= tol {
        return 0.0;
    }
    let mut hi = 1.0;
    while bound(hi) > tol {
        hi *= 2.0;
        if hi > 1e6 {
            return f64::INFINITY;
        }
    }
    let mut lo = hi / 2.0;
    if bound(lo) <= tol {
        lo = 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Radius `R` of the lattice ball whose complement contributes at most `tol`
/// to the series at `z = 0`.
pub fn truncation_radius(tau: &RiemannMatrix, tol: f64) -> Result<f64, ThetaError> {
    if !(tol > 0.0) {
        return Err(ThetaError::BadTolerance(tol));
    }
    let r = radius_for(tau.genus(), tau.lambda_min(), tol, false, 1.0);
    check_radius(tau, r)
}

const MAX_LATTICE_POINTS: f64 = 5e8;

fn check_radius(tau: &RiemannMatrix, r: f64) -> Result<f64, ThetaError> {
    let g = tau.genus() as f64;
    let ball = PI.powf(g / 2.0) / gamma_half(tau.genus() + 2) * (r + g.sqrt()).powf(g);
    if !r.is_finite() || ball > MAX_LATTICE_POINTS {
        return Err(ThetaError::Divergence(tau.lambda_min()));
    }
    Ok(r)
}

/// Calls `visit(v, n_mod_2)` for every `v = n + shift` with `|v − center| ≤ radius`.
fn for_each_point(shift: &[f64], center: &[f64], radius: f64, mut visit: impl FnMut(&[f64], usize)) {
    let g = shift.len();
    let mut v = vec![0.0; g];
    fn rec(
        k: usize,
        rem: f64,
        cls: usize,
        shift: &[f64],
        center: &[f64],
        v: &mut [f64],
        visit: &mut dyn FnMut(&[f64], usize),
    ) {
        if k == shift.len() {
            visit(v, cls);
            return;
        }
        let r = rem.max(0.0).sqrt();
        let lo = (center[k] - r - shift[k]).ceil() as i64;
        let hi = (center[k] + r - shift[k]).floor() as i64;
        for n in lo..=hi {
            let x = n as f64 + shift[k];
            let d = x - center[k];
            let left = rem - d * d;
            if left < 0.0 {
                continue;
            }
            v[k] = x;
            let bit = (n.rem_euclid(2) as usize) << k;
            rec(k + 1, left, cls | bit, shift, center, v, visit);
        }
    }
    rec(0, radius * radius, 0, shift, center, &mut v, &mut visit);
}

fn quad_form(tau: &ComplexMatrix, v: &[f64]) -> C64 {
    let g = v.len();
    let mut s = ZERO;
    for i in 0..g {
        let mut row = ZERO;
        for j in 0..g {
            row += tau[(i, j)] * v[j];
        }
        s += row * v[i];
    }
    s
}

fn half(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| b as f64 / 2.0).collect()
}

/// Truncated theta series with a bound on the neglected terms.
pub fn theta_with_char(
    eps: &[u8],
    delta: &[u8],
    z: &[C64],
    tau: &RiemannMatrix,
    tol: f64,
) -> Result<ThetaValue, ThetaError> {
    let g = tau.genus();
    for len in [eps.len(), delta.len(), z.len()] {
        if len != g {
            return Err(ThetaError::Dimension { expected: g, found: len });
        }
    }
    if !(tol > 0.0) {
        return Err(ThetaError::BadTolerance(tol));
    }
    let y: Vec<f64> = z.iter().map(|w| w.im).collect();
    let yinv = tau.solve_y(&y);
    let growth: f64 = PI * y.iter().zip(&yinv).map(|(a, b)| a * b).sum::<f64>();
    let center: Vec<f64> = yinv.iter().map(|x| -x).collect();
    let scale = growth.exp();
    let r = check_radius(tau, radius_for(g, tau.lambda_min(), tol, false, scale))?;
    let a = half(eps);
    let b = half(delta);
    let zb: Vec<C64> = z.iter().zip(&b).map(|(zi, bi)| zi + bi).collect();
    let mut sum = ZERO;
    for_each_point(&a, &center, r, |v, _| {
        let lin: C64 = v.iter().zip(&zb).map(|(vi, w)| w * *vi).sum();
        let e = C64::new(0.0, PI) * quad_form(tau.tau(), v) + C64::new(0.0, 2.0 * PI) * lin;
        sum += e.exp();
    });
    let tail_bound = scale * lattice_tail_bound(g, tau.lambda_min(), r, false);
    Ok(ThetaValue { value: sum, tail_bound })
}

// Per-class sums S[class] = (Σ t_v, Σ 2πi v_j t_v) at z = 0 for a fixed eps.
fn class_sums(eps: &[u8], tau: &RiemannMatrix, r: f64) -> Vec<Vec<C64>> {
    let g = tau.genus();
    let a = half(eps);
    let center = vec![0.0; g];
    let mut sums = vec![vec![ZERO; g + 1]; 1 << g];
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    for_each_point(&a, &center, r, |v, cls| {
        let t = (C64::new(0.0, PI) * quad_form(tau.tau(), v)).exp();
        let s = &mut sums[cls];
        s[0] += t;
        for j in 0..g {
            s[j + 1] += two_pi_i * v[j] * t;
        }
    });
    sums
}

fn combine(sums: &[Vec<C64>], c: &Characteristic) -> Vec<C64> {
    let g = c.genus();
    let k = (c.eps_bits() & c.delta_bits()).count_ones() % 4;
    let phase = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][k as usize];
    let mut out = vec![ZERO; g + 1];
    for (cls, s) in sums.iter().enumerate() {
        let sign = if (cls as u32 & c.delta_bits() as u32).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        for (o, x) in out.iter_mut().zip(s) {
            *o += x * sign;
        }
    }
    out.iter().map(|x| x * phase).collect()
}

/// `(∂θ[ε;δ]/∂z_j)(0)` for `j = 1..g`.
pub fn theta_grad_constants(
    eps: &[u8],
    delta: &[u8],
    tau: &RiemannMatrix,
    tol: f64,
) -> Result<GradientConstants, ThetaError> {
    let g = tau.genus();
    let c = Characteristic::new(eps, delta).map_err(|_| ThetaError::Dimension { expected: g, found: eps.len() })?;
    if c.genus() != g {
        return Err(ThetaError::Dimension { expected: g, found: c.genus() });
    }
    if !(tol > 0.0) {
        return Err(ThetaError::BadTolerance(tol));
    }
    let r = grad_radius(tau, tol)?;
    let sums = class_sums(eps, tau, r);
    let all = combine(&sums, &c);
    let warning = (!c.is_odd()).then(|| format!("characteristic {c} is even; its gradient at 0 vanishes"));
    Ok(GradientConstants { values: all[1..].to_vec(), tail_bound: grad_tail(tau, r), warning })
}

fn grad_radius(tau: &RiemannMatrix, tol: f64) -> Result<f64, ThetaError> {
    let r = radius_for(tau.genus(), tau.lambda_min(), tol, true, 2.0 * PI);
    check_radius(tau, r)
}

fn grad_tail(tau: &RiemannMatrix, r: f64) -> f64 {
    2.0 * PI * lattice_tail_bound(tau.genus(), tau.lambda_min(), r, true)
}

/// Gradient constants of every odd characteristic, characteristics sharing an
/// `eps` evaluated from one lattice pass.
pub fn odd_gradient_constants(tau: &RiemannMatrix, tol: f64) -> Result<Vec<(Characteristic, Vec<C64>, f64)>, ThetaError> {
    if !(tol > 0.0) {
        return Err(ThetaError::BadTolerance(tol));
    }
    let g = tau.genus();
    let r = grad_radius(tau, tol)?;
    let tail = grad_tail(tau, r);
    let odd = odd_characteristics(g).map_err(|_| ThetaError::Dimension { expected: 16, found: g })?;
    let eps_values: Vec<u16> = (1..(1u16 << g)).collect();
    let per_eps: Vec<(u16, Vec<Vec<C64>>)> = eps_values
        .par_iter()
        .map(|&e| {
            let bits: Vec<u8> = (0..g).map(|k| ((e >> k) & 1) as u8).collect();
            (e, class_sums(&bits, tau, r))
        })
        .collect();
    let mut out = Vec::with_capacity(odd.len());
    for c in odd {
        let sums = &per_eps.iter().find(|(e, _)| *e == c.eps_bits()).unwrap().1;
        out.push((c, combine(sums, &c)[1..].to_vec(), tail));
    }
    Ok(out)
}

/// Normalized theta hyperplanes `(θ₁,…,θ_g)·τ₁⁻¹`, one per odd characteristic.
pub fn theta_hyperplanes(tau: &RiemannMatrix, tol: f64) -> Result<Vec<ThetaHyperplane>, ThetaError> {
    let t1 = tau.tau1().ok_or(ThetaError::MissingTau1)?;
    let s = svd(t1)?;
    let smin = *s.singular_values.last().unwrap();
    if smin <= 1e-12 * s.sigma_max() {
        return Err(ThetaError::SingularTau1(smin));
    }
    let t1t = t1.transpose();
    let eps = MachineEps::default();
    tau_grads_to_planes(&t1t, odd_gradient_constants(tau, tol)?, eps)
}

fn tau_grads_to_planes(
    t1t: &ComplexMatrix,
    grads: Vec<(Characteristic, Vec<C64>, f64)>,
    eps: MachineEps,
) -> Result<Vec<ThetaHyperplane>, ThetaError> {
    grads
        .into_iter()
        .map(|(c, grad, tail)| {
            let (h, _) = lstsq(t1t, &grad, eps)?;
            Ok(ThetaHyperplane { characteristic: c, coeffs: normalize(&h), tail_bound: tail })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg_cert::matrix::norm;

    fn tau1d(t: C64) -> RiemannMatrix {
        RiemannMatrix::new(ComplexMatrix::from_fn(1, 1, |_, _| t), Some(ComplexMatrix::identity(1))).unwrap()
    }

    fn i() -> C64 {
        C64::new(0.0, 1.0)
    }

    fn tau2() -> RiemannMatrix {
        let t = ComplexMatrix::from_rows(&[
            vec![C64::new(0.3, 1.1), C64::new(-0.2, 0.4)],
            vec![C64::new(-0.2, 0.4), C64::new(0.1, 0.9)],
        ])
        .unwrap();
        RiemannMatrix::new(t, Some(ComplexMatrix::identity(2))).unwrap()
    }

    #[test]
    fn radius_genus1_direct_tail() {
        let t = tau1d(i());
        let r = truncation_radius(&t, 1e-15).unwrap();
        assert!(r <= 10.0, "{r}");
        // Direct summation of the neglected terms for both shifts.
        for shift in [0.0, 0.5] {
            let mut tail = 0.0;
            for n in -200i64..=200 {
                let v = n as f64 + shift;
                if v.abs() > r {
                    tail += (-PI * v * v).exp();
                }
            }
            assert!(tail <= 1e-15);
        }
    }

    #[test]
    fn radius_loose_tolerance() {
        assert_eq!(truncation_radius(&tau1d(i()), 10.0).unwrap(), 0.0);
        assert!(truncation_radius(&tau1d(i()), 0.0).is_err());
    }

    #[test]
    fn radius_monotone_in_tol() {
        let t = tau2();
        let mut prev = 0.0;
        for k in (1..40).rev() {
            let r = truncation_radius(&t, 10f64.powi(-k)).unwrap();
            let _ = prev;
            prev = r;
            let r_looser = truncation_radius(&t, 10f64.powi(-k) * 10.0).unwrap();
            assert!(r_looser <= r);
        }
    }

    #[test]
    fn radius_scales_with_decay_rate() {
        let rho = 0.5;
        let r1 = truncation_radius(&tau1d(i()), 1e-30).unwrap();
        let r4 = truncation_radius(&tau1d(C64::new(0.0, 4.0)), 1e-30).unwrap();
        let ratio = (r1 - 2.0 * rho) / (r4 - 2.0 * rho);
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
        assert!(r1 / r4 > 1.5 && r1 / r4 <= 2.0);
    }

    #[test]
    fn odd_vanishes_at_zero() {
        let t = tau2();
        let v = theta_with_char(&[1, 0], &[1, 0], &[ZERO, ZERO], &t, 1e-14).unwrap();
        assert!(v.value.norm() <= 1e-13, "{}", v.value);
    }

    #[test]
    fn jacobi_identity() {
        let t = tau1d(i());
        let z = [ZERO];
        let th = |e: u8, d: u8| theta_with_char(&[e], &[d], &z, &t, 1e-16).unwrap().value;
        let lhs = th(0, 0).powi(4);
        let rhs = th(0, 1).powi(4) + th(1, 0).powi(4);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let t = tau1d(i());
        let g = theta_grad_constants(&[1], &[1], &t, 1e-14).unwrap();
        let h = 1e-5;
        let f = |x: f64| theta_with_char(&[1], &[1], &[C64::new(x, 0.0)], &t, 1e-16).unwrap().value;
        let fd = (f(h) - f(-h)) / (2.0 * h);
        assert!((g.values[0] - fd).norm() < 1e-8);
        assert!(g.warning.is_none());
    }

    #[test]
    fn even_gradient_vanishes_with_warning() {
        let g = theta_grad_constants(&[1, 1], &[1, 1], &tau2(), 1e-14).unwrap();
        assert!(norm(&g.values) < 1e-12);
        assert!(g.warning.is_some());
    }

    #[test]
    fn doubling_radius_consistent() {
        let t = tau2();
        let z = [C64::new(0.1, 0.05), C64::new(-0.2, 0.1)];
        let a = theta_with_char(&[1, 1], &[0, 1], &z, &t, 1e-8).unwrap();
        let b = theta_with_char(&[1, 1], &[0, 1], &z, &t, 1e-20).unwrap();
        assert!((a.value - b.value).norm() <= a.tail_bound + b.tail_bound);
    }

    #[test]
    fn batch_matches_single() {
        let t = tau2();
        for (c, grad, _) in odd_gradient_constants(&t, 1e-13).unwrap() {
            let single = theta_grad_constants(&c.eps(), &c.delta(), &t, 1e-13).unwrap();
            for (x, y) in grad.iter().zip(&single.values) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hyperplane_count_and_identity_tau1() {
        let t = tau2();
        let planes = theta_hyperplanes(&t, 1e-13).unwrap();
        assert_eq!(planes.len(), 6);
        for p in &planes {
            let g = theta_grad_constants(&p.characteristic.eps(), &p.characteristic.delta(), &t, 1e-13).unwrap();
            let n = normalize(&g.values);
            for (x, y) in p.coeffs.iter().zip(&n) {
                assert!((x - y).norm() < 1e-12);
            }
            assert!((norm(&p.coeffs) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_tau() {
        let bad = ComplexMatrix::from_rows(&[vec![C64::new(0.0, -1.0)]]).unwrap();
        assert_eq!(RiemannMatrix::new(bad, None), Err(ThetaError::NotPositiveDefinite));
        let asym = ComplexMatrix::from_rows(&[vec![i(), ZERO], vec![C64::new(1.0, 0.0), i()]]).unwrap();
        assert!(matches!(RiemannMatrix::new(asym, None), Err(ThetaError::NotSymmetric(_))));
        let t = tau2();
        let no_t1 = RiemannMatrix::new(t.tau().clone(), None).unwrap();
        assert_eq!(theta_hyperplanes(&no_t1, 1e-10), Err(ThetaError::MissingTau1));
    }
}
