use super::matrix::{dot, norm, ComplexMatrix, C64, ZERO};
use super::svd::{svd_with_eps, SvdResult};
use super::{LinalgError, MachineEps, SigmaBounds};

/// Certified upper bound on `|σᵢ(A+E) − σᵢ(A)|`, namely an upper bound on `‖E‖₂`.
pub fn weyl_gap(a: &ComplexMatrix, e: &ComplexMatrix, i: usize, eps: MachineEps) -> Result<f64, LinalgError> {
    if a.shape() != e.shape() {
        return Err(LinalgError::ShapeMismatch { left: a.shape(), right: e.shape() });
    }
    let k = a.rows().min(a.cols());
    if i >= k {
        return Err(LinalgError::IndexOutOfRange { index: i, len: k });
    }
    let s = svd_with_eps(e, eps)?;
    Ok(s.sigma_max() + s.backward_error)
}

/// Radius of the enclosure for every singular value of a computed matrix
/// whose rows carry the given error bounds.
pub fn sigma_radius(sigma1_computed: f64, row_error_norm: f64, rows: usize, eps: MachineEps) -> f64 {
    let e = eps.value();
    sigma1_computed * e + row_error_norm * (1.0 + (2 * rows + 1) as f64 * e)
}

fn row_error_norm(row_errors: &[f64]) -> Result<f64, LinalgError> {
    if row_errors.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(LinalgError::InvalidInput("row errors must be finite and non-negative".into()));
    }
    Ok(row_errors.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Enclosure of `σᵢ(A)` from the computed `A′` and per-row bounds on `A′ − A`.
pub fn sigma_interval(
    a_computed: &ComplexMatrix,
    row_errors: &[f64],
    i: usize,
    eps: MachineEps,
) -> Result<SigmaBounds, LinalgError> {
    if row_errors.len() != a_computed.rows() {
        return Err(LinalgError::ShapeMismatch { left: a_computed.shape(), right: (row_errors.len(), 1) });
    }
    let s = svd_with_eps(a_computed, eps)?;
    let k = s.singular_values.len();
    if i >= k {
        return Err(LinalgError::IndexOutOfRange { index: i, len: k });
    }
    Ok(sigma_interval_all(&s, a_computed.rows(), row_errors, eps)?[i])
}

/// Enclosures for all singular values of an already decomposed matrix.
pub fn sigma_interval_all(
    s: &SvdResult,
    rows: usize,
    row_errors: &[f64],
    eps: MachineEps,
) -> Result<Vec<SigmaBounds>, LinalgError> {
    let r = sigma_radius(s.sigma_max(), row_error_norm(row_errors)?, rows, eps);
    Ok(s.singular_values.iter().map(|&x| SigmaBounds::new(x, r)).collect())
}

/// Separation of `values[i]` from its neighbours; the last value is also
/// separated from zero.
pub fn reciprocal_gap(values: &[f64], i: usize) -> Result<f64, LinalgError> {
    let n = values.len();
    if n < 2 {
        return Err(LinalgError::TooFewValues(n));
    }
    if i >= n {
        return Err(LinalgError::IndexOutOfRange { index: i, len: n });
    }
    let mut gap = f64::INFINITY;
    if i > 0 {
        gap = gap.min((values[i - 1] - values[i]).abs());
    }
    if i + 1 < n {
        gap = gap.min((values[i] - values[i + 1]).abs());
    } else {
        gap = gap.min(values[i].abs());
    }
    Ok(gap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleBound {
    pub value: f64,
    pub reliable: bool,
}

/// Angle error `E·σ₁′/gap` of a computed singular vector. Marked unreliable
/// when the gap is under `10³·E·σ₁′`.
pub fn angle_bound(sigma1: f64, gap: f64, eps: MachineEps) -> AngleBound {
    let e = eps.value();
    let reliable = gap >= 1e3 * e * sigma1 && gap > 0.0;
    let value = if gap > 0.0 { e * sigma1 / gap } else { f64::INFINITY };
    AngleBound { value, reliable }
}

/// Bound `(σ_k⁺ + ‖E‖)/(σ_{k−1}⁻ − ‖E‖)` on how far a pseudo-kernel vector of
/// `A` leaks into the top singular directions of `A + E`.
pub fn pseudo_kernel_angle_bound(
    sigma_k: SigmaBounds,
    sigma_km1: SigmaBounds,
    e_norm: f64,
) -> Result<f64, LinalgError> {
    let den = sigma_km1.lower - e_norm;
    if !(den > 0.0) {
        return Err(LinalgError::CertificationImpossible(den));
    }
    Ok((sigma_k.upper + e_norm) / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution {
    pub solution: Vec<C64>,
    pub bound: f64,
    /// Magnitudes of the right-hand side components outside the numerical
    /// column space, one per missing dimension.
    pub residual_report: Vec<f64>,
    pub rank: usize,
}

/// Minimum-norm least-squares solve with the perturbation bound
/// `(‖E‖·‖y‖/a + ‖δy‖)/(a − ‖E‖)`.
pub fn solve_ls_with_bound(
    a: &ComplexMatrix,
    y: &[C64],
    a_lower: f64,
    e_norm: f64,
    dy_norm: f64,
    eps: MachineEps,
) -> Result<LsSolution, LinalgError> {
    if y.len() != a.rows() {
        return Err(LinalgError::ShapeMismatch { left: a.shape(), right: (y.len(), 1) });
    }
    let den = a_lower - e_norm;
    if !(den > 0.0) {
        return Err(LinalgError::CertificationImpossible(den));
    }
    let s = svd_with_eps(a, eps)?;
    let (x, rank) = min_norm_solution(&s, a.shape(), y, eps);
    let full = s.full_left_basis();
    let residual_report = full[rank..].iter().map(|u| dot(u, y).norm()).collect();
    let bound = (e_norm * norm(y) / a_lower + dy_norm) / den;
    Ok(LsSolution { solution: x, bound, residual_report, rank })
}

fn min_norm_solution(s: &SvdResult, (m, n): (usize, usize), y: &[C64], eps: MachineEps) -> (Vec<C64>, usize) {
    let cutoff = s.sigma_max() * eps.value() * m.max(n) as f64;
    let rank = s.singular_values.iter().take_while(|&&x| x > cutoff).count();
    let mut x = vec![ZERO; n];
    for l in 0..rank {
        let u = s.left_vector(l);
        let coef = dot(&u, y) / s.singular_values[l];
        for (xi, vi) in x.iter_mut().zip(s.right_vector(l)) {
            *xi += coef * vi;
        }
    }
    (x, rank)
}

/// Minimum-norm least-squares solution and numerical rank.
pub fn lstsq(a: &ComplexMatrix, y: &[C64], eps: MachineEps) -> Result<(Vec<C64>, usize), LinalgError> {
    if y.len() != a.rows() {
        return Err(LinalgError::ShapeMismatch { left: a.shape(), right: (y.len(), 1) });
    }
    let s = svd_with_eps(a, eps)?;
    Ok(min_norm_solution(&s, a.shape(), y, eps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoKernel {
    pub basis: Vec<Vec<C64>>,
    pub dim: usize,
}

/// Right singular vectors with singular value below `threshold`.
pub fn pseudo_kernel_basis(a: &ComplexMatrix, threshold: f64, eps: MachineEps) -> Result<PseudoKernel, LinalgError> {
    if !(threshold > 0.0) {
        return Err(LinalgError::InvalidInput(format!("threshold {threshold} must be positive")));
    }
    let s = svd_with_eps(a, eps)?;
    let basis: Vec<Vec<C64>> = s
        .all_values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < threshold)
        .map(|(j, _)| s.right_vector(j))
        .collect();
    Ok(PseudoKernel { dim: basis.len(), basis })
}
