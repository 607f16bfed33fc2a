//! Codimension certificates for the spans of squared Steiner quadrics and for
//! the intersection of their complements.
//!
//! Each hyperplane pair `{θ, θ+α}` gives a quadric `q = l_θ·l_{θ+α}`; its square
//! is a quadratic form in the coordinates of `Sym²`, i.e. a vector of
//! `Sym²Sym²`. Stacking these for one Steiner set gives a matrix whose rank is
//! certified from below; the pseudo-kernels of several such matrices are then
//! stacked and their joint rank certified as well.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::char2::{Characteristic, TwoTorsion};
use crate::linalg_cert::matrix::{norm, normalize, ComplexMatrix, C64};
use crate::linalg_cert::{sigma_radius, svd_with_eps, LinalgError, MachineEps, SigmaBounds};
use crate::monomials::{binomial, multiply, MonomialBasis};
use crate::tangency_cert::Verdict;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DimensionError {
    #[error("genus {0} is below 4")]
    GenusTooSmall(usize),
    #[error("expected codimension {d_alpha} at genus {g} is not positive; nothing to certify")]
    NotCertifiable { g: usize, d_alpha: i64 },
    #[error("matrix has {cols} columns, expected {expected}")]
    Columns { cols: usize, expected: usize },
    #[error("{rows} rows cannot reach rank {needed}")]
    InsufficientRows { rows: usize, needed: usize },
    #[error("{have} kernel vectors cannot reach rank {needed}")]
    InsufficientKernels { have: usize, needed: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Dimension bookkeeping for squared quadrics at a given genus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionTable {
    pub g: usize,
    /// Quartics on `Sym²H⁰(K+α)` vanishing on the diagonal image.
    pub dim_i2_diag: i64,
    pub dim_sym2_h02k: i64,
    /// `Sym²Sym²H⁰(K+α)`, with `h⁰(K+α) = g − 1`.
    pub dim_sym2sym2_prym: i64,
    /// `Sym²Sym²H⁰(K)`, the column count of every Steiner matrix.
    pub dim_sym2sym2_canonical: i64,
    pub d_alpha: i64,
}

impl DimensionTable {
    /// Rank a Steiner matrix needs for its kernel to have dimension `d_alpha`.
    pub fn rank_target(&self) -> i64 {
        self.dim_sym2sym2_canonical - self.d_alpha
    }

    /// Rank the stacked kernels need: the codimension of the intersection.
    pub fn stacked_target(&self) -> i64 {
        self.dim_sym2_h02k
    }

    pub fn certifiable(&self) -> bool {
        self.d_alpha > 0
    }
}

pub fn dimension_table(g: usize) -> Result<DimensionTable, DimensionError> {
    if g < 4 {
        return Err(DimensionError::GenusTooSmall(g));
    }
    let n = g as i64;
    let dim_i2_diag = binomial(n - 1, 2) + (n - 1) * binomial(n - 2, 2) + 2 * binomial(n - 1, 4);
    let dim_sym2_h02k = binomial(3 * n - 2, 2);
    let dim_sym2sym2_prym = binomial(binomial(n, 2) + 1, 2);
    let dim_sym2sym2_canonical = binomial(binomial(n + 1, 2) + 1, 2);
    Ok(DimensionTable {
        g,
        dim_i2_diag,
        dim_sym2_h02k,
        dim_sym2sym2_prym,
        dim_sym2sym2_canonical,
        d_alpha: dim_i2_diag - dim_sym2sym2_prym + dim_sym2_h02k,
    })
}

/// Bases for linear forms, quadrics, and quadrics in the quadric coordinates.
#[derive(Debug, Clone)]
pub struct VeroneseBases {
    pub linear: MonomialBasis,
    pub quadric: MonomialBasis,
    pub square: MonomialBasis,
}

impl VeroneseBases {
    pub fn new(g: usize) -> Self {
        let quadric = MonomialBasis::new(g, 2);
        let square = MonomialBasis::new(quadric.len(), 2);
        Self { linear: MonomialBasis::new(g, 1), quadric, square }
    }
}

/// Coefficients of `q²` as a quadratic form in the `Sym²` coordinates of
/// `q = l1·l2`.
pub fn veronese_row(l1: &[C64], l2: &[C64]) -> Vec<C64> {
    veronese_row_with(&VeroneseBases::new(l1.len()), l1, l2)
}

pub fn veronese_row_with(b: &VeroneseBases, l1: &[C64], l2: &[C64]) -> Vec<C64> {
    let q = multiply(l1, &b.linear, l2, &b.linear, &b.quadric);
    square_coefficients(&q, &b.square)
}

fn square_coefficients(q: &[C64], square: &MonomialBasis) -> Vec<C64> {
    (0..square.len())
        .map(|m| {
            let mut idx = square.exponents(m).iter().enumerate().filter(|(_, &k)| k > 0);
            let (i, &ki) = idx.next().expect("degree 2");
            if ki == 2 {
                q[i] * q[i]
            } else {
                let (j, _) = idx.next().expect("degree 2");
                q[i] * q[j] * 2.0
            }
        })
        .collect()
}

/// Coefficient-norm error of `l1·l2` when both factors are within `eps`.
/// The coefficient norm satisfies `|ab| ≤ √2·|a|·|b|` for linear `a, b`.
pub fn quadric_error(eps: f64) -> f64 {
    std::f64::consts::SQRT_2 * (2.0 * eps + eps * eps)
}

/// Error of the row `q²` given the computed `q′` and its error `dq`:
/// `q′² − q² = dq·(2q′ − dq)`, and the coefficient norm of a product of
/// quadratic forms picks up at most a factor `√2`.
pub fn row_error(q_norm: f64, dq: f64) -> f64 {
    std::f64::consts::SQRT_2 * dq * (2.0 * q_norm + dq)
}

/// Matrix of squared Steiner quadrics for one two-torsion point.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinerMatrix {
    pub alpha: TwoTorsion,
    pub rows: ComplexMatrix,
    pub row_errors: Vec<f64>,
}

impl SteinerMatrix {
    /// Builds rows from pairs of linear forms known to accuracy `eps`
    /// (projective distance, so phases are free).
    pub fn from_pairs(
        alpha: TwoTorsion,
        pairs: &[(Vec<C64>, Vec<C64>)],
        eps: f64,
        machine: MachineEps,
    ) -> Result<Self, DimensionError> {
        let g = pairs.first().map(|p| p.0.len()).ok_or_else(|| DimensionError::Invalid("no pairs".into()))?;
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(DimensionError::Invalid(format!("accuracy {eps}")));
        }
        let bases = VeroneseBases::new(g);
        let mut rows = Vec::with_capacity(pairs.len());
        let mut errors = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            if a.len() != g || b.len() != g || norm(a) == 0.0 || norm(b) == 0.0 {
                return Err(DimensionError::Invalid("linear forms must be nonzero of equal length".into()));
            }
            let (a, b) = (normalize(a), normalize(b));
            let q = multiply(&a, &bases.linear, &b, &bases.linear, &bases.quadric);
            let row = square_coefficients(&q, &bases.square);
            // Two products per entry at each stage plus normalization.
            let rounding = 16.0 * machine.value() * norm(&row);
            errors.push(row_error(norm(&q), quadric_error(eps)) + rounding);
            rows.push(row);
        }
        Ok(Self { alpha, rows: ComplexMatrix::from_rows(&rows)?, row_errors: errors })
    }

    /// Frobenius bound on the difference from the exact matrix.
    pub fn frobenius_error(&self) -> f64 {
        self.row_errors.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Certificate that a matrix has corank at most `codim` (rank at least
/// `cols − codim`), with its pseudo-kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodimCert {
    pub verdict: Verdict,
    pub codim: usize,
    /// One-based rank index that was tested.
    pub rank_index: usize,
    pub sigma_max: f64,
    pub sigma_rank: SigmaBounds,
    pub sigma_next: SigmaBounds,
    /// Input error `ε′` (Frobenius).
    pub e_prime: f64,
    /// Enclosure radius: `ε′` plus the SVD backward error.
    pub radius: f64,
    /// Accuracy of the kernel basis, `(σ_{r+1} + ε′)/(σ_r − ε′)`.
    pub eps2prime: f64,
    pub kernel_threshold: f64,
    #[serde(skip)]
    pub kernel: Vec<Vec<C64>>,
    pub singular_values: Vec<f64>,
}

/// Certifies `rank ≥ cols − codim` for a matrix known up to the given row errors.
pub fn codimension_cert(
    m: &ComplexMatrix,
    row_errors: &[f64],
    codim: usize,
    eps: MachineEps,
) -> Result<CodimCert, DimensionError> {
    let (rows, cols) = m.shape();
    if row_errors.len() != rows {
        return Err(DimensionError::Invalid(format!("{} row errors for {rows} rows", row_errors.len())));
    }
    if codim == 0 || codim >= cols {
        return Err(DimensionError::Invalid(format!("codimension {codim} outside 1..{cols}")));
    }
    let r = cols - codim;
    if rows < r {
        return Err(DimensionError::InsufficientRows { rows, needed: r });
    }
    let s = svd_with_eps(m, eps)?;
    let e_prime = row_errors.iter().map(|x| x * x).sum::<f64>().sqrt();
    let radius = sigma_radius(s.sigma_max(), e_prime, rows, eps);
    let values = s.all_values();
    let sigma_rank = SigmaBounds::new(values[r - 1], radius);
    let sigma_next = SigmaBounds::new(values[r], radius);
    let verdict = if sigma_rank.lower > 0.0 { Verdict::Pass } else { Verdict::Fail };
    let den = values[r - 1] - radius;
    let eps2prime = if den > 0.0 { (values[r] + radius) / den } else { f64::INFINITY };
    let kernel_threshold = (sigma_rank.lower * sigma_next.upper).sqrt();
    Ok(CodimCert {
        verdict,
        codim,
        rank_index: r,
        sigma_max: s.sigma_max(),
        sigma_rank,
        sigma_next,
        e_prime,
        radius,
        eps2prime,
        kernel_threshold,
        kernel: s.lowest_right_vectors(codim),
        singular_values: s.singular_values.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneSteinerCert {
    pub alpha: TwoTorsion,
    pub rows: usize,
    pub cert: CodimCert,
}

impl OneSteinerCert {
    pub fn verdict(&self) -> Verdict {
        self.cert.verdict
    }
}

/// Certifies that the squared quadrics of one Steiner set span a space of
/// codimension exactly `d_α`.
pub fn one_steiner_cert(
    m: &SteinerMatrix,
    table: &DimensionTable,
    eps: MachineEps,
) -> Result<OneSteinerCert, DimensionError> {
    if !table.certifiable() {
        return Err(DimensionError::NotCertifiable { g: table.g, d_alpha: table.d_alpha });
    }
    let expected = table.dim_sym2sym2_canonical as usize;
    if m.rows.cols() != expected {
        return Err(DimensionError::Columns { cols: m.rows.cols(), expected });
    }
    let cert = codimension_cert(&m.rows, &m.row_errors, table.d_alpha as usize, eps)?;
    Ok(OneSteinerCert { alpha: m.alpha, rows: m.rows.rows(), cert })
}

/// Certified pseudo-kernel of one Steiner matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinerKernel {
    pub alpha: TwoTorsion,
    pub basis: Vec<Vec<C64>>,
    pub eps2prime: f64,
}

impl From<&OneSteinerCert> for SteinerKernel {
    fn from(c: &OneSteinerCert) -> Self {
        Self { alpha: c.alpha, basis: c.cert.kernel.clone(), eps2prime: c.cert.eps2prime }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedCert {
    pub verdict: Verdict,
    pub target_rank: usize,
    pub kernels: usize,
    pub rows: usize,
    /// Largest `ε″` over the stacked kernels.
    pub eps2prime: f64,
    /// `ε″·√(d·m)`.
    pub threshold: f64,
    pub sigma_target: SigmaBounds,
    pub sigma_next: Option<f64>,
    pub singular_values: Vec<f64>,
}

/// Certifies that the stacked kernel bases have rank at least `target_rank`.
pub fn all_steiner_cert(
    kernels: &[SteinerKernel],
    target_rank: usize,
    eps: MachineEps,
) -> Result<StackedCert, DimensionError> {
    if kernels.is_empty() || target_rank == 0 {
        return Err(DimensionError::Invalid("need at least one kernel and a positive target".into()));
    }
    let n = kernels[0].basis.first().map(|v| v.len()).unwrap_or(0);
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut d = 0;
    for k in kernels {
        if k.basis.iter().any(|v| v.len() != n) || n == 0 {
            return Err(DimensionError::Invalid("kernel vectors of different lengths".into()));
        }
        d = d.max(k.basis.len());
        rows.extend(k.basis.iter().cloned());
    }
    if rows.len() < target_rank || n < target_rank {
        return Err(DimensionError::InsufficientKernels { have: rows.len(), needed: target_rank });
    }
    let eps2prime = kernels.iter().map(|k| k.eps2prime).fold(0.0, f64::max);
    let threshold = eps2prime * ((d * kernels.len()) as f64).sqrt();
    let stack = ComplexMatrix::from_rows(&rows)?;
    let s = svd_with_eps(&stack, eps)?;
    let radius = threshold + s.backward_error;
    let computed = s.sigma(target_rank - 1);
    let sigma_target = SigmaBounds::new(computed, radius);
    let verdict = if eps2prime.is_finite() && computed - radius > 0.0 { Verdict::Pass } else { Verdict::Fail };
    Ok(StackedCert {
        verdict,
        target_rank,
        kernels: kernels.len(),
        rows: rows.len(),
        eps2prime,
        threshold,
        sigma_target,
        sigma_next: s.singular_values.get(target_rank).copied(),
        singular_values: s.singular_values.clone(),
    })
}

/// A hyperplane with its label and certified accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledHyperplane {
    pub characteristic: Characteristic,
    pub coeffs: Vec<C64>,
    pub accuracy: f64,
}

/// Builds the Steiner matrix of `alpha` from every pair present in `hyperplanes`.
/// The accuracy used is the largest over the hyperplanes involved.
pub fn steiner_matrix(
    hyperplanes: &[LabeledHyperplane],
    alpha: TwoTorsion,
    machine: MachineEps,
) -> Result<SteinerMatrix, DimensionError> {
    let mut pairs = Vec::new();
    let mut eps: f64 = 0.0;
    for (i, a) in hyperplanes.iter().enumerate() {
        let partner = a.characteristic.shift(alpha);
        if partner <= a.characteristic {
            continue;
        }
        if let Some(b) = hyperplanes[i + 1..].iter().chain(&hyperplanes[..i]).find(|h| h.characteristic == partner) {
            eps = eps.max(a.accuracy).max(b.accuracy);
            pairs.push((a.coeffs.clone(), b.coeffs.clone()));
        }
    }
    if pairs.is_empty() {
        return Err(DimensionError::Invalid(format!("no pairs with label {alpha}")));
    }
    SteinerMatrix::from_pairs(alpha, &pairs, eps, machine)
}

/// Property verdicts: A (codimension), B (spanning), C (intersection).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Properties {
    pub a: Verdict,
    pub b: Verdict,
    pub c: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub table: DimensionTable,
    pub per_alpha: Vec<OneSteinerCert>,
    pub stacked: Option<StackedCert>,
    pub properties: Properties,
}

/// Runs the per-set certificates for `alphas`, then stacks the kernels of
/// `stack` (all of `alphas` when `None`).
pub fn certify_dimensions(
    g: usize,
    hyperplanes: &[LabeledHyperplane],
    alphas: &[TwoTorsion],
    stack: Option<&[TwoTorsion]>,
    eps: MachineEps,
) -> Result<DimensionReport, DimensionError> {
    let table = dimension_table(g)?;
    if alphas.is_empty() {
        return Err(DimensionError::Invalid("no two-torsion points selected".into()));
    }
    let per_alpha = alphas
        .par_iter()
        .map(|&a| one_steiner_cert(&steiner_matrix(hyperplanes, a, eps)?, &table, eps))
        .collect::<Result<Vec<_>, _>>()?;
    let ab = if per_alpha.iter().all(|c| c.verdict() == Verdict::Pass) { Verdict::Pass } else { Verdict::Fail };
    let stack: Vec<TwoTorsion> = stack.map(|s| s.to_vec()).unwrap_or_else(|| alphas.to_vec());
    let kernels: Vec<SteinerKernel> =
        per_alpha.iter().filter(|c| stack.contains(&c.alpha)).map(SteinerKernel::from).collect();
    let stacked = if ab == Verdict::Pass && !kernels.is_empty() {
        match all_steiner_cert(&kernels, table.stacked_target() as usize, eps) {
            Ok(s) => Some(s),
            Err(DimensionError::InsufficientKernels { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let c = match &stacked {
        Some(s) => s.verdict,
        None => Verdict::Indeterminate,
    };
    Ok(DimensionReport { table, per_alpha, stacked, properties: Properties { a: ab, b: ab, c } })
}
