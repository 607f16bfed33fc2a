//! Monomial bases of symmetric powers in lexicographic order, products of
//! forms given by coefficient vectors, and evaluation at points.

use std::collections::HashMap;

use crate::curve_local::QuadricIdeal;
use crate::linalg_cert::matrix::{ComplexMatrix, C64, ZERO};

/// `C(n, k)` in exact integer arithmetic (signed so dimension formulas can go negative).
pub fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Degree-`degree` monomials in `nvars` variables, lexicographic with
/// `x₀ > x₁ > …` (so `x₀^degree` comes first).
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    nvars: usize,
    degree: usize,
    exps: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree: usize) -> Self {
        let mut exps = Vec::new();
        let mut cur = vec![0u16; nvars];
        fill(&mut exps, &mut cur, 0, degree);
        let index = exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Self { nvars, degree, exps, index }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self, i: usize) -> &[u16] {
        &self.exps[i]
    }

    pub fn position(&self, exps: &[u16]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// Values of every monomial at `x`.
    pub fn evaluate(&self, x: &[C64]) -> Vec<C64> {
        self.exps
            .iter()
            .map(|e| e.iter().zip(x).fold(C64::new(1.0, 0.0), |acc, (&k, &xi)| acc * xi.powu(k as u32)))
            .collect()
    }

    /// Rows of monomial values, one per point.
    pub fn evaluation_matrix(&self, points: &[Vec<C64>]) -> ComplexMatrix {
        let rows: Vec<Vec<C64>> = points.iter().map(|p| self.evaluate(p)).collect();
        ComplexMatrix::from_fn(rows.len(), self.len(), |i, j| rows[i][j])
    }
}

fn fill(out: &mut Vec<Vec<u16>>, cur: &mut Vec<u16>, var: usize, left: usize) {
    if var + 1 == cur.len() {
        cur[var] = left as u16;
        out.push(cur.clone());
        cur[var] = 0;
        return;
    }
    for k in (0..=left).rev() {
        cur[var] = k as u16;
        fill(out, cur, var + 1, left - k);
    }
    cur[var] = 0;
}

/// Product of two forms given by coefficient vectors in their bases.
pub fn multiply(a: &[C64], ba: &MonomialBasis, b: &[C64], bb: &MonomialBasis, out: &MonomialBasis) -> Vec<C64> {
    debug_assert_eq!(out.degree(), ba.degree() + bb.degree());
    let mut res = vec![ZERO; out.len()];
    for (i, &ca) in a.iter().enumerate() {
        if ca == ZERO {
            continue;
        }
        let ea = ba.exponents(i);
        for (j, &cb) in b.iter().enumerate() {
            if cb == ZERO {
                continue;
            }
            let e: Vec<u16> = ea.iter().zip(bb.exponents(j)).map(|(x, y)| x + y).collect();
            res[out.position(&e).expect("degree matches")] += ca * cb;
        }
    }
    res
}

/// Coefficient vector of the quadratic form `xᵗQx` in the degree-2 basis.
pub fn quadric_coefficients(q: &ComplexMatrix, basis: &MonomialBasis) -> Vec<C64> {
    (0..basis.len())
        .map(|m| {
            let idx: Vec<usize> =
                basis.exponents(m).iter().enumerate().flat_map(|(v, &k)| std::iter::repeat(v).take(k as usize)).collect();
            if idx[0] == idx[1] {
                q[(idx[0], idx[0])]
            } else {
                q[(idx[0], idx[1])] + q[(idx[1], idx[0])]
            }
        })
        .collect()
}

/// Coefficient vectors of the generators of an ideal of quadrics.
pub fn ideal_quadric_vectors(ideal: &QuadricIdeal) -> Vec<Vec<C64>> {
    let basis = MonomialBasis::new(ideal.g(), 2);
    ideal.quadrics().iter().map(|q| quadric_coefficients(q, &basis)).collect()
}

/// Evaluates a form given by coefficients at a point.
pub fn evaluate_form(coeffs: &[C64], basis: &MonomialBasis, x: &[C64]) -> C64 {
    basis.evaluate(x).iter().zip(coeffs).map(|(m, c)| m * c).sum()
}
