//! Sparse multivariate polynomials with real coefficients, used to evaluate
//! the degree-≥2 tails of the majorant series exactly.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u16>, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// Univariate `Σₖ coeffs[k]·r_var^k`.
    pub fn univariate(nvars: usize, var: usize, coeffs: &[f64]) -> Self {
        let mut p = Self::zero(nvars);
        for (k, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0u16; nvars];
            e[var] = k as u16;
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exps: Vec<u16>, c: f64) {
        if c != 0.0 {
            *self.terms.entry(exps).or_insert(0.0) += c;
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u16> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn eval(&self, r: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| c * e.iter().zip(r).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }

    fn filter(&self, keep: impl Fn(u32) -> bool) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| keep(e.iter().map(|&k| k as u32).sum()))
            .map(|(e, &c)| (e.clone(), c))
            .collect();
        Self { nvars: self.nvars, terms }
    }

    /// Constant term as a polynomial.
    pub fn constant_part(&self) -> Self {
        self.filter(|d| d == 0)
    }

    /// Homogeneous degree-1 part.
    pub fn linear_part(&self) -> Self {
        self.filter(|d| d == 1)
    }

    /// All monomials of total degree at least 2.
    pub fn tail2(&self) -> Self {
        self.filter(|d| d >= 2)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().map(|&k| k as u32).sum()).max().unwrap_or(0)
    }
}

/// `1 + 2c·rᵢ + κ₁·rᵢ²`.
pub fn mu(nvars: usize, i: usize, c: f64, kappa1: f64) -> Poly {
    Poly::univariate(nvars, i, &[1.0, 2.0 * c, kappa1])
}

/// `1 + rⱼ + c·rⱼ² + κ₀·rⱼ³`.
pub fn point_factor(nvars: usize, j: usize, c: f64, kappa0: f64) -> Poly {
    Poly::univariate(nvars, j, &[1.0, 1.0, c, kappa0])
}

/// `ηᵢ = ∏_{j≠i}(1 + rⱼ + cⱼrⱼ² + κ₀ⱼrⱼ³)`.
pub fn eta(i: usize, cs: &[f64], kappa0: &[f64]) -> Poly {
    let n = cs.len();
    let mut p = Poly::constant(n, 1.0);
    for j in (0..n).filter(|&j| j != i) {
        p = p.mul(&point_factor(n, j, cs[j], kappa0[j]));
    }
    p
}

/// `Σᵢ μᵢ ηᵢ`, the majorant of the determinant system.
pub fn jacobian_majorant(cs: &[f64], kappa0: &[f64], kappa1: &[f64]) -> Poly {
    let n = cs.len();
    let mut out = Poly::zero(n);
    for i in 0..n {
        out = out.add(&mu(n, i, cs[i], kappa1[i]).mul(&eta(i, cs, kappa0)));
    }
    out
}

/// `∏ᵢ(1 + rᵢ + cᵢrᵢ² + κ₀ᵢrᵢ³)`, the majorant of the wedge of the points.
pub fn wedge_majorant(cs: &[f64], kappa0: &[f64]) -> Poly {
    let n = cs.len();
    let mut p = Poly::constant(n, 1.0);
    for j in 0..n {
        p = p.mul(&point_factor(n, j, cs[j], kappa0[j]));
    }
    p
}

/// `Tail₂(ψ)(r)` with a rounding allowance; exact since all coefficients are
/// non-negative.
pub fn tail2_value(psi: &Poly, r: &[f64]) -> f64 {
    let t = psi.tail2();
    let e = f64::EPSILON;
    t.eval(r) * (1.0 + 4.0 * (t.degree() as f64 + t.len() as f64) * e)
}
