//! Floating-point symbols in one degree of freedom that can be evaluated and
//! differentiated in closed form at arbitrary phase points.
//!
//! A symbol is a finite sum of terms `P(x, ξ)·e^{−a|X−X₀|²}·e^{i(k_x x + k_ξ ξ)}`.
//! The class is closed under products and partial derivatives, so Poisson
//! brackets and `C_j` coefficients of evaluators are evaluators again.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{MoyalError, Result};
use crate::poly::PolySymbol;
use crate::scalar::complex_to_f64;
use crate::star::bidifferential_terms;

/// Sparse polynomial in `(x, ξ)` with double-precision complex coefficients,
/// keyed by `(deg_x, deg_ξ)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NumPoly {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl NumPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(px: u32, pxi: u32, c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term(px, pxi, c);
        p
    }

    fn add_term(&mut self, px: u32, pxi: u32, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let e = self.terms.entry((px, pxi)).or_default();
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(px, pxi));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64, xi: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(px, pxi), c)| c * x.powi(px as i32) * xi.powi(pxi as i32))
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.add_term(k.0, k.1, c);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero();
        for (k, v) in self.terms() {
            out.add_term(k.0, k.1, v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a.0 + b.0, a.1 + b.1, ca * cb);
            }
        }
        out
    }

    /// `∂_x` when `axis = 0`, `∂_ξ` when `axis = 1`.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for ((px, pxi), c) in self.terms() {
            let n = if axis == 0 { px } else { pxi };
            if n == 0 {
                continue;
            }
            let c = c * n as f64;
            if axis == 0 {
                out.add_term(px - 1, pxi, c);
            } else {
                out.add_term(px, pxi - 1, c);
            }
        }
        out
    }
}

/// Gaussian envelope `e^{−a((x−x₀)² + (ξ−ξ₀)²)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gauss {
    pub a: f64,
    pub center: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
struct Term {
    poly: NumPoly,
    gauss: Option<Gauss>,
    wave: (f64, f64),
}

impl Term {
    fn same_kind(&self, other: &Term) -> bool {
        self.gauss == other.gauss && self.wave == other.wave
    }

    fn eval(&self, x: f64, xi: f64) -> Complex64 {
        let mut v = self.poly.eval(x, xi);
        if let Some(g) = self.gauss {
            let (dx, dxi) = (x - g.center.0, xi - g.center.1);
            v *= (-g.a * (dx * dx + dxi * dxi)).exp();
        }
        if self.wave != (0.0, 0.0) {
            v *= Complex64::from_polar(1.0, self.wave.0 * x + self.wave.1 * xi);
        }
        v
    }

    fn derivative(&self, axis: usize) -> Term {
        let mut p = self.poly.derivative(axis);
        if let Some(g) = self.gauss {
            let c = if axis == 0 { g.center.0 } else { g.center.1 };
            let lin = NumPoly::monomial(
                (axis == 0) as u32,
                (axis == 1) as u32,
                Complex64::new(-2.0 * g.a, 0.0),
            )
            .add(&NumPoly::constant(Complex64::new(2.0 * g.a * c, 0.0)));
            p = p.add(&self.poly.mul(&lin));
        }
        let k = if axis == 0 { self.wave.0 } else { self.wave.1 };
        if k != 0.0 {
            p = p.add(&self.poly.scale(Complex64::new(0.0, k)));
        }
        Term { poly: p, gauss: self.gauss, wave: self.wave }
    }

    fn mul(&self, other: &Term) -> Term {
        let mut poly = self.poly.mul(&other.poly);
        let gauss = match (self.gauss, other.gauss) {
            (None, g) | (g, None) => g,
            (Some(g1), Some(g2)) => {
                let a = g1.a + g2.a;
                let center = (
                    (g1.a * g1.center.0 + g2.a * g2.center.0) / a,
                    (g1.a * g1.center.1 + g2.a * g2.center.1) / a,
                );
                let d2 = (g1.center.0 - g2.center.0).powi(2) + (g1.center.1 - g2.center.1).powi(2);
                poly = poly.scale(Complex64::new((-g1.a * g2.a / a * d2).exp(), 0.0));
                Some(Gauss { a, center })
            }
        };
        Term { poly, gauss, wave: (self.wave.0 + other.wave.0, self.wave.1 + other.wave.1) }
    }
}

/// A symbol that can be evaluated and differentiated exactly in floating point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymbolEvaluator {
    terms: Vec<Term>,
}

impl SymbolEvaluator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_num_poly(NumPoly::constant(Complex64::new(c, 0.0)))
    }

    pub fn from_num_poly(p: NumPoly) -> Self {
        let mut s = Self::zero();
        s.push(Term { poly: p, gauss: None, wave: (0.0, 0.0) });
        s
    }

    /// `x^px ξ^pxi`.
    pub fn monomial(px: u32, pxi: u32) -> Self {
        Self::from_num_poly(NumPoly::monomial(px, pxi, Complex64::new(1.0, 0.0)))
    }

    /// `e^{−a|X − X₀|²}`.
    pub fn gaussian(a: f64, center: (f64, f64)) -> Self {
        let mut s = Self::zero();
        s.push(Term {
            poly: NumPoly::constant(Complex64::new(1.0, 0.0)),
            gauss: Some(Gauss { a, center }),
            wave: (0.0, 0.0),
        });
        s
    }

    /// `e^{i(k_x x + k_ξ ξ)}`.
    pub fn plane_wave(kx: f64, kxi: f64) -> Self {
        let mut s = Self::zero();
        s.push(Term { poly: NumPoly::constant(Complex64::new(1.0, 0.0)), gauss: None, wave: (kx, kxi) });
        s
    }

    /// Lower an exact polynomial in one degree of freedom (no test-point or `ħ` block).
    pub fn from_poly(p: &PolySymbol) -> Result<Self> {
        let s = p.shape();
        if s.dim != 1 || s.test_point || s.hbar {
            return Err(MoyalError::InvalidArgument(format!(
                "numeric symbols need a phase-space polynomial in d = 1, got shape {s}"
            )));
        }
        let mut np = NumPoly::zero();
        for (e, c) in p.terms() {
            np.add_term(e.entries()[0], e.entries()[1], complex_to_f64(c));
        }
        Ok(Self::from_num_poly(np))
    }

    fn push(&mut self, t: Term) {
        if t.poly.is_zero() {
            return;
        }
        if let Some(existing) = self.terms.iter_mut().find(|e| e.same_kind(&t)) {
            existing.poly = existing.poly.add(&t.poly);
        } else {
            self.terms.push(t);
        }
        self.terms.retain(|t| !t.poly.is_zero());
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64, xi: f64) -> Complex64 {
        self.terms.iter().map(|t| t.eval(x, xi)).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero();
        for t in &self.terms {
            out.push(Term { poly: t.poly.scale(c), gauss: t.gauss, wave: t.wave });
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for a in &self.terms {
            for b in &other.terms {
                out.push(a.mul(b));
            }
        }
        out
    }

    /// Multiply by the window `e^{−|X|²/(2w²)}`.
    pub fn windowed(&self, w: f64) -> Self {
        self.mul(&Self::gaussian(1.0 / (2.0 * w * w), (0.0, 0.0)))
    }

    /// `∂_x` for `axis = 0`, `∂_ξ` for `axis = 1`.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for t in &self.terms {
            out.push(t.derivative(axis));
        }
        out
    }

    pub fn partial(&self, nx: u32, nxi: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..nx {
            out = out.derivative(0);
        }
        for _ in 0..nxi {
            out = out.derivative(1);
        }
        out
    }

    /// Largest polynomial degree over all terms.
    pub fn poly_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.poly.degree()).max().unwrap_or(0)
    }

    /// True when no term carries an envelope or a plane wave.
    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|t| t.gauss.is_none() && t.wave == (0.0, 0.0))
    }

    /// Largest deviation between closed-form first and second derivatives and
    /// central finite differences at the given points, relative to the larger
    /// of the derivative magnitude and one.
    pub fn derivative_self_test(&self, points: &[(f64, f64)]) -> f64 {
        let step = 1e-4;
        let mut worst: f64 = 0.0;
        for axis in 0..2 {
            let d1 = self.derivative(axis);
            let d2 = d1.derivative(axis);
            for &(x, xi) in points {
                let shift = |s: f64| if axis == 0 { (x + s, xi) } else { (x, xi + s) };
                let (p, m) = (shift(step), shift(-step));
                let f = |q: (f64, f64)| self.eval(q.0, q.1);
                let fd1 = (f(p) - f(m)) / (2.0 * step);
                let fd2 = (f(p) - self.eval(x, xi) * 2.0 + f(m)) / (step * step);
                let e1 = (fd1 - d1.eval(x, xi)).norm() / d1.eval(x, xi).norm().max(1.0);
                let e2 = (fd2 - d2.eval(x, xi)).norm() / d2.eval(x, xi).norm().max(1.0);
                worst = worst.max(e1).max(e2);
            }
        }
        worst
    }
}

/// `{A,B} = ∂_ξA·∂_xB − ∂_xA·∂_ξB`.
pub fn poisson(a: &SymbolEvaluator, b: &SymbolEvaluator) -> SymbolEvaluator {
    a.derivative(1).mul(&b.derivative(0)).sub(&a.derivative(0).mul(&b.derivative(1)))
}

/// `C_j(A, B)` evaluated in closed form.
pub fn cj(a: &SymbolEvaluator, b: &SymbolEvaluator, j: u32) -> SymbolEvaluator {
    let mut out = SymbolEvaluator::zero();
    for t in bidifferential_terms(1, j) {
        let da = a.partial(t.left_x[0], t.left_xi[0]);
        let db = b.partial(t.right_x[0], t.right_xi[0]);
        out = out.add(&da.mul(&db).scale(complex_to_f64(&t.coef)));
    }
    out
}

/// `{A,B}_j = i(C_j(A,B) − C_j(B,A))`, the coefficient of `ħ^{j−1}` in the Moyal bracket.
pub fn bracket_term(a: &SymbolEvaluator, b: &SymbolEvaluator, j: u32) -> SymbolEvaluator {
    cj(a, b, j).sub(&cj(b, a, j)).scale(Complex64::new(0.0, 1.0))
}

/// `{A,B} + ħ²{A,B}_3 + ⋯ + ħ^{2m}{A,B}_{2m+1}`.
pub fn truncated_bracket(a: &SymbolEvaluator, b: &SymbolEvaluator, m: u32, hbar: f64) -> SymbolEvaluator {
    let mut out = SymbolEvaluator::zero();
    for k in 0..=m {
        let w = hbar.powi(2 * k as i32);
        out = out.add(&bracket_term(a, b, 2 * k + 1).scale(Complex64::new(w, 0.0)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Shape, Var};
    use crate::scalar::cint;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sample_points() -> Vec<(f64, f64)> {
        vec![(0.0, 0.0), (0.3, -0.7), (-1.1, 0.4), (1.5, 1.2)]
    }

    #[test]
    fn pointwise_arithmetic() {
        let x3g = SymbolEvaluator::monomial(3, 0).mul(&SymbolEvaluator::gaussian(0.25, (0.0, 0.0)));
        for (x, xi) in sample_points() {
            let expect = x.powi(3) * (-0.25 * (x * x + xi * xi)).exp();
            assert!((x3g.eval(x, xi) - c(expect)).norm() < 1e-14);
        }
        let g1 = SymbolEvaluator::gaussian(1.0, (0.5, -0.25));
        let g2 = SymbolEvaluator::gaussian(0.5, (-1.0, 0.75));
        let prod = g1.mul(&g2);
        for (x, xi) in sample_points() {
            assert!((prod.eval(x, xi) - g1.eval(x, xi) * g2.eval(x, xi)).norm() < 1e-14);
        }
        let w = SymbolEvaluator::plane_wave(2.0, -1.0).mul(&g1);
        assert!((w.eval(0.5, -0.25) - Complex64::from_polar(1.0, 1.25)).norm() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = SymbolEvaluator::monomial(2, 1)
            .add(&SymbolEvaluator::monomial(0, 3))
            .mul(&SymbolEvaluator::gaussian(0.7, (0.2, -0.1)))
            .mul(&SymbolEvaluator::plane_wave(0.5, 1.5));
        assert!(s.derivative_self_test(&sample_points()) < 1e-6);
    }

    #[test]
    fn exact_polynomial_lowering() {
        let sh = Shape::phase(1);
        let x = PolySymbol::var(sh, Var::X(0)).unwrap();
        let xi = PolySymbol::var(sh, Var::Xi(0)).unwrap();
        let p = &(&x.pow(2) * &xi) + &PolySymbol::constant(sh, cint(3));
        let e = SymbolEvaluator::from_poly(&p).unwrap();
        assert!((e.eval(2.0, -1.0) - c(-1.0)).norm() < 1e-15);
        assert!(SymbolEvaluator::from_poly(&PolySymbol::one(Shape::phase(2))).is_err());
    }

    #[test]
    fn numeric_brackets_match_exact_engine() {
        // {ξ³, x³}_3 = −3/2 exactly.
        let a = SymbolEvaluator::monomial(0, 3);
        let b = SymbolEvaluator::monomial(3, 0);
        let t = bracket_term(&a, &b, 3);
        assert!((t.eval(0.4, 0.9) - c(-1.5)).norm() < 1e-14);
        let p = poisson(&SymbolEvaluator::monomial(1, 0), &SymbolEvaluator::monomial(0, 1));
        assert!((p.eval(0.0, 0.0) - c(-1.0)).norm() < 1e-15);
        let x_star_xi = cj(&SymbolEvaluator::monomial(1, 0), &SymbolEvaluator::monomial(0, 1), 1);
        assert!((x_star_xi.eval(1.0, 1.0) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }
}
