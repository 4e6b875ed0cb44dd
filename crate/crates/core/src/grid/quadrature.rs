//! Direct quadrature of the oscillatory double integral for the star product,
//! used as an independent oracle for [`super::star_grid`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::GridSpec;
use crate::error::Result;
use crate::symbol::SymbolEvaluator;

/// The oracle value at the grid resolution and at twice that resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraturePoint {
    pub value: Complex64,
    pub refined: Complex64,
    /// `|value − refined| ≤ oracle_tol·|refined|`.
    pub converged: bool,
}

/// `(πħ)^{−2} ∬ e^{−(2i/ħ)σ(u,v)} A(X+u) B(X+v) du dv` with
/// `σ(u,v) = u_ξ v_x − u_x v_ξ` the form used by `L_Y`, evaluated by the
/// trapezoidal rule on the box. The orientation is the one that reproduces
/// `x⊛ξ = xξ + iħ/2`.
///
/// The phase factors separably, so the sum is `tr((A E₂ B) E₁ᵀ)` and costs
/// `O(N³)` per point.
fn quadrature_at(a: &SymbolEvaluator, b: &SymbolEvaluator, x: f64, xi: f64, spec: &GridSpec) -> Complex64 {
    let n = spec.n;
    let h = spec.step();
    let pts = spec.points();
    let k = 2.0 / spec.hbar;
    let am = DMatrix::from_fn(n, n, |i, j| a.eval(pts[i], pts[j]));
    let bm = DMatrix::from_fn(n, n, |i, j| b.eval(pts[i], pts[j]));
    // E1[i, l] pairs u_x with v_ξ, E2[j, k] pairs u_ξ with v_x.
    let e1 = DMatrix::from_fn(n, n, |i, l| Complex64::from_polar(1.0, k * (pts[i] - x) * (pts[l] - xi)));
    let e2 = DMatrix::from_fn(n, n, |j, kk| Complex64::from_polar(1.0, -k * (pts[j] - xi) * (pts[kk] - x)));
    let m = &am * &e2 * &bm;
    let s: Complex64 = m.component_mul(&e1).sum();
    let pref = h.powi(4) / (std::f64::consts::PI * spec.hbar).powi(2);
    s * pref
}

pub fn star_quadrature_point(
    a: &SymbolEvaluator,
    b: &SymbolEvaluator,
    point: (f64, f64),
    spec: &GridSpec,
) -> Result<QuadraturePoint> {
    spec.validate()?;
    let value = quadrature_at(a, b, point.0, point.1, spec);
    let refined = quadrature_at(a, b, point.0, point.1, &spec.with_n(2 * spec.n));
    let converged = (value - refined).norm() <= spec.oracle_tol * refined.norm();
    Ok(QuadraturePoint { value, refined, converged })
}
