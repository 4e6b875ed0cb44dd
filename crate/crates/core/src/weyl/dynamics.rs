//! Classical Hamiltonian flows and the comparison of quantum and classical evolution.
//!
//! The flow of `H` solves `ẋ = −∂_ξH`, `ξ̇ = ∂_xH`, so that `d/dt (A∘Φ_t) = {A, H}∘Φ_t`.
//! For `H = ½XᵀQX + bᵀX + c` this is `Ẋ = K(QX + b)` with `K = [[0, −I], [I, 0]]`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{heisenberg_evolve, quantize_kernel, quantize_polynomial, symbol_from_operator, XGrid};
use crate::error::{MoyalError, Result};
use crate::grid::{sample_composed, Warning};
use crate::poly::{PolySymbol, Shape, Var};
use crate::scalar::{complex_to_f64, creal, rational_from_f64};
use crate::symbol::SymbolEvaluator;

/// Flow-map entries this close to an integer are taken to be that integer.
pub const SNAP_TOL: f64 = 1e-14;

/// The time-`t` flow of a quadratic Hamiltonian as an augmented matrix
/// acting on `(X, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFlow {
    pub dim: usize,
    pub matrix: DMatrix<f64>,
    /// Whether the closed form for `H = (ω/2)|X|²` was used.
    pub closed_form: bool,
}

impl AffineFlow {
    pub fn apply(&self, coords: &[f64]) -> Vec<f64> {
        let n = 2 * self.dim;
        (0..n).map(|k| (0..n).map(|l| self.matrix[(k, l)] * coords[l]).sum::<f64>() + self.matrix[(k, n)]).collect()
    }
}

fn phase_shape_check(p: &PolySymbol, what: &str) -> Result<()> {
    let s = p.shape();
    if s.test_point || (s.hbar && p.degree_hbar() > 0) {
        return Err(MoyalError::InvalidArgument(format!("{what} must be a phase-space polynomial, got shape {s}")));
    }
    Ok(())
}

fn real_coefficient(c: &crate::scalar::ComplexRational) -> Result<f64> {
    if !crate::scalar::is_real(c) {
        return Err(MoyalError::InvalidArgument("Hamiltonian coefficients must be real".into()));
    }
    Ok(complex_to_f64(c).re)
}

/// `(Q, b)` with `H = ½XᵀQX + bᵀX + c`.
fn quadratic_parts(h: &PolySymbol) -> Result<(DMatrix<f64>, Vec<f64>)> {
    phase_shape_check(h, "Hamiltonian")?;
    if h.degree_phase() > 2 {
        return Err(MoyalError::InvalidArgument(format!(
            "the affine flow needs a Hamiltonian of degree at most 2, got degree {}",
            h.degree_phase()
        )));
    }
    let shape = h.shape();
    let n = 2 * shape.dim;
    let mut q = DMatrix::zeros(n, n);
    let mut b = vec![0.0; n];
    for (e, c) in h.terms() {
        let v = real_coefficient(c)?;
        let phase: Vec<(usize, u32)> = (0..shape.nvars())
            .filter(|&i| shape.var_at(i).is_phase() && e.entries()[i] > 0)
            .map(|i| (i, e.entries()[i]))
            .collect();
        match phase.as_slice() {
            [] => {}
            [(i, 1)] => b[*i] += v,
            [(i, 2)] => q[(*i, *i)] += 2.0 * v,
            [(i, 1), (j, 1)] => {
                q[(*i, *j)] += v;
                q[(*j, *i)] += v;
            }
            _ => unreachable!("degree checked above"),
        }
    }
    Ok((q, b))
}

fn symplectic_k(d: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        k[(i, d + i)] = -1.0;
        k[(d + i, i)] = 1.0;
    }
    k
}

/// The time-`t` flow of a Hamiltonian of degree at most 2.
pub fn classical_flow(h: &PolySymbol, t: f64) -> Result<AffineFlow> {
    let d = h.dim();
    let n = 2 * d;
    let (q, b) = quadratic_parts(h)?;
    let k = symplectic_k(d);
    let omega = q[(0, 0)];
    let harmonic = b.iter().all(|&v| v == 0.0)
        && (0..n).all(|i| (0..n).all(|j| q[(i, j)] == if i == j { omega } else { 0.0 }));
    let mut matrix = DMatrix::zeros(n + 1, n + 1);
    if harmonic {
        let (s, c) = (omega * t).sin_cos();
        let rot = DMatrix::identity(n, n) * c + &k * s;
        matrix.view_mut((0, 0), (n, n)).copy_from(&rot);
        matrix[(n, n)] = 1.0;
    } else {
        let mut g = DMatrix::zeros(n + 1, n + 1);
        g.view_mut((0, 0), (n, n)).copy_from(&(&k * &q));
        let kb = &k * nalgebra::DVector::from_vec(b);
        g.view_mut((0, n), (n, 1)).copy_from(&kb);
        matrix = (g * t).exp();
    }
    Ok(AffineFlow { dim: d, matrix, closed_form: harmonic })
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP_TOL {
        r
    } else {
        v
    }
}

/// `A ∘ Φ_t` for `H` of degree at most 2, as an exact polynomial. The flow
/// matrix is evaluated in floating point; entries within `SNAP_TOL` of an
/// integer are snapped and the rest are converted exactly.
pub fn classical_evolve_quadratic(a: &PolySymbol, h: &PolySymbol, t: f64) -> Result<PolySymbol> {
    phase_shape_check(a, "observable")?;
    if a.dim() != h.dim() {
        return Err(MoyalError::InvalidArgument(format!(
            "observable has d = {} but Hamiltonian has d = {}",
            a.dim(),
            h.dim()
        )));
    }
    let flow = classical_flow(h, t)?;
    let d = a.dim();
    let n = 2 * d;
    let target = a.shape();
    let var = |k: usize| if k < d { Var::X(k) } else { Var::Xi(k - d) };
    let mut subs = Vec::with_capacity(n);
    for k in 0..n {
        let mut image = PolySymbol::zero(target);
        for l in 0..=n {
            let v = snap(flow.matrix[(k, l)]);
            if v == 0.0 {
                continue;
            }
            let c = creal(rational_from_f64(v).ok_or_else(|| MoyalError::Numeric(format!("flow entry {v} is not finite")))?);
            let term = if l == n { PolySymbol::constant(target, c) } else { PolySymbol::var(target, var(l))?.scale(&c) };
            image = &image + &term;
        }
        subs.push((var(k), image));
    }
    a.substitute(&subs, target)
}

/// A classical flow on the one-dimensional phase plane.
#[derive(Clone, Debug)]
pub enum PlaneFlow {
    Affine(AffineFlow),
    /// `H = V(x)`: `(x, ξ) ↦ (x, ξ + tV'(x))`.
    Shear { t: f64, dv: SymbolEvaluator },
}

impl PlaneFlow {
    pub fn for_hamiltonian(h: &PolySymbol, t: f64) -> Result<PlaneFlow> {
        if h.dim() != 1 {
            return Err(MoyalError::InvalidArgument("the Egorov comparison runs in d = 1".into()));
        }
        phase_shape_check(h, "Hamiltonian")?;
        if h.degree_phase() <= 2 {
            return Ok(PlaneFlow::Affine(classical_flow(h, t)?));
        }
        let xi_free = h.terms().all(|(e, _)| e.entries()[h.shape().index(Var::Xi(0)).expect("phase variable")] == 0);
        if !xi_free {
            return Err(MoyalError::InvalidArgument(format!(
                "no explicit classical flow for a Hamiltonian of degree {} that depends on xi",
                h.degree_phase()
            )));
        }
        let plain = h.restrict(Shape::phase(1))?;
        let dv = SymbolEvaluator::from_poly(&plain.partial(Var::X(0))?)?;
        Ok(PlaneFlow::Shear { t, dv })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PlaneFlow::Affine(f) if f.closed_form => "harmonic",
            PlaneFlow::Affine(_) => "affine",
            PlaneFlow::Shear { .. } => "shear",
        }
    }

    pub fn apply(&self, x: f64, xi: f64) -> (f64, f64) {
        match self {
            PlaneFlow::Affine(f) => {
                let v = f.apply(&[x, xi]);
                (v[0], v[1])
            }
            PlaneFlow::Shear { t, dv } => (x, xi + t * dv.eval(x, xi).re),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EgorovReport {
    pub flow: &'static str,
    /// Interior sup of `σ[Â(t)] − A∘Φ_t`.
    pub mismatch: f64,
    /// Interior sup of `A∘Φ_t`.
    pub reference: f64,
    pub warning: Option<Warning>,
}

/// Quantize `A` (windowed to width `L/8` when polynomial), evolve it under the
/// unwindowed operator quantization of `H`, and compare the recovered symbol with
/// `A∘Φ_t` on the central half of the box.
pub fn egorov_compare(a: &SymbolEvaluator, h: &PolySymbol, t: f64, grid: &XGrid) -> Result<EgorovReport> {
    let flow = PlaneFlow::for_hamiltonian(h, t)?;
    let a = if a.is_polynomial() { a.windowed(grid.window_width()) } else { a.clone() };
    let plain = h.restrict(Shape::phase(1))?;
    let (qa, warning) = quantize_kernel(&a, grid);
    let qh = quantize_polynomial(&plain, grid)?;
    let evolved = heisenberg_evolve(&qa, &qh, t)?;
    let recovered = symbol_from_operator(&evolved);
    let reference = sample_composed(&a, recovered.spec(), |x, xi| flow.apply(x, xi));
    let mismatch = recovered.sub(&reference)?.interior_sup();
    Ok(EgorovReport { flow: flow.kind(), mismatch, reference: reference.interior_sup(), warning })
}

/// `(i/ħ)[Â, Ĥ]` against the quantized Poisson bracket, as a relative
/// Hilbert–Schmidt distance.
pub fn correspondence_defect(a: &SymbolEvaluator, h: &SymbolEvaluator, grid: &XGrid) -> f64 {
    let comm = super::commutator_bracket(a, h, grid);
    let (pb, _) = quantize_kernel(&crate::symbol::poisson(a, h), grid);
    comm.relative_distance(&pb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::linear_form;
    use crate::poly::PhasePoint;
    use crate::scalar::{cint, crat, int};

    fn parse1(terms: &[((u32, u32), i64)]) -> PolySymbol {
        let s = Shape::phase(1);
        let mut p = PolySymbol::zero(s);
        for &((a, b), c) in terms {
            p = &p + &PolySymbol::monomial_in(s, &[(Var::X(0), a), (Var::Xi(0), b)], cint(c)).unwrap();
        }
        p
    }

    fn oscillator() -> PolySymbol {
        parse1(&[((2, 0), 1), ((0, 2), 1)]).scale(&crat(1, 2))
    }

    #[test]
    fn quarter_period_rotation() {
        let x = parse1(&[((1, 0), 1)]);
        let xi = parse1(&[((0, 1), 1)]);
        let t = std::f64::consts::FRAC_PI_2;
        assert_eq!(classical_evolve_quadratic(&x, &oscillator(), t).unwrap(), xi.scale(&cint(-1)));
        assert_eq!(classical_evolve_quadratic(&xi, &oscillator(), t).unwrap(), x);
        assert!(classical_flow(&oscillator(), t).unwrap().closed_form);
    }

    #[test]
    fn linear_hamiltonian_translates() {
        let y = PhasePoint::new(vec![int(2)], vec![int(-3)]).unwrap();
        let h = linear_form(&y);
        let x = parse1(&[((1, 0), 1)]);
        let xi = parse1(&[((0, 1), 1)]);
        // Φ_t(X) = X + tY.
        assert_eq!(classical_evolve_quadratic(&x, &h, 1.0).unwrap(), &x + &PolySymbol::constant(x.shape(), cint(2)));
        assert_eq!(classical_evolve_quadratic(&xi, &h, 1.0).unwrap(), &xi - &PolySymbol::constant(x.shape(), cint(3)));
    }

    #[test]
    fn free_particle_and_higher_dimension() {
        let h = parse1(&[((0, 2), 1)]).scale(&crat(1, 2));
        let x = parse1(&[((1, 0), 1)]);
        // ẋ = −ξ.
        let moved = classical_evolve_quadratic(&x, &h, 2.0).unwrap();
        assert_eq!(moved, &x - &parse1(&[((0, 1), 2)]));
        let s = Shape::phase(2);
        let h2 = PolySymbol::monomial_in(s, &[(Var::X(0), 1), (Var::Xi(1), 1)], cint(1)).unwrap();
        let flow = classical_flow(&h2, 0.5).unwrap();
        let p = flow.apply(&[1.0, 2.0, 3.0, 4.0]);
        // ẋ1 = 0, ẋ2 = −x1, ξ̇1 = ξ2, ξ̇2 = 0.
        let want = [1.0, 1.5, 5.0, 4.0];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn flow_satisfies_the_bracket_equation() {
        let h = parse1(&[((2, 0), 3), ((1, 1), 1), ((0, 2), 2), ((1, 0), 1)]);
        let a = parse1(&[((2, 1), 1), ((0, 1), 1)]);
        let eps = 1e-5;
        let (fp, fm) = (classical_flow(&h, 0.3 + eps).unwrap(), classical_flow(&h, 0.3 - eps).unwrap());
        let f0 = classical_flow(&h, 0.3).unwrap();
        let ae = SymbolEvaluator::from_poly(&a).unwrap();
        let br = SymbolEvaluator::from_poly(&crate::poly::poisson_bracket(&a, &h).unwrap()).unwrap();
        for (x, xi) in [(0.3, -0.2), (1.0, 0.5)] {
            let at = |f: &AffineFlow| {
                let p = f.apply(&[x, xi]);
                ae.eval(p[0], p[1]).re
            };
            let deriv = (at(&fp) - at(&fm)) / (2.0 * eps);
            let p = f0.apply(&[x, xi]);
            assert!((deriv - br.eval(p[0], p[1]).re).abs() < 1e-6);
        }
    }

    #[test]
    fn rejections() {
        let cubic = parse1(&[((3, 0), 1)]);
        assert!(classical_flow(&cubic, 1.0).is_err());
        let complex = PolySymbol::monomial_in(Shape::phase(1), &[(Var::X(0), 2)], crate::scalar::imag_unit()).unwrap();
        assert!(classical_flow(&complex, 1.0).is_err());
        assert!(PlaneFlow::for_hamiltonian(&parse1(&[((1, 2), 1)]), 1.0).is_err());
        assert_eq!(PlaneFlow::for_hamiltonian(&cubic, 1.0).unwrap().kind(), "shear");
    }

    #[test]
    fn egorov_holds_for_the_oscillator() {
        let g = XGrid::new(128, 12.0, 1.0).unwrap();
        let a = SymbolEvaluator::monomial(1, 0);
        let r = egorov_compare(&a, &oscillator(), std::f64::consts::FRAC_PI_2, &g).unwrap();
        assert_eq!(r.flow, "harmonic");
        assert!(r.mismatch < 1e-8 * r.reference.max(1.0), "{r:?}");
    }

    #[test]
    fn egorov_fails_for_a_cubic_potential() {
        let g = XGrid::new(128, 12.0, 1.0).unwrap();
        let a = SymbolEvaluator::gaussian(1.0, (0.0, 0.0));
        let r = egorov_compare(&a, &parse1(&[((3, 0), 1)]), 0.2, &g).unwrap();
        assert_eq!(r.flow, "shear");
        assert!(r.mismatch > 1e-3, "{r:?}");
    }
}
