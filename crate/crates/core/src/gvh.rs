//! Exponential test observables `T_Y = e^{−iL_Y}` and the certificates built on them.
//!
//! Everything stays an exact polynomial identity in `(X, Y, ħ)`: `Y` is a
//! variable block, never sampled.

use num_bigint::BigInt;

use crate::error::{MoyalError, Result};
use crate::poly::{linear_form_symbolic, PolySymbol, Shape, Var};
use crate::scalar::{cint, creal, imag_unit, ComplexRational, Rational};
use crate::star::bidifferential_terms;

/// `P(X, Y, ħ)·e^{i s L_Y(X)}` with `s ∈ {−1, 0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpPolySymbol {
    prefactor: PolySymbol,
    phase: i8,
}

/// Which side of the star product a pure exponential factor sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Direction of the argument shift when a pure factor `e^{i s' L_Y}` sits on
/// the right: `F ⊛ e^{i s' L_Y} = F(X + COLLAPSE_RIGHT_SHIFT·ħ s' Y/2)·e^{i s' L_Y}`.
/// The left side uses the opposite sign. Fixed by agreement with the
/// terminating series and pinned by `collapse_matches_series`.
pub const COLLAPSE_RIGHT_SHIFT: i64 = 1;

fn check_phase(s: i32) -> Result<i8> {
    if (-1..=1).contains(&s) {
        Ok(s as i8)
    } else {
        Err(MoyalError::InvalidArgument(format!(
            "phase e^{{{s}i L_Y}} is outside the exponential test family"
        )))
    }
}

impl ExpPolySymbol {
    /// The prefactor is embedded into a shape carrying the test-point block.
    pub fn new(prefactor: PolySymbol, phase: i8) -> Result<Self> {
        let phase = check_phase(phase as i32)?;
        let shape = prefactor.shape().with_test_point();
        Ok(ExpPolySymbol { prefactor: prefactor.embed(shape)?, phase })
    }

    /// `T_Y = e^{−i L_Y}` in `d` degrees of freedom.
    pub fn t_y(dim: usize) -> Self {
        Self::new(PolySymbol::one(Shape::with_y(dim)), -1).unwrap()
    }

    /// `T_Y^* = e^{+i L_Y}`.
    pub fn t_y_star(dim: usize) -> Self {
        Self::new(PolySymbol::one(Shape::with_y(dim)), 1).unwrap()
    }

    pub fn polynomial(p: PolySymbol) -> Self {
        Self::new(p, 0).unwrap()
    }

    pub fn prefactor(&self) -> &PolySymbol {
        &self.prefactor
    }

    pub fn phase(&self) -> i8 {
        self.phase
    }

    pub fn shape(&self) -> Shape {
        self.prefactor.shape()
    }

    pub fn dim(&self) -> usize {
        self.prefactor.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.prefactor.is_zero()
    }

    fn same_shape(&self, other: &Self) -> Result<Shape> {
        self.shape().union(&other.shape())
    }

    /// Pointwise product; phases add.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let shape = self.same_shape(other)?;
        let phase = check_phase(self.phase as i32 + other.phase as i32)?;
        let p = self.prefactor.embed(shape)?.checked_mul(&other.prefactor.embed(shape)?)?;
        Ok(ExpPolySymbol { prefactor: p, phase })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.phase != other.phase && !self.is_zero() && !other.is_zero() {
            return Err(MoyalError::InvalidArgument("cannot add terms with different phases".into()));
        }
        let phase = if self.is_zero() { other.phase } else { self.phase };
        let shape = self.same_shape(other)?;
        let p = self.prefactor.embed(shape)?.checked_add(&other.prefactor.embed(shape)?)?;
        Ok(ExpPolySymbol { prefactor: p, phase })
    }

    pub fn scale(&self, c: &ComplexRational) -> Self {
        ExpPolySymbol { prefactor: self.prefactor.scale(c), phase: self.phase }
    }

    fn embed(&self, shape: Shape) -> Result<Self> {
        Ok(ExpPolySymbol { prefactor: self.prefactor.embed(shape)?, phase: self.phase })
    }
}

/// `∂_v (P e^{isL_Y}) = (∂_v P + i s (∂_v L_Y) P) e^{isL_Y}` for a phase-space variable `v`.
pub fn exp_derivative(e: &ExpPolySymbol, v: Var) -> Result<ExpPolySymbol> {
    if !v.is_phase() {
        return Err(MoyalError::InvalidArgument(format!("{v:?} is not a phase-space variable")));
    }
    let shape = e.shape();
    let mut p = e.prefactor.partial(v)?;
    if e.phase != 0 {
        let dl = linear_form_symbolic(shape)?.partial(v)?;
        let factor = imag_unit() * cint(e.phase as i64);
        p = &p + &(&dl * &e.prefactor).scale(&factor);
    }
    Ok(ExpPolySymbol { prefactor: p, phase: e.phase })
}

fn derivative_phase(e: &ExpPolySymbol, xs: &[u32], xis: &[u32]) -> Result<ExpPolySymbol> {
    let mut out = e.clone();
    for (k, (&nx, &nxi)) in xs.iter().zip(xis).enumerate() {
        for _ in 0..nx {
            out = exp_derivative(&out, Var::X(k))?;
        }
        for _ in 0..nxi {
            out = exp_derivative(&out, Var::Xi(k))?;
        }
        if out.is_zero() {
            break;
        }
    }
    Ok(out)
}

/// `C_j(A, B)` when at most one factor carries an exponential. With one
/// polynomial factor the sum over `j` terminates at its phase-space degree.
pub fn cj_exp(a: &ExpPolySymbol, b: &ExpPolySymbol, j: u32) -> Result<ExpPolySymbol> {
    if a.phase != 0 && b.phase != 0 {
        return Err(MoyalError::InvalidArgument(
            "both factors are exponential; the series does not terminate, use pure_exp_collapse".into(),
        ));
    }
    let shape = a.same_shape(b)?;
    let (a, b) = (a.embed(shape)?, b.embed(shape)?);
    let phase = a.phase + b.phase;
    let mut out = ExpPolySymbol { prefactor: PolySymbol::zero(shape), phase };
    let poly_degree = if a.phase == 0 { a.prefactor.degree_phase() } else { b.prefactor.degree_phase() };
    if j > poly_degree {
        return Ok(out);
    }
    for t in bidifferential_terms(shape.dim, j) {
        let da = derivative_phase(&a, &t.left_x, &t.left_xi)?;
        if da.is_zero() {
            continue;
        }
        let db = derivative_phase(&b, &t.right_x, &t.right_xi)?;
        if db.is_zero() {
            continue;
        }
        out.prefactor = &out.prefactor + &(&da.prefactor * &db.prefactor).scale(&t.coef);
    }
    Ok(out)
}

/// `A ⊛ B = Σ_j ħ^j C_j(A, B)` with one polynomial factor, returned with an
/// explicit `ħ` block in the prefactor.
pub fn exp_star_series(a: &ExpPolySymbol, b: &ExpPolySymbol) -> Result<ExpPolySymbol> {
    let shape = a.same_shape(b)?;
    if shape.hbar {
        return Err(MoyalError::InvalidArgument("series route takes hbar-free prefactors".into()));
    }
    let top = if a.phase == 0 { a.prefactor.degree_phase() } else { b.prefactor.degree_phase() };
    let target = shape.with_hbar();
    let hbar = PolySymbol::var(target, Var::Hbar)?;
    let mut p = PolySymbol::zero(target);
    for j in 0..=top {
        let c = cj_exp(a, b, j)?;
        p = &p + &(&c.prefactor.embed(target)? * &hbar.pow(j));
    }
    Ok(ExpPolySymbol { prefactor: p, phase: a.phase + b.phase })
}

/// Star product of `f` with the pure factor `e^{i s' L_Y}` placed on `side`:
/// the phases add and the prefactor of `f` is translated by `±ħ s' Y/2`.
/// No scalar phase appears because `σ(Y, Y) = 0`.
pub fn pure_exp_collapse(f: &ExpPolySymbol, side: Side, pure: &ExpPolySymbol) -> Result<ExpPolySymbol> {
    if pure.phase == 0 {
        return Err(MoyalError::InvalidArgument("the pure factor must be exponential".into()));
    }
    let shape = f.same_shape(pure)?;
    if pure.prefactor.embed(shape)? != PolySymbol::one(shape) {
        return Err(MoyalError::InvalidArgument("the pure factor must have prefactor 1".into()));
    }
    let phase = check_phase(f.phase as i32 + pure.phase as i32)?;
    let target = shape.with_hbar();
    let side_sign = match side {
        Side::Right => COLLAPSE_RIGHT_SHIFT,
        Side::Left => -COLLAPSE_RIGHT_SHIFT,
    };
    let c = creal(Rational::new(BigInt::from(side_sign * pure.phase as i64), BigInt::from(2)));
    let hbar = PolySymbol::var(target, Var::Hbar)?;
    let d = shape.dim;
    let shift = (0..d)
        .map(|k| PolySymbol::var(target, Var::Y(k)))
        .chain((0..d).map(|k| PolySymbol::var(target, Var::Eta(k))))
        .map(|v| Ok((&v? * &hbar).scale(&c)))
        .collect::<Result<Vec<_>>>()?;
    let p = f.prefactor.embed(target)?.translate(&shift)?;
    Ok(ExpPolySymbol { prefactor: p, phase })
}

fn full_shape_of(h: &PolySymbol) -> Result<Shape> {
    let s = h.shape();
    if s.test_point || s.hbar {
        return Err(MoyalError::InvalidArgument(
            "H must be a polynomial in the phase-space variables only".into(),
        ));
    }
    Ok(Shape::with_y(s.dim))
}

/// `T_Y^*·{T_Y, H}_{2j+1}`, computed by the terminating series; homogeneous of
/// degree `2j+1` in `Y`.
pub fn bracket_term_exp(h: &PolySymbol, j: u32) -> Result<PolySymbol> {
    let shape = full_shape_of(h)?;
    let order = 2 * j + 1;
    let t = ExpPolySymbol::t_y(shape.dim);
    let hp = ExpPolySymbol::polynomial(h.embed(shape)?);
    let left = cj_exp(&t, &hp, order)?;
    let right = cj_exp(&hp, &t, order)?;
    // The common factor T_Y cancels against T_Y^*.
    Ok((&left.prefactor - &right.prefactor).scale(&imag_unit()))
}

/// The constant `c_j` in `T_Y^*{T_Y,H}_{2j+1} = c_j (Y·∇)^{2j+1} H`, read off
/// the engine from `H = x_1^{2j+1}`.
pub fn derived_bracket_constant(j: u32) -> ComplexRational {
    let n = 2 * j + 1;
    let h = PolySymbol::var(Shape::phase(1), Var::X(0)).unwrap().pow(n);
    let term = bracket_term_exp(&h, j).unwrap();
    let y = PolySymbol::var(Shape::with_y(1), Var::Y(0)).unwrap().pow(n);
    let e = y.terms().next().unwrap().0.clone();
    let fact = creal(Rational::from_integer(crate::scalar::factorial(n)));
    term.coefficient(&e) / fact
}

/// `T_Y^*·{T_Y, H}_⊛` as a polynomial in `(X, Y, ħ)`, computed by the series
/// route and by pure-exponential collapse. The two must agree exactly.
pub fn exp_test_bracket(h: &PolySymbol) -> Result<PolySymbol> {
    let shape = full_shape_of(h)?;
    let target = shape.with_hbar();
    let hbar = PolySymbol::var(target, Var::Hbar)?;

    let mut series = PolySymbol::zero(target);
    let mut j = 0;
    while 2 * j + 1 <= h.degree_phase() {
        series = &series + &(&bracket_term_exp(h, j)?.embed(target)? * &hbar.pow(2 * j));
        j += 1;
    }

    let hp = ExpPolySymbol::polynomial(h.embed(shape)?);
    let t = ExpPolySymbol::t_y(shape.dim);
    let t_star = ExpPolySymbol::t_y_star(shape.dim);
    let th = pure_exp_collapse(&hp, Side::Left, &t)?;
    let ht = pure_exp_collapse(&hp, Side::Right, &t)?;
    let diff = th.prefactor.checked_sub(&ht.prefactor)?;
    let unphased = ExpPolySymbol { prefactor: diff, phase: th.phase }.mul(&t_star)?;
    debug_assert_eq!(unphased.phase, 0);
    let collapse = unphased.prefactor.divide_by_hbar()?.scale(&imag_unit());

    if series != collapse {
        return Err(MoyalError::Invariant(format!(
            "exponential test bracket: series route {series} differs from collapse route {collapse}"
        )));
    }
    Ok(series)
}

/// Outcome of comparing `{T_Y, H}_⊛` with its order-`m` truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Equal,
    /// `T_Y^*{T_Y,H}_{order}` is a nonzero homogeneous polynomial in `Y`;
    /// `j` is the smallest failing index with `order = 2j+1`.
    Witness { order: u32, j: u32, poly: PolySymbol },
}

/// Decide whether the Moyal bracket against the exponential test family
/// equals its order-`m` truncation, which holds exactly when `deg H ≤ 2m+2`.
pub fn gvh_certificate(h: &PolySymbol, m: u32) -> Result<Certificate> {
    full_shape_of(h)?;
    let mut j = m + 1;
    while 2 * j + 1 <= h.degree_phase() {
        let poly = bracket_term_exp(h, j)?;
        if !poly.is_zero() {
            return Ok(Certificate::Witness { order: 2 * j + 1, j, poly });
        }
        j += 1;
    }
    Ok(Certificate::Equal)
}

/// The §3 computation for a Hamiltonian `H`.
#[derive(Clone, Debug)]
pub struct MpcReport {
    /// `C(X, Y) = ((Y·∇H)·T_Y) ⊛ T_Y^*`, in `(X, Y, ħ)`.
    pub lhs_closed_form: PolySymbol,
    /// The literal ordering `((Y·∇H)·T_Y^*) ⊛ T_Y`, for comparison.
    pub literal_ordering_lhs: PolySymbol,
    /// `C(X, Y)|_{ħ=1} − (H(X+Y) − H(X))`.
    pub taylor_defect: PolySymbol,
    pub c0: PolySymbol,
    pub c1: PolySymbol,
    pub c2: PolySymbol,
    /// `c0 = Y·∇H`, `c1 = ½(Y·∇)²H`, `c2 = ⅛(Y·∇)³H`.
    pub coefficient_checks: [bool; 3],
    /// `c2` minus the printed pattern with `∂_η³H` read literally (it vanishes on `H(X)`).
    pub printed_c2_delta: Option<PolySymbol>,
    /// `c2` minus the printed pattern with `∂_η³H` read as `∂_ξ³H`.
    pub printed_c2_delta_xi_reading: Option<PolySymbol>,
}

fn y_grad_power(h: &PolySymbol, n: u32) -> Result<PolySymbol> {
    let mut out = h.clone();
    for _ in 0..n {
        out = out.directional_derivative()?;
    }
    Ok(out)
}

pub fn mpc_identity_check(h: &PolySymbol) -> Result<MpcReport> {
    let shape = full_shape_of(h)?;
    let d = shape.dim;
    let hf = h.embed(shape)?;
    let g = hf.directional_derivative()?;

    let e = ExpPolySymbol::new(g.clone(), -1)?;
    let lhs = pure_exp_collapse(&e, Side::Right, &ExpPolySymbol::t_y_star(d))?;
    let literal = pure_exp_collapse(&ExpPolySymbol::new(g.clone(), 1)?, Side::Right, &ExpPolySymbol::t_y(d))?;
    debug_assert_eq!(lhs.phase, 0);

    let at_one = lhs.prefactor.eval_hbar(&cint(1))?;
    let shift: Vec<PolySymbol> = (0..d)
        .map(|k| PolySymbol::var(shape, Var::Y(k)))
        .chain((0..d).map(|k| PolySymbol::var(shape, Var::Eta(k))))
        .collect::<Result<_>>()?;
    let taylor = &hf.translate(&shift)? - &hf;
    let defect = &at_one - &taylor;

    let c0 = at_one.test_point_part(1);
    let c1 = at_one.test_point_part(2);
    let c2 = at_one.test_point_part(3);
    let checks = [
        c0 == y_grad_power(&hf, 1)?,
        c1 == y_grad_power(&hf, 2)?.scale(&crate::scalar::crat(1, 2)),
        c2 == y_grad_power(&hf, 3)?.scale(&crate::scalar::crat(1, 8)),
    ];

    let (delta, delta_xi) = if d == 1 {
        let y = PolySymbol::var(shape, Var::Y(0))?;
        let eta = PolySymbol::var(shape, Var::Eta(0))?;
        let dx = |p: &PolySymbol, a: u32, b: u32| p.partial_phase(&[a], &[b]);
        let t1 = &y.pow(3) * &dx(&hf, 3, 0)?;
        let t2 = &(&y.pow(2) * &eta) * &dx(&hf, 2, 1)?;
        let t3 = &(&y * &eta.pow(2)) * &dx(&hf, 1, 2)?;
        let common = &(&t1 - &t2) - &t3;
        let eighth = crate::scalar::crat(1, 8);
        // ∂_η of a function of X alone is zero.
        let literal_pattern = common.scale(&eighth);
        let xi_pattern = (&common + &(&eta.pow(3) * &dx(&hf, 0, 3)?)).scale(&eighth);
        (Some(&c2 - &literal_pattern), Some(&c2 - &xi_pattern))
    } else {
        (None, None)
    };

    Ok(MpcReport {
        lhs_closed_form: lhs.prefactor,
        literal_ordering_lhs: literal.prefactor,
        taylor_defect: defect,
        c0,
        c1,
        c2,
        coefficient_checks: checks,
        printed_c2_delta: delta,
        printed_c2_delta_xi_reading: delta_xi,
    })
}
