//! Sparse multivariate polynomials over the complex rationals in phase-space
//! variables `X = (x, ξ)`, optionally test-point variables `Y = (y, η)` and
//! the formal parameter `ħ`.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors and zero coefficients
//! are never stored, so two polynomials are equal iff they are structurally
//! equal.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{MoyalError, Result};
use crate::scalar::{creal, factorial, format_rational, i_pow, ComplexRational, DisplayComplex, Rational};

/// Exponent vector over the active variables of a [`Shape`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zeros(len: usize) -> Self {
        MultiIndex(vec![0; len])
    }

    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Product of the factorials of the entries (`α!` in multi-index notation).
    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&e| factorial(e)).product()
    }

    /// All multi-indices of length `len` and total degree exactly `degree`,
    /// in lexicographically decreasing order.
    pub fn of_degree(len: usize, degree: u32) -> Vec<MultiIndex> {
        fn rec(len: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == len {
                prefix.push(degree);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for first in (0..=degree).rev() {
                prefix.push(first);
                rec(len, degree - first, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if len == 0 {
            if degree == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(len, degree, &mut Vec::with_capacity(len), &mut out);
        out
    }
}

/// A single variable of phase space, test-point space, or `ħ`. Axes are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X(usize),
    Xi(usize),
    Y(usize),
    Eta(usize),
    Hbar,
}

impl Var {
    pub fn is_phase(self) -> bool {
        matches!(self, Var::X(_) | Var::Xi(_))
    }

    pub fn is_test_point(self) -> bool {
        matches!(self, Var::Y(_) | Var::Eta(_))
    }

    /// Name used in printed polynomials and accepted by the expression parser.
    pub fn name(self, dim: usize) -> String {
        let suffix = |k: usize| if dim == 1 { String::new() } else { (k + 1).to_string() };
        match self {
            Var::X(k) => format!("x{}", suffix(k)),
            Var::Xi(k) => format!("xi{}", suffix(k)),
            Var::Y(k) => format!("y{}", suffix(k)),
            Var::Eta(k) => format!("eta{}", suffix(k)),
            Var::Hbar => "hbar".to_string(),
        }
    }
}

/// Which variable blocks a polynomial carries. The phase-space block `X` is
/// always present; `Y` and `ħ` are optional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    pub dim: usize,
    pub test_point: bool,
    pub hbar: bool,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(d={}, X", self.dim)?;
        if self.test_point {
            write!(f, ", Y")?;
        }
        if self.hbar {
            write!(f, ", hbar")?;
        }
        write!(f, ")")
    }
}

impl Shape {
    pub fn phase(dim: usize) -> Self {
        Shape { dim, test_point: false, hbar: false }
    }

    /// Phase space plus test point.
    pub fn with_y(dim: usize) -> Self {
        Shape { dim, test_point: true, hbar: false }
    }

    /// Phase space plus test point plus `ħ`.
    pub fn full(dim: usize) -> Self {
        Shape { dim, test_point: true, hbar: true }
    }

    pub fn with_test_point(mut self) -> Self {
        self.test_point = true;
        self
    }

    pub fn with_hbar(mut self) -> Self {
        self.hbar = true;
        self
    }

    pub fn without_hbar(mut self) -> Self {
        self.hbar = false;
        self
    }

    pub fn nvars(&self) -> usize {
        2 * self.dim + if self.test_point { 2 * self.dim } else { 0 } + usize::from(self.hbar)
    }

    pub fn index(&self, v: Var) -> Option<usize> {
        let d = self.dim;
        match v {
            Var::X(k) if k < d => Some(k),
            Var::Xi(k) if k < d => Some(d + k),
            Var::Y(k) if k < d && self.test_point => Some(2 * d + k),
            Var::Eta(k) if k < d && self.test_point => Some(3 * d + k),
            Var::Hbar if self.hbar => Some(self.nvars() - 1),
            _ => None,
        }
    }

    pub fn var_at(&self, i: usize) -> Var {
        let d = self.dim;
        if i < d {
            Var::X(i)
        } else if i < 2 * d {
            Var::Xi(i - d)
        } else if self.test_point && i < 3 * d {
            Var::Y(i - 2 * d)
        } else if self.test_point && i < 4 * d {
            Var::Eta(i - 3 * d)
        } else {
            Var::Hbar
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.nvars()).map(|i| self.var_at(i))
    }

    pub fn contains(&self, other: &Shape) -> bool {
        self.dim == other.dim
            && (self.test_point || !other.test_point)
            && (self.hbar || !other.hbar)
    }

    pub fn union(&self, other: &Shape) -> Result<Shape> {
        if self.dim != other.dim {
            return Err(MoyalError::ShapeMismatch { left: *self, right: *other });
        }
        Ok(Shape {
            dim: self.dim,
            test_point: self.test_point || other.test_point,
            hbar: self.hbar || other.hbar,
        })
    }

    fn require(&self, v: Var) -> Result<usize> {
        self.index(v)
            .ok_or_else(|| MoyalError::InactiveVariable(format!("{v:?}"), *self))
    }
}

/// A point `X = (x, ξ)` of phase space (coordinates `x` first, then `ξ`).
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint<T> {
    coords: Vec<T>,
}

impl<T: Clone> PhasePoint<T> {
    pub fn new(x: Vec<T>, xi: Vec<T>) -> Result<Self> {
        if x.len() != xi.len() || x.is_empty() {
            return Err(MoyalError::InvalidArgument(format!(
                "phase point needs equal, nonzero block lengths (got {} and {})",
                x.len(),
                xi.len()
            )));
        }
        let mut coords = x;
        coords.extend(xi);
        Ok(PhasePoint { coords })
    }

    pub fn from_coords(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() || coords.len() % 2 != 0 {
            return Err(MoyalError::InvalidArgument(format!(
                "phase point needs an even number of coordinates, got {}",
                coords.len()
            )));
        }
        Ok(PhasePoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn x(&self) -> &[T] {
        &self.coords[..self.dim()]
    }

    pub fn xi(&self) -> &[T] {
        &self.coords[self.dim()..]
    }
}

/// Symplectic form `σ(Y, X) = η·x − y·ξ`, i.e. the linear form `L_Y(X)`.
pub fn symplectic_form<T>(y: &PhasePoint<T>, x: &PhasePoint<T>) -> Result<T>
where
    T: Clone + Zero + Mul<Output = T> + Sub<Output = T>,
{
    if y.dim() != x.dim() {
        return Err(MoyalError::InvalidArgument(format!(
            "symplectic form of points with dimensions {} and {}",
            y.dim(),
            x.dim()
        )));
    }
    let mut acc = T::zero();
    for k in 0..x.dim() {
        acc = acc + y.xi()[k].clone() * x.x()[k].clone() - y.x()[k].clone() * x.xi()[k].clone();
    }
    Ok(acc)
}

/// Values for every active block, used by [`PolySymbol::evaluate`].
#[derive(Clone, Debug, Default)]
pub struct Valuation {
    /// `x` then `ξ`, length `2d`.
    pub phase: Vec<ComplexRational>,
    /// `y` then `η`, length `2d`.
    pub test_point: Option<Vec<ComplexRational>>,
    pub hbar: Option<ComplexRational>,
}

impl Valuation {
    pub fn at(point: &PhasePoint<Rational>) -> Self {
        Valuation {
            phase: point.coords().iter().cloned().map(creal).collect(),
            ..Default::default()
        }
    }

    pub fn with_test_point(mut self, y: &PhasePoint<Rational>) -> Self {
        self.test_point = Some(y.coords().iter().cloned().map(creal).collect());
        self
    }

    pub fn with_hbar(mut self, hbar: ComplexRational) -> Self {
        self.hbar = Some(hbar);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolySymbol {
    shape: Shape,
    terms: BTreeMap<MultiIndex, ComplexRational>,
}

impl PolySymbol {
    pub fn zero(shape: Shape) -> Self {
        PolySymbol { shape, terms: BTreeMap::new() }
    }

    pub fn constant(shape: Shape, c: ComplexRational) -> Self {
        let mut p = Self::zero(shape);
        p.add_term(MultiIndex::zeros(shape.nvars()), c);
        p
    }

    pub fn one(shape: Shape) -> Self {
        Self::constant(shape, ComplexRational::one())
    }

    pub fn var(shape: Shape, v: Var) -> Result<Self> {
        let idx = shape.require(v)?;
        let mut e = vec![0; shape.nvars()];
        e[idx] = 1;
        Ok(Self::monomial(shape, MultiIndex(e), ComplexRational::one()))
    }

    pub fn monomial(shape: Shape, exponents: MultiIndex, c: ComplexRational) -> Self {
        assert_eq!(exponents.len(), shape.nvars(), "exponent vector does not match {shape}");
        let mut p = Self::zero(shape);
        p.add_term(exponents, c);
        p
    }

    /// Monomial from `(variable, power)` pairs.
    pub fn monomial_in(shape: Shape, powers: &[(Var, u32)], c: ComplexRational) -> Result<Self> {
        let mut e = vec![0; shape.nvars()];
        for &(v, k) in powers {
            e[shape.require(v)?] += k;
        }
        Ok(Self::monomial(shape, MultiIndex(e), c))
    }

    pub fn from_terms<I>(shape: Shape, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, ComplexRational)>,
    {
        let mut p = Self::zero(shape);
        for (e, c) in terms {
            assert_eq!(e.len(), shape.nvars(), "exponent vector does not match {shape}");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: MultiIndex, c: ComplexRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &ComplexRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &MultiIndex) -> ComplexRational {
        self.terms.get(e).cloned().unwrap_or_else(ComplexRational::zero)
    }

    pub fn constant_term(&self) -> ComplexRational {
        self.coefficient(&MultiIndex::zeros(self.shape.nvars()))
    }

    /// True when every coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.shape == other.shape {
            Ok(())
        } else {
            Err(MoyalError::ShapeMismatch { left: self.shape, right: other.shape })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = Self::zero(self.shape);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.0.iter().zip(&eb.0).map(|(a, b)| a + b).collect();
                out.add_term(MultiIndex(e), ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &ComplexRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.shape);
        }
        PolySymbol {
            shape: self.shape,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        PolySymbol {
            shape: self.shape,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v.conj())).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.shape);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative in one variable.
    pub fn partial(&self, v: Var) -> Result<Self> {
        self.partial_n(v, 1)
    }

    /// `n`-fold partial derivative in one variable.
    pub fn partial_n(&self, v: Var, n: u32) -> Result<Self> {
        let idx = self.shape.require(v)?;
        if n == 0 {
            return Ok(self.clone());
        }
        let mut out = Self::zero(self.shape);
        for (e, c) in &self.terms {
            let k = e.0[idx];
            if k < n {
                continue;
            }
            let falling: u64 = ((k - n + 1)..=k).map(u64::from).product();
            let mut e2 = e.0.clone();
            e2[idx] = k - n;
            out.add_term(MultiIndex(e2), c.clone() * creal(Rational::from_integer(falling.into())));
        }
        Ok(out)
    }

    /// Mixed phase-space derivative `∂_x^α ∂_ξ^β`.
    pub fn partial_phase(&self, alpha: &[u32], beta: &[u32]) -> Result<Self> {
        let d = self.dim();
        if alpha.len() != d || beta.len() != d {
            return Err(MoyalError::InvalidArgument(format!(
                "derivative multi-indices must have length {d}"
            )));
        }
        let mut out = self.clone();
        for k in 0..d {
            out = out.partial_n(Var::X(k), alpha[k])?;
            out = out.partial_n(Var::Xi(k), beta[k])?;
            if out.is_zero() {
                break;
            }
        }
        Ok(out)
    }

    pub fn evaluate(&self, at: &Valuation) -> Result<ComplexRational> {
        let d = self.dim();
        if at.phase.len() != 2 * d {
            return Err(MoyalError::MissingBlock("phase-space"));
        }
        let mut values: Vec<ComplexRational> = at.phase.clone();
        if self.shape.test_point {
            let y = at.test_point.as_ref().ok_or(MoyalError::MissingBlock("test-point"))?;
            if y.len() != 2 * d {
                return Err(MoyalError::MissingBlock("test-point"));
            }
            values.extend(y.iter().cloned());
        }
        if self.shape.hbar {
            values.push(at.hbar.clone().ok_or(MoyalError::MissingBlock("hbar"))?);
        }
        // Per-variable power tables, filled lazily up to the largest exponent.
        let mut powers: Vec<Vec<ComplexRational>> = values.iter().map(|_| vec![ComplexRational::one()]).collect();
        let mut acc = ComplexRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().clone() * values[i].clone();
                    powers[i].push(next);
                }
                t *= powers[i][k as usize].clone();
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Re-express in a larger shape (same dimension). Blocks absent from
    /// `self` enter with exponent zero.
    pub fn embed(&self, target: Shape) -> Result<Self> {
        if !target.contains(&self.shape) {
            return Err(MoyalError::ShapeMismatch { left: self.shape, right: target });
        }
        if target == self.shape {
            return Ok(self.clone());
        }
        let map: Vec<usize> = self.shape.vars().map(|v| target.index(v).unwrap()).collect();
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; target.nvars()];
            for (i, &k) in e.0.iter().enumerate() {
                e2[map[i]] = k;
            }
            out.add_term(MultiIndex(e2), c.clone());
        }
        Ok(out)
    }

    /// Drop a block in which the polynomial has degree zero.
    pub fn restrict(&self, target: Shape) -> Result<Self> {
        if !self.shape.contains(&target) {
            return Err(MoyalError::ShapeMismatch { left: self.shape, right: target });
        }
        let keep: Vec<Option<usize>> = self.shape.vars().map(|v| target.index(v)).collect();
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; target.nvars()];
            for (i, &k) in e.0.iter().enumerate() {
                match keep[i] {
                    Some(j) => e2[j] = k,
                    None if k > 0 => {
                        return Err(MoyalError::InvalidArgument(format!(
                            "cannot drop variable {} that the polynomial depends on",
                            self.shape.var_at(i).name(self.dim())
                        )))
                    }
                    None => {}
                }
            }
            out.add_term(MultiIndex(e2), c.clone());
        }
        Ok(out)
    }

    /// Substitute polynomials for variables. Every substituted value must
    /// have the output shape `target`, which must contain `self`'s remaining
    /// variables.
    pub fn substitute(&self, subs: &[(Var, PolySymbol)], target: Shape) -> Result<Self> {
        for (_, s) in subs {
            if s.shape != target {
                return Err(MoyalError::ShapeMismatch { left: s.shape, right: target });
            }
        }
        let images: Vec<PolySymbol> = self
            .shape
            .vars()
            .map(|v| match subs.iter().find(|(w, _)| *w == v) {
                Some((_, s)) => Ok(s.clone()),
                None => PolySymbol::var(target, v),
            })
            .collect::<Result<_>>()?;
        let mut cache: Vec<Vec<PolySymbol>> = images.iter().map(|p| vec![PolySymbol::one(target), p.clone()]).collect();
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut t = PolySymbol::constant(target, c.clone());
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while cache[i].len() <= k as usize {
                    let next = &cache[i][cache[i].len() - 1] * &images[i];
                    cache[i].push(next);
                }
                t = &t * &cache[i][k as usize];
            }
            for (e2, c2) in t.terms {
                out.add_term(e2, c2);
            }
        }
        Ok(out)
    }

    /// `P(X + shift)` for a shift given as `2d` polynomials (`x` components
    /// first), each affine in `X` and in `Y`; `ħ` counts as a parameter, so
    /// `ħY/2` is an admissible shift. The result lives in the union of all
    /// shapes.
    pub fn translate(&self, shift: &[PolySymbol]) -> Result<Self> {
        let d = self.dim();
        if shift.len() != 2 * d {
            return Err(MoyalError::InvalidArgument(format!(
                "translation needs {} components, got {}",
                2 * d,
                shift.len()
            )));
        }
        let mut target = self.shape;
        for (index, s) in shift.iter().enumerate() {
            target = target.union(&s.shape)?;
            let degree = s.degree_phase().max(s.degree_test_point());
            if degree > 1 {
                return Err(MoyalError::NonlinearShift { index, degree });
            }
        }
        let base = self.embed(target)?;
        let subs: Vec<(Var, PolySymbol)> = (0..2 * d)
            .map(|i| {
                let v = target.var_at(i);
                Ok((v, &PolySymbol::var(target, v)? + &shift[i].embed(target)?))
            })
            .collect::<Result<_>>()?;
        base.substitute(&subs, target)
    }

    /// Set `ħ` to a value, dropping the `ħ` block.
    pub fn eval_hbar(&self, value: &ComplexRational) -> Result<Self> {
        if !self.shape.hbar {
            return Ok(self.clone());
        }
        let target = self.shape.without_hbar();
        let h = self.shape.nvars() - 1;
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let k = e.0[h];
            let mut pw = ComplexRational::one();
            for _ in 0..k {
                pw *= value.clone();
            }
            out.add_term(MultiIndex(e.0[..h].to_vec()), c.clone() * pw);
        }
        Ok(out)
    }

    fn degree_over(&self, pred: impl Fn(Var) -> bool) -> Option<u32> {
        let mask: Vec<bool> = self.shape.vars().map(pred).collect();
        self.terms
            .keys()
            .map(|e| e.0.iter().zip(&mask).filter(|(_, m)| **m).map(|(k, _)| *k).sum())
            .max()
    }

    /// Total degree over all active variables; zero polynomial has degree 0.
    pub fn total_degree(&self) -> u32 {
        self.degree_over(|_| true).unwrap_or(0)
    }

    /// Degree in the phase-space variables `(x, ξ)` only.
    pub fn degree_phase(&self) -> u32 {
        self.degree_over(Var::is_phase).unwrap_or(0)
    }

    pub fn degree_test_point(&self) -> u32 {
        self.degree_over(Var::is_test_point).unwrap_or(0)
    }

    pub fn degree_hbar(&self) -> u32 {
        self.degree_over(|v| v == Var::Hbar).unwrap_or(0)
    }

    /// Terms whose total degree in the test-point block equals `degree`.
    pub fn test_point_part(&self, degree: u32) -> Self {
        let mask: Vec<bool> = self.shape.vars().map(Var::is_test_point).collect();
        PolySymbol {
            shape: self.shape,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.0.iter().zip(&mask).filter(|(_, m)| **m).map(|(k, _)| *k).sum::<u32>() == degree)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// True when the polynomial is zero or every term has test-point degree `degree`.
    pub fn is_homogeneous_in_test_point(&self, degree: u32) -> bool {
        self.test_point_part(degree) == *self
    }

    /// Terms with the given power of `ħ`, with the `ħ` exponent removed.
    pub fn hbar_coefficient(&self, power: u32) -> Result<Self> {
        if !self.shape.hbar {
            return Ok(if power == 0 { self.clone() } else { Self::zero(self.shape) });
        }
        let h = self.shape.nvars() - 1;
        let mut out = Self::zero(self.shape.without_hbar());
        for (e, c) in &self.terms {
            if e.0[h] == power {
                out.add_term(MultiIndex(e.0[..h].to_vec()), c.clone());
            }
        }
        Ok(out)
    }

    /// Exact division by `ħ`; fails when some term carries no factor of `ħ`.
    pub fn divide_by_hbar(&self) -> Result<Self> {
        if !self.shape.hbar {
            return Err(MoyalError::InactiveVariable("hbar".into(), self.shape));
        }
        let h = self.shape.nvars() - 1;
        let mut out = Self::zero(self.shape);
        for (e, c) in &self.terms {
            if e.0[h] == 0 {
                return Err(MoyalError::InvalidArgument("polynomial is not divisible by hbar".into()));
            }
            let mut e2 = e.0.clone();
            e2[h] -= 1;
            out.add_term(MultiIndex(e2), c.clone());
        }
        Ok(out)
    }

    /// Directional derivative `Y·∇_X P = Σ_k (y_k ∂_{x_k} + η_k ∂_{ξ_k}) P`.
    /// Requires the test-point block.
    pub fn directional_derivative(&self) -> Result<Self> {
        let d = self.dim();
        let mut out = Self::zero(self.shape);
        for k in 0..d {
            let yk = PolySymbol::var(self.shape, Var::Y(k))?;
            let ek = PolySymbol::var(self.shape, Var::Eta(k))?;
            out = &out + &(&yk * &self.partial(Var::X(k))?);
            out = &out + &(&ek * &self.partial(Var::Xi(k))?);
        }
        Ok(out)
    }
}

impl fmt::Display for PolySymbol {
    /// Terms by decreasing total degree, e.g. `9*x^2*xi^2 - 3/2*hbar^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<(&MultiIndex, &ComplexRational)> = self.terms.iter().collect();
        terms.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then(b.0.cmp(a.0)));
        for (n, (e, c)) in terms.into_iter().enumerate() {
            let vars: Vec<String> = e
                .0
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, &k)| {
                    let name = self.shape.var_at(i).name(self.dim());
                    if k == 1 { name } else { format!("{name}^{k}") }
                })
                .collect();
            let (negative, mag) = if c.im.is_zero() && c.re < Rational::zero() {
                (true, -c.clone())
            } else {
                (false, c.clone())
            };
            if n == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let coeff = if mag.im.is_zero() {
                format_rational(&mag.re)
            } else {
                DisplayComplex(&mag).to_string()
            };
            match (vars.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{coeff}")?,
                (false, true) => write!(f, "{}", vars.join("*"))?,
                (false, false) => write!(f, "{coeff}*{}", vars.join("*"))?,
            }
        }
        Ok(())
    }
}

macro_rules! panicking_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr for &PolySymbol {
            type Output = PolySymbol;
            /// Panics on shape mismatch; use the `checked_*` form for fallible use.
            fn $method(self, rhs: &PolySymbol) -> PolySymbol {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr for PolySymbol {
            type Output = PolySymbol;
            fn $method(self, rhs: PolySymbol) -> PolySymbol {
                (&self).$method(&rhs)
            }
        }
    };
}

panicking_op!(Add, add, checked_add);
panicking_op!(Sub, sub, checked_sub);
panicking_op!(Mul, mul, checked_mul);

impl Neg for &PolySymbol {
    type Output = PolySymbol;
    fn neg(self) -> PolySymbol {
        self.scale(&-ComplexRational::one())
    }
}

impl Neg for PolySymbol {
    type Output = PolySymbol;
    fn neg(self) -> PolySymbol {
        -&self
    }
}

/// Poisson bracket `{A,B} = Σ_k ∂_{ξ_k}A·∂_{x_k}B − ∂_{x_k}A·∂_{ξ_k}B`.
pub fn poisson_bracket(a: &PolySymbol, b: &PolySymbol) -> Result<PolySymbol> {
    a.check_same(b)?;
    let mut out = PolySymbol::zero(a.shape);
    for k in 0..a.dim() {
        let t1 = a.partial(Var::Xi(k))?.checked_mul(&b.partial(Var::X(k))?)?;
        let t2 = a.partial(Var::X(k))?.checked_mul(&b.partial(Var::Xi(k))?)?;
        out = &(&out + &t1) - &t2;
    }
    Ok(out)
}

/// `L_Y(X) = η·x − y·ξ` for a fixed rational point `Y`, as a polynomial in `X`.
pub fn linear_form(y: &PhasePoint<Rational>) -> PolySymbol {
    let shape = Shape::phase(y.dim());
    let mut out = PolySymbol::zero(shape);
    for k in 0..y.dim() {
        let xk = PolySymbol::var(shape, Var::X(k)).unwrap();
        let xik = PolySymbol::var(shape, Var::Xi(k)).unwrap();
        out = &out + &xk.scale(&creal(y.xi()[k].clone()));
        out = &out - &xik.scale(&creal(y.x()[k].clone()));
    }
    out
}

/// `L_Y(X) = η·x − y·ξ` with `Y` symbolic, in the given shape (which must
/// carry the test-point block).
pub fn linear_form_symbolic(shape: Shape) -> Result<PolySymbol> {
    let mut out = PolySymbol::zero(shape);
    for k in 0..shape.dim {
        let ex = &PolySymbol::var(shape, Var::Eta(k))? * &PolySymbol::var(shape, Var::X(k))?;
        let yxi = &PolySymbol::var(shape, Var::Y(k))? * &PolySymbol::var(shape, Var::Xi(k))?;
        out = &(&out + &ex) - &yxi;
    }
    Ok(out)
}

/// `i^k` times the polynomial.
pub fn times_i_pow(p: &PolySymbol, k: i64) -> PolySymbol {
    p.scale(&i_pow(k))
}
