//! Finite power series in `ħ` with polynomial coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use crate::error::{MoyalError, Result};
use crate::poly::{MultiIndex, PolySymbol, Shape, Var};
use crate::scalar::ComplexRational;

/// `Σ_j ħ^j C_j` with finitely many nonzero `C_j`. Coefficients share one
/// shape, which never carries the `ħ` block itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HbarSeries {
    shape: Shape,
    coeffs: BTreeMap<u32, PolySymbol>,
}

impl HbarSeries {
    pub fn zero(shape: Shape) -> Self {
        assert!(!shape.hbar, "series coefficients cannot carry an hbar block");
        HbarSeries { shape, coeffs: BTreeMap::new() }
    }

    pub fn from_poly(p: PolySymbol) -> Self {
        let mut s = Self::zero(p.shape());
        s.set(0, p);
        s
    }

    pub fn from_coefficients<I: IntoIterator<Item = (u32, PolySymbol)>>(shape: Shape, iter: I) -> Result<Self> {
        let mut s = Self::zero(shape);
        for (j, p) in iter {
            if p.shape() != shape {
                return Err(MoyalError::ShapeMismatch { left: p.shape(), right: shape });
            }
            s.accumulate(j, p);
        }
        Ok(s)
    }

    fn set(&mut self, j: u32, p: PolySymbol) {
        if p.is_zero() {
            self.coeffs.remove(&j);
        } else {
            self.coeffs.insert(j, p);
        }
    }

    fn accumulate(&mut self, j: u32, p: PolySymbol) {
        let next = match self.coeffs.get(&j) {
            Some(q) => q + &p,
            None => p,
        };
        self.set(j, next);
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn coefficient(&self, j: u32) -> PolySymbol {
        self.coeffs.get(&j).cloned().unwrap_or_else(|| PolySymbol::zero(self.shape))
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (u32, &PolySymbol)> {
        self.coeffs.iter().map(|(j, p)| (*j, p))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest power of `ħ` with a nonzero coefficient.
    pub fn order(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Lowest power of `ħ` with a nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.coeffs.keys().next().copied()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.shape == other.shape {
            Ok(())
        } else {
            Err(MoyalError::ShapeMismatch { left: self.shape, right: other.shape })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (j, p) in &other.coeffs {
            out.accumulate(*j, p.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (j, p) in &other.coeffs {
            out.accumulate(*j, -p);
        }
        Ok(out)
    }

    /// Cauchy product of the two series (pointwise product of coefficients).
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.shape);
        for (i, p) in &self.coeffs {
            for (j, q) in &other.coeffs {
                out.accumulate(i + j, p * q);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &ComplexRational) -> Self {
        let mut out = Self::zero(self.shape);
        for (j, p) in &self.coeffs {
            out.set(*j, p.scale(c));
        }
        out
    }

    /// Multiply by `ħ^k`.
    pub fn shift(&self, k: u32) -> Self {
        HbarSeries {
            shape: self.shape,
            coeffs: self.coeffs.iter().map(|(j, p)| (j + k, p.clone())).collect(),
        }
    }

    /// Divide by `ħ^k`; fails if a coefficient below `ħ^k` is nonzero.
    pub fn unshift(&self, k: u32) -> Result<Self> {
        if self.valuation().is_some_and(|v| v < k) {
            return Err(MoyalError::InvalidArgument(format!("series is not divisible by hbar^{k}")));
        }
        Ok(HbarSeries {
            shape: self.shape,
            coeffs: self.coeffs.iter().map(|(j, p)| (j - k, p.clone())).collect(),
        })
    }

    /// Keep only the terms with `ħ`-power at most `max`.
    pub fn truncate(&self, max: u32) -> Self {
        HbarSeries {
            shape: self.shape,
            coeffs: self.coeffs.range(..=max).map(|(j, p)| (*j, p.clone())).collect(),
        }
    }

    /// Collapse at a numeric `ħ`.
    pub fn evaluate_at(&self, hbar: &ComplexRational) -> PolySymbol {
        let mut out = PolySymbol::zero(self.shape);
        let mut pw = ComplexRational::one();
        let mut power = 0;
        for (j, p) in &self.coeffs {
            while power < *j {
                pw *= hbar.clone();
                power += 1;
            }
            out = &out + &p.scale(&pw);
        }
        out
    }

    /// The same object as a polynomial carrying an `ħ` variable.
    pub fn to_poly(&self) -> PolySymbol {
        let target = self.shape.with_hbar();
        let h = target.index(Var::Hbar).unwrap();
        let mut terms = Vec::new();
        for (j, p) in &self.coeffs {
            for (e, c) in p.terms() {
                let mut v = e.entries().to_vec();
                v.insert(h, *j);
                terms.push((MultiIndex::new(v), c.clone()));
            }
        }
        PolySymbol::from_terms(target, terms)
    }

    /// Inverse of [`HbarSeries::to_poly`].
    pub fn from_hbar_poly(p: &PolySymbol) -> Result<Self> {
        let shape = p.shape();
        if !shape.hbar {
            return Ok(Self::from_poly(p.clone()));
        }
        let mut out = Self::zero(shape.without_hbar());
        for j in 0..=p.degree_hbar() {
            out.set(j, p.hbar_coefficient(j)?);
        }
        Ok(out)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.values().all(PolySymbol::is_real)
    }

    /// True when only even powers of `ħ` occur.
    pub fn is_even(&self) -> bool {
        self.coeffs.keys().all(|j| j % 2 == 0)
    }
}

impl fmt::Display for HbarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (n, (j, p)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            match j {
                0 => write!(f, "({p})")?,
                1 => write!(f, "hbar*({p})")?,
                _ => write!(f, "hbar^{j}*({p})")?,
            }
        }
        Ok(())
    }
}
