//! Exact Moyal products and brackets of polynomial symbols.
//!
//! For polynomials the semiclassical expansion `A⊛B = Σ_j ħ^j C_j(A,B)`
//! terminates at `j = min(deg A, deg B)`, so everything here is exact in
//! `(X, ħ)`.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{MoyalError, Result};
use crate::poly::{MultiIndex, PolySymbol};
use crate::scalar::{creal, i_pow, imag_unit, ComplexRational, Rational};
use crate::series::HbarSeries;

/// One summand of `C_j`: `coef · (∂_x^{left_x} ∂_ξ^{left_xi} A) · (∂_x^{right_x} ∂_ξ^{right_xi} B)`.
#[derive(Clone, Debug)]
pub struct BidiffTerm {
    pub coef: ComplexRational,
    pub left_x: Vec<u32>,
    pub left_xi: Vec<u32>,
    pub right_x: Vec<u32>,
    pub right_xi: Vec<u32>,
}

/// Expansion of `C_j = 2^{-j} Σ_{|α+β|=j} (−1)^{|β|}/(α!β!) (D_x^β ∂_ξ^α A)(D_x^α ∂_ξ^β B)`
/// with `D = −i∇`, written out with plain partial derivatives.
pub fn bidifferential_terms(dim: usize, j: u32) -> Vec<BidiffTerm> {
    let two_j = Rational::from_integer(BigInt::one() << j);
    MultiIndex::of_degree(2 * dim, j)
        .into_iter()
        .map(|ab| {
            let alpha = ab.entries()[..dim].to_vec();
            let beta = ab.entries()[dim..].to_vec();
            let b_deg: u32 = beta.iter().sum();
            let sign = if b_deg % 2 == 0 { 1 } else { -1 };
            let fact = MultiIndex::new(alpha.clone()).factorial() * MultiIndex::new(beta.clone()).factorial();
            let magnitude = Rational::new(BigInt::from(sign), fact) / two_j.clone();
            // D_x^β D_x^α contributes (−i)^{|α|+|β|} = (−i)^j.
            let coef = creal(magnitude) * i_pow(-(j as i64));
            BidiffTerm {
                coef,
                left_x: beta.clone(),
                left_xi: alpha.clone(),
                right_x: alpha,
                right_xi: beta,
            }
        })
        .collect()
}

fn check_inputs(a: &PolySymbol, b: &PolySymbol) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(MoyalError::ShapeMismatch { left: a.shape(), right: b.shape() });
    }
    if a.shape().hbar {
        return Err(MoyalError::InvalidArgument(
            "star products take symbols without an explicit hbar block; hbar is carried by the series".into(),
        ));
    }
    Ok(())
}

/// The coefficient `C_j(A, B)` of `ħ^j` in `A⊛B`.
pub fn cj_coefficient(a: &PolySymbol, b: &PolySymbol, j: u32) -> Result<PolySymbol> {
    check_inputs(a, b)?;
    let mut out = PolySymbol::zero(a.shape());
    if j > a.degree_phase() || j > b.degree_phase() {
        return Ok(out);
    }
    for t in bidifferential_terms(a.dim(), j) {
        let da = a.partial_phase(&t.left_x, &t.left_xi)?;
        if da.is_zero() {
            continue;
        }
        let db = b.partial_phase(&t.right_x, &t.right_xi)?;
        if db.is_zero() {
            continue;
        }
        out = &out + &(&da * &db).scale(&t.coef);
    }
    Ok(out)
}

/// `A⊛B` as the terminating series `Σ_{j ≤ min(deg A, deg B)} ħ^j C_j(A, B)`.
pub fn moyal_product(a: &PolySymbol, b: &PolySymbol) -> Result<HbarSeries> {
    check_inputs(a, b)?;
    let top = a.degree_phase().min(b.degree_phase());
    let coeffs = (0..=top)
        .map(|j| Ok((j, cj_coefficient(a, b, j)?)))
        .collect::<Result<Vec<_>>>()?;
    HbarSeries::from_coefficients(a.shape(), coeffs)
}

/// Star product of two `ħ`-series, bilinear extension of [`moyal_product`].
pub fn star_series(a: &HbarSeries, b: &HbarSeries) -> Result<HbarSeries> {
    let mut out = HbarSeries::zero(a.shape());
    for (i, p) in a.coefficients() {
        for (k, q) in b.coefficients() {
            out = out.checked_add(&moyal_product(p, q)?.shift(i + k))?;
        }
    }
    Ok(out)
}

/// `i·(C_j(A,B) − C_j(B,A))`; for even `j` the antisymmetrization is computed,
/// required to vanish, and returned as zero.
pub fn bracket_term(a: &PolySymbol, b: &PolySymbol, j: u32) -> Result<PolySymbol> {
    let diff = &cj_coefficient(a, b, j)? - &cj_coefficient(b, a, j)?;
    if j % 2 == 0 {
        if !diff.is_zero() {
            return Err(MoyalError::Invariant(format!(
                "even-order antisymmetrization C_{j}(A,B) - C_{j}(B,A) = {diff} is nonzero"
            )));
        }
        return Ok(PolySymbol::zero(a.shape()));
    }
    Ok(diff.scale(&imag_unit()))
}

/// `{A,B}_⊛ = (i/ħ)(A⊛B − B⊛A) = Σ_{j odd} ħ^{j−1} {A,B}_j`.
pub fn moyal_bracket(a: &PolySymbol, b: &PolySymbol) -> Result<HbarSeries> {
    check_inputs(a, b)?;
    let top = a.degree_phase().min(b.degree_phase());
    let mut coeffs = Vec::new();
    for j in 1..=top {
        let t = bracket_term(a, b, j)?;
        if j % 2 == 1 {
            coeffs.push((j - 1, t));
        }
    }
    HbarSeries::from_coefficients(a.shape(), coeffs)
}

/// `{A,B}_{⊛,m} = {A,B} + ħ²{A,B}_3 + ⋯ + ħ^{2m}{A,B}_{2m+1}`.
pub fn truncated_bracket(a: &PolySymbol, b: &PolySymbol, m: u32) -> Result<HbarSeries> {
    check_inputs(a, b)?;
    let coeffs = (0..=m)
        .map(|k| Ok((2 * k, bracket_term(a, b, 2 * k + 1)?)))
        .collect::<Result<Vec<_>>>()?;
    HbarSeries::from_coefficients(a.shape(), coeffs)
}

/// `{A,H}_⊛ − {A,H}_{⊛,m}`: the part of the Moyal bracket beyond order `2m+1`.
pub fn bracket_discrepancy(a: &PolySymbol, h: &PolySymbol, m: u32) -> Result<HbarSeries> {
    moyal_bracket(a, h)?.checked_sub(&truncated_bracket(a, h, m)?)
}

/// `C_j(B, A) − (−1)^j C_j(A, B)`, which must vanish.
pub fn swap_parity_defect(a: &PolySymbol, b: &PolySymbol, j: u32) -> Result<PolySymbol> {
    let ab = cj_coefficient(a, b, j)?;
    let ba = cj_coefficient(b, a, j)?;
    let sign = if j % 2 == 0 { ComplexRational::one() } else { -ComplexRational::one() };
    Ok(&ba - &ab.scale(&sign))
}
