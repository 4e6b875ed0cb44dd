//! Random polynomial generators shared by the unit tests.

use proptest::prelude::*;
use rand::Rng;

use crate::poly::{MultiIndex, PolySymbol, Shape};
use crate::scalar::{rat, ComplexRational};

fn build(shape: Shape, raw: Vec<(Vec<u32>, i64, i64, i64)>, max_deg: u32) -> PolySymbol {
    let terms = raw.into_iter().filter_map(|(e, re, im, den)| {
        let e = MultiIndex::new(e);
        (e.degree() <= max_deg).then(|| (e, ComplexRational::new(rat(re, den), rat(im, den))))
    });
    PolySymbol::from_terms(shape, terms)
}

/// Sparse polynomial on `shape` with at most `n_terms` monomials of degree
/// `≤ max_deg` and small rational coefficients.
pub fn random_poly<R: Rng>(rng: &mut R, shape: Shape, max_deg: u32, n_terms: usize, complex: bool) -> PolySymbol {
    let n = shape.nvars();
    let raw = (0..n_terms)
        .map(|_| {
            let e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=max_deg)).collect();
            let im = if complex { rng.gen_range(-3..=3) } else { 0 };
            (e, rng.gen_range(-5..=5), im, rng.gen_range(1..=3))
        })
        .collect();
    build(shape, raw, max_deg)
}

/// Proptest strategy for real-or-complex phase-space polynomials in `dim` degrees of freedom.
pub fn arb_poly(dim: usize, max_deg: u32) -> impl Strategy<Value = PolySymbol> {
    arb_poly_on(Shape::phase(dim), max_deg)
}

pub fn arb_poly_on(shape: Shape, max_deg: u32) -> impl Strategy<Value = PolySymbol> {
    let n = shape.nvars();
    prop::collection::vec(
        (prop::collection::vec(0..=max_deg, n), -5i64..=5, -2i64..=2, 1i64..=3),
        1..5,
    )
    .prop_map(move |raw| build(shape, raw, max_deg))
}
