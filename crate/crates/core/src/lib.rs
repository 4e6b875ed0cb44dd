//! Exact and numerical Moyal calculus on `R^{2d}`.
//!
//! The [`poly`] and [`star`] modules work with polynomials over exact complex
//! rationals, where the star product terminates. [`gvh`] extends the exact
//! engine to polynomial prefactors times `exp(±i L_Y)`. [`grid`] and [`weyl`]
//! hold the floating-point side: sampled symbols, the twisted-convolution star
//! product, and Weyl quantization of symbols as matrices.

pub mod conventions;
pub mod error;
pub mod poly;
pub mod scalar;
pub mod series;
pub mod star;
pub mod gvh;
pub mod symbol;
pub mod weyl;
pub mod grid;

#[cfg(test)]
pub(crate) mod testing;

pub use error::{MoyalError, Result};
pub use poly::{MultiIndex, PhasePoint, PolySymbol, Shape, Var};
pub use scalar::{ComplexRational, Rational};
pub use series::HbarSeries;
