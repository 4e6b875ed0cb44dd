//! Exact scalars: arbitrary-precision rationals and complex rationals.
//!
//! `Rational` is `num_rational::BigRational`, which keeps itself reduced with a
//! positive denominator, so structural equality is value equality.

use std::fmt;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;
pub type ComplexRational = Complex<Rational>;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn creal(re: Rational) -> ComplexRational {
    Complex::new(re, Rational::zero())
}

pub fn cint(n: i64) -> ComplexRational {
    creal(int(n))
}

pub fn crat(numer: i64, denom: i64) -> ComplexRational {
    creal(rat(numer, denom))
}

/// The imaginary unit.
pub fn imag_unit() -> ComplexRational {
    Complex::new(Rational::zero(), Rational::one())
}

/// `i^k` for any integer `k`, exactly.
pub fn i_pow(k: i64) -> ComplexRational {
    match k.rem_euclid(4) {
        0 => cint(1),
        1 => imag_unit(),
        2 => cint(-1),
        _ => -imag_unit(),
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Exact conversion of a finite double (every finite double is a dyadic rational).
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn complex_to_f64(c: &ComplexRational) -> Complex64 {
    Complex64::new(rational_to_f64(&c.re), rational_to_f64(&c.im))
}

pub fn is_real(c: &ComplexRational) -> bool {
    c.im.is_zero()
}

/// `p/q` text form; integers print without a denominator.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Wrapper giving complex rationals a compact human-readable form.
pub struct DisplayComplex<'a>(pub &'a ComplexRational);

impl fmt::Display for DisplayComplex<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.0;
        match (c.re.is_zero(), c.im.is_zero()) {
            (_, true) => write!(f, "{}", format_rational(&c.re)),
            (true, false) => {
                if c.im.is_one() {
                    write!(f, "i")
                } else if (-c.im.clone()).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}i", format_rational(&c.im))
                }
            }
            (false, false) => {
                let sign = if c.im.is_negative() { '-' } else { '+' };
                write!(
                    f,
                    "({} {} {}i)",
                    format_rational(&c.re),
                    sign,
                    format_rational(&c.im.abs())
                )
            }
        }
    }
}
