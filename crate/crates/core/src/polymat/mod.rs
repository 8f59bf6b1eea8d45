//! Exact arithmetic: rationals, Gaussian rationals, univariate polynomials
//! in the frequency variable, dense matrices over any of them, fraction-free
//! elimination and real root isolation.

mod elim;
mod gauss;
mod matrix;
mod poly;
mod rank;
pub mod sturm;

use std::fmt;
use std::ops::{Div, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub use elim::{determinant, echelon_rank};
pub use gauss::GaussRat;
pub use matrix::{ConstMatrix, Mat, PolyMatrix, RatMatrix};
pub use poly::{GaussPoly, Poly, RatPoly};
pub use rank::{exceptional_real_points, generic_rank, rank_const, ExceptionalPoints, RealRoot};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

/// Commutative ring with exact division by divisors that are known to
/// divide (used by fraction-free elimination).
pub trait Ring:
    Clone + PartialEq + fmt::Debug + Zero + One + Neg<Output = Self> + Sub<Output = Self>
{
    /// Quotient `self / d`, assuming `d` divides `self` exactly.
    fn exact_div(&self, d: &Self) -> Self;

    /// Heuristic size used to pick small pivots.
    fn weight(&self) -> usize {
        0
    }
}

/// A ring in which every nonzero element is invertible.
pub trait Field: Ring + Div<Output = Self> {}

impl Ring for Rational {
    fn exact_div(&self, d: &Self) -> Self {
        self / d
    }

    fn weight(&self) -> usize {
        (self.numer().bits() + self.denom().bits()) as usize
    }
}

impl Field for Rational {}

/// Builds the rational `n/d`.
///
/// # Panics
/// Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Error returned when a rational literal cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal `{}`", self.0)
    }
}

impl std::error::Error for ParseRationalError {}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-0.125"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let t = s.trim();
    let err = || ParseRationalError(s.to_string());
    if let Some((num, den)) = t.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = whole.starts_with('-');
        let w = if whole.is_empty() || whole == "-" || whole == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|_| err())?
        };
        let f = BigInt::from_str(frac).map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = w.abs() * &scale + f;
        let n = if negative { -mag } else { mag };
        return Ok(Rational::new(n, scale));
    }
    let n = BigInt::from_str(t).map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest `f64` to a rational, robust to huge numerators and denominators.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    // Scale so the integer quotient carries about 64 significant bits.
    let shift = 64 - (nb - db);
    let q = if shift >= 0 {
        (r.numer() << (shift as usize)) / r.denom()
    } else {
        r.numer() / (r.denom() << ((-shift) as usize))
    };
    let (sign, digits) = q.to_u64_digits();
    let mut mant = 0f64;
    for d in digits.iter().rev() {
        mant = mant * 18446744073709551616.0 + *d as f64;
    }
    let v = mant * 2f64.powi(-(shift.clamp(-1000, 1000) as i32));
    let v = if shift.abs() > 1000 {
        mant * 2f64.powf(-(shift as f64))
    } else {
        v
    };
    if sign == num_bigint::Sign::Minus {
        -v
    } else {
        v
    }
}

/// Exact rational value of a finite `f64`.
///
/// # Panics
/// Panics on NaN or infinity.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// `2^e` as an exact rational.
pub fn pow2(e: i32) -> Rational {
    let two = BigInt::from(2);
    if e >= 0 {
        Rational::from_integer(num_traits::pow(two, e as usize))
    } else {
        Rational::new(BigInt::one(), num_traits::pow(two, (-e) as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_literals() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational(" -6/4 ").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("-0.125").unwrap(), rat(-1, 8));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&rat(4, 2)), "2");
        assert_eq!(format_rational(&rat(-3, 6)), "-1/2");
    }

    #[test]
    fn converts_to_float() {
        assert_eq!(rational_to_f64(&rat(1, 3)), 1.0 / 3.0);
        assert_eq!(rational_to_f64(&rat(-7, 2)), -3.5);
        assert_eq!(rational_to_f64(&pow2(-300)), 2f64.powi(-300));
        assert_eq!(rational_to_f64(&pow2(200)), 2f64.powi(200));
        assert_eq!(rational_to_f64(&rational_from_f64(0.1)), 0.1);
    }
}
