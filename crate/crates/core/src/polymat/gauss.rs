use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::{format_rational, Field, Rational, Ring};

/// Complex number with rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GaussRat {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRat {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: Rational) -> Self {
        GaussRat { re, im: Rational::zero() }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussRat { re: Rational::zero(), im: Rational::one() }
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `re² + im²`.
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(super::rational_to_f64(&self.re), super::rational_to_f64(&self.im))
    }
}

impl From<Rational> for GaussRat {
    fn from(r: Rational) -> Self {
        GaussRat::real(r)
    }
}

impl Zero for GaussRat {
    fn zero() -> Self {
        GaussRat::real(Rational::zero())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRat {
    fn one() -> Self {
        GaussRat::real(Rational::one())
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, o: GaussRat) -> GaussRat {
        GaussRat { re: self.re + o.re, im: self.im + o.im }
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, o: GaussRat) -> GaussRat {
        GaussRat { re: self.re - o.re, im: self.im - o.im }
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat::real(&self.re * &o.re);
        }
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, o: GaussRat) -> GaussRat {
        &self * &o
    }
}

impl<'a> Div<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn div(self, o: &GaussRat) -> GaussRat {
        assert!(!o.is_zero(), "division by zero Gaussian rational");
        if o.im.is_zero() {
            return GaussRat { re: &self.re / &o.re, im: &self.im / &o.re };
        }
        let d = o.norm_sqr();
        let num = self * &o.conj();
        GaussRat { re: num.re / &d, im: num.im / d }
    }
}

impl Div for GaussRat {
    type Output = GaussRat;
    fn div(self, o: GaussRat) -> GaussRat {
        &self / &o
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re, im: -self.im }
    }
}

impl Ring for GaussRat {
    fn exact_div(&self, d: &Self) -> Self {
        self / d
    }

    fn weight(&self) -> usize {
        self.re.weight() + self.im.weight()
    }
}

impl Field for GaussRat {}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", format_rational(&self.re)),
            (true, false) => write!(f, "{}i", format_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "{}{}{}i", format_rational(&self.re), sign, format_rational(&self.im.abs()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::rat;

    fn g(a: i64, b: i64) -> GaussRat {
        GaussRat::new(rat(a, 1), rat(b, 1))
    }

    #[test]
    fn field_operations() {
        let a = g(1, 2);
        let b = g(3, -1);
        assert_eq!(&a * &b, g(5, 5));
        assert_eq!(&(&a * &b) / &b, a);
        assert_eq!(&GaussRat::i() * &GaussRat::i(), g(-1, 0));
        assert_eq!(a.norm_sqr(), rat(5, 1));
        assert_eq!(a.conj(), g(1, -2));
    }

    #[test]
    fn displays() {
        assert_eq!(g(0, 0).to_string(), "0");
        assert_eq!(g(0, -3).to_string(), "-3i");
        assert_eq!(GaussRat::new(rat(1, 2), rat(-1, 3)).to_string(), "1/2-1/3i");
    }
}
