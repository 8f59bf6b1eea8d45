use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{Field, GaussRat, Rational, Ring};

/// Dense univariate polynomial; `coeffs[k]` multiplies `ξ^k`. The leading
/// coefficient is nonzero unless the polynomial is zero (empty vector).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

/// Polynomial in ξ with Gaussian-rational coefficients.
pub type GaussPoly = Poly<GaussRat>;
/// Polynomial with rational coefficients.
pub type RatPoly = Poly<Rational>;

impl<T: Field> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `c·ξ^k`.
    pub fn monomial(c: T, k: usize) -> Self {
        let mut v = vec![T::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// The indeterminate ξ.
    pub fn x() -> Self {
        Poly::monomial(T::one(), 1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `ξ^k` (zero past the degree).
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn scale(&self, c: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len().saturating_sub(1));
        let mut k = T::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                out.push(c.clone() * k.clone());
            }
            k = k + T::one();
        }
        Poly::new(out)
    }

    /// Euclidean division: `self = q·d + r` with `deg r < deg d`.
    ///
    /// # Panics
    /// Panics when `d` is zero.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("polynomial division by zero");
        let lead = d.coeffs[dd].clone();
        let mut r = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (Poly::zero(), Poly::zero());
        };
        if nd < dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![T::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = r[k + dd].clone() / lead.clone();
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                let t = r[k + j].clone() - c.clone() * dc.clone();
                r[k + j] = t;
            }
            q[k] = c;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    /// Monic greatest common divisor (zero if both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => {
                let inv = T::one() / l.clone();
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    /// `self / gcd(self, self')`, the product of the distinct irreducible
    /// factors (characteristic zero).
    pub fn squarefree(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0
    }

    /// Composition `self(x + s)` (Taylor shift).
    pub fn shift(&self, s: &T) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = c[j].clone() + s.clone() * c[j + 1].clone();
                c[j] = t;
            }
        }
        Poly::new(c)
    }

    /// Applies `f` to every coefficient.
    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}

impl GaussPoly {
    /// Coefficientwise complex conjugate; equals the conjugate polynomial
    /// for real ξ.
    pub fn conj(&self) -> Self {
        self.map(GaussRat::conj)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(GaussRat::is_real)
    }

    /// Real part of the coefficients.
    pub fn real_part(&self) -> RatPoly {
        self.map(|c| c.re.clone())
    }

    /// Imaginary part of the coefficients.
    pub fn imag_part(&self) -> RatPoly {
        self.map(|c| c.im.clone())
    }

    pub fn eval_real(&self, x: &Rational) -> GaussRat {
        self.eval(&GaussRat::real(x.clone()))
    }
}

impl RatPoly {
    pub fn to_gauss(&self) -> GaussPoly {
        self.map(|c| GaussRat::real(c.clone()))
    }
}

impl<T: Field> Zero for Poly<T> {
    fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<T: Field> One for Poly<T> {
    fn one() -> Self {
        Poly::constant(T::one())
    }
}

impl<'a, T: Field> Add<&'a Poly<T>> for &'a Poly<T> {
    type Output = Poly<T>;
    fn add(self, o: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl<T: Field> Add for Poly<T> {
    type Output = Poly<T>;
    fn add(self, o: Poly<T>) -> Poly<T> {
        &self + &o
    }
}

impl<'a, T: Field> Sub<&'a Poly<T>> for &'a Poly<T> {
    type Output = Poly<T>;
    fn sub(self, o: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl<T: Field> Sub for Poly<T> {
    type Output = Poly<T>;
    fn sub(self, o: Poly<T>) -> Poly<T> {
        &self - &o
    }
}

impl<'a, T: Field> Mul<&'a Poly<T>> for &'a Poly<T> {
    type Output = Poly<T>;
    fn mul(self, o: &Poly<T>) -> Poly<T> {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                let t = out[i + j].clone() + a.clone() * b.clone();
                out[i + j] = t;
            }
        }
        Poly::new(out)
    }
}

impl<T: Field> Mul for Poly<T> {
    type Output = Poly<T>;
    fn mul(self, o: Poly<T>) -> Poly<T> {
        &self * &o
    }
}

impl<T: Field> Neg for Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl<T: Field> Ring for Poly<T> {
    /// # Panics
    /// Panics if the division leaves a remainder.
    fn exact_div(&self, d: &Self) -> Self {
        let (q, r) = self.div_rem(d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    fn weight(&self) -> usize {
        self.coeffs.len() * 64 + self.coeffs.iter().map(Ring::weight).sum::<usize>()
    }
}

impl<T: Field + fmt::Display> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})ξ")?,
                _ => write!(f, "({c})ξ^{k}")?,
            }
        }
        Ok(())
    }
}
