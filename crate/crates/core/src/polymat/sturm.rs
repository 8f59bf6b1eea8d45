//! Sturm sequences over the rationals: real root counting and isolation,
//! Cauchy indices, and log-scale location of the smallest positive root.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{format_rational, pow2, rational_to_f64, RatPoly, Rational};

/// A real root known to lie in `(lo, hi]`; `lo == hi` marks an exact
/// rational root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealRoot {
    pub lo: Rational,
    pub hi: Rational,
}

impl RealRoot {
    pub fn approx(&self) -> f64 {
        rational_to_f64(&((&self.lo + &self.hi) / Rational::from_integer(2.into())))
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

impl Serialize for RealRoot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RealRoot", 3)?;
        st.serialize_field("lo", &format_rational(&self.lo))?;
        st.serialize_field("hi", &format_rational(&self.hi))?;
        st.serialize_field("approx", &self.approx())?;
        st.end()
    }
}

fn sign(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Generalized Sturm sequence `f0, f1, −rem(f0, f1), …`.
pub fn remainder_sequence(f0: &RatPoly, f1: &RatPoly) -> Vec<RatPoly> {
    let mut seq = vec![f0.clone()];
    if f1.is_zero() {
        return seq;
    }
    seq.push(f1.clone());
    loop {
        let n = seq.len();
        let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
        if r.is_zero() {
            break;
        }
        // Normalizing by a positive constant keeps signs and shrinks sizes.
        let r = -r;
        let lead = r.leading().expect("nonzero").abs();
        seq.push(r.scale(&(Rational::one() / lead)));
    }
    seq
}

/// Sturm chain of `p` (with `p'` as second element).
pub fn sturm_chain(p: &RatPoly) -> Vec<RatPoly> {
    remainder_sequence(p, &p.derivative())
}

fn count_variations(signs: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut v = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            v += 1;
        }
        last = s;
    }
    v
}

/// Sign variations of the sequence evaluated at `x`.
pub fn variations_at(seq: &[RatPoly], x: &Rational) -> usize {
    count_variations(seq.iter().map(|p| sign(&p.eval(x))))
}

/// Sign variations at `+∞` (`positive = true`) or `−∞`.
pub fn variations_at_infinity(seq: &[RatPoly], positive: bool) -> usize {
    count_variations(seq.iter().map(|p| {
        let s = p.leading().map_or(0, sign);
        let odd = p.degree().unwrap_or(0) % 2 == 1;
        if !positive && odd {
            -s
        } else {
            s
        }
    }))
}

/// Number of distinct real roots of `p` in `(a, b]`.
pub fn count_roots(chain: &[RatPoly], a: &Rational, b: &Rational) -> usize {
    variations_at(chain, a).saturating_sub(variations_at(chain, b))
}

/// Cauchy bound: every complex root has modulus below the returned value.
pub fn root_bound(p: &RatPoly) -> Rational {
    let lead = p.leading().expect("nonzero polynomial").abs();
    let m = p.coeffs()[..p.coeffs().len() - 1]
        .iter()
        .map(|c| c.abs() / &lead)
        .fold(Rational::zero(), |a, b| if b > a { b } else { a });
    m + Rational::one()
}

/// Isolates the distinct real roots of `p` into disjoint intervals,
/// sorted increasingly.
///
/// # Panics
/// Panics if `p` is the zero polynomial.
pub fn isolate_real_roots(p: &RatPoly) -> Vec<RealRoot> {
    assert!(!p.is_zero(), "root isolation of the zero polynomial");
    let sf = p.squarefree();
    if sf.degree() == Some(0) {
        return Vec::new();
    }
    let chain = sturm_chain(&sf);
    let b = root_bound(&sf);
    let two = Rational::from_integer(2.into());
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    while let Some((lo, hi)) = stack.pop() {
        let c = count_roots(&chain, &lo, &hi);
        if c == 0 {
            continue;
        }
        if c == 1 {
            out.push(if sf.eval(&hi).is_zero() {
                RealRoot { lo: hi.clone(), hi }
            } else {
                RealRoot { lo, hi }
            });
            continue;
        }
        let mid = (&lo + &hi) / &two;
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    out.sort_by(|x, y| x.hi.cmp(&y.hi));
    out
}

/// Shrinks an isolating interval of a simple root of `p` to width at most
/// `width`.
pub fn refine(p: &RatPoly, root: &RealRoot, width: &Rational) -> RealRoot {
    let two = Rational::from_integer(2.into());
    let (mut lo, mut hi) = (root.lo.clone(), root.hi.clone());
    if p.eval(&hi).is_zero() {
        return RealRoot { lo: hi.clone(), hi };
    }
    let shi = sign(&p.eval(&hi));
    while &(&hi - &lo) > width {
        let mid = (&lo + &hi) / &two;
        let sm = sign(&p.eval(&mid));
        if sm == 0 {
            return RealRoot { lo: mid.clone(), hi: mid };
        }
        if sm != shi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    RealRoot { lo, hi }
}

/// Cauchy index of `num/den` over the whole real line, computed as
/// `V(−∞) − V(+∞)` on the remainder sequence of `(den, num)`. Also returns
/// whether the two polynomials share a nonconstant factor.
pub fn cauchy_index(num: &RatPoly, den: &RatPoly) -> (i64, bool) {
    let seq = remainder_sequence(den, num);
    let common = seq.last().and_then(RatPoly::degree).unwrap_or(0) > 0;
    let v_minus = variations_at_infinity(&seq, false) as i64;
    let v_plus = variations_at_infinity(&seq, true) as i64;
    (v_minus - v_plus, common)
}

/// `⌊log₂ r⌋` up to one unit, for positive `r`.
fn approx_log2(r: &Rational) -> i64 {
    r.numer().bits() as i64 - r.denom().bits() as i64
}

/// Smallest `s` in `(lower, upper]` with `counts(s) ≥ 1`, assuming
/// `counts` is nondecreasing, `counts(lower) = 0` and `counts(upper) ≥ 1`.
/// The search first brackets the binary exponent, then bisects linearly
/// until the bracket's relative width is below `2^{-bits}`. Returns the
/// final bracket.
pub fn first_crossing(
    counts: &mut dyn FnMut(&Rational) -> usize,
    lower_exp: i64,
    upper_exp: i64,
    bits: u32,
) -> (Rational, Rational) {
    // counts(2^lo_e) = 0 and counts(2^hi_e) ≥ 1 is maintained.
    let (mut lo_e, mut hi_e) = (lower_exp, upper_exp);
    while hi_e - lo_e > 1 {
        let mid = lo_e + (hi_e - lo_e) / 2;
        if counts(&pow2(mid as i32)) >= 1 {
            hi_e = mid;
        } else {
            lo_e = mid;
        }
    }
    let mut lo = pow2(lo_e as i32);
    let mut hi = pow2(hi_e as i32);
    let two = Rational::from_integer(2.into());
    let tol = &lo * pow2(-(bits as i32));
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / &two;
        if counts(&mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Smallest strictly positive real root of `p` to about `bits` relative
/// bits, or `None` if there is none.
pub fn smallest_positive_root(p: &RatPoly, bits: u32) -> Option<f64> {
    let mut q = p.squarefree();
    // Strip roots at zero.
    while q.degree().unwrap_or(0) > 0 && q.coeff(0).is_zero() {
        q = q.div_rem(&RatPoly::x()).0;
    }
    if q.degree().unwrap_or(0) == 0 {
        return None;
    }
    let chain = sturm_chain(&q);
    let ub = root_bound(&q);
    let upper_exp = approx_log2(&ub) + 2;
    if count_roots(&chain, &Rational::zero(), &pow2(upper_exp as i32)) == 0 {
        return None;
    }
    // Lower bound from the reversed polynomial: |x| ≥ |a0| / (|a0| + max|ai|).
    let a0 = q.coeff(0).abs();
    let maxc = q.coeffs().iter().skip(1).map(Signed::abs).fold(Rational::zero(), |a, b| if b > a { b } else { a });
    let lb = &a0 / (&a0 + maxc);
    let lower_exp = approx_log2(&lb) - 2;
    let mut counts = |x: &Rational| count_roots(&chain, &Rational::zero(), x);
    let (lo, hi) = first_crossing(&mut counts, lower_exp, upper_exp, bits);
    Some(RealRoot { lo, hi }.approx())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::{int, rat, Poly};

    fn rp(c: &[i64]) -> RatPoly {
        Poly::new(c.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn counts_roots_of_cubic() {
        // (x+2)(x-1)(x-3) = x^3 - 2x^2 - 5x + 6
        let p = rp(&[6, -5, -2, 1]);
        let chain = sturm_chain(&p);
        assert_eq!(count_roots(&chain, &int(-10), &int(10)), 3);
        assert_eq!(count_roots(&chain, &int(0), &int(2)), 1);
        assert_eq!(count_roots(&chain, &int(1), &int(3)), 1);
        assert_eq!(variations_at_infinity(&chain, false) - variations_at_infinity(&chain, true), 3);
    }

    #[test]
    fn isolates_and_refines() {
        // x^2 - 2 has roots ±√2.
        let p = rp(&[-2, 0, 1]);
        let roots = isolate_real_roots(&p);
        assert_eq!(roots.len(), 2);
        let r = refine(&p, &roots[1], &rat(1, 1 << 20));
        assert!((r.approx() - 2f64.sqrt()).abs() < 1e-6);
        assert!(roots[0].hi <= int(0));
    }

    #[test]
    fn exact_roots_are_flagged() {
        let p = rp(&[0, -1, 1]); // x(x-1)
        let roots = isolate_real_roots(&p);
        assert_eq!(roots.len(), 2);
        assert!(roots[0].is_exact() && roots[0].hi == int(0));
        assert!(!roots[1].is_exact() && roots[1].lo >= int(0) && roots[1].hi >= int(1));
    }

    #[test]
    fn no_real_roots() {
        assert!(isolate_real_roots(&rp(&[1, 0, 1])).is_empty());
    }

    #[test]
    fn cauchy_index_of_simple_poles() {
        // 1/x jumps from −∞ to +∞ at 0: index +1.
        assert_eq!(cauchy_index(&rp(&[1]), &rp(&[0, 1])), (1, false));
        // −1/x: index −1.
        assert_eq!(cauchy_index(&rp(&[-1]), &rp(&[0, 1])), (-1, false));
        // x/(x^2) shares a factor.
        assert!(cauchy_index(&rp(&[0, 1]), &rp(&[0, 0, 1])).1);
    }

    #[test]
    fn smallest_positive_root_log_scale() {
        // (x - 2^-40)(x - 3)
        let tiny = pow2(-40);
        let p = Poly::new(vec![&tiny * int(3), -(&tiny + int(3)), int(1)]);
        let r = smallest_positive_root(&p, 30).unwrap();
        assert!((r / 2f64.powi(-40) - 1.0).abs() < 1e-8);
        assert_eq!(smallest_positive_root(&rp(&[1, 1]), 30), None);
    }
}
