//! Rank over the fraction field ℚ(i)(ξ) and the real frequencies where it
//! drops.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use super::sturm::RealRoot;
use super::sturm::{isolate_real_roots, refine};
use super::{determinant, pow2, echelon_rank, ConstMatrix, PolyMatrix, RatPoly, Rational};
use crate::error::{Error, Result};

const SAMPLE_SEED: u64 = 0x6b61_6c6d_616e;
const SAMPLE_BOUND: i64 = 10_000;

fn sample_points(count: usize) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut pts: Vec<Rational> = Vec::with_capacity(count);
    while pts.len() < count {
        let n: i64 = rng.gen_range(-SAMPLE_BOUND..=SAMPLE_BOUND);
        let d: i64 = rng.gen_range(1..=SAMPLE_BOUND);
        let x = Rational::new(BigInt::from(n), BigInt::from(d));
        if !x.is_zero() && !pts.contains(&x) {
            pts.push(x);
        }
    }
    pts
}

/// Exact rank of a constant matrix.
pub fn rank_const(m: &ConstMatrix) -> usize {
    echelon_rank(m)
}

/// Rank over the fraction field: evaluation at three random rational points,
/// falling back to fraction-free elimination over the polynomial ring when
/// the samples disagree.
pub fn generic_rank(m: &PolyMatrix) -> usize {
    let ranks: Vec<usize> = sample_points(3).iter().map(|x| echelon_rank(&m.eval_at(x))).collect();
    if ranks.iter().all(|&r| r == ranks[0]) {
        ranks[0]
    } else {
        echelon_rank(m)
    }
}

/// Real nonzero frequencies at which a full-column-rank polynomial matrix
/// loses rank.
#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalPoints {
    pub roots: Vec<RealRoot>,
    /// Row selections whose Gram determinants were checked to vanish on
    /// every root.
    pub selections: Vec<Vec<usize>>,
}

impl ExceptionalPoints {
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// `det(MᴴM)` as a real polynomial in ξ.
fn gram_determinant(m: &PolyMatrix) -> Result<RatPoly> {
    let g = &m.conj_transpose() * m;
    let d = determinant(&g);
    if !d.is_real() {
        return Err(Error::Internal("Gram determinant has non-real coefficients".into()));
    }
    Ok(d.real_part())
}

fn real_roots(p: &RatPoly) -> Vec<RealRoot> {
    if p.degree().unwrap_or(0) == 0 {
        Vec::new()
    } else {
        isolate_real_roots(p)
    }
}

fn strip_zero_roots(p: &RatPoly) -> RatPoly {
    let mut q = p.clone();
    while q.degree().unwrap_or(0) > 0 && q.coeff(0).is_zero() {
        q = q.div_rem(&RatPoly::x()).0;
    }
    q
}

/// Greedy choice of `target` rows that stay independent at `x`.
fn select_rows(m: &PolyMatrix, x: &Rational, order: impl Iterator<Item = usize>, target: usize) -> Vec<usize> {
    let at = m.eval_at(x);
    let mut chosen: Vec<usize> = Vec::new();
    for i in order {
        if chosen.len() == target {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(i);
        if echelon_rank(&at.select_rows(&trial)) == trial.len() {
            chosen = trial;
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Real `ξ ≠ 0` where `rank M(ξ) < cols`. The deciding polynomial is
/// `det(MᴴM)`, whose real roots are exactly the rank-drop points; two
/// independent square row selections `M̃` are checked to vanish there too.
pub fn exceptional_real_points(m: &PolyMatrix) -> Result<ExceptionalPoints> {
    let n = m.cols();
    let r = generic_rank(m);
    if r < n {
        return Err(Error::Precondition(format!("generic rank {r} < {n}")));
    }
    let deciding = strip_zero_roots(&gram_determinant(m)?).squarefree();
    let x0 = sample_points(3)
        .into_iter()
        .find(|x| echelon_rank(&m.eval_at(x)) == n)
        .ok_or_else(|| Error::Internal("no full-rank sample point".into()))?;
    let forward = select_rows(m, &x0, 0..m.rows(), n);
    let backward = select_rows(m, &x0, (0..m.rows()).rev(), n);
    let roots = real_roots(&deciding);
    for sel in [&forward, &backward] {
        let d = gram_determinant(&m.select_rows(sel))?;
        // Every real rank-drop point must be a root of the selection's
        // determinant, i.e. survive in gcd(deciding, d).
        if d.is_zero() || real_roots(&deciding.gcd(&d)).len() != roots.len() {
            return Err(Error::Internal(format!("row selection {sel:?} does not vanish on the rank-drop set")));
        }
    }
    let width = pow2(-30);
    let roots = roots.iter().map(|r| refine(&deciding, r, &width)).collect();
    Ok(ExceptionalPoints { roots, selections: vec![forward, backward] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::{int, GaussPoly, GaussRat, Mat, Poly};

    fn xpoly(c: &[i64]) -> GaussPoly {
        Poly::new(c.iter().map(|&v| GaussRat::real(int(v))).collect())
    }

    #[test]
    fn generic_rank_ignores_isolated_drops() {
        // [[ξ-1, 0], [0, 1]] has generic rank 2, dropping at ξ = 1.
        let m = Mat::from_rows(vec![vec![xpoly(&[-1, 1]), xpoly(&[])], vec![xpoly(&[]), xpoly(&[1])]]);
        assert_eq!(generic_rank(&m), 2);
        let ex = exceptional_real_points(&m).unwrap();
        assert_eq!(ex.roots.len(), 1);
        assert!(ex.roots[0].lo <= int(1) && ex.roots[0].hi >= int(1));
        assert!((ex.roots[0].approx() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_frequency_is_excluded() {
        // [[ξ], [ξ²]] vanishes only at ξ = 0.
        let m = Mat::from_rows(vec![vec![xpoly(&[0, 1])], vec![xpoly(&[0, 0, 1])]]);
        assert!(exceptional_real_points(&m).unwrap().is_empty());
    }

    #[test]
    fn complex_roots_are_not_exceptional() {
        // [[ξ² + 1], [0]] never vanishes on the real line.
        let m = Mat::from_rows(vec![vec![xpoly(&[1, 0, 1])], vec![xpoly(&[])]]);
        assert!(exceptional_real_points(&m).unwrap().is_empty());
    }

    #[test]
    fn deficient_matrix_is_rejected() {
        let m = Mat::from_rows(vec![vec![xpoly(&[0, 1]), xpoly(&[0, 2])], vec![xpoly(&[1]), xpoly(&[2])]]);
        assert_eq!(generic_rank(&m), 1);
        assert!(exceptional_real_points(&m).is_err());
    }
}
