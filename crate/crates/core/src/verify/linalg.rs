//! Dense double-precision helpers on top of nalgebra, plus the exact
//! fallback used when double precision cannot resolve a singular value.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::polymat::{determinant, rational_from_f64, sturm, ConstMatrix, GaussPoly, Mat, PolyMatrix, RatMatrix, Rational};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative size below which an SVD singular value is not trusted.
const SVD_RESOLUTION: f64 = 1e-9;

pub fn const_to_cmat(m: &ConstMatrix) -> CMat {
    CMat::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j).to_c64())
}

pub fn rat_to_cmat(m: &RatMatrix) -> CMat {
    CMat::from_fn(m.rows(), m.cols(), |i, j| C64::new(crate::polymat::rational_to_f64(m.get(i, j)), 0.0))
}

/// Double-precision evaluation of a polynomial matrix.
pub fn eval_poly_f64(m: &PolyMatrix, xi: f64) -> CMat {
    CMat::from_fn(m.rows(), m.cols(), |i, j| {
        m.get(i, j).coeffs().iter().rev().fold(C64::zero(), |acc, c| acc * xi + c.to_c64())
    })
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator 2-norm.
pub fn norm2(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank with threshold `tol·σ_max`.
pub fn svd_rank(m: &CMat, tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    s.iter().filter(|&&v| v > tol * top).count()
}

/// Exact smallest singular value of `M(ξ)` (as `f64`): the smallest root of
/// the characteristic polynomial of `M(ξ)ᴴM(ξ)`, located by Sturm counting.
pub fn smin_exact(m: &PolyMatrix, xi: &Rational) -> f64 {
    let c = m.eval_at(xi);
    let gram = &c.conj_transpose() * &c;
    let x = GaussPoly::x();
    let pm: Mat<GaussPoly> = Mat::from_fn(gram.rows(), gram.cols(), |i, j| {
        let v = GaussPoly::constant(-gram.get(i, j).clone());
        if i == j {
            &v + &x
        } else {
            v
        }
    });
    let cp = determinant(&pm).real_part();
    if cp.coeff(0).is_zero() {
        return 0.0;
    }
    sturm::smallest_positive_root(&cp, 40).map_or(0.0, f64::sqrt)
}

/// Smallest singular value of `M(ξ)`: dense SVD, with the exact route taking
/// over when the value falls below the double-precision resolution.
pub fn smin_oracle(m: &PolyMatrix, xi: f64) -> f64 {
    let s = singular_values(&eval_poly_f64(m, xi));
    let top = s.first().copied().unwrap_or(0.0);
    let low = s.get(m.cols().saturating_sub(1)).copied().unwrap_or(0.0);
    if m.rows() < m.cols() {
        return 0.0;
    }
    if top == 0.0 || low > SVD_RESOLUTION * top {
        return low;
    }
    smin_exact(m, &rational_from_f64(xi))
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let e = nalgebra::SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(m.nrows(), idx.len(), |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Smallest `λ` with `Dv = λHv` for Hermitian `D` and positive definite `H`,
/// with its eigenvector. `None` when `H` is not positive definite.
pub fn generalized_min_eig(d: &CMat, h: &CMat) -> Option<(f64, CVec)> {
    generalized_eigen(d, h).map(|(vals, v)| (vals[0], v))
}

/// All eigenvalues (ascending) of the pencil `Dv = λHv` and the
/// eigenvector of the smallest one.
pub fn generalized_eigen(d: &CMat, h: &CMat) -> Option<(Vec<f64>, CVec)> {
    let hs = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let chol = hs.cholesky()?;
    let l = chol.l();
    let y = l.solve_lower_triangular(d)?;
    let c = l.solve_lower_triangular(&y.adjoint())?.adjoint();
    let (vals, vecs) = hermitian_eigen(&c);
    let w = vecs.column(0).into_owned();
    let v = l.adjoint().solve_upper_triangular(&w)?;
    Some((vals, v))
}

/// Exact smallest eigenvalue of the Hermitian pencil `(D, H)` with `H`
/// positive definite: the smallest real root of `det(D − λH)`, isolated by
/// Sturm sequences. The sign of the result is exact.
pub fn generalized_min_eig_exact(d: &ConstMatrix, h: &ConstMatrix) -> f64 {
    let x = GaussPoly::x();
    let pencil: Mat<GaussPoly> = Mat::from_fn(d.rows(), d.cols(), |i, j| {
        let dij = GaussPoly::constant(d.get(i, j).clone());
        let hij = GaussPoly::constant(h.get(i, j).clone());
        &dij - &(&hij * &x)
    });
    let cp = determinant(&pencil).real_part();
    if cp.coeff(0).is_zero() {
        return 0.0;
    }
    let roots = sturm::isolate_real_roots(&cp);
    let Some(first) = roots.first() else { return 0.0 };
    if first.hi.is_positive() && !first.lo.is_negative() {
        return sturm::smallest_positive_root(&cp, 40).unwrap_or(0.0);
    }
    if first.lo.is_negative() && first.hi.is_positive() {
        // The isolating interval straddles zero; decide the side.
        let zero = Rational::zero();
        let neg = sturm::count_roots(&sturm::sturm_chain(&cp.squarefree()), &first.lo, &zero) > 0;
        if !neg {
            return sturm::smallest_positive_root(&cp, 40).unwrap_or(0.0);
        }
    }
    let width = (&first.hi - &first.lo).abs() * crate::polymat::pow2(-40);
    let r = sturm::refine(&cp.squarefree(), first, &width);
    r.approx().min(-f64::MIN_POSITIVE)
}

/// Smallest eigenvalue of the pencil `(D, H)`, switching to the exact
/// route when double precision cannot separate it from zero.
pub fn pencil_min_eig(d: &CMat, h: &CMat, exact: impl FnOnce() -> (ConstMatrix, ConstMatrix)) -> Option<(f64, CVec)> {
    let (vals, v) = generalized_eigen(d, h)?;
    let top = vals.iter().fold(0f64, |m, x| m.max(x.abs()));
    if vals[0].abs() > SVD_RESOLUTION * top {
        return Some((vals[0], v));
    }
    let (de, he) = exact();
    Some((generalized_min_eig_exact(&de, &he), v))
}

/// Dense complex eigenvalues via the Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let schur = nalgebra::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}
