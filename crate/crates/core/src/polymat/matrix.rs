use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::{GaussPoly, GaussRat, Rational, Ring};
use crate::error::Error;

/// Dense row-major matrix over a ring.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Matrix with Gaussian-rational entries.
pub type ConstMatrix = Mat<GaussRat>;
/// Matrix with real rational entries.
pub type RatMatrix = Mat<Rational>;
/// Matrix whose entries are polynomials in ξ.
pub type PolyMatrix = Mat<GaussPoly>;

impl<T: Ring> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Builds a matrix from row vectors.
    ///
    /// # Panics
    /// Panics when rows have different lengths.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    /// Matrix product, or a dimension error.
    pub fn try_mul(&self, o: &Self) -> Result<Self, Error> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch {
                op: "multiply",
                left: (self.rows, self.cols),
                right: (o.rows, o.cols),
            });
        }
        let mut out: Mat<T> = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    let t = out.data[idx].clone() + a.clone() * b.clone();
                    out.data[idx] = t;
                }
            }
        }
        Ok(out)
    }

    /// `self^k` for a square matrix.
    pub fn pow(&self, k: usize) -> Self {
        let mut out = Mat::identity(self.rows);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Stacks matrices vertically.
    ///
    /// # Panics
    /// Panics when column counts differ.
    pub fn vstack(blocks: &[Self]) -> Self {
        let cols = blocks.first().map_or(0, |b| b.cols);
        assert!(blocks.iter().all(|b| b.cols == cols), "vstack column mismatch");
        let rows = blocks.iter().map(|b| b.rows).sum();
        let data = blocks.iter().flat_map(|b| b.data.iter().cloned()).collect();
        Mat { rows, cols, data }
    }

    /// Submatrix made of the listed rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let data = idx.iter().flat_map(|&i| self.row(i).iter().cloned()).collect();
        Mat { rows: idx.len(), cols: self.cols, data }
    }

    /// Column-major flattening, used for span tests between matrices.
    pub fn vectorize(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self.get(i, j).clone());
            }
        }
        v
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl RatMatrix {
    pub fn to_gauss(&self) -> ConstMatrix {
        self.map(|v| GaussRat::real(v.clone()))
    }

    pub fn to_poly(&self) -> PolyMatrix {
        self.map(|v| GaussPoly::constant(GaussRat::real(v.clone())))
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    pub fn is_skew(&self) -> bool {
        self.is_square() && *self == -self.transpose()
    }

    /// `(M + Mᵀ)/2`.
    pub fn sym_part(&self) -> Self {
        let half = Rational::new(1.into(), 2.into());
        (self + &self.transpose()).scale(&half)
    }

    /// `(M − Mᵀ)/2`.
    pub fn skew_part(&self) -> Self {
        let half = Rational::new(1.into(), 2.into());
        (self - &self.transpose()).scale(&half)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(super::rational_to_f64).collect()
    }
}

impl ConstMatrix {
    pub fn conj_transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(GaussRat::is_real)
    }
}

impl PolyMatrix {
    /// Exact evaluation at a rational ξ.
    pub fn eval_at(&self, xi: &Rational) -> ConstMatrix {
        let x = GaussRat::real(xi.clone());
        self.map(|p| p.eval(&x))
    }

    /// Embeds a constant matrix as degree-zero polynomials.
    pub fn from_const(m: &ConstMatrix) -> Self {
        m.map(|v| GaussPoly::constant(v.clone()))
    }

    /// Conjugate transpose for real ξ.
    pub fn conj_transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Largest entry degree (`None` if every entry is zero).
    pub fn degree(&self) -> Option<usize> {
        self.data.iter().filter_map(GaussPoly::degree).max()
    }

    /// Coefficient matrix of `ξ^k`.
    pub fn coefficient(&self, k: usize) -> ConstMatrix {
        self.map(|p| p.coeff(k))
    }
}

impl<'a, T: Ring> Mul<&'a Mat<T>> for &'a Mat<T> {
    type Output = Mat<T>;
    /// # Panics
    /// Panics on a dimension mismatch; use [`Mat::try_mul`] to recover.
    fn mul(self, o: &Mat<T>) -> Mat<T> {
        self.try_mul(o).expect("matrix dimension mismatch")
    }
}

impl<'a, T: Ring> Add<&'a Mat<T>> for &'a Mat<T> {
    type Output = Mat<T>;
    fn add(self, o: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix add dimension mismatch");
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }
}

impl<'a, T: Ring> Sub<&'a Mat<T>> for &'a Mat<T> {
    type Output = Mat<T>;
    fn sub(self, o: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix sub dimension mismatch");
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }
}

impl<T: Ring> Neg for Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.into_iter().map(|v| -v).collect() }
    }
}

impl<T: Ring + fmt::Display> fmt::Display for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::{int, Poly};

    fn rm(rows: &[&[i64]]) -> RatMatrix {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    #[test]
    fn product_and_identity() {
        let a = rm(&[&[1, 2], &[3, 4]]);
        let i = RatMatrix::identity(2);
        assert_eq!(&i * &a, a);
        assert_eq!(&a * &a, rm(&[&[7, 10], &[15, 22]]));
        assert!(rm(&[&[1, 2]]).try_mul(&rm(&[&[1, 2]])).is_err());
    }

    #[test]
    fn symmetry_checks() {
        assert!(rm(&[&[0, 1], &[1, 0]]).is_symmetric());
        assert!(rm(&[&[0, 1], &[-1, 0]]).is_skew());
        assert!(!rm(&[&[0, 1], &[0, 0]]).is_symmetric());
    }

    #[test]
    fn poly_matrix_eval() {
        // iξA with A = [[0,1],[1,0]] evaluated at 0 is zero.
        let ixi = Poly::monomial(GaussRat::i(), 1);
        let m = rm(&[&[0, 1], &[1, 0]]).to_poly().map(|p| p * &ixi);
        assert!(m.eval_at(&int(0)).is_zero());
        assert_eq!(m.eval_at(&int(3)).get(0, 1), &GaussRat::new(int(0), int(3)));
    }

    #[test]
    fn vectorize_is_column_major() {
        assert_eq!(rm(&[&[1, 2], &[3, 4]]).vectorize(), vec![int(1), int(3), int(2), int(4)]);
    }
}
