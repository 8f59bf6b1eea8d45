//! Fraction-free (Bareiss) elimination over an integral domain.


use super::{Mat, Ring};

/// Reduces `m` in place to a fraction-free row echelon form and returns the
/// rank together with the final pivot and the permutation parity.
fn bareiss<T: Ring>(m: &mut Mat<T>) -> (usize, T, bool) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut prev = T::one();
    let mut rank = 0;
    let mut odd = false;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let pivot = (rank..rows)
            .filter(|&i| !m.get(i, c).is_zero())
            .min_by_key(|&i| m.get(i, c).weight());
        let Some(p) = pivot else { continue };
        if p != rank {
            m.swap_rows(p, rank);
            odd = !odd;
        }
        let piv = m.get(rank, c).clone();
        for i in rank + 1..rows {
            let lead = m.get(i, c).clone();
            for j in c + 1..cols {
                let v = piv.clone() * m.get(i, j).clone() - lead.clone() * m.get(rank, j).clone();
                m.set(i, j, v.exact_div(&prev));
            }
            m.set(i, c, T::zero());
        }
        prev = piv;
        rank += 1;
    }
    (rank, prev, odd)
}

/// Exact rank; over a polynomial ring this is the rank over its fraction
/// field.
pub fn echelon_rank<T: Ring>(m: &Mat<T>) -> usize {
    let mut w = m.clone();
    bareiss(&mut w).0
}

/// Exact determinant of a square matrix.
///
/// # Panics
/// Panics if `m` is not square.
pub fn determinant<T: Ring>(m: &Mat<T>) -> T {
    assert!(m.is_square(), "determinant of a non-square matrix");
    if m.rows() == 0 {
        return T::one();
    }
    let mut w = m.clone();
    let (rank, last, odd) = bareiss(&mut w);
    if rank < m.rows() {
        T::zero()
    } else if odd {
        -last
    } else {
        last
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::polymat::{int, GaussRat, Poly, RatMatrix, RatPoly};

    fn rm(rows: &[&[i64]]) -> RatMatrix {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(echelon_rank(&RatMatrix::zeros(3, 3)), 0);
        assert_eq!(echelon_rank(&rm(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(echelon_rank(&rm(&[&[0, 1, 2], &[0, 2, 5], &[0, 0, 0]])), 2);
        // outer product p pᵀ
        assert_eq!(echelon_rank(&rm(&[&[1, -2, 3], &[-2, 4, -6], &[3, -6, 9]])), 1);
    }

    #[test]
    fn determinant_matches_cofactor() {
        let m = rm(&[&[2, -1, 0], &[1, 3, 4], &[0, 5, -2]]);
        // 2(−6−20) + 1(−2−0) = −54
        assert_eq!(determinant(&m), int(-54));
        assert_eq!(determinant(&rm(&[&[0, 1], &[1, 0]])), int(-1));
    }

    #[test]
    fn polynomial_determinant() {
        // [[x, 1], [1, x]] has determinant x² − 1.
        let x: RatPoly = Poly::x();
        let one = RatPoly::one();
        let m = Mat::from_rows(vec![vec![x.clone(), one.clone()], vec![one, x]]);
        assert_eq!(determinant(&m), Poly::new(vec![int(-1), int(0), int(1)]));
    }

    #[test]
    fn gaussian_rank() {
        let i = GaussRat::i();
        let one = GaussRat::one();
        // rows (1, i) and (i, −1) are dependent over ℚ(i)
        let m = Mat::from_rows(vec![vec![one.clone(), i.clone()], vec![i, -one]]);
        assert_eq!(echelon_rank(&m), 1);
    }
}
