#![allow(dead_code)]

use hypocert::kalman::SystemSpec;
use hypocert::polymat::{int, GaussPoly, GaussRat, Mat, PolyMatrix, RatMatrix, Rational};
use rand::Rng;

pub fn rm(rows: &[&[i64]]) -> RatMatrix {
    Mat::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
}

/// Symmetric `A`, skew `Bᵃ` and a rank-deficient `Bˢ = Σ vᵣvᵣᵀ` with small
/// integer entries.
pub fn random_system<R: Rng>(rng: &mut R, n: usize) -> SystemSpec {
    let mut a = RatMatrix::zeros(n, n);
    let mut ba = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = int(rng.gen_range(-2..=2));
            a.set(i, j, v.clone());
            a.set(j, i, v);
            if j > i {
                let w = int(rng.gen_range(-2..=2));
                ba.set(i, j, w.clone());
                ba.set(j, i, -w);
            }
        }
    }
    let r = rng.gen_range(1..n.min(3));
    let mut bs = RatMatrix::zeros(n, n);
    for _ in 0..r {
        let mut v: Vec<i64> = (0..n).map(|_| rng.gen_range(-1..=1)).collect();
        if v.iter().all(|&x| x == 0) {
            v[rng.gen_range(0..n)] = 1;
        }
        for i in 0..n {
            for j in 0..n {
                bs.set(i, j, bs.get(i, j) + int(v[i] * v[j]));
            }
        }
    }
    SystemSpec::new("random", a, ba, bs).expect("random system has valid structure")
}

pub fn random_gauss<R: Rng>(rng: &mut R) -> GaussRat {
    GaussRat::new(int(rng.gen_range(-3..=3)), int(rng.gen_range(-3..=3)))
}

pub fn random_poly_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, max_deg: usize) -> PolyMatrix {
    let entries: Vec<Vec<GaussPoly>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    let d = rng.gen_range(0..=max_deg);
                    GaussPoly::new((0..=d).map(|_| random_gauss(rng)).collect())
                })
                .collect()
        })
        .collect();
    Mat::from_rows(entries)
}

pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(rng.gen_range(-20..=20).into(), rng.gen_range(1..=7).into())
}
