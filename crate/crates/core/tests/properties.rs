mod common;

use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hypocert::kalman::{build_kalman_stack, SystemSpec};
use hypocert::lyapunov::admissible_sequence;
use hypocert::polymat::{generic_rank, int, rank_const, GaussRat, Mat, PolyMatrix, Rational};
use hypocert::report::{run_analysis, AnalysisConfig, Report};
use hypocert::tree::{run_tree, run_tree_with, Regime, TreeOptions};
use hypocert::verify::linalg::{eval_poly_f64, svd_rank, CVec, C64};
use hypocert::verify::{propagator, symbol};
use hypocert::zoo;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rank by evaluation at `deg·rows + 1` distinct integers: every nonzero
/// minor has smaller degree, so one of the points attains the generic rank.
fn rank_by_evaluation(m: &PolyMatrix) -> usize {
    let d = m.degree().unwrap_or(0) * m.rows().min(m.cols());
    (0..=d as i64).map(|x| rank_const(&m.eval_at(&int(x)))).max().unwrap_or(0)
}

fn max_gamma(sys: &SystemSpec, regime: Regime, detect: bool) -> Option<u32> {
    let p = run_tree_with(sys, regime, TreeOptions { detect_cancellations: detect }).ok()?;
    if p.fallback.is_some() {
        return None;
    }
    p.nodes.iter().map(|n| n.gamma()).max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn evaluation_is_a_ring_homomorphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = common::random_poly_matrix(&mut r, 3, 2, 3);
        let p2 = common::random_poly_matrix(&mut r, 3, 2, 3);
        let q = common::random_poly_matrix(&mut r, 2, 4, 3);
        let x = common::random_rational(&mut r);
        prop_assert_eq!((&p * &q).eval_at(&x), &p.eval_at(&x) * &q.eval_at(&x));
        prop_assert_eq!((&p + &p2).eval_at(&x), &p.eval_at(&x) + &p2.eval_at(&x));
    }

    #[test]
    fn bareiss_rank_matches_evaluation_rank(seed in any::<u64>(), deficient in 0usize..3) {
        let mut r = rng(seed);
        let mut m = common::random_poly_matrix(&mut r, 4, 4, 3);
        // Force rank deficiency by copying combinations of earlier rows.
        for k in 0..deficient {
            let row = 3 - k;
            for j in 0..4 {
                let v = m.get(0, j) + &(m.get(1, j) * &hypocert::polymat::GaussPoly::x());
                m.set(row, j, v);
            }
        }
        prop_assert_eq!(generic_rank(&m), rank_by_evaluation(&m));
    }

    #[test]
    fn rank_is_invariant_under_row_operations(seed in any::<u64>(), perm in Just(vec![0usize, 1, 2, 3, 4]).prop_shuffle(), scale in 1i64..9) {
        let mut r = rng(seed);
        let m = common::random_poly_matrix(&mut r, 5, 3, 2);
        let c = hypocert::polymat::GaussPoly::constant(GaussRat::new(int(scale), int(-1)));
        let permuted = Mat::from_fn(5, 3, |i, j| {
            let v = m.get(perm[i], j).clone();
            if i == 0 { &v * &c } else { v }
        });
        prop_assert_eq!(generic_rank(&m), generic_rank(&permuted));
    }

    #[test]
    fn admissible_sequences_satisfy_the_inequalities(k in 1usize..=10) {
        let s = admissible_sequence(k).unwrap();
        prop_assert!(s.is_admissible());
        prop_assert_eq!(s.len(), k);
        for i in 1..k {
            let d = &s.p[i] - &s.p[i - 1];
            prop_assert!(s.q[i] < d && d < s.q[i - 1]);
        }
    }

    #[test]
    fn svd_rank_matches_exact_rank(seed in any::<u64>(), n in 3usize..=4, num in -24i64..=24, den in 1i64..=8) {
        let mut r = rng(seed);
        let sys = common::random_system(&mut r, n);
        let stack = build_kalman_stack(&sys, n - 1);
        let xi = Rational::new(num.into(), den.into());
        let exact = rank_const(&stack.eval_at(&xi));
        let numeric = svd_rank(&eval_poly_f64(&stack, num as f64 / den as f64), 1e-8);
        prop_assert_eq!(exact, numeric);
        prop_assert!(exact <= generic_rank(&stack));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn tree_paths_are_deterministic_and_grow_the_rank(seed in any::<u64>(), n in 3usize..=4) {
        let sys = common::random_system(&mut rng(seed), n);
        for regime in [Regime::High, Regime::Low] {
            let a = run_tree(&sys, regime);
            let b = run_tree(&sys, regime);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(&a, &b);
                    let mut prev = 0;
                    for j in 0..a.nodes.len() {
                        let blocks: Vec<_> = a.nodes[..=j].iter().map(|nd| nd.matrix.clone()).collect();
                        let rank = hypocert::polymat::echelon_rank(&Mat::vstack(&blocks));
                        prop_assert!(rank > prev, "node {} adds no rank", a.nodes[j].label);
                        prev = rank;
                    }
                    prop_assert!(prev <= n);
                    prop_assert_eq!(prev, a.final_rank);
                }
                (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
                _ => prop_assert!(false, "runs disagree"),
            }
        }
        let ranks: Vec<usize> = (0..n).map(|k| generic_rank(&build_kalman_stack(&sys, k))).collect();
        prop_assert!(ranks.windows(2).all(|w| w[0] <= w[1]), "{:?}", ranks);
    }

    #[test]
    fn cancellations_never_raise_the_exponent(seed in any::<u64>(), n in 3usize..=4) {
        let sys = common::random_system(&mut rng(seed), n);
        for regime in [Regime::High, Regime::Low] {
            if let (Some(with), Some(without)) = (max_gamma(&sys, regime, true), max_gamma(&sys, regime, false)) {
                prop_assert!(with <= without);
            }
        }
    }

    #[test]
    fn timoshenko_cancellation_only_at_unit_speed(num in 1i64..=12, den in 1i64..=12) {
        let a = format!("{num}/{den}");
        let sys = zoo::model_with("timoshenko", &[("a", &a)]).unwrap().to_system().unwrap();
        let with = max_gamma(&sys, Regime::High, true).unwrap();
        let without = max_gamma(&sys, Regime::High, false).unwrap();
        prop_assert_eq!(without, 1);
        prop_assert_eq!(with, if num == den { 0 } else { 1 });
    }
}

fn analyzed(name: &str) -> &'static Report {
    static REPORTS: OnceLock<Vec<Report>> = OnceLock::new();
    let all = REPORTS.get_or_init(|| {
        zoo::NAMES.iter().map(|n| run_analysis(&zoo::model(n).unwrap(), &AnalysisConfig::default()).unwrap()).collect()
    });
    &all[zoo::NAMES.iter().position(|n| *n == name).unwrap()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn ddt_matches_finite_differences(
        model in 0usize..6,
        high in any::<bool>(),
        e in 0.0f64..4.0,
        re in proptest::collection::vec(-1.0f64..1.0, 5),
        im in proptest::collection::vec(-1.0f64..1.0, 5),
    ) {
        let name = zoo::NAMES[model];
        let report = analyzed(name);
        let sys = zoo::model(name).unwrap().to_system().unwrap();
        let (l, xi) = if high {
            (&report.high.functional.functional, e.exp2())
        } else {
            (&report.low.functional.functional, (-e).exp2())
        };
        let u = CVec::from_iterator(sys.n, (0..sys.n).map(|i| C64::new(re[i], im[i])));
        prop_assume!(u.norm() > 0.1);
        let ddt = l.ddt_evaluate(&sys, xi, &u).unwrap();
        let h = 1e-2 / symbol(&sys, xi).norm();
        let central = |h: f64| {
            let f = l.evaluate(xi, &(propagator(&sys, xi, h) * &u)).unwrap();
            let b = l.evaluate(xi, &(propagator(&sys, xi, -h) * &u)).unwrap();
            (f - b) / (2.0 * h)
        };
        let fd = (4.0 * central(h / 2.0) - central(h)) / 3.0;
        prop_assert!((fd - ddt).abs() <= 1e-6 * ddt.abs().max(1e-6 * u.norm_squared()), "{} vs {}", ddt, fd);
    }
}
