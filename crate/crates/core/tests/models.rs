use hypocert::report::{run_verification, AnalysisConfig, Verdict};
use hypocert::tree::{Provenance, Regime};
use hypocert::zoo;

#[test]
fn sugimoto_certificate_does_not_depend_on_the_constants() {
    for params in [
        [("Omega", "3/2"), ("a", "2/7"), ("eps", "5"), ("omega", "1/3")],
        [("Omega", "1/4"), ("a", "3"), ("eps", "1/2"), ("omega", "7/5")],
    ] {
        let f = zoo::model_with("sugimoto", &params).unwrap();
        let r = run_verification(&f, &AnalysisConfig::default()).unwrap();
        assert_eq!((r.kalman.order, r.kalman.alpha, r.kalman.beta), (Some(2), Some(1), Some(1)), "{params:?}");
        assert_eq!(r.high.path.labels(), ["B^s", "B^sB^a", "B^sB^aA"], "{params:?}");
        assert_eq!(r.low.path.labels(), ["B^s", "B^sB^a", "B^sB^aA"], "{params:?}");
        for g in [&r.high, &r.low] {
            assert_eq!(g.certificate.exponent, 1);
            assert_eq!(g.certificate.provenance, Provenance::TreeImproved);
        }
        let v = r.verification.as_ref().unwrap();
        assert!(v.exponents.iter().all(|e| e.sharp), "{params:?}");
        assert!(v.monitors.iter().all(|m| m.pass), "{params:?}");
        assert_eq!(r.verdict, Verdict::Certified, "{params:?}");
    }
}

#[test]
fn damped_wave_is_certified_and_sharp() {
    let r = run_verification(&zoo::model("damped-wave").unwrap(), &AnalysisConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Certified);
    let v = r.verification.unwrap();
    let spectral: Vec<(Regime, u32)> = v.exponents.iter().map(|e| (e.regime, e.spectral.as_ref().unwrap().exponent)).collect();
    assert_eq!(spectral, [(Regime::High, 0), (Regime::Low, 1)]);
    assert_eq!(v.sweep.len(), 20);
    assert!(v.sweep.iter().all(|row| row.lyap_margin > 0.0 && row.spectral_rate > 0.0));
}

#[test]
fn timoshenko_fallback_is_consistent_but_not_sharp() {
    let r = run_verification(&zoo::model("timoshenko").unwrap(), &AnalysisConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::CertifiedWithFallback);
    let lf = r.verification.as_ref().unwrap().exponents.iter().find(|e| e.regime == Regime::Low).unwrap();
    assert_eq!((lf.certified, lf.spectral.as_ref().unwrap().exponent), (3, 1));
    assert!(lf.consistent && !lf.sharp);
    assert!(r.notes.iter().any(|n| n.contains("not sharp")));
}
