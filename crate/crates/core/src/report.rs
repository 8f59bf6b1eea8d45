//! Orchestration of kalman → tree → lyapunov → verify and report output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kalman::{build_kalman_stack, certify_kalman, default_kmax, KalmanCertificate, SystemSpec};
use crate::lyapunov::{
    admissible_sequence, random_state, required_sequence_length, sweep_epsilon, synthesize_improved_functional,
    synthesize_kalman_functional, EpsilonCertificate, FunctionalSource, LyapunovFunctional, SweepOptions, Term,
};
use crate::polymat::{format_rational, pow2};
use crate::sysfile::{AnalysisOptions, SystemFile};
use crate::tree::{
    certificate_from_path, check_cancellation, mixing_matrices, pairing_vanishes, rank_one_fast_path, run_tree,
    DecayCertificate, MixedCase, PathReport, Provenance, RankOneReport, Regime,
};
use crate::verify::{
    decay_fit, fit_hf_exponent, fit_lf_exponent, monitor_sweep, propagate_mode, smin_oracle, spectral_rate,
    MonitorOptions, MonitorRow, SpectralExponent,
};

/// Largest accepted ratio `max c / min c` of the weight-normalized decay
/// constant over a monitor sweep.
pub const C_RATIO_BOUND: f64 = 10.0;

/// Settings of an analysis run.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisConfig {
    pub kmax: Option<usize>,
    /// Monitor frequencies are `2^{±j}` for `j` in this range.
    pub xi_min_exp: i32,
    pub xi_max_exp: i32,
    /// ε sweep over `2^{−eps_max} … 2^{−eps_min}`.
    pub eps_max: i32,
    pub eps_min: i32,
    pub seed: u64,
    pub monitor_states: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { kmax: None, xi_min_exp: 5, xi_max_exp: 14, eps_max: 2, eps_min: 12, seed: 0, monitor_states: 64 }
    }
}

impl AnalysisConfig {
    /// Takes the options stored in a system file.
    pub fn with_file_options(mut self, o: &AnalysisOptions) -> Self {
        if let Some(k) = o.kmax {
            self.kmax = Some(k);
        }
        if let Some(v) = o.xi_min_exp {
            self.xi_min_exp = v;
        }
        if let Some(v) = o.xi_max_exp {
            self.xi_max_exp = v;
        }
        if let Some(v) = o.eps_max {
            self.eps_max = v as i32;
        }
        if let Some(v) = o.eps_min {
            self.eps_min = v as i32;
        }
        self
    }

    fn validate(&self) -> Result<()> {
        if self.xi_min_exp < 1 || self.xi_max_exp < self.xi_min_exp || self.xi_max_exp > 30 {
            return Err(Error::Precondition(format!(
                "frequency exponents must satisfy 1 <= min <= max <= 30, got {}..{}",
                self.xi_min_exp, self.xi_max_exp
            )));
        }
        if self.eps_max < 0 || self.eps_min < self.eps_max || self.eps_min > 60 {
            return Err(Error::Precondition(format!(
                "epsilon exponents must satisfy 0 <= max <= min <= 60, got {}..{}",
                self.eps_max, self.eps_min
            )));
        }
        if self.kmax == Some(0) {
            return Err(Error::Precondition("kmax must be at least 1".into()));
        }
        Ok(())
    }

    fn monitor_options(&self, regime: Regime) -> MonitorOptions {
        let mut o = MonitorOptions::for_regime(regime, self.seed);
        o.xi_samples = (self.xi_min_exp..=self.xi_max_exp)
            .map(|j| match regime {
                Regime::High => 2f64.powi(j),
                Regime::Low => 2f64.powi(-j),
            })
            .collect();
        o.states = self.monitor_states;
        o
    }
}

/// Overall outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "CERTIFIED")]
    Certified,
    #[serde(rename = "CERTIFIED-WITH-FALLBACK")]
    CertifiedWithFallback,
    #[serde(rename = "FAILED")]
    Failed,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "CERTIFIED",
            Verdict::CertifiedWithFallback => "CERTIFIED-WITH-FALLBACK",
            Verdict::Failed => "FAILED",
        })
    }
}

/// The synthesized functional of one regime.
#[derive(Clone, Debug, Serialize)]
pub struct FunctionalReport {
    pub source: FunctionalSource,
    pub terms: Vec<Term>,
    pub text: String,
    pub latex: String,
    pub components: String,
    pub epsilon: Option<EpsilonCertificate>,
    pub sweep_error: Option<String>,
    #[serde(skip)]
    pub functional: LyapunovFunctional,
}

/// Rank-one kernel criteria at a mixed node next to the direct pairing
/// checks they are sufficient for.
#[derive(Clone, Debug, Serialize)]
pub struct RankOneCheck {
    pub node: String,
    pub m: String,
    pub assumption_set: MixedCase,
    pub fast_path: RankOneReport,
    pub mixing_vanishes: bool,
    pub cancellation: bool,
    /// Every criterion that holds is confirmed by the direct check.
    pub consistent: bool,
}

/// Analysis of one frequency regime.
#[derive(Clone, Debug, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub path: PathReport,
    pub certificate: DecayCertificate,
    pub functional: FunctionalReport,
    pub rank_one: Vec<RankOneCheck>,
}

/// Spectral exponent against the certified one.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentCheck {
    pub regime: Regime,
    pub certified: u32,
    pub spectral: Option<SpectralExponent>,
    pub error: Option<String>,
    /// Spectral exponent not larger than the certified one.
    pub consistent: bool,
    /// Spectral exponent equal to the certified one.
    pub sharp: bool,
}

/// Lyapunov monitor over one regime's frequency sweep.
#[derive(Clone, Debug, Serialize)]
pub struct MonitorSummary {
    pub regime: Regime,
    pub exponent: u32,
    pub rows: Vec<MonitorRow>,
    /// `max c / min c` of the weight-normalized constant.
    pub c_ratio: f64,
    pub error: Option<String>,
    pub pass: bool,
}

/// One CSV row of the frequency sweeps.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub regime: Regime,
    pub xi: f64,
    pub smin: f64,
    pub spectral_rate: f64,
    pub fitted_rate: Option<f64>,
    pub lyap_margin: f64,
}

/// Numerical checks of the certificates.
#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub exponents: Vec<ExponentCheck>,
    pub monitors: Vec<MonitorSummary>,
    pub sweep: Vec<SweepRow>,
}

/// Complete analysis of a system.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub system: String,
    pub n: usize,
    pub parameters: BTreeMap<String, String>,
    pub kalman: KalmanCertificate,
    pub high: RegimeReport,
    pub low: RegimeReport,
    pub cancellation_notes: Vec<String>,
    pub verification: Option<Verification>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

fn kalman_for(sys: &SystemSpec, cfg: &AnalysisConfig) -> KalmanCertificate {
    certify_kalman(sys, cfg.kmax.unwrap_or_else(|| default_kmax(sys)))
}

/// Kalman certificate of a system file.
pub fn run_kalman(file: &SystemFile, cfg: &AnalysisConfig) -> Result<KalmanCertificate> {
    cfg.validate()?;
    let sys = file.to_system()?;
    Ok(kalman_for(&sys, cfg))
}

fn functional_for(
    sys: &SystemSpec,
    path: &PathReport,
    kalman: &KalmanCertificate,
    cfg: &AnalysisConfig,
) -> Result<FunctionalReport> {
    let mut l = if path.fallback.is_some() {
        let order = kalman.order.ok_or(Error::KalmanViolated { rank: path.final_rank, n: sys.n })?;
        synthesize_kalman_functional(sys, order, path.regime)
    } else {
        let seq = admissible_sequence(required_sequence_length(path))?;
        synthesize_improved_functional(path, &seq, sys)?
    };
    let mut opts = SweepOptions::for_regime(path.regime, cfg.seed);
    opts.eps_max_exp = cfg.eps_max;
    opts.eps_min_exp = cfg.eps_min;
    let (epsilon, sweep_error) = match sweep_epsilon(&mut l, sys, &opts) {
        Ok(e) => (Some(e), None),
        Err(e) => {
            l = l.with_epsilon(pow2(-cfg.eps_max));
            (None, Some(e.to_string()))
        }
    };
    Ok(FunctionalReport {
        source: l.source,
        terms: l.terms.clone(),
        text: l.render_text(),
        latex: l.render_latex(),
        components: l.render_components(),
        epsilon,
        sweep_error,
        functional: l,
    })
}

fn rank_one_checks(sys: &SystemSpec, path: &PathReport) -> Result<Vec<RankOneCheck>> {
    if sys.bs_rank() != 1 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for rec in &path.mixed_data {
        let father = &path.nodes[rec.node];
        let fast = rank_one_fast_path(sys, &father.word, &rec.m)?;
        let (p, q) = mixing_matrices(&father.matrix, sys, rec.assumption_set, &rec.m);
        let mixing_vanishes = pairing_vanishes(&p, &q);
        let cancellation = check_cancellation(&father.matrix, &rec.m, sys, rec.assumption_set);
        let (mix, canc) = match rec.assumption_set {
            MixedCase::Case1 => (fast.mixing_case1, fast.cancellation_case1),
            MixedCase::Case2 => (fast.mixing_case2, fast.cancellation_case2),
        };
        let consistent = (!mix.satisfied() || mixing_vanishes) && (!canc.satisfied() || cancellation);
        out.push(RankOneCheck {
            node: father.label.clone(),
            m: format_rational(&rec.m),
            assumption_set: rec.assumption_set,
            fast_path: fast,
            mixing_vanishes,
            cancellation,
            consistent,
        });
    }
    Ok(out)
}

fn regime_report(sys: &SystemSpec, kalman: &KalmanCertificate, regime: Regime, cfg: &AnalysisConfig) -> Result<RegimeReport> {
    let path = run_tree(sys, regime)?;
    let certificate = certificate_from_path(&path, kalman)?;
    let functional = functional_for(sys, &path, kalman, cfg)?;
    let rank_one = rank_one_checks(sys, &path)?;
    Ok(RegimeReport { regime, path, certificate, functional, rank_one })
}

fn cancellation_notes(file: &SystemFile, high: &PathReport) -> Result<Vec<String>> {
    let active = file.active_cancellations()?;
    let mut notes = Vec::new();
    if high.any_cancellation() {
        let nodes: Vec<&str> = high.nodes.iter().filter(|n| n.cancellation).map(|n| n.label.as_str()).collect();
        if active.is_empty() {
            notes.push(format!("cancellation detected at {}", nodes.join(", ")));
        }
        for c in &active {
            notes.push(format!("cancellation detected at {}: {} holds ({})", nodes.join(", "), c.condition, c.note));
        }
    } else {
        for c in &file.cancellations {
            notes.push(format!("no cancellation: {} does not hold ({})", c.condition, c.note));
        }
    }
    Ok(notes)
}

fn analysis_verdict(r: &Report) -> Verdict {
    let regimes = [&r.high, &r.low];
    if regimes.iter().any(|g| g.functional.epsilon.is_none() || g.rank_one.iter().any(|c| !c.consistent)) {
        return Verdict::Failed;
    }
    if regimes.iter().any(|g| g.certificate.provenance == Provenance::KalmanGeneric) {
        Verdict::CertifiedWithFallback
    } else {
        Verdict::Certified
    }
}

/// Kalman analysis, tree paths in both regimes, functionals and
/// certificates, without numerical verification.
pub fn run_analysis(file: &SystemFile, cfg: &AnalysisConfig) -> Result<Report> {
    cfg.validate()?;
    let sys = file.to_system()?;
    let kalman = kalman_for(&sys, cfg);
    if !kalman.holds {
        let rank = kalman.generic_ranks.iter().copied().max().unwrap_or(0);
        return Err(Error::KalmanViolated { rank, n: sys.n });
    }
    let high = regime_report(&sys, &kalman, Regime::High, cfg)?;
    let low = regime_report(&sys, &kalman, Regime::Low, cfg)?;
    let cancellation_notes = cancellation_notes(file, &high.path)?;
    let mut notes = Vec::new();
    if high.certificate.exponent >= 1 {
        notes.push("high-frequency decay holds for data with extra Sobolev regularity; the index is not checked per mode".into());
    }
    for g in [&high, &low] {
        if let Some(f) = &g.path.fallback {
            notes.push(format!("{}: tree analysis fell back to the Kalman functional ({f:?})", g.regime));
        }
        if let Some(e) = &g.functional.sweep_error {
            notes.push(format!("{}: {e}", g.regime));
        }
    }
    let mut report = Report {
        system: file.name.clone(),
        n: sys.n,
        parameters: file.parameters.clone(),
        kalman,
        high,
        low,
        cancellation_notes,
        verification: None,
        notes,
        verdict: Verdict::Failed,
    };
    report.verdict = analysis_verdict(&report);
    Ok(report)
}

fn exponent_check(regime: Regime, certified: u32, fit: Result<SpectralExponent>) -> ExponentCheck {
    match fit {
        Ok(s) => ExponentCheck {
            regime,
            certified,
            consistent: s.exponent <= certified,
            sharp: s.exponent == certified,
            spectral: Some(s),
            error: None,
        },
        Err(e) => ExponentCheck { regime, certified, spectral: None, error: Some(e.to_string()), consistent: false, sharp: false },
    }
}

fn monitor_summary(sys: &SystemSpec, g: &RegimeReport, cfg: &AnalysisConfig) -> MonitorSummary {
    let exponent = g.certificate.exponent;
    match monitor_sweep(&g.functional.functional, sys, exponent, &cfg.monitor_options(g.regime)) {
        Ok(rows) => {
            let (lo, hi) = rows.iter().fold((f64::INFINITY, 0f64), |(lo, hi), r| (lo.min(r.c_empirical), hi.max(r.c_empirical)));
            let c_ratio = hi / lo;
            let pass = rows.iter().all(|r| r.pass) && lo > 0.0 && c_ratio <= C_RATIO_BOUND;
            MonitorSummary { regime: g.regime, exponent, rows, c_ratio, error: None, pass }
        }
        Err(e) => MonitorSummary { regime: g.regime, exponent, rows: Vec::new(), c_ratio: f64::NAN, error: Some(e.to_string()), pass: false },
    }
}

/// Spectral rate fitted from an exact-propagator trajectory, when the mode
/// decays by 10⁻³ within a representable time.
fn fitted_rate(sys: &SystemSpec, xi: f64, rate: f64, seed: u64) -> Option<f64> {
    if !(rate > 1e-6) {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = random_state(&mut rng, sys.n);
    decay_fit(&propagate_mode(sys, xi, &u0, 12.0 / rate, 240)).ok()
}

fn sweep_rows(sys: &SystemSpec, kalman: &KalmanCertificate, monitors: &[MonitorSummary], seed: u64) -> Vec<SweepRow> {
    let stack = build_kalman_stack(sys, kalman.order.unwrap_or(0));
    let pts: Vec<(Regime, f64, f64)> =
        monitors.iter().flat_map(|m| m.rows.iter().map(move |r| (m.regime, r.xi, r.worst_margin))).collect();
    pts.par_iter()
        .map(|&(regime, xi, lyap_margin)| {
            let rate = spectral_rate(sys, xi).rate;
            SweepRow {
                regime,
                xi,
                smin: smin_oracle(&stack, xi),
                spectral_rate: rate,
                fitted_rate: fitted_rate(sys, xi, rate, seed),
                lyap_margin,
            }
        })
        .collect()
}

fn verification_verdict(analysis: Verdict, v: &Verification) -> Verdict {
    let ok = v.exponents.iter().all(|e| e.consistent) && v.monitors.iter().all(|m| m.pass);
    if ok {
        analysis
    } else {
        Verdict::Failed
    }
}

/// [`run_analysis`] followed by spectral fits and Lyapunov monitors.
pub fn run_verification(file: &SystemFile, cfg: &AnalysisConfig) -> Result<Report> {
    let mut report = run_analysis(file, cfg)?;
    let sys = file.to_system()?;
    let exponents = vec![
        exponent_check(Regime::High, report.high.certificate.exponent, fit_hf_exponent(&sys)),
        exponent_check(Regime::Low, report.low.certificate.exponent, fit_lf_exponent(&sys)),
    ];
    let monitors = vec![monitor_summary(&sys, &report.high, cfg), monitor_summary(&sys, &report.low, cfg)];
    let sweep = sweep_rows(&sys, &report.kalman, &monitors, cfg.seed);
    for e in &exponents {
        if let (true, false, Some(s)) = (e.consistent, e.sharp, &e.spectral) {
            report.notes.push(format!(
                "{}: certified exponent {} exceeds the spectral exponent {}; the certificate holds but is not sharp",
                e.regime, e.certified, s.exponent
            ));
        }
    }
    let v = Verification { exponents, monitors, sweep };
    report.verdict = verification_verdict(report.verdict, &v);
    report.verification = Some(v);
    Ok(report)
}

/// CSV of the frequency sweeps: `regime,xi,smin,spectral_rate,fitted_rate,lyap_margin`.
pub fn sweep_csv(report: &Report) -> String {
    let mut s = String::from("regime,xi,smin,spectral_rate,fitted_rate,lyap_margin\n");
    if let Some(v) = &report.verification {
        for r in &v.sweep {
            let fitted = r.fitted_rate.map(|f| format!("{f:e}")).unwrap_or_default();
            let _ = writeln!(s, "{},{:e},{:e},{:e},{},{:e}", r.regime, r.xi, r.smin, r.spectral_rate, fitted, r.lyap_margin);
        }
    }
    s
}

fn opt_u32(v: Option<u32>) -> String {
    v.map_or_else(|| "n/a".into(), |x| x.to_string())
}

/// Human-readable Kalman summary.
pub fn render_kalman(name: &str, k: &KalmanCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "system: {name}");
    let _ = writeln!(s, "generic ranks: {:?}", k.generic_ranks);
    match k.order {
        Some(order) => {
            let _ = writeln!(s, "Kalman condition: holds with K = {order}");
        }
        None => {
            let _ = writeln!(s, "Kalman condition: FAILS");
        }
    }
    if !k.exceptional_points.is_empty() {
        let pts: Vec<String> = k.exceptional_points.iter().map(|r| format!("{:.6}", r.approx())).collect();
        let _ = writeln!(s, "exceptional frequencies: {}", pts.join(", "));
    } else {
        let _ = writeln!(s, "exceptional frequencies: none");
    }
    let slope = |e: &Option<crate::kalman::ExponentEstimate>| e.as_ref().map_or(String::new(), |e| format!(" (slope {:.4})", e.raw_slope));
    let _ = writeln!(s, "alpha = {}{}", opt_u32(k.alpha), slope(&k.alpha_fit));
    let _ = writeln!(s, "beta = {}{}", opt_u32(k.beta), slope(&k.beta_fit));
    for e in &k.fit_errors {
        let _ = writeln!(s, "warning: {e}");
    }
    s
}

fn render_regime(s: &mut String, g: &RegimeReport) {
    let name = match g.regime {
        Regime::High => "alpha~",
        Regime::Low => "beta~",
    };
    let _ = writeln!(s, "\n[{}]", g.regime);
    let _ = writeln!(s, "path: {}", g.path.labels().join(" -> "));
    for node in g.path.nodes.iter().skip(1) {
        let mut extra = String::new();
        if let Some(m) = &node.mixing {
            let _ = write!(extra, " m={}", format_rational(m));
        }
        if node.cancellation {
            extra.push_str(" cancellation");
        }
        let _ = writeln!(
            s,
            "  {:<14} {:<11} delta={} w={} gamma={}{}",
            node.label,
            format!("{:?}", node.case_tag),
            node.discrepancy,
            node.weight,
            node.gamma(),
            extra
        );
    }
    if let Some(f) = &g.path.fallback {
        let _ = writeln!(s, "fallback: {f:?}");
    }
    let prov = match g.certificate.provenance {
        Provenance::TreeImproved => "tree",
        Provenance::KalmanGeneric => "Kalman fallback",
    };
    let _ = writeln!(s, "{name} = {} ({prov})", g.certificate.exponent);
    match &g.functional.epsilon {
        Some(e) => {
            let _ = writeln!(s, "epsilon = {} (c1 = {:.4}, c2 = {:.4})", format_rational(&e.epsilon), e.c1, e.c2);
        }
        None => {
            let _ = writeln!(s, "epsilon sweep failed: {}", g.functional.sweep_error.as_deref().unwrap_or(""));
        }
    }
    let _ = writeln!(s, "L = {}", g.functional.text);
    for c in &g.rank_one {
        let _ = writeln!(
            s,
            "rank-one check at {} (m = {}): mixing {} / cancellation {} / consistent {}",
            c.node, c.m, c.mixing_vanishes, c.cancellation, c.consistent
        );
    }
}

/// Human-readable report.
pub fn render_text(r: &Report) -> String {
    let mut s = render_kalman(&r.system, &r.kalman);
    if !r.parameters.is_empty() {
        let ps: Vec<String> = r.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "parameters: {}", ps.join(", "));
    }
    render_regime(&mut s, &r.high);
    render_regime(&mut s, &r.low);
    if !r.cancellation_notes.is_empty() {
        let _ = writeln!(s);
        for n in &r.cancellation_notes {
            let _ = writeln!(s, "{n}");
        }
    }
    if let Some(v) = &r.verification {
        let _ = writeln!(s, "\n[verification]");
        for e in &v.exponents {
            match &e.spectral {
                Some(sp) => {
                    let _ = writeln!(
                        s,
                        "{} spectral exponent {} (raw {:.4}) vs certified {}: {}",
                        e.regime,
                        sp.exponent,
                        sp.raw,
                        e.certified,
                        if e.sharp { "sharp" } else if e.consistent { "consistent" } else { "VIOLATED" }
                    );
                }
                None => {
                    let _ = writeln!(s, "{} spectral fit failed: {}", e.regime, e.error.as_deref().unwrap_or(""));
                }
            }
        }
        for m in &v.monitors {
            let _ = writeln!(
                s,
                "{} monitor: {} frequencies, c ratio {:.3}, {}",
                m.regime,
                m.rows.len(),
                m.c_ratio,
                if m.pass { "pass" } else { "FAIL" }
            );
            if let Some(e) = &m.error {
                let _ = writeln!(s, "  error: {e}");
            }
            for row in &m.rows {
                let _ = writeln!(
                    s,
                    "  xi = {:<12e} c = {:<12.6e} margin = {:<12.4e} {}",
                    row.xi,
                    row.c_empirical,
                    row.worst_margin,
                    if row.pass { "ok" } else { "FAIL" }
                );
            }
        }
    }
    if !r.notes.is_empty() {
        let _ = writeln!(s);
        for n in &r.notes {
            let _ = writeln!(s, "note: {n}");
        }
    }
    let _ = writeln!(s, "\nverdict: {}", r.verdict);
    s
}

/// Machine-readable report.
pub fn render_json(r: &Report) -> String {
    serde_json::to_string_pretty(r).expect("report serialization")
}
