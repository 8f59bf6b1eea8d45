//! Frequency-pointwise Lyapunov functionals: the generic Kalman functional,
//! the tree-improved functional, their Hermitian forms, time derivatives
//! along the Fourier-mode flow, equivalence constants and the ε sweep.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kalman::SystemSpec;
use crate::polymat::{format_rational, pow2, rat, rational_from_f64, rational_to_f64, ConstMatrix, GaussRat, Mat, RatMatrix, Rational};
use crate::tree::{word_label, CaseTag, Letter, MixedCase, Node, PathReport, Regime};
use crate::verify::linalg::{hermitian_eigen, pencil_min_eig, rat_to_cmat, CMat, CVec, C64};
use crate::verify::symbol;

/// Exponent schedule `(p_k, q_k)` of the improved functional.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibleSequence {
    #[serde(serialize_with = "ser_rationals")]
    pub p: Vec<Rational>,
    #[serde(serialize_with = "ser_rationals")]
    pub q: Vec<Rational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&format_rational(r))?;
    }
    seq.end()
}

fn ser_rational<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(v))
}

impl AdmissibleSequence {
    /// `p_k` with 1-based `k`.
    pub fn p(&self, k: usize) -> &Rational {
        &self.p[k - 1]
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Checks `p₁ = 1`, `q₁ = 1/2`, positivity and
    /// `q_k < p_k − p_{k−1} < q_{k−1}` exactly.
    pub fn is_admissible(&self) -> bool {
        if self.p.is_empty() || self.p.len() != self.q.len() {
            return false;
        }
        if self.p[0] != Rational::one() || self.q[0] != rat(1, 2) {
            return false;
        }
        if self.p.iter().chain(&self.q).any(|v| !v.is_positive()) {
            return false;
        }
        (1..self.p.len()).all(|k| {
            let d = &self.p[k] - &self.p[k - 1];
            self.q[k] < d && d < self.q[k - 1]
        })
    }
}

/// `p₁ = 1`, `q₁ = 1/2`, `p_k = p_{k−1} + ¾q_{k−1}`, `q_k = q_{k−1}/2`.
pub fn admissible_sequence(k: usize) -> Result<AdmissibleSequence> {
    if k == 0 {
        return Err(Error::Precondition("admissible sequence needs K >= 1".into()));
    }
    let mut p = vec![Rational::one()];
    let mut q = vec![rat(1, 2)];
    for i in 1..k {
        p.push(&p[i - 1] + &q[i - 1] * rat(3, 4));
        q.push(&q[i - 1] / Rational::from_integer(2.into()));
    }
    let seq = AdmissibleSequence { p, q };
    debug_assert!(seq.is_admissible());
    Ok(seq)
}

/// Kind of a bilinear term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairKind {
    /// `Re⟨PÛ, QÛ⟩`.
    RePair,
    /// `Im⟨PÛ, ξQÛ⟩`, the Fourier form of `(PU, Q∂ₓU)`.
    ImXiPair,
}

/// One weighted term `coeff·ε^{eps_power}·|ξ|^{xi_power}·pair`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    #[serde(serialize_with = "ser_rational")]
    pub coeff: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub eps_power: Rational,
    pub xi_power: i32,
    pub kind: PairKind,
    pub left_label: String,
    pub right_label: String,
    #[serde(skip)]
    pub left: RatMatrix,
    #[serde(skip)]
    pub right: RatMatrix,
    /// `Sym(QᵀP)` for a Re pair, `(QᵀP − PᵀQ)/2` for an Im pair.
    #[serde(skip)]
    form: RatMatrix,
}

impl Term {
    pub fn new(
        coeff: Rational,
        eps_power: Rational,
        xi_power: i32,
        kind: PairKind,
        left: (RatMatrix, String),
        right: (RatMatrix, String),
    ) -> Self {
        let qp = &right.0.transpose() * &left.0;
        let form = match kind {
            PairKind::RePair => qp.sym_part(),
            PairKind::ImXiPair => qp.skew_part(),
        };
        Term { coeff, eps_power, xi_power, kind, left_label: left.1, right_label: right.1, left: left.0, right: right.0, form }
    }

    /// True when the pair is identically zero.
    pub fn vanishes(&self) -> bool {
        self.coeff.is_zero() || self.form.is_zero()
    }

    /// Hermitian matrix of the bare pair at frequency ξ.
    fn pair_matrix(&self, xi: f64) -> CMat {
        let f = rat_to_cmat(&self.form);
        match self.kind {
            PairKind::RePair => f,
            PairKind::ImXiPair => f * C64::new(0.0, -xi),
        }
    }

    fn pair_matrix_exact(&self, xi: &Rational) -> ConstMatrix {
        match self.kind {
            PairKind::RePair => self.form.to_gauss(),
            PairKind::ImXiPair => self.form.map(|v| GaussRat::new(Rational::zero(), -(v * xi))),
        }
    }
}

/// Origin of a functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FunctionalSource {
    KalmanGeneric { order: usize },
    TreeImproved,
}

/// `ℒ = ½|Û|² + Σ terms`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovFunctional {
    pub n: usize,
    pub regime: Regime,
    pub source: FunctionalSource,
    pub terms: Vec<Term>,
    #[serde(serialize_with = "ser_rational")]
    pub epsilon: Rational,
}

fn check_regime(regime: Regime, xi: f64) -> Result<()> {
    let ok = xi != 0.0
        && xi.is_finite()
        && match regime {
            Regime::High => xi.abs() >= 1.0,
            Regime::Low => xi.abs() <= 1.0,
        };
    if ok {
        Ok(())
    } else {
        Err(Error::RegimeMismatch {
            xi,
            regime: match regime {
                Regime::High => "HF",
                Regime::Low => "LF",
            },
        })
    }
}

fn quad(h: &CMat, u: &CVec) -> f64 {
    (u.adjoint() * h * u)[(0, 0)].re
}

impl LyapunovFunctional {
    /// The same terms with another ε.
    pub fn with_epsilon(&self, epsilon: Rational) -> Self {
        LyapunovFunctional { epsilon, ..self.clone() }
    }

    /// `ε^{p}` as the double nearest to it; the exact route uses the same
    /// number so both routes describe one functional.
    pub fn eps_factor(&self, p: &Rational) -> f64 {
        if self.epsilon.is_zero() {
            return 0.0;
        }
        (rational_to_f64(p) * rational_to_f64(&self.epsilon).log2()).exp2()
    }

    fn weight(&self, t: &Term, xi: f64) -> f64 {
        rational_to_f64(&t.coeff) * self.eps_factor(&t.eps_power) * xi.abs().powi(t.xi_power)
    }

    /// Hermitian matrix `H(ξ)` with `ℒ = ÛᴴH(ξ)Û`.
    pub fn hermitian(&self, xi: f64) -> CMat {
        let n = self.dimension();
        let mut h = CMat::identity(n, n) * C64::new(0.5, 0.0);
        for t in &self.terms {
            h += t.pair_matrix(xi) * C64::new(self.weight(t, xi), 0.0);
        }
        h
    }

    /// Exact `H(ξ)` at a rational frequency.
    pub fn hermitian_exact(&self, xi: &Rational) -> ConstMatrix {
        let n = self.dimension();
        let mut h: ConstMatrix = Mat::identity(n).scale(&GaussRat::real(rat(1, 2)));
        let axi = xi.abs();
        for t in &self.terms {
            let mut w = t.coeff.clone() * rational_from_f64(self.eps_factor(&t.eps_power));
            w = if t.xi_power >= 0 {
                w * num_traits::pow(axi.clone(), t.xi_power as usize)
            } else {
                w / num_traits::pow(axi.clone(), (-t.xi_power) as usize)
            };
            h = &h + &t.pair_matrix_exact(xi).scale(&GaussRat::real(w));
        }
        h
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// `ℒ(ξ, U)`.
    pub fn evaluate(&self, xi: f64, u: &CVec) -> Result<f64> {
        check_regime(self.regime, xi)?;
        Ok(quad(&self.hermitian(xi), u))
    }

    /// `dℒ/dt` along `Û' = −GÛ`, `G = iξA + Bᵃ + Bˢ`: by the product rule
    /// every form `ÛᴴMÛ` contributes `−2Re(ÛᴴMGÛ)`.
    pub fn ddt_evaluate(&self, sys: &SystemSpec, xi: f64, u: &CVec) -> Result<f64> {
        check_regime(self.regime, xi)?;
        let gu = symbol(sys, xi) * u;
        let h = self.hermitian(xi);
        Ok(-2.0 * (u.adjoint() * h * gu)[(0, 0)].re)
    }

    /// `D(ξ) = HG + GᴴH`, so that `dℒ/dt = −ÛᴴDÛ`.
    pub fn dissipation(&self, sys: &SystemSpec, xi: f64) -> CMat {
        let h = self.hermitian(xi);
        let g = symbol(sys, xi);
        &h * &g + g.adjoint() * &h
    }

    /// `dℒ/dt` evaluated exactly in rational arithmetic (the state's
    /// doubles are taken as exact values); its sign is reliable even when
    /// the double-precision value is lost in rounding.
    pub fn ddt_evaluate_exact(&self, d: &ConstMatrix, u: &CVec) -> f64 {
        let ue: Vec<GaussRat> = u.iter().map(|z| GaussRat::new(rational_from_f64(z.re), rational_from_f64(z.im))).collect();
        let mut acc = GaussRat::zero();
        for i in 0..ue.len() {
            for j in 0..ue.len() {
                acc = acc + ue[i].conj() * d.get(i, j).clone() * ue[j].clone();
            }
        }
        -rational_to_f64(&acc.re)
    }

    /// The energy `½|Û|²` alone.
    pub fn energy(n: usize, regime: Regime) -> Self {
        LyapunovFunctional { n, regime, source: FunctionalSource::TreeImproved, terms: Vec::new(), epsilon: Rational::zero() }
    }

    /// Exact `D(ξ)` and `H(ξ)` at a rational frequency.
    pub fn dissipation_exact(&self, sys: &SystemSpec, xi: &Rational) -> (ConstMatrix, ConstMatrix) {
        let h = self.hermitian_exact(xi);
        let g = &sys.a.map(|v| GaussRat::new(Rational::zero(), v * xi)) + &sys.b().to_gauss();
        let d = &(&h * &g) + &(&g.conj_transpose() * &h);
        (d, h)
    }

    /// Largest `c` with `dℒ/dt ≤ −c·ℒ` at frequency ξ: the smallest
    /// eigenvalue of the pencil `(D, H)`, with the eigenvector realizing it.
    pub fn decay_constant(&self, sys: &SystemSpec, xi: f64) -> Result<(f64, CVec)> {
        check_regime(self.regime, xi)?;
        let d = self.dissipation(sys, xi);
        let h = self.hermitian(xi);
        pencil_min_eig(&d, &h, || self.dissipation_exact(sys, &rational_from_f64(xi)))
            .ok_or(Error::NotEquivalent { c1: hermitian_eigen(&h).0[0] })
    }

    /// Smallest and largest eigenvalue of `H(ξ)` over the samples.
    pub fn equivalence_constants(&self, xi_samples: &[f64]) -> Result<(f64, f64)> {
        let mut c1 = f64::INFINITY;
        let mut c2 = f64::NEG_INFINITY;
        for &xi in xi_samples {
            check_regime(self.regime, xi)?;
            let (vals, _) = hermitian_eigen(&self.hermitian(xi));
            c1 = c1.min(vals[0]);
            c2 = c2.max(*vals.last().expect("nonempty spectrum"));
        }
        if !(c1 > 0.0) {
            return Err(Error::NotEquivalent { c1 });
        }
        Ok((c1, c2))
    }

    /// Plain-text rendering, one term per line.
    pub fn render_text(&self) -> String {
        let mut s = String::from("1/2 |U|^2");
        for t in &self.terms {
            let _ = write!(s, "\n  {}", term_text(t, false));
        }
        s
    }

    /// LaTeX rendering.
    pub fn render_latex(&self) -> String {
        let mut s = String::from("\\frac{1}{2}|\\widehat U|^2");
        for t in &self.terms {
            let _ = write!(s, "\n  {}", term_text(t, true));
        }
        s
    }

    /// Rendering in components `û₁ … û_n`, one row pairing per summand.
    pub fn render_components(&self) -> String {
        let mut s = String::from("1/2 |U|^2");
        for t in &self.terms {
            let _ = write!(s, "\n  {}", term_components(t));
        }
        s
    }
}

fn sign_and_magnitude(c: &Rational) -> (&'static str, Rational) {
    if c.is_negative() {
        ("- ", -c.clone())
    } else {
        ("+ ", c.clone())
    }
}

fn weight_text(t: &Term, latex: bool) -> String {
    let (sign, mag) = sign_and_magnitude(&t.coeff);
    let mut s = String::from(sign);
    if !mag.is_one() {
        if latex && !mag.is_integer() {
            let _ = write!(s, "\\frac{{{}}}{{{}}} ", mag.numer(), mag.denom());
        } else {
            s.push_str(&format_rational(&mag));
            s.push(' ');
        }
    }
    let eps = if latex { "\\varepsilon" } else { "eps" };
    if t.eps_power.is_one() {
        s.push_str(eps);
    } else {
        let _ = write!(s, "{eps}^{{{}}}", format_rational(&t.eps_power));
    }
    if t.xi_power != 0 {
        if latex {
            let _ = write!(s, " |\\xi|^{{{}}}", t.xi_power);
        } else {
            let _ = write!(s, " |xi|^{}", t.xi_power);
        }
    }
    s
}

fn term_text(t: &Term, latex: bool) -> String {
    let w = weight_text(t, latex);
    let (l, r) = (&t.left_label, &t.right_label);
    match (t.kind, latex) {
        (PairKind::RePair, false) => format!("{w} Re<{l}U, {r}U>"),
        (PairKind::ImXiPair, false) => format!("{w} Im<{l}U, xi {r}U>"),
        (PairKind::RePair, true) => format!("{w}\\,\\mathrm{{Re}}\\langle {l}\\widehat U, {r}\\widehat U\\rangle"),
        (PairKind::ImXiPair, true) => format!("{w}\\,\\mathrm{{Im}}\\langle {l}\\widehat U, \\xi {r}\\widehat U\\rangle"),
    }
}

fn linear_form(row: &[Rational]) -> String {
    let mut s = String::new();
    for (j, c) in row.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let (sign, mag) = sign_and_magnitude(c);
        if s.is_empty() {
            if c.is_negative() {
                s.push('-');
            }
        } else {
            s.push(' ');
            s.push_str(sign);
        }
        if !mag.is_one() {
            s.push_str(&format_rational(&mag));
        }
        let _ = write!(s, "u{}", j + 1);
    }
    s
}

fn term_components(t: &Term) -> String {
    let w = weight_text(t, false);
    let mut parts = Vec::new();
    for i in 0..t.left.rows() {
        let l = linear_form(t.left.row(i));
        let r = linear_form(t.right.row(i));
        if l.is_empty() || r.is_empty() {
            continue;
        }
        parts.push(match t.kind {
            PairKind::RePair => format!("Re<{l}, {r}>"),
            PairKind::ImXiPair => format!("Im<{l}, xi ({r})>"),
        });
    }
    if parts.is_empty() {
        parts.push("0".into());
    }
    format!("{w} [{}]", parts.join(" + "))
}

/// Expansion of `Bˢ(sA + Bᵃ)^j` in powers of `s = iξ`: entry `a` holds the
/// matrix coefficient of `s^a` and the words that sum to it.
fn expand_power(sys: &SystemSpec, j: usize) -> Vec<(RatMatrix, Vec<Vec<Letter>>)> {
    let mut cur: Vec<(RatMatrix, Vec<Vec<Letter>>)> = vec![(sys.bs.clone(), vec![Vec::new()])];
    for _ in 0..j {
        let mut next: Vec<(RatMatrix, Vec<Vec<Letter>>)> =
            (0..=cur.len()).map(|_| (RatMatrix::zeros(sys.n, sys.n), Vec::new())).collect();
        for (a, (m, words)) in cur.iter().enumerate() {
            next[a].0 = &next[a].0 + &(m * &sys.ba);
            next[a + 1].0 = &next[a + 1].0 + &(m * &sys.a);
            for w in words {
                let mut wb = w.clone();
                wb.push(Letter::Ba);
                next[a].1.push(wb);
                let mut wa = w.clone();
                wa.push(Letter::A);
                next[a + 1].1.push(wa);
            }
        }
        cur = next;
    }
    cur
}

fn words_label(words: &[Vec<Letter>]) -> String {
    if words.len() == 1 {
        return word_label(&words[0]);
    }
    let parts: Vec<String> = words.iter().map(|w| word_label(w).trim_start_matches("B^s").to_string()).collect();
    format!("B^s({})", parts.join(" + "))
}

/// ε power `m_k = k − k²/(4K²)` of the generic functional.
pub fn kalman_eps_power(k: usize, order: usize) -> Rational {
    let k = Rational::from_integer(k.into());
    let kk = Rational::from_integer(order.into());
    &k - &k * &k / (Rational::from_integer(4.into()) * &kk * &kk)
}

/// Generic functional `½|Û|² + Σ_k ε^{m_k}w_k(ξ)Re⟨BˢG^{k−1}Û, BˢG^kÛ⟩`,
/// `G = iξA + Bᵃ`, `w_k = |ξ|^{−2k}` in HF and 1 in LF, with ξ expanded so
/// every term carries real matrices and a pure power of |ξ|.
pub fn synthesize_kalman_functional(sys: &SystemSpec, order: usize, regime: Regime) -> LyapunovFunctional {
    let mut terms = Vec::new();
    for k in 1..=order {
        let left = expand_power(sys, k - 1);
        let right = expand_power(sys, k);
        let eps = kalman_eps_power(k, order);
        let shift = match regime {
            Regime::High => -2 * k as i32,
            Regime::Low => 0,
        };
        for (a, (p, pw)) in left.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (b, (q, qw)) in right.iter().enumerate() {
                if q.is_zero() {
                    continue;
                }
                // Re(i^{a−b}⟨P,Q⟩)·ξ^{a+b}.
                let (coeff, kind, xp) = match (a as i64 - b as i64).rem_euclid(4) {
                    0 => (1, PairKind::RePair, a + b),
                    2 => (-1, PairKind::RePair, a + b),
                    1 => (-1, PairKind::ImXiPair, a + b - 1),
                    _ => (1, PairKind::ImXiPair, a + b - 1),
                };
                let t = Term::new(
                    Rational::from_integer(coeff.into()),
                    eps.clone(),
                    xp as i32 + shift,
                    kind,
                    (p.clone(), words_label(pw)),
                    (q.clone(), words_label(qw)),
                );
                if !t.vanishes() {
                    terms.push(t);
                }
            }
        }
    }
    LyapunovFunctional { n: sys.n, regime, source: FunctionalSource::KalmanGeneric { order }, terms, epsilon: pow2(-2) }
}

fn node_terms(report: &PathReport, node: &Node, seq: &AdmissibleSequence, sys: &SystemSpec) -> Vec<Term> {
    let father = &report.nodes[node.parent.expect("non-root node")];
    let x = &father.matrix;
    let xl = father.label.clone();
    let eps = seq.p(node.eps_index()).clone();
    let xi_power = match report.regime {
        Regime::High if node.cancellation => -2 * node.accumulated_loss as i32,
        Regime::High => -2 * node.accumulated_loss as i32 - 2,
        Regime::Low => 2 * node.accumulated_loss as i32,
    };
    let mut out = Vec::new();
    let one = Rational::one();
    let lbl = |suffix: &[Letter]| {
        let mut w = father.word.clone();
        w.extend_from_slice(suffix);
        word_label(&w)
    };
    match node.case_tag {
        CaseTag::Left | CaseTag::EitherLeft | CaseTag::MixedLeft => {
            out.push(Term::new(one.clone(), eps.clone(), xi_power, PairKind::ImXiPair, (x.clone(), xl.clone()), (x * &sys.a, lbl(&[Letter::A]))));
        }
        CaseTag::Right | CaseTag::EitherRight | CaseTag::MixedRight => {
            out.push(Term::new(one.clone(), eps.clone(), xi_power, PairKind::RePair, (x.clone(), xl.clone()), (x * &sys.ba, lbl(&[Letter::Ba]))));
        }
        CaseTag::Root => {}
    }
    if let (Some(m), Some(variant)) = (&node.mixing, node.variant) {
        let (p, q) = match variant {
            MixedCase::Case1 => (
                (x * &sys.a, lbl(&[Letter::A])),
                (&(x * &sys.ba) * &sys.a, lbl(&[Letter::Ba, Letter::A])),
            ),
            MixedCase::Case2 => (
                (&(x * &sys.a) * &sys.ba, lbl(&[Letter::A, Letter::Ba])),
                (x * &sys.ba, lbl(&[Letter::Ba])),
            ),
        };
        let t = Term::new(m.clone(), eps, xi_power, PairKind::RePair, p, q);
        if !t.vanishes() {
            out.push(t);
        }
    }
    out
}

/// Largest ε index used by a path.
pub fn required_sequence_length(report: &PathReport) -> usize {
    report.nodes.iter().map(Node::eps_index).max().unwrap_or(1).max(1)
}

/// Tree-improved functional: one term group per chosen node, weighted by
/// `ε^{p_k}` and the node's frequency weight.
pub fn synthesize_improved_functional(report: &PathReport, seq: &AdmissibleSequence, sys: &SystemSpec) -> Result<LyapunovFunctional> {
    if !report.complete || report.fallback.is_some() {
        return Err(Error::Precondition("improved functional needs a complete path without fallback".into()));
    }
    if seq.len() < required_sequence_length(report) {
        return Err(Error::Precondition(format!(
            "admissible sequence of length {} is shorter than the path needs ({})",
            seq.len(),
            required_sequence_length(report)
        )));
    }
    let mut terms = Vec::new();
    for node in report.nodes.iter().skip(1) {
        terms.extend(node_terms(report, node, seq, sys));
    }
    Ok(LyapunovFunctional { n: sys.n, regime: report.regime, source: FunctionalSource::TreeImproved, terms, epsilon: pow2(-2) })
}

/// Settings of the ε sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    /// ε runs over `2^{−eps_max_exp} … 2^{−eps_min_exp}`.
    pub eps_max_exp: i32,
    pub eps_min_exp: i32,
    pub xi_samples: Vec<f64>,
    pub states_per_xi: usize,
    pub seed: u64,
    /// Smallest accepted lower equivalence constant.
    pub c1_bound: f64,
}

impl SweepOptions {
    pub fn for_regime(regime: Regime, seed: u64) -> Self {
        let xi_samples = match regime {
            Regime::High => (0..=14).step_by(2).map(|j| 2f64.powi(j)).collect(),
            Regime::Low => (0..=14).step_by(2).map(|j| 2f64.powi(-j)).collect(),
        };
        SweepOptions { eps_max_exp: 2, eps_min_exp: 12, xi_samples, states_per_xi: 64, seed, c1_bound: 0.25 }
    }
}

/// Outcome of the ε sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonCertificate {
    #[serde(serialize_with = "ser_rational")]
    pub epsilon: Rational,
    pub c1: f64,
    pub c2: f64,
    /// Smallest pencil eigenvalue `min_ξ λ_min(D, H)` over the samples.
    pub min_decay_constant: f64,
    pub xi_samples: Vec<f64>,
    /// Values of ε rejected before the accepted one.
    pub rejected: Vec<String>,
}

/// Random complex state with entries uniform in the unit square.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
}

fn check_epsilon(l: &LyapunovFunctional, sys: &SystemSpec, opts: &SweepOptions) -> std::result::Result<(f64, f64, f64), String> {
    let (c1, c2) = l.equivalence_constants(&opts.xi_samples).map_err(|e| e.to_string())?;
    if c1 < opts.c1_bound {
        return Err(format!("c1 = {c1:.4} < {}", opts.c1_bound));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut min_c = f64::INFINITY;
    for &xi in &opts.xi_samples {
        for _ in 0..opts.states_per_xi {
            let u = random_state(&mut rng, sys.n);
            let d = l.ddt_evaluate(sys, xi, &u).map_err(|e| e.to_string())?;
            if !(d < 0.0) {
                return Err(format!("dL/dt = {d:e} >= 0 at xi = {xi}"));
            }
        }
        let (c, _) = l.decay_constant(sys, xi).map_err(|e| e.to_string())?;
        if !(c > 0.0) {
            return Err(format!("dissipation not positive at xi = {xi} (pencil eigenvalue {c:e})"));
        }
        min_c = min_c.min(c);
    }
    Ok((c1, c2, min_c))
}

/// Picks the largest `ε = 2^{−k}` for which the functional is equivalent to
/// the energy with `c₁ ≥ ¼` and strictly dissipative at every sampled ξ,
/// and stores it in `l`.
pub fn sweep_epsilon(l: &mut LyapunovFunctional, sys: &SystemSpec, opts: &SweepOptions) -> Result<EpsilonCertificate> {
    let mut rejected = Vec::new();
    for k in opts.eps_max_exp..=opts.eps_min_exp {
        let cand = l.with_epsilon(pow2(-k));
        match check_epsilon(&cand, sys, opts) {
            Ok((c1, c2, min_c)) => {
                l.epsilon = pow2(-k);
                return Ok(EpsilonCertificate {
                    epsilon: pow2(-k),
                    c1,
                    c2,
                    min_decay_constant: min_c,
                    xi_samples: opts.xi_samples.clone(),
                    rejected,
                });
            }
            Err(why) => rejected.push(format!("2^-{k}: {why}")),
        }
    }
    Err(Error::EpsilonSweepFailed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::int;

    fn rm(rows: &[&[i64]]) -> RatMatrix {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    fn damped() -> SystemSpec {
        SystemSpec::new("damped", rm(&[&[0, 1], &[1, 0]]), RatMatrix::zeros(2, 2), rm(&[&[1, 0], &[0, 0]])).unwrap()
    }

    fn cv(v: &[(f64, f64)]) -> CVec {
        CVec::from_iterator(v.len(), v.iter().map(|&(a, b)| C64::new(a, b)))
    }

    #[test]
    fn admissible_sequence_values() {
        let s = admissible_sequence(3).unwrap();
        assert_eq!(s.p, vec![int(1), rat(11, 8), rat(25, 16)]);
        assert_eq!(s.q, vec![rat(1, 2), rat(1, 4), rat(1, 8)]);
        assert!(s.is_admissible());
        assert!(admissible_sequence(0).is_err());
    }

    #[test]
    fn kalman_eps_powers_are_concave() {
        let k = 4;
        let m: Vec<Rational> = (0..=k + 1).map(|i| kalman_eps_power(i, k)).collect();
        for i in 1..=k {
            assert!(m[i] > m[i - 1]);
            assert!(m[i].clone() * int(2) > &m[i - 1] + &m[i + 1]);
        }
    }

    #[test]
    fn damped_wave_kalman_functional_by_hand() {
        // ℒ = ½|U|² + ε|ξ|^{-2}Im⟨u, ξv⟩ in HF.
        let sys = damped();
        let l = synthesize_kalman_functional(&sys, 1, Regime::High);
        assert_eq!(l.terms.len(), 1);
        assert_eq!(l.terms[0].kind, PairKind::ImXiPair);
        assert_eq!(l.terms[0].xi_power, -2);
        let l = l.with_epsilon(rat(1, 4));
        let xi = 2.0;
        let u = cv(&[(1.0, 0.0), (0.0, 1.0)]);
        let eps = l.eps_factor(&l.terms[0].eps_power);
        let by_hand = 0.5 * u.norm_squared() + eps / (xi * xi) * (u[0] * (u[1] * xi).conj()).im;
        assert!((l.evaluate(xi, &u).unwrap() - by_hand).abs() < 1e-14);
    }

    #[test]
    fn energy_derivative_is_minus_bs_form() {
        let sys = damped();
        let l = synthesize_kalman_functional(&sys, 1, Regime::High).with_epsilon(Rational::zero());
        let u = cv(&[(0.3, -1.0), (2.0, 0.5)]);
        let d = l.ddt_evaluate(&sys, 3.0, &u).unwrap();
        assert!((d + u[0].norm_sqr()).abs() < 1e-12);
        assert!((l.evaluate(3.0, &u).unwrap() - 0.5 * u.norm_squared()).abs() < 1e-14);
    }

    #[test]
    fn regime_is_enforced() {
        let l = synthesize_kalman_functional(&damped(), 1, Regime::High);
        let u = cv(&[(1.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(l.evaluate(0.5, &u), Err(Error::RegimeMismatch { .. })));
        assert!(matches!(l.evaluate(0.0, &u), Err(Error::RegimeMismatch { .. })));
    }

    #[test]
    fn exact_and_float_forms_agree() {
        let sys = damped();
        let l = synthesize_kalman_functional(&sys, 1, Regime::Low).with_epsilon(rat(1, 8));
        let xi = 0.375;
        let h = l.hermitian(xi);
        let he = l.hermitian_exact(&rational_from_f64(xi));
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[(i, j)] - he.get(i, j).to_c64()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sweep_finds_epsilon_for_damped_wave() {
        let sys = damped();
        for regime in [Regime::High, Regime::Low] {
            let mut l = synthesize_kalman_functional(&sys, 1, regime);
            let cert = sweep_epsilon(&mut l, &sys, &SweepOptions::for_regime(regime, 7)).unwrap();
            assert!(cert.c1 >= 0.25);
            assert!(cert.min_decay_constant > 0.0);
        }
    }
}
