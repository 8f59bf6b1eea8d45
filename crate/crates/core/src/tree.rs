//! The binary-tree path through the nodes `X = Bˢ·w(A, Bᵃ)`: rank-based
//! case selection, the mixed-case assumptions, the mixing coefficient,
//! cancellation detection and the exponents α̃, β̃.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kalman::{KalmanCertificate, SystemSpec};
use crate::polymat::{echelon_rank, format_rational, Mat, RatMatrix, Rational};

/// Frequency regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    #[serde(rename = "HF")]
    High,
    #[serde(rename = "LF")]
    Low,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::High => "HF",
            Regime::Low => "LF",
        })
    }
}

/// Letter of a node word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Letter {
    A,
    Ba,
}

/// Renders a word as `B^s` followed by its letters.
pub fn word_label(word: &[Letter]) -> String {
    let mut s = String::from("B^s");
    let mut i = 0;
    while i < word.len() {
        let run = word[i..].iter().take_while(|&&l| l == word[i]).count();
        let base = match word[i] {
            Letter::A => "A",
            Letter::Ba => "B^a",
        };
        match (run, word[i]) {
            (1, _) => s.push_str(base),
            (k, Letter::A) => s.push_str(&format!("A^{k}")),
            (k, Letter::Ba) => s.push_str(&format!("(B^a)^{k}")),
        }
        i += run;
    }
    s
}

/// How a node entered the path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    Root,
    Left,
    Right,
    MixedLeft,
    MixedRight,
    EitherLeft,
    EitherRight,
}

/// Outcome of the four rank comparisons at a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeCase {
    Left,
    Right,
    Both,
    Either,
    Stop,
}

/// Assumption set used at a mixed node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MixedCase {
    Case1,
    Case2,
}

/// A node of the path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Node {
    pub word: Vec<Letter>,
    pub label: String,
    #[serde(skip)]
    pub matrix: RatMatrix,
    pub level: usize,
    pub parent: Option<usize>,
    pub case_tag: CaseTag,
    /// δ: added to the loss of every child.
    pub discrepancy: u32,
    /// 1 when the norm recovered through this node carries the extra
    /// frequency weight.
    pub weight: u32,
    pub cancellation: bool,
    /// α_k (HF) or β_k (LF): the sum of the ancestors' discrepancies.
    pub accumulated_loss: u32,
    /// Offset added to the level when picking the ε power.
    pub eps_shift: usize,
    /// Mixing coefficient and assumption set for the two children of a
    /// mixed node.
    #[serde(serialize_with = "ser_opt_rational")]
    pub mixing: Option<Rational>,
    pub variant: Option<MixedCase>,
}

impl Node {
    /// γ: regularity of the recovered norm.
    pub fn gamma(&self) -> u32 {
        self.accumulated_loss + self.weight
    }

    /// Index of the ε power `p_k` of the node's functional.
    pub fn eps_index(&self) -> usize {
        self.level + self.eps_shift
    }
}

fn ser_opt_rational<S: serde::Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&format_rational(r)),
        None => s.serialize_none(),
    }
}

/// Record of a mixed node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedRecord {
    /// Index of the father node.
    pub node: usize,
    #[serde(serialize_with = "ser_rational")]
    pub m: Rational,
    pub assumption_set: MixedCase,
    pub cancellation: bool,
}

fn ser_rational<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(v))
}

/// Why the improved analysis was abandoned.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Fallback {
    /// "Left and Right" met at low frequency.
    LowFrequencyMixed { node: String },
    /// No admissible assumption set or mixing coefficient at a mixed node.
    MixedUnavailable { node: String },
}

/// The path followed by the tree algorithm in one regime.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathReport {
    pub regime: Regime,
    pub nodes: Vec<Node>,
    /// Case found at each visited node, in visiting order.
    pub visits: Vec<(String, NodeCase)>,
    pub final_rank: usize,
    pub complete: bool,
    pub mixed_data: Vec<MixedRecord>,
    pub fallback: Option<Fallback>,
}

impl PathReport {
    /// Labels of the chosen nodes in order.
    pub fn labels(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.label.clone()).collect()
    }

    pub fn any_cancellation(&self) -> bool {
        self.nodes.iter().any(|n| n.cancellation)
    }
}

/// Where an exponent comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    KalmanGeneric,
    TreeImproved,
}

/// Regime-tagged decay exponent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayCertificate {
    pub regime: Regime,
    pub exponent: u32,
    pub provenance: Provenance,
    /// γ of every chosen node.
    pub exponent_per_node: Vec<(String, u32)>,
}

/// Switches of the tree algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeOptions {
    /// When false, every cancellation test is treated as failing.
    pub detect_cancellations: bool,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions { detect_cancellations: true }
    }
}

fn stacked_rank(stack: &[RatMatrix], extra: &[&RatMatrix]) -> usize {
    let mut blocks: Vec<RatMatrix> = stack.to_vec();
    blocks.extend(extra.iter().map(|m| (*m).clone()));
    echelon_rank(&Mat::vstack(&blocks))
}

/// Classifies `x` (the last chosen node) against the stacked rows of
/// `stack` by comparing the ranks gained by `xA`, `xBᵃ` and both.
///
/// The tests run in the order Stop, Either, Both, Left, Right. When both
/// children grow the rank, the joint stack adds nothing beyond `xA` and
/// `xA` grows it more than `xBᵃ`, the node is treated as Left.
pub fn classify_node(stack: &[RatMatrix], x: &RatMatrix, sys: &SystemSpec) -> NodeCase {
    let xa = x * &sys.a;
    let xb = x * &sys.ba;
    let r = stacked_rank(stack, &[]);
    let ra = stacked_rank(stack, &[&xa]);
    let rb = stacked_rank(stack, &[&xb]);
    if ra == r && rb == r {
        return NodeCase::Stop;
    }
    if ra > r && rb > r {
        let rj = stacked_rank(stack, &[&xa, &xb]);
        if rj == ra && rj == rb {
            return NodeCase::Either;
        }
        if rj > ra {
            return NodeCase::Both;
        }
        return if ra >= rb { NodeCase::Left } else { NodeCase::Right };
    }
    if ra > r {
        NodeCase::Left
    } else {
        NodeCase::Right
    }
}

/// Exact coefficients `c` with `x = Σ cᵢ basisᵢ` (as matrices), if any.
/// Free coefficients of a non-unique solution are set to zero.
pub fn span_coefficients(x: &RatMatrix, basis: &[RatMatrix]) -> Option<Vec<Rational>> {
    let cols: Vec<Vec<Rational>> = basis.iter().map(|b| b.vectorize()).collect();
    let rhs = x.vectorize();
    let rows = rhs.len();
    let nb = basis.len();
    // Augmented system [cols | rhs] reduced by Gauss–Jordan over ℚ.
    let mut m: Vec<Vec<Rational>> = (0..rows)
        .map(|i| {
            let mut r: Vec<Rational> = cols.iter().map(|c| c[i].clone()).collect();
            r.push(rhs[i].clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..nb {
        let Some(p) = (row..rows).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = Rational::one() / m[row][col].clone();
        for v in m[row].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                let pivot_row = m[row].clone();
                for (v, p) in m[i].iter_mut().zip(&pivot_row).take(nb + 1) {
                    *v = v.clone() - f.clone() * p.clone();
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| !r[nb].is_zero()) {
        return None;
    }
    let mut c = vec![Rational::zero(); nb];
    for (i, &col) in pivots.iter().enumerate() {
        c[col] = m[i][nb].clone();
    }
    Some(c)
}

fn in_span(x: &RatMatrix, basis: &[RatMatrix]) -> bool {
    span_coefficients(x, basis).is_some()
}

/// `⟨P∂ₓU, QU⟩` integrates to zero for every `U` iff `PᵀQ` is symmetric.
pub fn pairing_vanishes(p: &RatMatrix, q: &RatMatrix) -> bool {
    (&p.transpose() * q).is_symmetric()
}

/// Solutions of a scalar linear matrix equation `m·S₁ = S₀`.
#[derive(Clone, Debug, PartialEq)]
pub enum MixingSolution {
    Unique(Rational),
    /// The equation holds for every `m`.
    Any,
    None,
}

fn solve_scalar(s1: &RatMatrix, s0: &RatMatrix) -> MixingSolution {
    if s1.is_zero() {
        return if s0.is_zero() { MixingSolution::Any } else { MixingSolution::None };
    }
    let idx = s1.entries().iter().position(|v| !v.is_zero()).expect("nonzero matrix");
    let m = s0.entries()[idx].clone() / s1.entries()[idx].clone();
    if s1.scale(&m) == *s0 {
        MixingSolution::Unique(m)
    } else {
        MixingSolution::None
    }
}

/// The pairing `⟨P∂ₓU, QU⟩` whose vanishing defines `m` at father `x`,
/// written as `P = P₀`, `Q = Q₀ + m·Q₁`.
fn mixing_pairing(x: &RatMatrix, sys: &SystemSpec, variant: MixedCase) -> (RatMatrix, RatMatrix, RatMatrix, RatMatrix) {
    let a = &sys.a;
    let ba = &sys.ba;
    match variant {
        // ⟨XA∂ₓU, −XBᵃU + m·XBᵃA²U⟩
        MixedCase::Case1 => {
            let p = x * a;
            let xb = x * ba;
            let q0 = xb.scale(&-Rational::one());
            let q1 = &(&xb * a) * a;
            (p.clone(), q0, p, q1)
        }
        // ⟨m·XABᵃA∂ₓU − XA∂ₓU, XBᵃU⟩
        MixedCase::Case2 => {
            let xa = x * a;
            let q = x * ba;
            let p0 = xa.scale(&-Rational::one());
            let p1 = &(&xa * ba) * a;
            (p0, q.clone(), p1, q)
        }
    }
}

/// Mixing coefficient of a mixed node with father `x`: the `m` making the
/// Case 1 pairing `⟨XA∂ₓU, −XBᵃU + mXBᵃA²U⟩` (or the Case 2 pairing
/// `⟨mXABᵃA∂ₓU − XA∂ₓU, XBᵃU⟩`) vanish identically.
pub fn mixing_equation(x: &RatMatrix, sys: &SystemSpec, variant: MixedCase) -> MixingSolution {
    let (p0, q0, p1, q1) = mixing_pairing(x, sys, variant);
    // Skew part of PᵀQ must vanish; it is affine in m.
    let s0 = (&p0.transpose() * &q0).skew_part();
    let s1 = match variant {
        MixedCase::Case1 => (&p0.transpose() * &q1).skew_part(),
        MixedCase::Case2 => (&p1.transpose() * &q0).skew_part(),
    };
    solve_scalar(&s1, &s0.scale(&-Rational::one()))
}

/// Unique mixing coefficient, or [`Error::NoSolution`].
pub fn solve_mixing_coefficient(x: &RatMatrix, sys: &SystemSpec, variant: MixedCase) -> Result<Rational> {
    match mixing_equation(x, sys, variant) {
        MixingSolution::Unique(m) => Ok(m),
        MixingSolution::Any => Ok(Rational::zero()),
        MixingSolution::None => Err(Error::NoSolution),
    }
}

/// Pairing `⟨P'∂ₓU, Q'U⟩` of the mixed cancellation conditions:
/// Case 1 `⟨XBᵃA∂ₓU, X(I − mA²)U⟩`, Case 2 `⟨XBᵃA∂ₓU, X(I − mABᵃ)U⟩`.
fn cancellation_pair(x: &RatMatrix, m: &Rational, sys: &SystemSpec, variant: MixedCase) -> (RatMatrix, RatMatrix) {
    let i = RatMatrix::identity(sys.n);
    let p = &(x * &sys.ba) * &sys.a;
    let t = match variant {
        MixedCase::Case1 => &sys.a * &sys.a,
        MixedCase::Case2 => &sys.a * &sys.ba,
    };
    let q = x * &(&i - &t.scale(m));
    (p, q)
}

/// Whether the mixed cancellation condition holds at father `x`.
pub fn check_cancellation(x: &RatMatrix, m: &Rational, sys: &SystemSpec, variant: MixedCase) -> bool {
    let (p, q) = cancellation_pair(x, m, sys, variant);
    pairing_vanishes(&p, &q)
}

/// The `m` solving the cancellation condition alone, used when the mixing
/// equation leaves `m` free.
fn cancellation_m(x: &RatMatrix, sys: &SystemSpec, variant: MixedCase) -> Option<Rational> {
    let (p, q0) = cancellation_pair(x, &Rational::zero(), sys, variant);
    let (_, q1) = cancellation_pair(x, &Rational::one(), sys, variant);
    let dq = &q1 - &q0;
    let s0 = (&p.transpose() * &q0).skew_part();
    let s1 = (&p.transpose() * &dq).skew_part();
    match solve_scalar(&s1, &s0.scale(&-Rational::one())) {
        MixingSolution::Unique(m) => Some(m),
        _ => None,
    }
}

/// Right-path cancellation at father `x`: `X(Bᵃ)²` lies in the span of
/// the chosen nodes and `XBᵃ`, and the derivative terms
/// `⟨XA∂ₓU, XBᵃU⟩ + ⟨XBᵃA∂ₓU, XU⟩` vanish identically.
pub fn check_right_cancellation(x: &RatMatrix, chosen: &[RatMatrix], sys: &SystemSpec) -> bool {
    let xb = x * &sys.ba;
    let xbb = &xb * &sys.ba;
    let mut basis = chosen.to_vec();
    basis.push(xb.clone());
    if !in_span(&xbb, &basis) {
        return false;
    }
    let xa = x * &sys.a;
    let xba = &xb * &sys.a;
    (&(&xa.transpose() * &xb) + &(&xba.transpose() * x)).is_symmetric()
}

struct MixedOutcome {
    variant: MixedCase,
    m: Rational,
    cancellation: bool,
}

fn try_mixed(x: &RatMatrix, chosen: &[RatMatrix], sys: &SystemSpec, opts: TreeOptions) -> Option<MixedOutcome> {
    let a = &sys.a;
    let ba = &sys.ba;
    let xa = x * a;
    let xb = x * ba;
    for variant in [MixedCase::Case1, MixedCase::Case2] {
        let spans = match variant {
            MixedCase::Case1 => in_span(&(&xa * a), chosen) && in_span(&(&xa * ba), chosen),
            MixedCase::Case2 => in_span(&(&xb * ba), chosen) && in_span(&(&xb * a), chosen),
        };
        if !spans {
            continue;
        }
        let technical = match variant {
            MixedCase::Case1 => {
                let mut basis = chosen.to_vec();
                basis.push(&xb * a);
                basis.push(xb.clone());
                in_span(&(&(&xb * a) * ba), &basis)
            }
            MixedCase::Case2 => {
                let mut basis = chosen.to_vec();
                basis.push(xa.clone());
                in_span(&(&(&xa * ba) * ba), &basis)
            }
        };
        if !technical {
            continue;
        }
        let m = match mixing_equation(x, sys, variant) {
            MixingSolution::Unique(m) => m,
            MixingSolution::Any => {
                let c = if opts.detect_cancellations { cancellation_m(x, sys, variant) } else { None };
                c.unwrap_or_else(Rational::zero)
            }
            MixingSolution::None => continue,
        };
        let cond = match variant {
            MixedCase::Case1 => {
                let mut basis = chosen.to_vec();
                basis.push(xb.clone());
                in_span(&(&xb * ba), &basis)
            }
            MixedCase::Case2 => true,
        };
        let cancellation = opts.detect_cancellations && cond && check_cancellation(x, &m, sys, variant);
        return Some(MixedOutcome { variant, m, cancellation });
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn make_child(
    nodes: &[Node],
    parent: usize,
    letter: Letter,
    sys: &SystemSpec,
    tag: CaseTag,
    discrepancy: u32,
    weight: u32,
    cancellation: bool,
    shift: usize,
) -> Node {
    let p = &nodes[parent];
    let mut word = p.word.clone();
    word.push(letter);
    let matrix = match letter {
        Letter::A => &p.matrix * &sys.a,
        Letter::Ba => &p.matrix * &sys.ba,
    };
    Node {
        label: word_label(&word),
        word,
        matrix,
        level: p.level + 1,
        parent: Some(parent),
        case_tag: tag,
        discrepancy,
        weight,
        cancellation,
        accumulated_loss: p.accumulated_loss + p.discrepancy,
        eps_shift: p.eps_shift + shift,
        mixing: None,
        variant: None,
    }
}

/// Runs the tree algorithm with cancellation detection enabled.
pub fn run_tree(sys: &SystemSpec, regime: Regime) -> Result<PathReport> {
    run_tree_with(sys, regime, TreeOptions::default())
}

/// Runs the tree algorithm. Nodes are visited level by level, left to
/// right; every visited node is classified against the current stack and
/// its chosen children are appended to the stack and to the next level.
pub fn run_tree_with(sys: &SystemSpec, regime: Regime, opts: TreeOptions) -> Result<PathReport> {
    let n = sys.n;
    let root = Node {
        word: Vec::new(),
        label: word_label(&[]),
        matrix: sys.bs.clone(),
        level: 0,
        parent: None,
        case_tag: CaseTag::Root,
        discrepancy: 0,
        weight: 0,
        cancellation: false,
        accumulated_loss: 0,
        eps_shift: 0,
        mixing: None,
        variant: None,
    };
    let mut report = PathReport {
        regime,
        nodes: vec![root],
        visits: Vec::new(),
        final_rank: echelon_rank(&sys.bs),
        complete: false,
        mixed_data: Vec::new(),
        fallback: None,
    };
    let mut frontier = vec![0usize];
    let max_levels = n * n.max(2);
    for _ in 0..max_levels {
        if report.final_rank == n {
            break;
        }
        let mut next = Vec::new();
        for &idx in &frontier {
            if report.final_rank == n {
                break;
            }
            let chosen: Vec<RatMatrix> = report.nodes.iter().map(|nd| nd.matrix.clone()).collect();
            let x = report.nodes[idx].matrix.clone();
            let case = classify_node(&chosen, &x, sys);
            report.visits.push((report.nodes[idx].label.clone(), case));
            let hf = regime == Regime::High;
            let push = |node: Node, report: &mut PathReport, next: &mut Vec<usize>| {
                report.nodes.push(node);
                next.push(report.nodes.len() - 1);
            };
            match case {
                NodeCase::Stop => continue,
                NodeCase::Left => {
                    let (d, w) = if hf { (0, 0) } else { (1, 1) };
                    let c = make_child(&report.nodes, idx, Letter::A, sys, CaseTag::Left, d, w, false, 0);
                    push(c, &mut report, &mut next);
                }
                NodeCase::Right => {
                    let cancel = hf && opts.detect_cancellations && check_right_cancellation(&x, &chosen, sys);
                    let (d, w) = match (hf, cancel) {
                        (true, false) => (1, 1),
                        _ => (0, 0),
                    };
                    let c = make_child(&report.nodes, idx, Letter::Ba, sys, CaseTag::Right, d, w, cancel, 0);
                    push(c, &mut report, &mut next);
                }
                NodeCase::Either => {
                    let c = if hf {
                        make_child(&report.nodes, idx, Letter::A, sys, CaseTag::EitherLeft, 0, 0, false, 0)
                    } else {
                        make_child(&report.nodes, idx, Letter::Ba, sys, CaseTag::EitherRight, 0, 0, false, 0)
                    };
                    push(c, &mut report, &mut next);
                }
                NodeCase::Both => {
                    let label = report.nodes[idx].label.clone();
                    if !hf {
                        report.fallback = Some(Fallback::LowFrequencyMixed { node: label });
                        return Ok(report);
                    }
                    let Some(out) = try_mixed(&x, &chosen, sys, opts) else {
                        report.fallback = Some(Fallback::MixedUnavailable { node: label });
                        return Ok(report);
                    };
                    let (da, wa, db, wb) = match (out.variant, out.cancellation) {
                        (MixedCase::Case1, false) => (1, 1, 1, 1),
                        (MixedCase::Case1, true) => (0, 0, 0, 0),
                        (MixedCase::Case2, false) => (0, 0, 0, 1),
                        (MixedCase::Case2, true) => (0, 0, 0, 0),
                    };
                    let shift = usize::from(out.cancellation);
                    let mut ca = make_child(&report.nodes, idx, Letter::A, sys, CaseTag::MixedLeft, da, wa, false, 0);
                    let mut cb =
                        make_child(&report.nodes, idx, Letter::Ba, sys, CaseTag::MixedRight, db, wb, out.cancellation, shift);
                    for c in [&mut ca, &mut cb] {
                        c.mixing = Some(out.m.clone());
                        c.variant = Some(out.variant);
                    }
                    report.mixed_data.push(MixedRecord {
                        node: idx,
                        m: out.m,
                        assumption_set: out.variant,
                        cancellation: out.cancellation,
                    });
                    push(ca, &mut report, &mut next);
                    push(cb, &mut report, &mut next);
                }
            }
            let chosen: Vec<RatMatrix> = report.nodes.iter().map(|nd| nd.matrix.clone()).collect();
            let r = stacked_rank(&chosen, &[]);
            debug_assert!(r > report.final_rank, "accepted node must grow the rank");
            report.final_rank = r;
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    report.complete = report.final_rank == n;
    if !report.complete {
        return Err(Error::KalmanViolated { rank: report.final_rank, n });
    }
    Ok(report)
}

/// Decay exponent read off a path: the largest γ over the chosen nodes, or
/// the generic Kalman exponent when the path fell back.
pub fn certificate_from_path(report: &PathReport, kalman: &KalmanCertificate) -> Result<DecayCertificate> {
    let exponent_per_node: Vec<(String, u32)> = report.nodes.iter().map(|n| (n.label.clone(), n.gamma())).collect();
    if report.fallback.is_some() {
        let (e, name) = match report.regime {
            Regime::High => (kalman.alpha, "alpha"),
            Regime::Low => (kalman.beta, "beta"),
        };
        let exponent = e.ok_or_else(|| Error::Precondition(format!("generic Kalman exponent {name} unavailable")))?;
        return Ok(DecayCertificate { regime: report.regime, exponent, provenance: Provenance::KalmanGeneric, exponent_per_node });
    }
    if !report.complete {
        return Err(Error::KalmanViolated { rank: report.final_rank, n: report.nodes[0].matrix.cols() });
    }
    let exponent = exponent_per_node.iter().map(|p| p.1).max().unwrap_or(0);
    Ok(DecayCertificate { regime: report.regime, exponent, provenance: Provenance::TreeImproved, exponent_per_node })
}

/// Membership of `y` in the two kernels of a sufficient condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KernelMembership {
    pub first: bool,
    pub second: bool,
}

impl KernelMembership {
    pub fn satisfied(&self) -> bool {
        self.first || self.second
    }
}

/// Rank-one sufficient conditions at father `X = Bˢ·Ŵ` with
/// `Bˢ = c·ppᵀ`. With `y = Ŵᵀp`, every pairing of the mixed case is a
/// rank-one matrix `uvᵀ`, which is symmetric as soon as `u` or `v`
/// vanishes:
/// - Case 1 mixing: `y ∈ ker A ∪ ker((I − mA²)Bᵃ)`,
/// - Case 2 mixing: `y ∈ ker((I + mABᵃ)A) ∪ ker Bᵃ`,
/// - Case 1 cancellation: `y ∈ ker(ABᵃ) ∪ ker(I − mA²)`,
/// - Case 2 cancellation: `y ∈ ker(ABᵃ) ∪ ker(I + mBᵃA)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankOneReport {
    /// Unnormalized generator: `Bˢ = c·ppᵀ`.
    #[serde(serialize_with = "ser_vec_rational")]
    pub p: Vec<Rational>,
    #[serde(serialize_with = "ser_rational")]
    pub c: Rational,
    #[serde(serialize_with = "ser_vec_rational")]
    pub y: Vec<Rational>,
    pub mixing_case1: KernelMembership,
    pub mixing_case2: KernelMembership,
    pub cancellation_case1: KernelMembership,
    pub cancellation_case2: KernelMembership,
}

fn ser_vec_rational<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&format_rational(r))?;
    }
    seq.end()
}

fn mat_vec(m: &RatMatrix, v: &[Rational]) -> Vec<Rational> {
    (0..m.rows())
        .map(|i| m.row(i).iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
        .collect()
}

fn kills(m: &RatMatrix, v: &[Rational]) -> bool {
    mat_vec(m, v).iter().all(Zero::is_zero)
}

/// Rank-one factorization `Bˢ = c·ppᵀ` with `p` a row of `Bˢ`.
pub fn rank_one_factor(bs: &RatMatrix) -> Result<(Vec<Rational>, Rational)> {
    if echelon_rank(bs) != 1 {
        return Err(Error::NotRankOne);
    }
    let i = (0..bs.rows()).find(|&i| !bs.get(i, i).is_zero()).ok_or(Error::NotRankOne)?;
    let p = bs.row(i).to_vec();
    let c = Rational::one() / bs.get(i, i).clone();
    Ok((p, c))
}

/// Evaluates the rank-one sufficient conditions for the word `word`
/// (the father is `Bˢ` times the word letters) and mixing coefficient `m`.
pub fn rank_one_fast_path(sys: &SystemSpec, word: &[Letter], m: &Rational) -> Result<RankOneReport> {
    let (p, c) = rank_one_factor(&sys.bs)?;
    let mut w = RatMatrix::identity(sys.n);
    for l in word {
        w = match l {
            Letter::A => &w * &sys.a,
            Letter::Ba => &w * &sys.ba,
        };
    }
    let y = mat_vec(&w.transpose(), &p);
    let i = RatMatrix::identity(sys.n);
    let a = &sys.a;
    let ba = &sys.ba;
    let a2 = a * a;
    let aba = a * ba;
    let baa = ba * a;
    let i_ma2 = &i - &a2.scale(m);
    let mixing_case1 = KernelMembership { first: kills(a, &y), second: kills(&(&i_ma2 * ba), &y) };
    let mixing_case2 = KernelMembership { first: kills(&(&(&i + &aba.scale(m)) * a), &y), second: kills(ba, &y) };
    let cancellation_case1 = KernelMembership { first: kills(&aba, &y), second: kills(&i_ma2, &y) };
    let cancellation_case2 = KernelMembership { first: kills(&aba, &y), second: kills(&(&i + &baa.scale(m)), &y) };
    Ok(RankOneReport { p, c, y, mixing_case1, mixing_case2, cancellation_case1, cancellation_case2 })
}

/// Product `Bˢ·w` of a word.
pub fn word_matrix(sys: &SystemSpec, word: &[Letter]) -> RatMatrix {
    word.iter().fold(sys.bs.clone(), |x, l| match l {
        Letter::A => &x * &sys.a,
        Letter::Ba => &x * &sys.ba,
    })
}

/// Parses a label such as `B^sAB^a` back into a word.
pub fn parse_word(label: &str) -> Option<Vec<Letter>> {
    let mut rest = label.strip_prefix("B^s")?;
    let mut word = Vec::new();
    while !rest.is_empty() {
        let (letter, r) = if let Some(r) = rest.strip_prefix("(B^a)") {
            (Letter::Ba, r)
        } else if let Some(r) = rest.strip_prefix("B^a") {
            (Letter::Ba, r)
        } else {
            (Letter::A, rest.strip_prefix('A')?)
        };
        rest = r;
        let mut count = 1;
        if let Some(r) = rest.strip_prefix('^') {
            let digits = r.bytes().take_while(u8::is_ascii_digit).count();
            count = r[..digits].parse::<usize>().ok().filter(|&k| k >= 2)?;
            rest = &r[digits..];
        }
        word.extend(std::iter::repeat_n(letter, count));
    }
    Some(word)
}

/// The mixing-case pairing matrices, for reports and tests.
pub fn mixing_matrices(x: &RatMatrix, sys: &SystemSpec, variant: MixedCase, m: &Rational) -> (RatMatrix, RatMatrix) {
    let (p0, q0, p1, q1) = mixing_pairing(x, sys, variant);
    match variant {
        MixedCase::Case1 => (p0, &q0 + &q1.scale(m)),
        MixedCase::Case2 => (&p0 + &p1.scale(m), q0),
    }
}

/// The `(P', Q')` pair of the mixed cancellation condition.
pub fn cancellation_matrices(x: &RatMatrix, sys: &SystemSpec, variant: MixedCase, m: &Rational) -> (RatMatrix, RatMatrix) {
    cancellation_pair(x, m, sys, variant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::int;

    fn rm(rows: &[&[i64]]) -> RatMatrix {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    fn toy2(a: i64, b: i64) -> SystemSpec {
        SystemSpec::new("toy2", rm(&[&[a, 0], &[0, b]]), rm(&[&[0, 1], &[-1, 0]]), rm(&[&[1, 0], &[0, 0]])).unwrap()
    }

    fn damped() -> SystemSpec {
        SystemSpec::new("damped", rm(&[&[0, 1], &[1, 0]]), RatMatrix::zeros(2, 2), rm(&[&[1, 0], &[0, 0]])).unwrap()
    }

    #[test]
    fn span_identity_coefficients() {
        let b = vec![rm(&[&[1, 0], &[0, 0]]), rm(&[&[0, 1], &[0, 0]])];
        assert_eq!(span_coefficients(&b[0], &b).unwrap(), vec![int(1), int(0)]);
        assert!(span_coefficients(&rm(&[&[0, 0], &[1, 0]]), &b).is_none());
        assert_eq!(span_coefficients(&rm(&[&[3, -2], &[0, 0]]), &b).unwrap(), vec![int(3), int(-2)]);
    }

    #[test]
    fn damped_wave_is_one_left_step() {
        let sys = damped();
        let hf = run_tree(&sys, Regime::High).unwrap();
        assert_eq!(hf.labels(), vec!["B^s", "B^sA"]);
        assert_eq!(hf.nodes[1].case_tag, CaseTag::Left);
        let lf = run_tree(&sys, Regime::Low).unwrap();
        assert_eq!(lf.nodes[1].gamma(), 1);
    }

    #[test]
    fn toy_right_cancellation_iff_equal_speeds() {
        let eq = run_tree(&toy2(1, 1), Regime::High).unwrap();
        assert!(eq.nodes[1].cancellation);
        assert_eq!(eq.nodes[1].gamma(), 0);
        let ne = run_tree(&toy2(1, 2), Regime::High).unwrap();
        assert!(!ne.nodes[1].cancellation);
        assert_eq!(ne.nodes[1].gamma(), 1);
    }

    #[test]
    fn stop_when_children_add_nothing() {
        let sys = SystemSpec::new("full", RatMatrix::identity(2), RatMatrix::zeros(2, 2), RatMatrix::identity(2)).unwrap();
        assert_eq!(classify_node(std::slice::from_ref(&sys.bs), &sys.bs, &sys), NodeCase::Stop);
    }

    #[test]
    fn word_labels_round_trip() {
        let w = vec![Letter::A, Letter::Ba, Letter::A];
        assert_eq!(word_label(&w), "B^sAB^aA");
        assert_eq!(parse_word("B^sAB^aA").unwrap(), w);
        assert!(parse_word("Bs").is_none());
        let w = vec![Letter::A, Letter::A, Letter::Ba, Letter::Ba, Letter::Ba, Letter::A];
        assert_eq!(word_label(&w), "B^sA^2(B^a)^3A");
        assert_eq!(parse_word(&word_label(&w)).unwrap(), w);
        assert!(parse_word("B^sA^1").is_none());
    }

    #[test]
    fn rank_one_factor_recovers_bs() {
        let bs = rm(&[&[4, 2], &[2, 1]]);
        let (p, c) = rank_one_factor(&bs).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(c.clone() * p[i].clone() * p[j].clone(), *bs.get(i, j));
            }
        }
        assert_eq!(rank_one_factor(&RatMatrix::identity(2)), Err(Error::NotRankOne));
    }
}
