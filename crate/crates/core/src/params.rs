//! The width sequence `w_k` and gap half-length sequence `eps_k`.
//!
//! `w_1 = 1`, `eps_1 = 1/6`, `w_{k+1} = w_k/2 - eps_k`, and each `eps_{k+1}`
//! is any positive value below three upper bounds:
//!
//! * `2^k eps_{k+1} < (1/2) 4^{-k}` (keeps the removed measure summable),
//! * `eps_{k+1} < eps_k / 2` (keeps the middle slopes contracting),
//! * `eps_{k+1} < w_k/4 - eps_k/2` (keeps the next widths positive).
//!
//! Which admissible value is taken is left open; [`HalfMinimum`] is the
//! default and any [`EpsilonChooser`] output is re-checked.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::Rational;

/// Exact `w_1..w_K` and `eps_1..eps_K`. Indices in the API are 1-based.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ParamSequence {
    w: Vec<Rational>,
    eps: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("w and eps have different lengths ({w} vs {eps})")]
    LengthMismatch { w: usize, eps: usize },
    #[error("chosen eps_{index} violates {check}")]
    ChooserRejected { index: usize, check: ConstraintCheck },
    #[error("index {index} outside 1..={depth}")]
    OutOfRange { index: usize, depth: usize },
}

impl ParamSequence {
    /// Wrap raw values without checking any constraint; see [`validate_params`].
    pub fn from_raw(w: Vec<Rational>, eps: Vec<Rational>) -> Result<Self, ParamError> {
        if w.len() != eps.len() {
            return Err(ParamError::LengthMismatch {
                w: w.len(),
                eps: eps.len(),
            });
        }
        if w.is_empty() {
            return Err(ParamError::ZeroDepth);
        }
        Ok(ParamSequence { w, eps })
    }

    pub fn depth(&self) -> usize {
        self.w.len()
    }

    /// `w_k`, 1-based. Panics outside `1..=depth`.
    pub fn w(&self, k: usize) -> &Rational {
        &self.w[k - 1]
    }

    /// `eps_k`, 1-based. Panics outside `1..=depth`.
    pub fn eps(&self, k: usize) -> &Rational {
        &self.eps[k - 1]
    }

    pub fn widths(&self) -> &[Rational] {
        &self.w
    }

    pub fn epsilons(&self) -> &[Rational] {
        &self.eps
    }

    /// Copy with `w_k` replaced.
    pub fn with_w(&self, k: usize, value: Rational) -> Result<Self, ParamError> {
        self.check_index(k)?;
        let mut out = self.clone();
        out.w[k - 1] = value;
        Ok(out)
    }

    /// Copy with `eps_k` replaced.
    pub fn with_eps(&self, k: usize, value: Rational) -> Result<Self, ParamError> {
        self.check_index(k)?;
        let mut out = self.clone();
        out.eps[k - 1] = value;
        Ok(out)
    }

    /// The first `depth` levels.
    pub fn truncated(&self, depth: usize) -> Result<Self, ParamError> {
        if depth == 0 {
            return Err(ParamError::ZeroDepth);
        }
        self.check_index(depth)?;
        Ok(ParamSequence {
            w: self.w[..depth].to_vec(),
            eps: self.eps[..depth].to_vec(),
        })
    }

    fn check_index(&self, k: usize) -> Result<(), ParamError> {
        if k == 0 || k > self.depth() {
            Err(ParamError::OutOfRange {
                index: k,
                depth: self.depth(),
            })
        } else {
            Ok(())
        }
    }
}

/// Inputs available when choosing `eps_{k+1}`.
#[derive(Debug, Clone)]
pub struct ChooserContext {
    pub k: usize,
    pub w_k: Rational,
    pub eps_k: Rational,
    /// `(1/2) 4^{-k} / 2^k`
    pub geometric_bound: Rational,
    /// `eps_k / 2`
    pub quotient_bound: Rational,
    /// `w_k/4 - eps_k/2`
    pub width_bound: Rational,
}

impl ChooserContext {
    fn new(k: usize, w_k: &Rational, eps_k: &Rational) -> Self {
        let k_i = k as i32;
        ChooserContext {
            k,
            w_k: w_k.clone(),
            eps_k: eps_k.clone(),
            geometric_bound: Rational::pow2(-(3 * k_i + 1)),
            quotient_bound: eps_k / Rational::integer(2),
            width_bound: w_k / Rational::integer(4) - eps_k / Rational::integer(2),
        }
    }

    /// The tightest of the three strict upper bounds on `eps_{k+1}`.
    pub fn bound(&self) -> Rational {
        self.geometric_bound
            .clone()
            .min(self.quotient_bound.clone())
            .min(self.width_bound.clone())
    }
}

/// Picks `eps_{k+1}` given the state at level `k`.
pub trait EpsilonChooser {
    fn choose(&self, ctx: &ChooserContext) -> Rational;

    fn name(&self) -> &str {
        "custom"
    }
}

/// Default chooser: half of the tightest upper bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfMinimum;

impl EpsilonChooser for HalfMinimum {
    fn choose(&self, ctx: &ChooserContext) -> Rational {
        ctx.bound() / Rational::integer(2)
    }

    fn name(&self) -> &str {
        "half-minimum"
    }
}

impl<F> EpsilonChooser for F
where
    F: Fn(&ChooserContext) -> Rational,
{
    fn choose(&self, ctx: &ChooserContext) -> Rational {
        self(ctx)
    }
}

/// Build `w_1..w_K`, `eps_1..eps_K`, checking each chosen `eps_{k+1}`.
pub fn generate_params<C: EpsilonChooser + ?Sized>(
    depth: usize,
    chooser: &C,
) -> Result<ParamSequence, ParamError> {
    if depth == 0 {
        return Err(ParamError::ZeroDepth);
    }
    let two = Rational::integer(2);
    let mut w = vec![Rational::one()];
    let mut eps = vec![Rational::new(1, 6)];
    for k in 1..depth {
        let (w_k, eps_k) = (&w[k - 1], &eps[k - 1]);
        let w_next = w_k / &two - eps_k;
        let ctx = ChooserContext::new(k, w_k, eps_k);
        let eps_next = chooser.choose(&ctx);
        for check in epsilon_checks(k, w_k, eps_k, &eps_next) {
            if !check.passed {
                return Err(ParamError::ChooserRejected {
                    index: k + 1,
                    check,
                });
            }
        }
        w.push(w_next);
        eps.push(eps_next);
    }
    Ok(ParamSequence { w, eps })
}

/// The default sequence of the given depth.
pub fn default_params(depth: usize) -> Result<ParamSequence, ParamError> {
    generate_params(depth, &HalfMinimum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    InitialWidth,
    InitialEpsilon,
    WidthRecursion,
    EpsilonPositive,
    EpsilonGeometric,
    EpsilonQuotient,
    WidthPositiveMargin,
    WidthPositive,
    WidthDecay,
    WidthRatio,
}

impl Constraint {
    /// The relation checked, in terms of the level `k`.
    pub fn statement(&self) -> &'static str {
        match self {
            Constraint::InitialWidth => "w_1 = 1",
            Constraint::InitialEpsilon => "eps_1 = 1/6",
            Constraint::WidthRecursion => "w_{k+1} = w_k/2 - eps_k",
            Constraint::EpsilonPositive => "eps_k > 0",
            Constraint::EpsilonGeometric => "2^k eps_{k+1} < (1/2) 4^-k",
            Constraint::EpsilonQuotient => "eps_{k+1} / eps_k < 1/2",
            Constraint::WidthPositiveMargin => "eps_{k+1} < w_k/4 - eps_k/2",
            Constraint::WidthPositive => "w_k > 0",
            Constraint::WidthDecay => "w_k <= 2^(1-k)",
            Constraint::WidthRatio => "w_{k+1} / w_k < 1/2",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.statement())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
}

impl Relation {
    pub fn holds(&self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Eq => lhs == rhs,
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Lt => "<",
            Relation::Le => "<=",
        }
    }
}

/// One instance of one constraint, with both sides evaluated exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub constraint: Constraint,
    pub k: usize,
    pub lhs: Rational,
    pub relation: Relation,
    pub rhs: Rational,
    pub passed: bool,
}

impl ConstraintCheck {
    fn new(constraint: Constraint, k: usize, lhs: Rational, relation: Relation, rhs: Rational) -> Self {
        let passed = relation.holds(&lhs, &rhs);
        ConstraintCheck {
            constraint,
            k,
            lhs,
            relation,
            rhs,
            passed,
        }
    }
}

impl fmt::Display for ConstraintCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "`{}` at k={}: {} {} {} is {}",
            self.constraint,
            self.k,
            self.lhs,
            self.relation.symbol(),
            self.rhs,
            self.passed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub entries: Vec<ConstraintCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn count(&self, constraint: Constraint) -> usize {
        self.entries
            .iter()
            .filter(|e| e.constraint == constraint)
            .count()
    }
}

fn epsilon_checks(k: usize, w_k: &Rational, eps_k: &Rational, eps_next: &Rational) -> Vec<ConstraintCheck> {
    let k_i = k as i32;
    let two = Rational::integer(2);
    vec![
        ConstraintCheck::new(
            Constraint::EpsilonPositive,
            k + 1,
            Rational::zero(),
            Relation::Lt,
            eps_next.clone(),
        ),
        ConstraintCheck::new(
            Constraint::EpsilonGeometric,
            k,
            Rational::pow2(k_i) * eps_next,
            Relation::Lt,
            Rational::pow2(-(2 * k_i + 1)),
        ),
        ConstraintCheck::new(
            Constraint::EpsilonQuotient,
            k,
            eps_next.checked_div(eps_k).unwrap_or_else(|| eps_next.clone()),
            Relation::Lt,
            Rational::new(1, 2),
        )
        .guard(eps_k.is_positive()),
        ConstraintCheck::new(
            Constraint::WidthPositiveMargin,
            k,
            eps_next.clone(),
            Relation::Lt,
            w_k / Rational::integer(4) - eps_k / &two,
        ),
    ]
}

impl ConstraintCheck {
    /// A quotient with a non-positive denominator never passes.
    fn guard(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }
}

/// Re-evaluate every constraint instance on `seq`.
pub fn validate_params(seq: &ParamSequence) -> ValidationReport {
    let depth = seq.depth();
    let two = Rational::integer(2);
    let mut entries = vec![
        ConstraintCheck::new(
            Constraint::InitialWidth,
            1,
            seq.w(1).clone(),
            Relation::Eq,
            Rational::one(),
        ),
        ConstraintCheck::new(
            Constraint::InitialEpsilon,
            1,
            seq.eps(1).clone(),
            Relation::Eq,
            Rational::new(1, 6),
        ),
        ConstraintCheck::new(
            Constraint::EpsilonPositive,
            1,
            Rational::zero(),
            Relation::Lt,
            seq.eps(1).clone(),
        ),
    ];
    for k in 1..depth {
        entries.push(ConstraintCheck::new(
            Constraint::WidthRecursion,
            k,
            seq.w(k + 1).clone(),
            Relation::Eq,
            seq.w(k) / &two - seq.eps(k),
        ));
        entries.extend(epsilon_checks(k, seq.w(k), seq.eps(k), seq.eps(k + 1)));
    }
    for k in 1..=depth {
        entries.push(ConstraintCheck::new(
            Constraint::WidthPositive,
            k,
            Rational::zero(),
            Relation::Lt,
            seq.w(k).clone(),
        ));
        entries.push(ConstraintCheck::new(
            Constraint::WidthDecay,
            k,
            seq.w(k).clone(),
            Relation::Le,
            Rational::pow2(1 - k as i32),
        ));
        if k < depth {
            let ratio = seq.w(k + 1).checked_div(seq.w(k));
            entries.push(
                ConstraintCheck::new(
                    Constraint::WidthRatio,
                    k,
                    ratio.clone().unwrap_or_else(Rational::one),
                    Relation::Lt,
                    Rational::new(1, 2),
                )
                .guard(seq.w(k).is_positive()),
            );
        }
    }
    ValidationReport { entries }
}
