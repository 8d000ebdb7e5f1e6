//! Measure bookkeeping for `A_* = ∩ A_k` and the identity
//! `A_{k+1} = f(A_k) ∪ g(A_k)`.
//!
//! Passing from `A_k` to `A_{k+1}` removes one open strip of length `2 eps_k`
//! from each of the `2^{k-1}` members, so
//! `λ(A_k) - λ(A_{k+1}) = 2^k eps_k`. The measure still to be removed below
//! level `K` is therefore `Σ_{k >= K} 2^k eps_k`, which is summed exactly up to
//! the known depth `D` and bounded beyond it by `2^k eps_k < 4^{-(k-1)}`,
//! i.e. by `(1/3) 4^{-(D-1)}` in total.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intervals::{family_measure, IntervalFamily};
use crate::limit::{endpoint_value_with, LimitError};
use crate::numerics::{cmp_by_lo, ClosedInterval, Rational};
use crate::params::ParamSequence;
use crate::plf::{Construction, PlfError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttractorError {
    #[error("level {level} outside {min}..={max}")]
    LevelOutOfRange { level: usize, min: usize, max: usize },
    #[error(transparent)]
    Construction(#[from] PlfError),
}

/// Certified two-sided bracket for `λ(A_*)` read at level `K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureBounds {
    pub level: usize,
    pub upper: Rational,
    pub lower: Rational,
    pub tail_bound: Rational,
}

/// `Σ_{k > depth} 2^k eps_k < (1/3) 4^{-(depth-1)}`.
pub fn geometric_tail_majorant(depth: usize) -> Rational {
    Rational::new(1, 3) * Rational::integer(4).pow(1 - depth as i32)
}

/// Bounds from the family `I_K`, using every `eps_k` up to the sequence depth.
/// The bracket is certified when `seq` satisfies its constraints.
pub fn attractor_measure_bounds(seq: &ParamSequence, level: usize) -> Result<MeasureBounds, AttractorError> {
    let c = Construction::new(seq.clone());
    measure_bounds_with(&c, level)
}

pub fn measure_bounds_with(c: &Construction, level: usize) -> Result<MeasureBounds, AttractorError> {
    let depth = c.depth();
    if level < 2 || level > depth {
        return Err(AttractorError::LevelOutOfRange {
            level,
            min: 2,
            max: depth,
        });
    }
    let seq = c.params();
    let upper = family_measure(c.family(level)?);
    let mut tail_bound = geometric_tail_majorant(depth);
    for k in level..=depth {
        tail_bound += Rational::pow2(k as i32) * seq.eps(k);
    }
    Ok(MeasureBounds {
        level,
        lower: &upper - &tail_bound,
        upper,
        tail_bound,
    })
}

/// Bounds for every `K` in `2..=depth`.
pub fn measure_table(seq: &ParamSequence) -> Result<Vec<MeasureBounds>, AttractorError> {
    let c = Construction::new(seq.clone());
    (2..=seq.depth()).map(|k| measure_bounds_with(&c, k)).collect()
}

/// Where the images of `I_k` under `f` and `g` first disagree with `I_{k+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberMismatch {
    pub index: usize,
    pub expected: Option<ClosedInterval>,
    pub found: Option<ClosedInterval>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub level: usize,
    pub passed: bool,
    pub images: usize,
    pub mismatch: Option<MemberMismatch>,
    /// Set when the images could not be computed at all.
    pub error: Option<String>,
}

/// Images of the members of `I_k` under `f` and `g = f + 2/3`, sorted.
/// Endpoint values of `f` are exact.
pub fn self_similar_images(c: &Construction, k: usize) -> Result<Vec<ClosedInterval>, LimitError> {
    let two_thirds = Rational::new(2, 3);
    let fam = c.family(k)?;
    let mut images = Vec::with_capacity(2 * fam.len());
    for m in fam.members() {
        let lo = endpoint_value_with(c, &m.lo, k)?;
        let hi = endpoint_value_with(c, &m.hi, k)?;
        let f_img = ClosedInterval { lo, hi };
        images.push(f_img.translate(&two_thirds));
        images.push(f_img);
    }
    images.sort_by(cmp_by_lo);
    Ok(images)
}

/// Check `f(A_k) ∪ g(A_k) = A_{k+1}` member by member.
pub fn verify_self_similarity(seq: &ParamSequence, k: usize) -> Result<VerificationResult, AttractorError> {
    verify_self_similarity_with(&Construction::new(seq.clone()), k)
}

pub fn verify_self_similarity_with(c: &Construction, k: usize) -> Result<VerificationResult, AttractorError> {
    if k == 0 || k + 2 > c.depth() {
        return Err(AttractorError::LevelOutOfRange {
            level: k,
            min: 1,
            max: c.depth().saturating_sub(2),
        });
    }
    let failed = |error: String| VerificationResult {
        level: k,
        passed: false,
        images: 0,
        mismatch: None,
        error: Some(error),
    };
    let images = match self_similar_images(c, k) {
        Ok(images) => images,
        Err(e) => return Ok(failed(e.to_string())),
    };
    let next = match c.family(k + 1) {
        Ok(f) => f,
        Err(e) => return Ok(failed(e.to_string())),
    };
    let mismatch = first_mismatch(next, &images);
    Ok(VerificationResult {
        level: k,
        passed: mismatch.is_none(),
        images: images.len(),
        mismatch,
        error: None,
    })
}

fn first_mismatch(expected: &IntervalFamily, found: &[ClosedInterval]) -> Option<MemberMismatch> {
    let n = expected.len().max(found.len());
    (0..n).find_map(|i| {
        let e = expected.members().get(i);
        let f = found.get(i);
        (e != f).then(|| MemberMismatch {
            index: i,
            expected: e.cloned(),
            found: f.cloned(),
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "level")]
pub enum Membership {
    /// `x` lies in every `A_k` up to the sequence depth.
    InAttractorUpToDepth(usize),
    /// First `k` with `x` outside `A_k`.
    EjectedAtLevel(usize),
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Membership::InAttractorUpToDepth(d) => write!(f, "in A_k for every k <= {d}"),
            Membership::EjectedAtLevel(k) => write!(f, "outside A_{k}"),
        }
    }
}

/// Semi-decide `x ∈ A_*` by following the member containing `x` down the
/// levels. Gap endpoints belong to the closed members.
pub fn membership(seq: &ParamSequence, x: &Rational) -> Membership {
    let mut current = ClosedInterval::unit();
    if !current.contains(x) {
        return Membership::EjectedAtLevel(1);
    }
    for level in 1..seq.depth() {
        let mid = current.midpoint();
        let eps = seq.eps(level);
        let left_hi = &mid - eps;
        let right_lo = &mid + eps;
        if x <= &left_hi {
            current.hi = left_hi;
        } else if x >= &right_lo {
            current.lo = right_lo;
        } else {
            return Membership::EjectedAtLevel(level + 1);
        }
    }
    Membership::InAttractorUpToDepth(seq.depth())
}
