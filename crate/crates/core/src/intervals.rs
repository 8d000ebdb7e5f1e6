//! Families of pairwise-disjoint closed intervals.
//!
//! `I_1 = {[0,1]}` and `I_{k+1}` replaces each `[a,b]` in `I_k` by
//! `[a, m - eps_k]` and `[m + eps_k, b]` where `m` is the midpoint, i.e. the
//! open strip of half-length `eps_k` around `m` is removed. `A_k` is the union
//! of `I_k`; gaps are derived from the members and never stored.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{cmp_by_lo, ClosedInterval, OpenInterval, Rational};
use crate::params::ParamSequence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("level {level} requested but the sequence has depth {depth}")]
    DepthExceeded { level: usize, depth: usize },
    #[error("levels start at 1")]
    ZeroLevel,
    #[error("members {left} and {right} overlap or are out of order")]
    Overlap {
        left: ClosedInterval,
        right: ClosedInterval,
    },
    #[error("splitting {parent} at level {level} leaves an empty piece")]
    DegenerateSplit { parent: ClosedInterval, level: usize },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(Rational),
    #[error("window ({lo}, {hi}) does not meet [0, 1]")]
    EmptyWindow { lo: Rational, hi: Rational },
    #[error("no gap meets the window through level {depth}; increase the depth")]
    DepthExhausted { depth: usize },
}

/// Sorted, pairwise-disjoint closed intervals at a given level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalFamily {
    level: usize,
    members: Vec<ClosedInterval>,
}

impl IntervalFamily {
    /// Members must already be sorted and pairwise disjoint (no shared points).
    pub fn new(level: usize, members: Vec<ClosedInterval>) -> Result<Self, IntervalError> {
        for pair in members.windows(2) {
            if pair[0].hi >= pair[1].lo {
                return Err(IntervalError::Overlap {
                    left: pair[0].clone(),
                    right: pair[1].clone(),
                });
            }
        }
        Ok(IntervalFamily { level, members })
    }

    /// Sort arbitrary intervals and merge any that overlap or touch, giving
    /// the canonical representation of their union.
    pub fn union_of(level: usize, mut intervals: Vec<ClosedInterval>) -> Self {
        // images of a sorted family under increasing maps usually arrive sorted
        if intervals.windows(2).any(|w| cmp_by_lo(&w[0], &w[1]).is_gt()) {
            intervals.sort_by(cmp_by_lo);
        }
        let mut members: Vec<ClosedInterval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match members.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => members.push(iv),
            }
        }
        IntervalFamily { level, members }
    }

    pub fn unit() -> Self {
        IntervalFamily {
            level: 1,
            members: vec![ClosedInterval::unit()],
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn members(&self) -> &[ClosedInterval] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn into_members(self) -> Vec<ClosedInterval> {
        self.members
    }

    /// Index of the member containing `x`, by binary search.
    pub fn locate(&self, x: &Rational) -> Option<usize> {
        let idx = self.members.partition_point(|m| &m.lo <= x);
        if idx == 0 {
            return None;
        }
        self.members[idx - 1].contains(x).then_some(idx - 1)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.locate(x).is_some()
    }

    /// True when `x` is the left or right endpoint of some member.
    pub fn is_endpoint(&self, x: &Rational) -> bool {
        self.locate(x)
            .map(|i| &self.members[i].lo == x || &self.members[i].hi == x)
            .unwrap_or(false)
    }

    /// True when `iv` is exactly one of the members.
    pub fn has_member(&self, iv: &ClosedInterval) -> bool {
        self.members.binary_search_by(|m| cmp_by_lo(m, iv)).is_ok()
    }

    pub fn measure(&self) -> Rational {
        self.members.iter().map(ClosedInterval::width).sum()
    }

    /// Split every member at its midpoint, removing `(m - eps, m + eps)`.
    pub fn split(&self, eps: &Rational) -> Result<IntervalFamily, IntervalError> {
        let mut members = Vec::with_capacity(2 * self.members.len());
        for parent in &self.members {
            let mid = parent.midpoint();
            let left_hi = &mid - eps;
            let right_lo = &mid + eps;
            if left_hi <= parent.lo || right_lo >= parent.hi {
                return Err(IntervalError::DegenerateSplit {
                    parent: parent.clone(),
                    level: self.level,
                });
            }
            members.push(ClosedInterval {
                lo: parent.lo.clone(),
                hi: left_hi,
            });
            members.push(ClosedInterval {
                lo: right_lo,
                hi: parent.hi.clone(),
            });
        }
        IntervalFamily::new(self.level + 1, members)
    }
}

/// `I_k` for the given parameters.
pub fn build_intervals(seq: &ParamSequence, k: usize) -> Result<IntervalFamily, IntervalError> {
    check_level(seq, k)?;
    let mut fam = IntervalFamily::unit();
    for level in 1..k {
        fam = fam.split(seq.eps(level))?;
    }
    Ok(fam)
}

/// `I_1, ..., I_k` in order.
pub fn build_interval_chain(seq: &ParamSequence, k: usize) -> Result<Vec<IntervalFamily>, IntervalError> {
    check_level(seq, k)?;
    let mut chain = vec![IntervalFamily::unit()];
    for level in 1..k {
        let next = chain[level - 1].split(seq.eps(level))?;
        chain.push(next);
    }
    Ok(chain)
}

fn check_level(seq: &ParamSequence, k: usize) -> Result<(), IntervalError> {
    if k == 0 {
        return Err(IntervalError::ZeroLevel);
    }
    if k > seq.depth() {
        return Err(IntervalError::DepthExceeded {
            level: k,
            depth: seq.depth(),
        });
    }
    Ok(())
}

/// Exact Lebesgue measure of the union. Disjointness is enforced when a
/// family is constructed, so this cannot fail.
pub fn family_measure(fam: &IntervalFamily) -> Rational {
    fam.measure()
}

/// The open components of `[0,1]` minus the family, in order.
pub fn gap_family(fam: &IntervalFamily) -> Vec<OpenInterval> {
    let mut gaps = Vec::with_capacity(fam.len() + 1);
    let mut cursor = Rational::zero();
    for m in fam.members() {
        if let Some(g) = OpenInterval::new(cursor.clone(), m.lo.clone()) {
            gaps.push(g);
        }
        if m.hi > cursor {
            cursor = m.hi.clone();
        }
    }
    if let Some(g) = OpenInterval::new(cursor, Rational::one()) {
        gaps.push(g);
    }
    gaps
}

/// A gap of `[0,1] \ A_k` meeting a window around a point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NowhereDenseWitness {
    pub level: usize,
    /// The full gap component of `[0,1] \ A_level`.
    pub component: OpenInterval,
    /// `component` intersected with the window; nonempty, open, and disjoint
    /// from `A_level`.
    pub gap: OpenInterval,
}

/// Find the first level `k` at which the window `(c - r, c + r)` is not
/// covered by `A_k`, returning the leftmost gap that meets it.
///
/// The window is clipped to `[0, 1]`. The returned `gap` is always contained
/// in the window, so `A_k` (and hence `A_*`) has no interior there.
pub fn nowhere_dense_witness(
    seq: &ParamSequence,
    c: &Rational,
    r: &Rational,
) -> Result<NowhereDenseWitness, IntervalError> {
    if !r.is_positive() {
        return Err(IntervalError::NonPositiveRadius(r.clone()));
    }
    let lo = std::cmp::max(c - r, Rational::zero());
    let hi = std::cmp::min(c + r, Rational::one());
    let window = OpenInterval::new(lo.clone(), hi.clone())
        .ok_or(IntervalError::EmptyWindow { lo, hi })?;

    let mut fam = IntervalFamily::unit();
    for level in 1..=seq.depth() {
        if level > 1 {
            fam = fam.split(seq.eps(level - 1))?;
        }
        let hit = gap_family(&fam)
            .into_iter()
            .skip_while(|g| g.hi <= window.lo)
            .find_map(|g| g.intersect(&window).map(|gap| (g, gap)));
        if let Some((component, gap)) = hit {
            return Ok(NowhereDenseWitness {
                level,
                component,
                gap,
            });
        }
    }
    Err(IntervalError::DepthExhausted { depth: seq.depth() })
}
