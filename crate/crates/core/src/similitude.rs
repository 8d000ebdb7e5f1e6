//! Similitude systems `x -> a_n x + b_n` on `[0, 1]`.
//!
//! When the open images are pairwise disjoint and do not cover `[0, 1]`, each
//! Hutchinson step scales the measure by `Σ|a_n| < 1`, so
//! `λ(A_k) = (Σ|a_n|)^{k-1}` and the attractor is null. Both the closed form
//! and an explicit interval iteration are computed and compared exactly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intervals::IntervalFamily;
use crate::numerics::{ClosedInterval, ParseRationalError, Rational};
use crate::plf::{hutchinson_step, hutchinson_step_with, IFSDescription, IntervalMap, PiecewiseLinearMap, PlfError};

/// `x -> slope * x + offset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineMap {
    pub slope: Rational,
    pub offset: Rational,
}

impl AffineMap {
    pub fn new(slope: Rational, offset: Rational) -> Self {
        AffineMap { slope, offset }
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.offset
    }
}

impl IntervalMap for AffineMap {
    /// Reflections swap the endpoints.
    fn image(&self, iv: &ClosedInterval) -> Result<ClosedInterval, PlfError> {
        let (p, q) = (self.apply(&iv.lo), self.apply(&iv.hi));
        Ok(if p <= q {
            ClosedInterval { lo: p, hi: q }
        } else {
            ClosedInterval { lo: q, hi: p }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimilitudeIFS {
    maps: Vec<AffineMap>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimilitudeError {
    #[error("a similitude system needs at least one map")]
    Empty,
    #[error("malformed map list `{0}`, expected \"a1,b1;a2,b2;...\"")]
    Syntax(String),
    #[error(transparent)]
    Number(#[from] ParseRationalError),
    #[error("system rejected: {0}")]
    Invalid(ConditionCheck),
    #[error("level {level}: closed form {closed_form} but iteration gives {iterated}")]
    CrossCheck {
        level: usize,
        closed_form: Rational,
        iterated: Rational,
    },
    #[error(transparent)]
    Plf(#[from] PlfError),
}

impl SimilitudeIFS {
    pub fn new(maps: Vec<AffineMap>) -> Result<Self, SimilitudeError> {
        if maps.is_empty() {
            return Err(SimilitudeError::Empty);
        }
        Ok(SimilitudeIFS { maps })
    }

    /// `(1/3) x` and `(1/3) x + 2/3`.
    pub fn middle_thirds() -> Self {
        SimilitudeIFS {
            maps: vec![
                AffineMap::new(Rational::new(1, 3), Rational::zero()),
                AffineMap::new(Rational::new(1, 3), Rational::new(2, 3)),
            ],
        }
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    /// `Σ |a_n|`, the measure ratio `1 - q` between consecutive levels.
    pub fn ratio_sum(&self) -> Rational {
        self.maps.iter().map(|m| m.slope.abs()).sum()
    }

    fn unit_images(&self) -> Vec<ClosedInterval> {
        self.maps
            .iter()
            .map(|m| m.image(&ClosedInterval::unit()).expect("affine images never fail"))
            .collect()
    }
}

impl FromStr for SimilitudeIFS {
    type Err = SimilitudeError;

    /// `"a1,b1;a2,b2;..."` with exact rational entries.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut maps = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, b) = part
                .split_once(',')
                .ok_or_else(|| SimilitudeError::Syntax(s.to_string()))?;
            maps.push(AffineMap::new(a.trim().parse()?, b.trim().parse()?));
        }
        SimilitudeIFS::new(maps)
    }
}

impl fmt::Display for SimilitudeIFS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .maps
            .iter()
            .map(|m| format!("{},{}", m.slope, m.offset))
            .collect();
        f.write_str(&parts.join(";"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionKind {
    /// `0 < |a_n| < 1`
    Ratio,
    /// `f_n([0,1]) ⊂ [0,1]`
    IntoUnit,
    /// `Σ|a_n| < 1`, equivalently the images do not cover `[0,1]`
    NotCovering,
    /// `f_i((0,1)) ∩ f_j((0,1)) = ∅`
    OpenImagesDisjoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub kind: ConditionKind,
    /// Map indices the check refers to.
    pub maps: Vec<usize>,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for ConditionCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} on maps {:?} {}: {}",
            self.kind,
            self.maps,
            if self.passed { "passed" } else { "failed" },
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Check the gap and disjoint-interior conditions exactly.
pub fn validate_condition_11(ifs: &SimilitudeIFS) -> ConditionReport {
    let mut checks = Vec::new();
    let one = Rational::one();
    let images = ifs.unit_images();
    for (i, (m, img)) in ifs.maps.iter().zip(&images).enumerate() {
        let a = m.slope.abs();
        checks.push(ConditionCheck {
            kind: ConditionKind::Ratio,
            maps: vec![i],
            passed: a.is_positive() && a < one,
            detail: format!("|a| = {a}"),
        });
        checks.push(ConditionCheck {
            kind: ConditionKind::IntoUnit,
            maps: vec![i],
            passed: img.is_subset_of(&ClosedInterval::unit()),
            detail: format!("image {img}"),
        });
    }
    let total = ifs.ratio_sum();
    checks.push(ConditionCheck {
        kind: ConditionKind::NotCovering,
        maps: (0..ifs.maps.len()).collect(),
        passed: total < one,
        detail: format!("sum |a| = {total}"),
    });
    let mut order: Vec<usize> = (0..images.len()).collect();
    order.sort_by(|&i, &j| images[i].lo.cmp(&images[j].lo).then(images[i].hi.cmp(&images[j].hi)));
    for pair in order.windows(2) {
        let (i, j) = (pair[0], pair[1]);
        let (p, q) = (&images[i], &images[j]);
        let passed = p.hi <= q.lo;
        let detail = if passed {
            format!("{p} then {q}")
        } else {
            format!("open images overlap on ({}, {})", q.lo, std::cmp::min(&p.hi, &q.hi))
        };
        checks.push(ConditionCheck {
            kind: ConditionKind::OpenImagesDisjoint,
            maps: vec![i, j],
            passed,
            detail,
        });
    }
    ConditionReport { checks }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelMeasure {
    pub level: usize,
    pub closed_form: Rational,
    pub iterated: Rational,
    pub intervals: usize,
}

/// `λ(A_k)` for `k = 1..=levels`, by closed form and by iterating the
/// Hutchinson operator on interval families; any disagreement is an error.
pub fn similitude_level_measures(ifs: &SimilitudeIFS, levels: usize) -> Result<Vec<LevelMeasure>, SimilitudeError> {
    let report = validate_condition_11(ifs);
    if let Some(fail) = report.first_failure() {
        return Err(SimilitudeError::Invalid(fail.clone()));
    }
    let ratio = ifs.ratio_sum();
    // orientation-preserving systems go through the piecewise-linear engine
    let plm = if ifs.maps.iter().all(|m| m.slope.is_positive()) {
        let maps = ifs
            .maps
            .iter()
            .map(|m| PiecewiseLinearMap::affine(m.slope.clone(), m.offset.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Some(IFSDescription::new(maps)?)
    } else {
        None
    };

    let mut out = Vec::with_capacity(levels);
    let mut fam = IntervalFamily::unit();
    for level in 1..=levels {
        if level > 1 {
            fam = match &plm {
                Some(sys) => hutchinson_step(sys, &fam)?,
                None => hutchinson_step_with(&ifs.maps, &fam)?,
            };
        }
        let closed_form = ratio.pow(level as i32 - 1);
        let iterated = fam.measure();
        if closed_form != iterated {
            return Err(SimilitudeError::CrossCheck {
                level,
                closed_form,
                iterated,
            });
        }
        out.push(LevelMeasure {
            level,
            closed_form,
            iterated,
            intervals: fam.len(),
        });
    }
    Ok(out)
}

/// Smallest `K` with `λ(A_K) < threshold`, from the closed form.
pub fn level_below(ifs: &SimilitudeIFS, threshold: &Rational) -> Result<usize, SimilitudeError> {
    let report = validate_condition_11(ifs);
    if let Some(fail) = report.first_failure() {
        return Err(SimilitudeError::Invalid(fail.clone()));
    }
    let ratio = ifs.ratio_sum();
    let mut measure = Rational::one();
    let mut level = 1;
    while &measure >= threshold {
        measure = measure * &ratio;
        level += 1;
    }
    Ok(level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn sys(s: &str) -> SimilitudeIFS {
        s.parse().unwrap()
    }

    #[test]
    fn middle_thirds_measures() {
        let table = similitude_level_measures(&SimilitudeIFS::middle_thirds(), 4).unwrap();
        let got: Vec<Rational> = table.iter().map(|l| l.iterated.clone()).collect();
        assert_eq!(got, vec![r(1, 1), r(2, 3), r(4, 9), r(8, 27)]);
        assert_eq!(table[3].intervals, 8);
    }

    #[test]
    fn single_halving_map() {
        let table = similitude_level_measures(&sys("1/2,0"), 3).unwrap();
        let got: Vec<Rational> = table.iter().map(|l| l.closed_form.clone()).collect();
        assert_eq!(got, vec![r(1, 1), r(1, 2), r(1, 4)]);
    }

    #[test]
    fn reflections_are_supported() {
        // x -> 1/3 - x/3 and x -> 2/3 + x/3 give the middle-thirds set again
        let table = similitude_level_measures(&sys("-1/3,1/3;1/3,2/3"), 6).unwrap();
        assert_eq!(table[5].iterated, r(2, 3).pow(5));
        assert_eq!(table[5].intervals, 32);
    }

    #[test]
    fn touching_images_merge() {
        let table = similitude_level_measures(&sys("1/3,0;1/3,1/3"), 3).unwrap();
        assert_eq!(table[1].intervals, 1);
        assert_eq!(table[2].iterated, r(4, 9));
    }

    #[test]
    fn condition_examples() {
        assert!(validate_condition_11(&SimilitudeIFS::middle_thirds()).passed());

        let covering = validate_condition_11(&sys("1/2,0;1/2,1/2"));
        let fail = covering.first_failure().unwrap();
        assert_eq!(fail.kind, ConditionKind::NotCovering);
        assert_eq!(fail.detail, "sum |a| = 1");

        let overlapping = validate_condition_11(&sys("1/2,0;1/2,1/4"));
        let fail = overlapping
            .checks
            .iter()
            .find(|c| c.kind == ConditionKind::OpenImagesDisjoint)
            .unwrap();
        assert!(!fail.passed);
        assert_eq!(fail.detail, "open images overlap on (1/4, 1/2)");

        let escaping = validate_condition_11(&sys("1/2,3/4"));
        assert_eq!(escaping.first_failure().unwrap().kind, ConditionKind::IntoUnit);
        let degenerate = validate_condition_11(&sys("0,1/2"));
        assert_eq!(degenerate.first_failure().unwrap().kind, ConditionKind::Ratio);
    }

    #[test]
    fn invalid_systems_are_rejected() {
        assert!(matches!(
            similitude_level_measures(&sys("1/2,0;1/2,1/4"), 3),
            Err(SimilitudeError::Invalid(_))
        ));
    }

    #[test]
    fn parse_and_display() {
        let s = sys(" 1/3, 0 ; 1/3 , 2/3 ");
        assert_eq!(s, SimilitudeIFS::middle_thirds());
        assert_eq!(s.to_string(), "1/3,0;1/3,2/3");
        assert!(matches!("".parse::<SimilitudeIFS>(), Err(SimilitudeError::Empty)));
        assert!(matches!("1/3".parse::<SimilitudeIFS>(), Err(SimilitudeError::Syntax(_))));
        assert!(matches!("0.3,0".parse::<SimilitudeIFS>(), Err(SimilitudeError::Number(_))));
    }

    #[test]
    fn measure_zero_threshold() {
        assert_eq!(level_below(&SimilitudeIFS::middle_thirds(), &r(1, 1000)).unwrap(), 19);
    }
}
