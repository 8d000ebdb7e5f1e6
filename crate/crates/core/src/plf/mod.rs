//! Monotone piecewise-linear maps of `[0, 1]` into itself.
//!
//! A map is stored as its breakpoint list; evaluation interpolates linearly.
//! Because differences of such maps are again piecewise linear, suprema and
//! Lipschitz constants are exact maxima over finite grids.

mod construction;

pub use construction::{build_fk, Construction};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intervals::{IntervalError, IntervalFamily};
use crate::numerics::{ClosedInterval, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlfError {
    #[error("{0} lies outside [0, 1]")]
    OutOfDomain(Rational),
    #[error("a map needs at least two breakpoints")]
    TooFewPoints,
    #[error("breakpoints must start at x = 0 and end at x = 1")]
    BadEndpoints,
    #[error("breakpoint x-coordinates not strictly increasing at x = {0}")]
    UnsortedBreakpoints(Rational),
    #[error("map is not {expected:?} increasing between x = {x0} and x = {x1}")]
    NotMonotone {
        expected: Monotonicity,
        x0: Rational,
        x1: Rational,
    },
    #[error("value {y} at x = {x} leaves [0, 1]")]
    RangeEscape { x: Rational, y: Rational },
    #[error("map {index} has Lipschitz constant {constant}, not below 1")]
    NotAContraction { index: usize, constant: Rational },
    #[error("an iterated function system needs at least one map")]
    EmptySystem,
    #[error("f_{level} needs depth {needed}, the sequence has depth {depth}")]
    InsufficientDepth {
        level: usize,
        needed: usize,
        depth: usize,
    },
    #[error("pieces disagree at x = {x}: {left} vs {right}")]
    JunctionMismatch {
        x: Rational,
        left: Rational,
        right: Rational,
    },
    #[error("parameters used by f_{0} include a zero divisor")]
    ZeroParameter(usize),
    #[error(transparent)]
    Intervals(#[from] IntervalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Strict,
    Weak,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub x: Rational,
    pub y: Rational,
}

impl Breakpoint {
    pub fn new(x: Rational, y: Rational) -> Self {
        Breakpoint { x, y }
    }
}

/// A continuous nondecreasing piecewise-linear map `[0,1] -> [0,1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewiseLinearMap {
    monotonicity: Monotonicity,
    points: Vec<Breakpoint>,
}

impl PiecewiseLinearMap {
    pub fn new(points: Vec<Breakpoint>, monotonicity: Monotonicity) -> Result<Self, PlfError> {
        if points.len() < 2 {
            return Err(PlfError::TooFewPoints);
        }
        if !points[0].x.is_zero() || points[points.len() - 1].x != Rational::one() {
            return Err(PlfError::BadEndpoints);
        }
        for p in &points {
            if p.y.is_negative() || p.y > Rational::one() {
                return Err(PlfError::RangeEscape {
                    x: p.x.clone(),
                    y: p.y.clone(),
                });
            }
        }
        for pair in points.windows(2) {
            let (p, q) = (&pair[0], &pair[1]);
            if p.x >= q.x {
                return Err(PlfError::UnsortedBreakpoints(q.x.clone()));
            }
            let ok = match monotonicity {
                Monotonicity::Strict => p.y < q.y,
                Monotonicity::Weak => p.y <= q.y,
            };
            if !ok {
                return Err(PlfError::NotMonotone {
                    expected: monotonicity,
                    x0: p.x.clone(),
                    x1: q.x.clone(),
                });
            }
        }
        Ok(PiecewiseLinearMap {
            monotonicity,
            points,
        })
    }

    /// The affine map `x -> slope * x + offset` on `[0, 1]`; `slope >= 0`.
    pub fn affine(slope: Rational, offset: Rational) -> Result<Self, PlfError> {
        let monotonicity = if slope.is_positive() {
            Monotonicity::Strict
        } else {
            Monotonicity::Weak
        };
        let end = &slope + &offset;
        PiecewiseLinearMap::new(
            vec![
                Breakpoint::new(Rational::zero(), offset),
                Breakpoint::new(Rational::one(), end),
            ],
            monotonicity,
        )
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn points(&self) -> &[Breakpoint] {
        &self.points
    }

    pub fn xs(&self) -> impl Iterator<Item = &Rational> {
        self.points.iter().map(|p| &p.x)
    }

    /// Breakpoints with `lo <= x <= hi`.
    pub fn points_in(&self, lo: &Rational, hi: &Rational) -> &[Breakpoint] {
        let start = self.points.partition_point(|p| &p.x < lo);
        let end = self.points.partition_point(|p| &p.x <= hi);
        &self.points[start..end.max(start)]
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational, PlfError> {
        if x.is_negative() || x > &Rational::one() {
            return Err(PlfError::OutOfDomain(x.clone()));
        }
        let idx = self.points.partition_point(|p| &p.x <= x);
        // idx >= 1 because points[0].x == 0 <= x
        let left = &self.points[idx - 1];
        if &left.x == x {
            return Ok(left.y.clone());
        }
        Ok(interpolate(left, &self.points[idx], x))
    }

    /// Values at an ascending grid inside `[0, 1]`, in one linear sweep.
    pub fn eval_sorted(&self, grid: &[Rational]) -> Result<Vec<Rational>, PlfError> {
        let mut out = Vec::with_capacity(grid.len());
        let mut seg = 0;
        for x in grid {
            if x.is_negative() || x > &Rational::one() {
                return Err(PlfError::OutOfDomain(x.clone()));
            }
            while seg + 1 < self.points.len() && &self.points[seg + 1].x <= x {
                seg += 1;
            }
            let left = &self.points[seg];
            if &left.x == x {
                out.push(left.y.clone());
            } else {
                out.push(interpolate(left, &self.points[seg + 1], x));
            }
        }
        Ok(out)
    }

    /// Slopes of consecutive pieces, left to right.
    pub fn slopes(&self) -> impl Iterator<Item = Rational> + '_ {
        self.points
            .windows(2)
            .map(|w| (&w[1].y - &w[0].y) / (&w[1].x - &w[0].x))
    }

    pub fn lipschitz_constant(&self) -> Rational {
        self.slopes()
            .map(|s| s.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// `[f(lo), f(hi)]`; valid as the image because the map is nondecreasing.
    pub fn image(&self, iv: &ClosedInterval) -> Result<ClosedInterval, PlfError> {
        let lo = self.eval(&iv.lo)?;
        let hi = self.eval(&iv.hi)?;
        Ok(ClosedInterval { lo, hi })
    }

    /// `self + t` pointwise, e.g. `g = f + 2/3`.
    pub fn shifted(&self, t: &Rational) -> Result<Self, PlfError> {
        let points = self
            .points
            .iter()
            .map(|p| Breakpoint::new(p.x.clone(), &p.y + t))
            .collect();
        PiecewiseLinearMap::new(points, self.monotonicity)
    }
}

fn interpolate(left: &Breakpoint, right: &Breakpoint, x: &Rational) -> Rational {
    &left.y + (&right.y - &left.y) * (x - &left.x) / (&right.x - &left.x)
}

pub fn eval_plf(map: &PiecewiseLinearMap, x: &Rational) -> Result<Rational, PlfError> {
    map.eval(x)
}

/// Maximum absolute slope. A map that is `L`-Lipschitz on adjacent pieces is
/// `L`-Lipschitz on their union, so this is the global constant.
pub fn lipschitz_constant(map: &PiecewiseLinearMap) -> Rational {
    map.lipschitz_constant()
}

/// Sorted union of both breakpoint grids.
pub fn merged_grid(p: &PiecewiseLinearMap, q: &PiecewiseLinearMap) -> Vec<Rational> {
    let (a, b) = (p.points(), q.points());
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => match x.x.cmp(&y.x) {
                Ordering::Less => {
                    i += 1;
                    &x.x
                }
                Ordering::Greater => {
                    j += 1;
                    &y.x
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    &x.x
                }
            },
            (Some(x), None) => {
                i += 1;
                &x.x
            }
            (None, Some(y)) => {
                j += 1;
                &y.x
            }
            (None, None) => unreachable!(),
        };
        out.push(next.clone());
    }
    out
}

/// Location and size of `sup |p - q|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupDiff {
    pub value: Rational,
    pub argmax: Rational,
}

/// Exact `sup_{[0,1]} |p - q|`; `p - q` is linear between merged breakpoints
/// so the supremum is attained on the merged grid.
pub fn sup_diff_at(p: &PiecewiseLinearMap, q: &PiecewiseLinearMap) -> SupDiff {
    let grid = merged_grid(p, q);
    let pv = p.eval_sorted(&grid).expect("grid within [0, 1]");
    let qv = q.eval_sorted(&grid).expect("grid within [0, 1]");
    let mut best = SupDiff {
        value: Rational::zero(),
        argmax: Rational::zero(),
    };
    for ((x, a), b) in grid.iter().zip(&pv).zip(&qv) {
        let d = (a - b).abs();
        if d > best.value {
            best = SupDiff {
                value: d,
                argmax: x.clone(),
            };
        }
    }
    best
}

pub fn sup_diff(p: &PiecewiseLinearMap, q: &PiecewiseLinearMap) -> Rational {
    sup_diff_at(p, q).value
}

/// Anything that maps a closed interval to a closed interval.
pub trait IntervalMap {
    fn image(&self, iv: &ClosedInterval) -> Result<ClosedInterval, PlfError>;
}

impl IntervalMap for PiecewiseLinearMap {
    fn image(&self, iv: &ClosedInterval) -> Result<ClosedInterval, PlfError> {
        PiecewiseLinearMap::image(self, iv)
    }
}

/// Image of every member, as a normalized family (touching images merge).
pub fn map_image<M: IntervalMap + ?Sized>(
    map: &M,
    fam: &IntervalFamily,
) -> Result<IntervalFamily, PlfError> {
    let images = fam
        .members()
        .iter()
        .map(|m| map.image(m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IntervalFamily::union_of(fam.level(), images))
}

/// `S -> f_1(S) u ... u f_N(S)` for interval-valued maps.
pub fn hutchinson_step_with<M: IntervalMap>(
    maps: &[M],
    fam: &IntervalFamily,
) -> Result<IntervalFamily, PlfError> {
    let mut images = Vec::with_capacity(maps.len() * fam.len());
    for map in maps {
        for m in fam.members() {
            images.push(map.image(m)?);
        }
    }
    Ok(IntervalFamily::union_of(fam.level() + 1, images))
}

/// A finite set of monotone piecewise-linear contractions of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IFSDescription {
    maps: Vec<PiecewiseLinearMap>,
}

impl IFSDescription {
    pub fn new(maps: Vec<PiecewiseLinearMap>) -> Result<Self, PlfError> {
        if maps.is_empty() {
            return Err(PlfError::EmptySystem);
        }
        for (index, m) in maps.iter().enumerate() {
            let constant = m.lipschitz_constant();
            if constant >= Rational::one() {
                return Err(PlfError::NotAContraction { index, constant });
            }
        }
        Ok(IFSDescription { maps })
    }

    pub fn maps(&self) -> &[PiecewiseLinearMap] {
        &self.maps
    }
}

pub fn hutchinson_step(ifs: &IFSDescription, fam: &IntervalFamily) -> Result<IntervalFamily, PlfError> {
    hutchinson_step_with(ifs.maps(), fam)
}

/// The two weakly increasing three-piece maps whose attractor is
/// `[0,1/3] u [2/3,1]`: `F` halves the outer thirds and is constant `1/6`
/// in between, `G = F + 2/3`.
pub fn build_example_fg() -> IFSDescription {
    let r = Rational::new;
    let f = PiecewiseLinearMap::new(
        vec![
            Breakpoint::new(r(0, 1), r(0, 1)),
            Breakpoint::new(r(1, 3), r(1, 6)),
            Breakpoint::new(r(2, 3), r(1, 6)),
            Breakpoint::new(r(1, 1), r(1, 3)),
        ],
        Monotonicity::Weak,
    )
    .expect("valid map");
    let g = f.shifted(&r(2, 3)).expect("valid map");
    IFSDescription::new(vec![f, g]).expect("contractions")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn iv(a: Rational, b: Rational) -> ClosedInterval {
        ClosedInterval::new(a, b).unwrap()
    }

    fn f0() -> PiecewiseLinearMap {
        PiecewiseLinearMap::affine(r(1, 3), r(0, 1)).unwrap()
    }

    #[test]
    fn eval_line_and_example() {
        assert_eq!(f0().eval(&r(1, 2)).unwrap(), r(1, 6));
        let fg = build_example_fg();
        let (f, g) = (&fg.maps()[0], &fg.maps()[1]);
        assert_eq!(f.eval(&r(1, 2)).unwrap(), r(1, 6));
        assert_eq!(f.eval(&r(1, 3)).unwrap(), r(1, 6));
        assert_eq!(f.eval(&r(5, 6)).unwrap(), r(1, 2) * r(5, 6) - r(1, 6));
        assert_eq!(g.eval(&r(0, 1)).unwrap(), r(2, 3));
        assert_eq!(g.eval(&r(1, 6)).unwrap(), r(2, 3) + r(1, 12));
        assert_eq!(g.eval(&r(9, 10)).unwrap(), r(9, 20) + r(1, 2));
        assert_eq!(f.lipschitz_constant(), r(1, 2));
    }

    #[test]
    fn eval_rejects_out_of_domain() {
        assert_eq!(f0().eval(&r(-1, 5)), Err(PlfError::OutOfDomain(r(-1, 5))));
        assert!(f0().eval(&r(6, 5)).is_err());
        assert!(f0().eval_sorted(&[r(0, 1), r(2, 1)]).is_err());
    }

    #[test]
    fn eval_sorted_matches_eval() {
        let f = build_example_fg().maps()[0].clone();
        let grid: Vec<Rational> = (0..=24).map(|i| r(i, 24)).collect();
        let swept = f.eval_sorted(&grid).unwrap();
        for (x, y) in grid.iter().zip(swept) {
            assert_eq!(f.eval(x).unwrap(), y);
        }
    }

    #[test]
    fn construction_validation() {
        let bp = |x, y| Breakpoint::new(x, y);
        assert_eq!(
            PiecewiseLinearMap::new(vec![bp(r(0, 1), r(0, 1))], Monotonicity::Weak),
            Err(PlfError::TooFewPoints)
        );
        assert_eq!(
            PiecewiseLinearMap::new(vec![bp(r(0, 1), r(0, 1)), bp(r(1, 2), r(0, 1))], Monotonicity::Weak),
            Err(PlfError::BadEndpoints)
        );
        assert!(matches!(
            PiecewiseLinearMap::new(
                vec![bp(r(0, 1), r(0, 1)), bp(r(1, 2), r(1, 4)), bp(r(1, 2), r(1, 3)), bp(r(1, 1), r(1, 2))],
                Monotonicity::Weak
            ),
            Err(PlfError::UnsortedBreakpoints(_))
        ));
        assert!(matches!(
            PiecewiseLinearMap::new(
                vec![bp(r(0, 1), r(0, 1)), bp(r(1, 2), r(1, 4)), bp(r(1, 1), r(1, 4))],
                Monotonicity::Strict
            ),
            Err(PlfError::NotMonotone { .. })
        ));
        assert!(matches!(
            PiecewiseLinearMap::affine(r(1, 2), r(3, 4)),
            Err(PlfError::RangeEscape { .. })
        ));
    }

    #[test]
    fn lipschitz_of_affine() {
        assert_eq!(lipschitz_constant(&f0()), r(1, 3));
        assert_eq!(PiecewiseLinearMap::affine(r(5, 7), r(1, 7)).unwrap().lipschitz_constant(), r(5, 7));
        assert_eq!(PiecewiseLinearMap::affine(r(0, 1), r(1, 2)).unwrap().lipschitz_constant(), r(0, 1));
    }

    #[test]
    fn sup_diff_of_identical_maps() {
        assert_eq!(sup_diff(&f0(), &f0()), Rational::zero());
    }

    #[test]
    fn sup_diff_finds_interior_breakpoint() {
        let fg = build_example_fg();
        let d = sup_diff_at(&fg.maps()[0], &f0());
        // F - f0 is x/6 on [0,1/3], peaks at 1/3 with 1/18, and the same at 2/3
        assert_eq!(d.value, r(1, 18));
        assert_eq!(d.argmax, r(1, 3));
    }

    #[test]
    fn sup_diff_brute_force_agrees() {
        let fg = build_example_fg();
        let (p, q) = (&fg.maps()[0], &PiecewiseLinearMap::affine(r(2, 5), r(1, 20)).unwrap());
        let grid: Vec<Rational> = (0..=600).map(|i| r(i, 600)).collect();
        let brute = grid
            .iter()
            .map(|x| (p.eval(x).unwrap() - q.eval(x).unwrap()).abs())
            .max()
            .unwrap();
        // every breakpoint lies on the 1/600 grid, so the scan is exhaustive
        assert_eq!(sup_diff(p, q), brute);
    }

    #[test]
    fn image_of_unit_under_f0() {
        let img = map_image(&f0(), &IntervalFamily::unit()).unwrap();
        assert_eq!(img.members(), &[iv(r(0, 1), r(1, 3))]);
    }

    #[test]
    fn example_fixed_set() {
        let fam = IntervalFamily::new(2, vec![iv(r(0, 1), r(1, 3)), iv(r(2, 3), r(1, 1))]).unwrap();
        let next = hutchinson_step(&build_example_fg(), &fam).unwrap();
        assert_eq!(next.members(), fam.members());
        let f_img = map_image(&build_example_fg().maps()[0], &fam).unwrap();
        assert_eq!(f_img.members(), &[iv(r(0, 1), r(1, 3))]);
    }

    #[test]
    fn middle_thirds_step() {
        let ifs = IFSDescription::new(vec![
            PiecewiseLinearMap::affine(r(1, 3), r(0, 1)).unwrap(),
            PiecewiseLinearMap::affine(r(1, 3), r(2, 3)).unwrap(),
        ])
        .unwrap();
        let a2 = hutchinson_step(&ifs, &IntervalFamily::unit()).unwrap();
        assert_eq!(a2.members(), &[iv(r(0, 1), r(1, 3)), iv(r(2, 3), r(1, 1))]);
        assert_eq!(a2.level(), 2);
    }

    #[test]
    fn ifs_rejects_non_contractions() {
        let id = PiecewiseLinearMap::affine(r(1, 1), r(0, 1)).unwrap();
        assert!(matches!(
            IFSDescription::new(vec![f0(), id]),
            Err(PlfError::NotAContraction { index: 1, .. })
        ));
        assert_eq!(IFSDescription::new(vec![]), Err(PlfError::EmptySystem));
    }

    #[test]
    fn breakpoint_json_schema() {
        let json = serde_json::to_string(&f0()).unwrap();
        assert_eq!(
            json,
            r#"{"monotonicity":"strict","points":[{"x":"0","y":"0"},{"x":"1","y":"1/3"}]}"#
        );
        let back: PiecewiseLinearMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f0());
    }
}
