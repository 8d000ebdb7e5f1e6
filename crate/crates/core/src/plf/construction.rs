//! The approximating maps `f_k`.
//!
//! `f_0(x) = x/3`. For `k >= 1`, `f_k` agrees with `f_{k-1}` off `A_k`, and on
//! each `[a, b]` in `I_k` (midpoint `m`) it is the three-piece map
//!
//! ```text
//! [a, m - eps_k]      slope w_{k+2}/w_{k+1}  from f_{k-1}(a)
//! [m - eps_k, m + eps_k]  slope eps_{k+1}/eps_k  from f_{k-1}(a) + w_{k+2}
//! [m + eps_k, b]      slope w_{k+2}/w_{k+1}  from f_{k-1}(a) + w_{k+2} + 2 eps_{k+1}
//! ```
//!
//! Each piece is evaluated from its own formula and the shared endpoints are
//! compared exactly; a disagreement is reported, never smoothed over.

use std::sync::OnceLock;

use super::{Breakpoint, Monotonicity, PiecewiseLinearMap, PlfError};
use crate::intervals::IntervalFamily;
use crate::numerics::Rational;
use crate::params::ParamSequence;

/// Lazily built, shareable tables of `I_1..I_K` and `f_0..f_{K-2}`.
#[derive(Debug)]
pub struct Construction {
    params: ParamSequence,
    families: Vec<OnceLock<Result<IntervalFamily, PlfError>>>,
    maps: Vec<OnceLock<Result<PiecewiseLinearMap, PlfError>>>,
}

impl Construction {
    pub fn new(params: ParamSequence) -> Self {
        let depth = params.depth();
        Construction {
            families: (0..depth).map(|_| OnceLock::new()).collect(),
            maps: (0..depth.saturating_sub(1).max(1)).map(|_| OnceLock::new()).collect(),
            params,
        }
    }

    pub fn params(&self) -> &ParamSequence {
        &self.params
    }

    pub fn depth(&self) -> usize {
        self.params.depth()
    }

    /// Largest `k` for which `f_k` can be built (`k + 2 <= depth`), with
    /// `f_0` always available.
    pub fn max_map_level(&self) -> usize {
        self.depth().saturating_sub(2)
    }

    /// `I_k`, `1 <= k <= depth`.
    pub fn family(&self, k: usize) -> Result<&IntervalFamily, PlfError> {
        if k == 0 {
            return Err(crate::intervals::IntervalError::ZeroLevel.into());
        }
        if k > self.depth() {
            return Err(crate::intervals::IntervalError::DepthExceeded {
                level: k,
                depth: self.depth(),
            }
            .into());
        }
        self.families[k - 1]
            .get_or_init(|| {
                if k == 1 {
                    Ok(IntervalFamily::unit())
                } else {
                    let prev = self.family(k - 1)?;
                    Ok(prev.split(self.params.eps(k - 1))?)
                }
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `f_k`, `0 <= k <= depth - 2`.
    pub fn fk(&self, k: usize) -> Result<&PiecewiseLinearMap, PlfError> {
        if k > 0 && k + 2 > self.depth() {
            return Err(PlfError::InsufficientDepth {
                level: k,
                needed: k + 2,
                depth: self.depth(),
            });
        }
        self.maps[k]
            .get_or_init(|| {
                if k == 0 {
                    PiecewiseLinearMap::affine(Rational::new(1, 3), Rational::zero())
                } else {
                    let prev = self.fk(k - 1)?;
                    let fam = self.family(k)?;
                    refine(&self.params, k, prev, fam)
                }
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `f_{k-1}(x)` where `x` is an endpoint of a member of `I_k`; this is
    /// the exact value of the limit map there.
    pub fn endpoint_value(&self, x: &Rational, k: usize) -> Result<Option<Rational>, PlfError> {
        if !self.family(k)?.is_endpoint(x) {
            return Ok(None);
        }
        self.fk(k - 1)?.eval(x).map(Some)
    }
}

/// Build `f_k` from `f_{k-1}` and `I_k`.
fn refine(
    seq: &ParamSequence,
    k: usize,
    prev: &PiecewiseLinearMap,
    fam: &IntervalFamily,
) -> Result<PiecewiseLinearMap, PlfError> {
    let eps_k = seq.eps(k);
    let eps_next = seq.eps(k + 1);
    let outer_slope = seq
        .w(k + 2)
        .checked_div(seq.w(k + 1))
        .ok_or_else(|| zero_division(k))?;
    let inner_slope = eps_next.checked_div(eps_k).ok_or_else(|| zero_division(k))?;
    let w_k2 = seq.w(k + 2);
    let two = Rational::integer(2);

    let old = prev.points();
    let mut points = Vec::with_capacity(old.len() + 2 * fam.len());
    let mut cursor = 0;
    for member in fam.members() {
        let (a, b) = (&member.lo, &member.hi);
        while cursor < old.len() && &old[cursor].x < a {
            points.push(old[cursor].clone());
            cursor += 1;
        }
        while cursor < old.len() && &old[cursor].x <= b {
            cursor += 1;
        }
        let fa = prev.eval(a)?;
        let fb = prev.eval(b)?;
        let mid = member.midpoint();
        let left_x = &mid - eps_k;
        let right_x = &mid + eps_k;

        let left_piece_end = &outer_slope * (&left_x - a) + &fa;
        let middle_start = &fa + w_k2;
        junction(&left_x, &left_piece_end, &middle_start)?;

        let middle_end = &inner_slope * (&right_x - &left_x) + &middle_start;
        let right_start = &middle_start + &two * eps_next;
        junction(&right_x, &middle_end, &right_start)?;

        let right_end = &outer_slope * (b - &right_x) + &right_start;
        junction(b, &right_end, &fb)?;

        points.push(Breakpoint::new(a.clone(), fa));
        points.push(Breakpoint::new(left_x, middle_start));
        points.push(Breakpoint::new(right_x, right_start));
        points.push(Breakpoint::new(b.clone(), fb));
    }
    points.extend(old[cursor..].iter().cloned());
    PiecewiseLinearMap::new(points, Monotonicity::Strict)
}

fn junction(x: &Rational, left: &Rational, right: &Rational) -> Result<(), PlfError> {
    if left == right {
        Ok(())
    } else {
        Err(PlfError::JunctionMismatch {
            x: x.clone(),
            left: left.clone(),
            right: right.clone(),
        })
    }
}

fn zero_division(k: usize) -> PlfError {
    PlfError::ZeroParameter(k)
}

/// `f_k` for the given parameters; requires `k + 2 <= depth` for `k >= 1`.
pub fn build_fk(seq: &ParamSequence, k: usize) -> Result<PiecewiseLinearMap, PlfError> {
    Construction::new(seq.clone()).fk(k).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_params;
    use crate::plf::{lipschitz_constant, sup_diff};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    /// f_1 written out piece by piece, independent of `refine`.
    fn f1_direct(eps2: &Rational, x: &Rational) -> Rational {
        let third = r(1, 3);
        let two_thirds = r(2, 3);
        let sixth = r(1, 6);
        if x <= &third {
            r(3, 1) * (&sixth - eps2) * x
        } else if x < &two_thirds {
            r(6, 1) * eps2 * (x - &third) + &sixth - eps2
        } else {
            r(3, 1) * (&sixth - eps2) * (x - &two_thirds) + &sixth + eps2
        }
    }

    #[test]
    fn f0_is_the_third_line() {
        let seq = default_params(1).unwrap();
        let f0 = build_fk(&seq, 0).unwrap();
        assert_eq!(
            f0.points(),
            &[Breakpoint::new(r(0, 1), r(0, 1)), Breakpoint::new(r(1, 1), r(1, 3))]
        );
    }

    #[test]
    fn f1_values() {
        let seq = default_params(3).unwrap();
        let f1 = build_fk(&seq, 1).unwrap();
        assert_eq!(f1.eval(&r(0, 1)).unwrap(), r(0, 1));
        assert_eq!(f1.eval(&r(1, 1)).unwrap(), r(1, 3));
        assert_eq!(f1.eval(&r(1, 3)).unwrap(), r(13, 96));
        assert_eq!(f1.eval(&r(1, 2)).unwrap(), r(1, 6));
        assert_eq!(f1.points().len(), 4);
        for i in 0..=96 {
            let x = r(i, 96);
            assert_eq!(f1.eval(&x).unwrap(), f1_direct(seq.eps(2), &x), "x={x}");
        }
    }

    #[test]
    fn f1_lipschitz_and_distance() {
        let seq = default_params(4).unwrap();
        let f0 = build_fk(&seq, 0).unwrap();
        let f1 = build_fk(&seq, 1).unwrap();
        let f2 = build_fk(&seq, 2).unwrap();
        assert_eq!(lipschitz_constant(&f1), r(13, 32));
        assert_eq!(sup_diff(&f1, &f0), r(7, 288));
        assert!(sup_diff(&f2, &f1) <= r(1, 4));
    }

    #[test]
    fn breakpoint_count_doubles() {
        let c = Construction::new(default_params(10).unwrap());
        for k in 0..=8 {
            assert_eq!(c.fk(k).unwrap().points().len(), 1 << (k + 1), "k={k}");
        }
    }

    #[test]
    fn depth_is_enforced() {
        let seq = default_params(4).unwrap();
        assert!(build_fk(&seq, 2).is_ok());
        assert_eq!(
            build_fk(&seq, 3),
            Err(PlfError::InsufficientDepth {
                level: 3,
                needed: 5,
                depth: 4
            })
        );
        assert!(build_fk(&default_params(1).unwrap(), 0).is_ok());
    }

    #[test]
    fn corrupted_width_breaks_a_junction() {
        let seq = default_params(6).unwrap();
        let bad = seq.with_w(4, seq.w(4) + r(1, 1_000_000)).unwrap();
        let c = Construction::new(bad);
        assert!(matches!(c.fk(2), Err(PlfError::JunctionMismatch { .. })));
    }

    #[test]
    fn endpoint_values() {
        let c = Construction::new(default_params(6).unwrap());
        assert_eq!(c.endpoint_value(&r(1, 3), 2).unwrap(), Some(r(13, 96)));
        assert_eq!(c.endpoint_value(&r(0, 1), 1).unwrap(), Some(r(0, 1)));
        assert_eq!(c.endpoint_value(&r(1, 1), 1).unwrap(), Some(r(1, 3)));
        assert_eq!(c.endpoint_value(&r(1, 2), 2).unwrap(), None);
    }
}
