//! Certified values of the limit map `f = lim f_k` and of `g = f + 2/3`.
//!
//! `f` is exact wherever the construction stops changing: at points that
//! leave `A_k` (since `f_l = f_{l-1}` off `A_l`) and at endpoints of members of
//! some `I_k` (where every later `f_l` agrees with `f_{k-1}`). Elsewhere the
//! value of `f_k` is returned with radius `2^-k`, the sum of the tail bounds
//! `sup |f_l - f_{l-1}| <= 2^-l` over `l > k`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::Rational;
use crate::params::ParamSequence;
use crate::plf::{Construction, PlfError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LimitError {
    #[error("{0} lies outside [0, 1]")]
    OutOfDomain(Rational),
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(Rational),
    #[error("tolerance {tol} needs f_{needed}, but depth {depth} only reaches f_{available}")]
    InsufficientDepth {
        tol: Rational,
        needed: usize,
        available: usize,
        depth: usize,
    },
    #[error("{x} is not an endpoint of a member of I_{k}")]
    NotAnEndpoint { x: Rational, k: usize },
    #[error(transparent)]
    Construction(#[from] PlfError),
}

/// A rational midpoint and radius; the true value lies in
/// `[value - radius, value + radius]`, and radius zero means exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedValue {
    pub value: Rational,
    pub radius: Rational,
}

impl CertifiedValue {
    pub fn exact(value: Rational) -> Self {
        CertifiedValue {
            value,
            radius: Rational::zero(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    pub fn lower(&self) -> Rational {
        &self.value - &self.radius
    }

    pub fn upper(&self) -> Rational {
        &self.value + &self.radius
    }

    pub fn encloses(&self, x: &Rational) -> bool {
        &self.lower() <= x && x <= &self.upper()
    }

    /// `Some(true)` if every point of `self` lies strictly below every point of
    /// `other`, `Some(false)` for the reverse, `None` when the enclosures meet.
    pub fn strictly_below(&self, other: &CertifiedValue) -> Option<bool> {
        if self.upper() < other.lower() {
            Some(true)
        } else if other.upper() < self.lower() {
            Some(false)
        } else {
            None
        }
    }
}

/// Why a value is exact (or not).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// `x` left `A_{level+1}`, so `f(x) = f_level(x)`.
    Ejected,
    /// `x` is an endpoint of a member of `I_{level+1}`.
    Endpoint,
    /// `f_level(x)` with radius `2^-level`.
    Approximate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitEvaluation {
    pub x: Rational,
    pub value: CertifiedValue,
    /// Index of the map `f_level` that was evaluated.
    pub level: usize,
    pub basis: Basis,
}

/// Evaluate `f(x)` using an existing construction table.
pub fn eval_limit_with(c: &Construction, x: &Rational, tol: &Rational) -> Result<LimitEvaluation, LimitError> {
    if x.is_negative() || x > &Rational::one() {
        return Err(LimitError::OutOfDomain(x.clone()));
    }
    if !tol.is_positive() {
        return Err(LimitError::NonPositiveTolerance(tol.clone()));
    }
    let max_map = c.max_map_level();
    // levels whose f_{k-1} is available
    let last_family = c.depth().min(max_map + 1);

    for k in 2..=last_family {
        if !c.family(k)?.contains(x) {
            return exact(c, x, k - 1, Basis::Ejected);
        }
    }
    for k in 1..=last_family {
        if c.family(k)?.is_endpoint(x) {
            return exact(c, x, k - 1, Basis::Endpoint);
        }
    }

    let mut k = 0usize;
    while &Rational::pow2(-(k as i32)) > tol {
        k += 1;
    }
    if k > max_map {
        return Err(LimitError::InsufficientDepth {
            tol: tol.clone(),
            needed: k,
            available: max_map,
            depth: c.depth(),
        });
    }
    Ok(LimitEvaluation {
        x: x.clone(),
        value: CertifiedValue {
            value: c.fk(k)?.eval(x)?,
            radius: Rational::pow2(-(k as i32)),
        },
        level: k,
        basis: Basis::Approximate,
    })
}

fn exact(c: &Construction, x: &Rational, level: usize, basis: Basis) -> Result<LimitEvaluation, LimitError> {
    Ok(LimitEvaluation {
        x: x.clone(),
        value: CertifiedValue::exact(c.fk(level)?.eval(x)?),
        level,
        basis,
    })
}

/// `f(x)` within `tol`, exact whenever the construction allows it.
pub fn eval_limit(seq: &ParamSequence, x: &Rational, tol: &Rational) -> Result<LimitEvaluation, LimitError> {
    eval_limit_with(&Construction::new(seq.clone()), x, tol)
}

/// Exact `f(x) = f_{k-1}(x)` for an endpoint `x` of a member of `I_k`.
pub fn eval_limit_at_family_endpoint(seq: &ParamSequence, x: &Rational, k: usize) -> Result<Rational, LimitError> {
    endpoint_value_with(&Construction::new(seq.clone()), x, k)
}

pub fn endpoint_value_with(c: &Construction, x: &Rational, k: usize) -> Result<Rational, LimitError> {
    c.endpoint_value(x, k)?.ok_or(LimitError::NotAnEndpoint { x: x.clone(), k })
}

/// `g = f + 2/3` applied to a certified value of `f`.
pub fn build_g_value(fval: &CertifiedValue) -> CertifiedValue {
    CertifiedValue {
        value: &fval.value + Rational::new(2, 3),
        radius: fval.radius.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LipschitzBound {
    /// Certified constant for the limit map.
    pub certified: Rational,
    /// `max_k lip(f_k)` over the levels that were built.
    pub finite_level_max: Rational,
    pub levels: usize,
}

/// Each `f_k` is `L`-Lipschitz with `L < 1/2`, so the pointwise limit is
/// `1/2`-Lipschitz. The finite-level maximum is reported as a witness.
pub fn limit_lipschitz_bound(seq: &ParamSequence) -> Result<LipschitzBound, LimitError> {
    let c = Construction::new(seq.clone());
    let mut finite_level_max = Rational::zero();
    for k in 0..=c.max_map_level() {
        finite_level_max = finite_level_max.max(c.fk(k)?.lipschitz_constant());
    }
    Ok(LipschitzBound {
        certified: Rational::new(1, 2),
        finite_level_max,
        levels: c.max_map_level() + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_params;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn exact_values() {
        let seq = default_params(8).unwrap();
        let tol = r(1, 1000);
        let at0 = eval_limit(&seq, &r(0, 1), &tol).unwrap();
        assert_eq!(at0.value, CertifiedValue::exact(r(0, 1)));
        assert_eq!(at0.basis, Basis::Endpoint);
        let at1 = eval_limit(&seq, &r(1, 1), &tol).unwrap();
        assert_eq!(at1.value, CertifiedValue::exact(r(1, 3)));
        let half = eval_limit(&seq, &r(1, 2), &tol).unwrap();
        assert_eq!(half.value, CertifiedValue::exact(r(1, 6)));
        assert_eq!(half.basis, Basis::Ejected);
        assert_eq!(half.level, 1);
    }

    #[test]
    fn ejection_at_third_level() {
        let seq = default_params(8).unwrap();
        let e = eval_limit(&seq, &r(1, 6), &r(1, 2)).unwrap();
        assert_eq!(e.basis, Basis::Ejected);
        assert_eq!(e.level, 2);
        assert!(e.value.is_exact());
    }

    #[test]
    fn endpoints_at_various_levels() {
        let seq = default_params(8).unwrap();
        assert_eq!(eval_limit_at_family_endpoint(&seq, &r(1, 3), 2).unwrap(), r(13, 96));
        assert_eq!(eval_limit_at_family_endpoint(&seq, &r(0, 1), 1).unwrap(), r(0, 1));
        assert_eq!(eval_limit_at_family_endpoint(&seq, &r(1, 1), 1).unwrap(), r(1, 3));
        // 1/3 stays an endpoint at every later level, with the same value
        for k in 2..=7 {
            assert_eq!(eval_limit_at_family_endpoint(&seq, &r(1, 3), k).unwrap(), r(13, 96));
        }
        assert!(matches!(
            eval_limit_at_family_endpoint(&seq, &r(1, 4), 2),
            Err(LimitError::NotAnEndpoint { .. })
        ));
        let via_eval = eval_limit(&seq, &r(1, 3), &r(1, 1_000_000)).unwrap();
        assert_eq!(via_eval.value, CertifiedValue::exact(r(13, 96)));
    }

    #[test]
    fn approximate_value_radius() {
        // with depth 4 only A_2, A_3 are usable; 1/4 lies in both and is not
        // an endpoint, so the value is approximate
        let shallow = default_params(4).unwrap();
        let e = eval_limit(&shallow, &r(1, 4), &r(1, 4)).unwrap();
        assert_eq!(e.basis, Basis::Approximate);
        assert_eq!(e.level, 2);
        assert_eq!(e.value.radius, r(1, 4));
        let coarse = eval_limit(&shallow, &r(1, 4), &r(1, 2)).unwrap();
        assert_eq!(coarse.level, 1);
        // a deeper evaluation lands inside both enclosures
        let deep = eval_limit(&default_params(16).unwrap(), &r(1, 4), &r(1, 4096)).unwrap();
        assert!(e.value.encloses(&deep.value.value));
        assert!(coarse.value.encloses(&deep.value.value));
    }

    #[test]
    fn shrinking_tolerances_nest() {
        // 1/4 is neither an endpoint nor ejected at shallow depth
        let seq = default_params(12).unwrap();
        let c = Construction::new(seq);
        let x = r(1, 4);
        let mut prev: Option<CertifiedValue> = None;
        for j in 1..=10 {
            let e = eval_limit_with(&c, &x, &Rational::pow2(-j)).unwrap();
            if let Some(p) = &prev {
                assert!(p.lower() <= e.value.lower() || e.value.is_exact());
                assert!(e.value.upper() <= p.upper() || e.value.is_exact());
                assert!(p.encloses(&e.value.value));
            }
            prev = Some(e.value);
        }
    }

    #[test]
    fn tolerance_needs_depth() {
        let seq = default_params(4).unwrap();
        let err = eval_limit(&seq, &r(1, 4), &r(1, 1 << 20)).unwrap_err();
        assert!(matches!(err, LimitError::InsufficientDepth { needed: 20, .. }), "{err:?}");
        assert!(matches!(
            eval_limit(&seq, &r(3, 2), &r(1, 2)),
            Err(LimitError::OutOfDomain(_))
        ));
        assert!(matches!(
            eval_limit(&seq, &r(1, 2), &r(0, 1)),
            Err(LimitError::NonPositiveTolerance(_))
        ));
    }

    #[test]
    fn g_values() {
        assert_eq!(build_g_value(&CertifiedValue::exact(r(0, 1))), CertifiedValue::exact(r(2, 3)));
        assert_eq!(build_g_value(&CertifiedValue::exact(r(1, 3))), CertifiedValue::exact(r(1, 1)));
        let approx = CertifiedValue {
            value: r(1, 6),
            radius: Rational::pow2(-10),
        };
        assert_eq!(
            build_g_value(&approx),
            CertifiedValue {
                value: r(5, 6),
                radius: Rational::pow2(-10)
            }
        );
    }

    #[test]
    fn lipschitz_bound() {
        let b = limit_lipschitz_bound(&default_params(7).unwrap()).unwrap();
        assert_eq!(b.certified, r(1, 2));
        assert!(b.finite_level_max < r(1, 2));
        assert_eq!(b.levels, 6);
        let only_f0 = limit_lipschitz_bound(&default_params(2).unwrap()).unwrap();
        assert_eq!(only_f0.finite_level_max, r(1, 3));
    }

    #[test]
    fn certified_ordering() {
        let a = CertifiedValue { value: r(1, 4), radius: r(1, 100) };
        let b = CertifiedValue { value: r(1, 3), radius: r(1, 100) };
        assert_eq!(a.strictly_below(&b), Some(true));
        assert_eq!(b.strictly_below(&a), Some(false));
        let c = CertifiedValue { value: r(1, 4), radius: r(1, 10) };
        assert_eq!(c.strictly_below(&b), None);
    }
}
