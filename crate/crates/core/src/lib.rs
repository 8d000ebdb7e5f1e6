//! Exact construction of an iterated function system of two strictly
//! increasing contractions of `[0, 1]` with disjoint images whose attractor
//! has positive Lebesgue measure, plus finite checks of its defining
//! properties.
//!
//! All arithmetic is over [`Rational`]; floating point appears only in
//! display helpers.
//!
//! ```
//! use fatcantor::{default_params, attractor_measure_bounds, Rational};
//!
//! let seq = default_params(8).unwrap();
//! let b = attractor_measure_bounds(&seq, 2).unwrap();
//! assert_eq!(b.upper, Rational::new(2, 3));
//! assert!(b.lower >= Rational::new(1, 3));
//! ```

pub mod attractor;
pub mod intervals;
pub mod limit;
pub mod numerics;
pub mod params;
pub mod plf;
pub mod similitude;
pub mod verifier;

pub use attractor::{
    attractor_measure_bounds, measure_table, membership, verify_self_similarity, AttractorError, MeasureBounds,
    Membership, VerificationResult,
};
pub use intervals::{
    build_intervals, family_measure, gap_family, nowhere_dense_witness, IntervalError, IntervalFamily,
    NowhereDenseWitness,
};
pub use limit::{eval_limit, eval_limit_at_family_endpoint, CertifiedValue, LimitError, LimitEvaluation};
pub use numerics::{interval_translate, interval_width, ClosedInterval, OpenInterval, ParseRationalError, Rational};
pub use params::{
    default_params, generate_params, validate_params, EpsilonChooser, HalfMinimum, ParamError, ParamSequence,
    ValidationReport,
};
pub use plf::{
    build_example_fg, build_fk, eval_plf, hutchinson_step, lipschitz_constant, map_image, sup_diff, Construction,
    IFSDescription, Monotonicity, PiecewiseLinearMap, PlfError,
};
pub use similitude::{
    similitude_level_measures, validate_condition_11, AffineMap, ConditionReport, SimilitudeError, SimilitudeIFS,
};
pub use verifier::{run_full_verification, Status, VerificationReport, VerifyError};
