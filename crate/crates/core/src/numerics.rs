//! Exact rational scalars and closed/open rational intervals.
//!
//! Every quantity in the construction (widths, gap half-lengths, slopes,
//! breakpoint coordinates) is a [`Rational`]. Values are kept in lowest terms
//! with a positive denominator, so equality is structural equality.
//!
//! Values whose numerator and denominator fit in an `i128` are stored and
//! operated on as machine words; anything larger, or any operation that would
//! overflow, goes through `BigRational`. Each value has exactly one
//! representation, so the two paths are invisible to callers.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An exact, canonical, arbitrary-precision rational number.
#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Clone)]
enum Repr {
    /// Reduced, `d > 0`, `n != i128::MIN`.
    Small { n: i128, d: i128 },
    /// Reduced; never representable as `Small`.
    Big(BigRational),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("decimal literals are not accepted, write `{0}` as p/q")]
    Decimal(String),
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

fn gcd(a: i128, b: i128) -> i128 {
    a.gcd(&b)
}

/// `n/d` in lowest terms with `d > 0`, or `None` if that needs more than
/// an `i128`. Requires `d != 0`.
fn small(n: i128, d: i128) -> Option<Rational> {
    let g = gcd(n, d);
    let (mut n, mut d) = (n / g, d / g);
    if d < 0 {
        n = n.checked_neg()?;
        d = d.checked_neg()?;
    }
    if n == i128::MIN {
        return None;
    }
    Some(Rational(Repr::Small { n, d }))
}

fn small_add(a: i128, b: i128, c: i128, e: i128) -> Option<Rational> {
    let g = gcd(b, e);
    let (b1, e1) = (b / g, e / g);
    let n = a.checked_mul(e1)?.checked_add(c.checked_mul(b1)?)?;
    let d = b.checked_mul(e1)?;
    small(n, d)
}

fn small_mul(a: i128, b: i128, c: i128, e: i128) -> Option<Rational> {
    let g1 = gcd(a, e);
    let g2 = gcd(c, b);
    let n = (a / g1).checked_mul(c / g2)?;
    let d = (b / g2).checked_mul(e / g1)?;
    small(n, d)
}

impl Rational {
    fn from_big(r: BigRational) -> Self {
        if let (Some(n), Some(d)) = (r.numer().to_i128(), r.denom().to_i128()) {
            if n != i128::MIN {
                return Rational(Repr::Small { n, d });
            }
        }
        Rational(Repr::Big(r))
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { n, d } => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        small(numer.into(), denom.into()).expect("i64 ratios fit")
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Option<Self> {
        if denom.is_zero() {
            None
        } else {
            Some(Self::from_big(BigRational::new(numer, denom)))
        }
    }

    pub fn integer(n: i64) -> Self {
        Rational(Repr::Small { n: n.into(), d: 1 })
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    /// `2^exp`, for either sign of `exp`.
    pub fn pow2(exp: i32) -> Self {
        Self::integer(2).pow(exp)
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small { n, .. } => BigInt::from(*n),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small { d, .. } => BigInt::from(*d),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    fn signum(&self) -> Ordering {
        match &self.0 {
            Repr::Small { n, .. } => n.cmp(&0),
            Repr::Big(r) => r.numer().sign().cmp(&Sign::NoSign),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.signum() == Ordering::Equal
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { d, .. } => *d == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact integer power; negative exponents invert. Panics on `0^-n`.
    pub fn pow(&self, exp: i32) -> Self {
        assert!(
            !(exp < 0 && self.is_zero()),
            "zero raised to a negative power"
        );
        let base = if exp < 0 { self.recip() } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = Rational::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        acc
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        match &self.0 {
            // n != MIN, so the negations cannot overflow
            Repr::Small { n, d } if *n < 0 => Rational(Repr::Small { n: -d, d: -n }),
            Repr::Small { n, d } => Rational(Repr::Small { n: *d, d: *n }),
            Repr::Big(r) => Self::from_big(r.recip()),
        }
    }

    pub fn checked_div(&self, rhs: &Rational) -> Option<Rational> {
        if rhs.is_zero() {
            None
        } else {
            Some(self * rhs.recip())
        }
    }

    /// Midpoint `(self + other) / 2`.
    pub fn midpoint(&self, other: &Rational) -> Rational {
        (self + other) * Rational::new(1, 2)
    }

    /// True when the stored representation is reduced with a positive
    /// denominator.
    pub fn is_canonical(&self) -> bool {
        let (n, d) = (self.numer(), self.denom());
        d.is_positive() && n.gcd(&d).is_one()
    }

    /// Nearest `f64`; for display and plotting only.
    pub fn to_f64(&self) -> f64 {
        self.to_big().to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal expansion rounded half-away-from-zero to `digits` places
    /// after the point, computed with integer arithmetic.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = round_half_away(&(self.to_big() * BigRational::from_integer(scale)));
        render_scaled(&scaled, digits)
    }

    /// Decimal expansion with `sig` significant digits (plain notation).
    pub fn to_significant(&self, sig: usize) -> String {
        assert!(sig > 0);
        if self.is_zero() {
            return "0".to_string();
        }
        // e = floor(log10 |x|)
        let mag = self.abs();
        let ten = Rational::integer(10);
        let mut e: i32 = (mag.numer().bits() as i32 - mag.denom().bits() as i32) * 3 / 10;
        while ten.pow(e) > mag {
            e -= 1;
        }
        while ten.pow(e + 1) <= mag {
            e += 1;
        }
        let frac_digits = sig as i32 - 1 - e;
        if frac_digits >= 0 {
            // a carry (9.99 -> 10.0) can add one digit; display only
            self.to_decimal(frac_digits as usize)
        } else {
            let shifted = self.clone() * ten.pow(frac_digits);
            let rounded = round_half_away(&shifted.to_big()) * BigInt::from(10u32).pow((-frac_digits) as u32);
            rounded.to_string()
        }
    }
}

fn round_half_away(x: &BigRational) -> BigInt {
    let half = BigRational::new(1.into(), 2.into());
    if x.is_negative() {
        -(x.abs() + half).floor().to_integer()
    } else {
        (x + half).floor().to_integer()
    }
}

fn render_scaled(scaled: &BigInt, digits: usize) -> String {
    let negative = scaled.sign() == Sign::Minus;
    let mut s = scaled.abs().to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
        }
        s.insert(s.len() - digits, '.');
    }
    if negative {
        s.insert(0, '-');
    }
    s
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small { n: a, d: b }, Repr::Small { n: c, d: e }) => a == c && b == e,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small { n, d } => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(r) => {
                1u8.hash(state);
                r.hash(state);
            }
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small { n: a, d: b }, Repr::Small { n: c, d: e }) = (&self.0, &other.0) {
            if b == e {
                return a.cmp(c);
            }
            if let (Some(l), Some(r)) = (a.checked_mul(*e), c.checked_mul(*b)) {
                return l.cmp(&r);
            }
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { n, d: 1 } => write!(f, "{n}"),
            Repr::Small { n, d } => write!(f, "{n}/{d}"),
            Repr::Big(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `n` or `p/q` with an optional leading sign on the numerator.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        if s.contains(['.', 'e', 'E']) {
            return Err(ParseRationalError::Decimal(s.to_string()));
        }
        let parse_int = |t: &str, allow_sign: bool| -> Result<BigInt, ParseRationalError> {
            let digits = if allow_sign {
                t.strip_prefix(['-', '+']).unwrap_or(t)
            } else {
                t
            };
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ParseRationalError::Invalid(s.to_string()));
            }
            t.parse::<BigInt>()
                .map_err(|_| ParseRationalError::Invalid(s.to_string()))
        };
        match s.split_once('/') {
            None => Ok(Rational::from_big(BigRational::from_integer(parse_int(s, true)?))),
            Some((n, d)) => {
                let n = parse_int(n.trim(), true)?;
                let d = parse_int(d.trim(), false)?;
                Rational::from_bigints(n, d)
                    .ok_or_else(|| ParseRationalError::ZeroDenominator(s.to_string()))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational::from_big(r)
    }
}

impl From<&Rational> for BigRational {
    fn from(r: &Rational) -> Self {
        r.to_big()
    }
}

fn add(x: &Rational, y: &Rational) -> Rational {
    if let (Repr::Small { n: a, d: b }, Repr::Small { n: c, d: e }) = (&x.0, &y.0) {
        if let Some(v) = small_add(*a, *b, *c, *e) {
            return v;
        }
    }
    Rational::from_big(x.to_big() + y.to_big())
}

fn sub(x: &Rational, y: &Rational) -> Rational {
    if let (Repr::Small { n: a, d: b }, Repr::Small { n: c, d: e }) = (&x.0, &y.0) {
        if let Some(v) = small_add(*a, *b, -c, *e) {
            return v;
        }
    }
    Rational::from_big(x.to_big() - y.to_big())
}

fn mul(x: &Rational, y: &Rational) -> Rational {
    if let (Repr::Small { n: a, d: b }, Repr::Small { n: c, d: e }) = (&x.0, &y.0) {
        if let Some(v) = small_mul(*a, *b, *c, *e) {
            return v;
        }
    }
    Rational::from_big(x.to_big() * y.to_big())
}

fn div(x: &Rational, y: &Rational) -> Rational {
    assert!(!y.is_zero(), "division by zero");
    mul(x, &y.recip())
}

macro_rules! forward_binop {
    ($Trait:ident, $method:ident) => {
        impl $Trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $method(&self, &rhs)
            }
        }
        impl<'a> $Trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                $method(&self, rhs)
            }
        }
        impl<'a> $Trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $method(self, &rhs)
            }
        }
        impl<'a, 'b> $Trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                $method(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small { n, d } => Rational(Repr::Small { n: -n, d: *d }),
            Repr::Big(r) => Rational::from_big(-r),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = add(self, rhs);
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = add(self, &rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = sub(self, rhs);
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// A closed interval `[lo, hi]` with rational endpoints, `lo <= hi`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClosedInterval {
    pub lo: Rational,
    pub hi: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("interval endpoints out of order: {lo} > {hi}")]
pub struct InvertedInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl ClosedInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, InvertedInterval> {
        if lo > hi {
            Err(InvertedInterval { lo, hi })
        } else {
            Ok(ClosedInterval { lo, hi })
        }
    }

    pub fn unit() -> Self {
        ClosedInterval {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        self.lo.midpoint(&self.hi)
    }

    pub fn translate(&self, t: &Rational) -> ClosedInterval {
        ClosedInterval {
            lo: &self.lo + t,
            hi: &self.hi + t,
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_subset_of(&self, other: &ClosedInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

impl fmt::Debug for ClosedInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Display for ClosedInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Width `hi - lo` of a closed interval.
pub fn interval_width(iv: &ClosedInterval) -> Rational {
    iv.width()
}

/// `[lo + t, hi + t]`. Containment in `[0, 1]` is the caller's concern.
pub fn interval_translate(iv: &ClosedInterval, t: &Rational) -> ClosedInterval {
    iv.translate(t)
}

/// A nonempty open interval `(lo, hi)`, `lo < hi`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl OpenInterval {
    pub fn new(lo: Rational, hi: Rational) -> Option<Self> {
        (lo < hi).then_some(OpenInterval { lo, hi })
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn is_subset_of(&self, other: &OpenInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Intersection of two open intervals, if nonempty.
    pub fn intersect(&self, other: &OpenInterval) -> Option<OpenInterval> {
        let lo = std::cmp::max(&self.lo, &other.lo).clone();
        let hi = std::cmp::min(&self.hi, &other.hi).clone();
        OpenInterval::new(lo, hi)
    }
}

impl fmt::Debug for OpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

impl fmt::Display for OpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Total order helper used by sorted interval families.
pub(crate) fn cmp_by_lo(a: &ClosedInterval, b: &ClosedInterval) -> Ordering {
    a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi))
}
