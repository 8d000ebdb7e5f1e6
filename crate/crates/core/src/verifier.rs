//! The full verification campaign: a fixed, ordered table of claims, each
//! checked over every applicable level and reported exactly once.
//!
//! A failing claim carries the first violating instance together with both
//! sides of the violated relation. Claims about `A_*` that no finite
//! computation decides are reported as `unchecked`.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attractor::{measure_bounds_with, verify_self_similarity_with};
use crate::intervals::IntervalFamily;
use crate::numerics::{ClosedInterval, Rational};
use crate::params::{validate_params, Constraint, ParamSequence, Relation};
use crate::plf::{sup_diff_at, Construction, PiecewiseLinearMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("max level must be at least 1")]
    ZeroLevel,
    #[error("max level {max_level} needs depth {needed}, the sequence has depth {depth}")]
    InsufficientDepth {
        max_level: usize,
        needed: usize,
        depth: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unchecked,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Unchecked => "unchecked",
        })
    }
}

/// Exact data backing a status: the instance and, for relational claims,
/// both sides of the relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub instance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Witness {
    fn relation(instance: String, lhs: Rational, relation: Relation, rhs: Rational) -> Self {
        Witness {
            instance,
            lhs: Some(lhs),
            relation: Some(relation),
            rhs: Some(rhs),
            note: None,
        }
    }

    fn note(instance: String, note: impl Into<String>) -> Self {
        Witness {
            instance,
            lhs: None,
            relation: None,
            rhs: None,
            note: Some(note.into()),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.instance)?;
        if let (Some(l), Some(rel), Some(r)) = (&self.lhs, &self.relation, &self.rhs) {
            write!(f, ": {l} {} {r} is false", rel.symbol())?;
        }
        if let Some(n) = &self.note {
            write!(f, ": {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimEntry {
    pub id: String,
    pub anchor: String,
    pub instance: String,
    pub status: Status,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claims: Vec<ClaimEntry>,
}

impl VerificationReport {
    pub fn count(&self, status: Status) -> usize {
        self.claims.iter().filter(|c| c.status == status).count()
    }

    pub fn passed(&self) -> bool {
        self.count(Status::Fail) == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClaimEntry> {
        self.claims.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn get(&self, id: &str) -> Option<&ClaimEntry> {
        self.claims.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.claims {
            let _ = writeln!(out, "{:<10} {:<28} {}", c.status, c.id, c.instance);
            if c.status != Status::Pass {
                if let Some(w) = &c.witness {
                    let _ = writeln!(out, "{:<10} {w}", "");
                }
            }
        }
        let _ = writeln!(
            out,
            "{} pass, {} fail, {} unchecked",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Unchecked)
        );
        out
    }

    pub fn to_junit(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<testsuite name="verification" tests="{}" failures="{}" skipped="{}">"#,
            self.claims.len(),
            self.count(Status::Fail),
            self.count(Status::Unchecked)
        );
        for c in &self.claims {
            let name = xml_escape(&format!("{} [{}]", c.id, c.instance));
            let detail = c.witness.as_ref().map(|w| xml_escape(&w.to_string())).unwrap_or_default();
            match c.status {
                Status::Pass => {
                    let _ = writeln!(out, r#"  <testcase classname="claims" name="{name}"/>"#);
                }
                Status::Fail => {
                    let _ = writeln!(out, r#"  <testcase classname="claims" name="{name}">"#);
                    let _ = writeln!(out, r#"    <failure message="{detail}"/>"#);
                    let _ = writeln!(out, "  </testcase>");
                }
                Status::Unchecked => {
                    let _ = writeln!(out, r#"  <testcase classname="claims" name="{name}">"#);
                    let _ = writeln!(out, r#"    <skipped message="{detail}"/>"#);
                    let _ = writeln!(out, "  </testcase>");
                }
            }
        }
        let _ = writeln!(out, "</testsuite>");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// What a campaign is run against.
struct Scope<'a> {
    c: &'a Construction,
    max_level: usize,
}

impl Scope<'_> {
    fn seq(&self) -> &ParamSequence {
        self.c.params()
    }

    /// Levels of `I_k` needed by `f_0..f_L`.
    fn family_levels(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.max_level + 2
    }

    fn family(&self, k: usize) -> Result<&IntervalFamily, Witness> {
        self.c
            .family(k)
            .map_err(|e| Witness::note(format!("I_{k}"), e.to_string()))
    }

    fn fk(&self, k: usize) -> Result<&PiecewiseLinearMap, Witness> {
        self.c
            .fk(k)
            .map_err(|e| Witness::note(format!("f_{k}"), e.to_string()))
    }

    fn eval(&self, k: usize, x: &Rational) -> Result<Rational, Witness> {
        self.fk(k)?
            .eval(x)
            .map_err(|e| Witness::note(format!("f_{k}({x})"), e.to_string()))
    }
}

type Check = Result<(), Witness>;

fn relate(instance: impl FnOnce() -> String, lhs: Rational, relation: Relation, rhs: Rational) -> Check {
    if relation.holds(&lhs, &rhs) {
        Ok(())
    } else {
        Err(Witness::relation(instance(), lhs, relation, rhs))
    }
}

fn require(instance: impl FnOnce() -> String, ok: bool, note: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(Witness::note(instance(), note()))
    }
}

enum Outcome {
    Checked(Check),
    Unchecked(&'static str),
}

struct Claim {
    id: &'static str,
    anchor: &'static str,
    instance: fn(&Scope) -> String,
    run: fn(&Scope) -> Outcome,
}

fn maps_range(s: &Scope) -> String {
    format!("k=0..{}", s.max_level)
}

fn refined_range(s: &Scope) -> String {
    format!("k=1..{}", s.max_level)
}

fn families_range(s: &Scope) -> String {
    format!("k=1..{}", s.max_level + 2)
}

fn steps_range(s: &Scope) -> String {
    format!("k=1..{}", s.max_level + 1)
}

fn depth_range(s: &Scope) -> String {
    format!("depth={}", s.seq().depth())
}

fn constraint_claim(s: &Scope, constraint: Constraint) -> Outcome {
    let report = validate_params(s.seq());
    let first = report
        .entries
        .iter()
        .find(|e| e.constraint == constraint && !e.passed);
    Outcome::Checked(match first {
        None => Ok(()),
        Some(e) => Err(Witness::relation(
            format!("k={}", e.k),
            e.lhs.clone(),
            e.relation,
            e.rhs.clone(),
        )),
    })
}

macro_rules! constraint_claims {
    ($($id:literal => $variant:ident),* $(,)?) => {
        [$(Claim {
            id: $id,
            anchor: Constraint::$variant.statement(),
            instance: depth_range,
            run: |s| constraint_claim(s, Constraint::$variant),
        }),*]
    };
}

fn claims() -> Vec<Claim> {
    let mut table: Vec<Claim> = constraint_claims![
        "params.initial-width" => InitialWidth,
        "params.initial-epsilon" => InitialEpsilon,
        "params.width-recursion" => WidthRecursion,
        "params.epsilon-positive" => EpsilonPositive,
        "params.epsilon-geometric" => EpsilonGeometric,
        "params.epsilon-quotient" => EpsilonQuotient,
        "params.width-margin" => WidthPositiveMargin,
        "params.width-positive" => WidthPositive,
        "params.width-decay" => WidthDecay,
        "params.width-ratio" => WidthRatio,
    ]
    .into_iter()
    .collect();

    table.extend([
        Claim {
            id: "intervals.cardinality",
            anchor: "|I_k| = 2^(k-1)",
            instance: families_range,
            run: |s| Outcome::Checked(check_cardinality(s)),
        },
        Claim {
            id: "intervals.disjoint",
            anchor: "members of I_k are pairwise disjoint closed subintervals of [0,1]",
            instance: families_range,
            run: |s| Outcome::Checked(check_disjoint(s)),
        },
        Claim {
            id: "intervals.width",
            anchor: "[a,b] in I_k implies b - a = w_k",
            instance: families_range,
            run: |s| Outcome::Checked(check_widths(s)),
        },
        Claim {
            id: "intervals.mirror",
            anchor: "[a,b] in I_k, [a,b] in [0,1/3] iff [a,b] + 2/3 in I_k (k >= 2)",
            instance: |s| format!("k=2..{}", s.max_level + 2),
            run: |s| Outcome::Checked(check_mirror(s)),
        },
        Claim {
            id: "intervals.nested",
            anchor: "union I_{k+1} strictly inside union I_k",
            instance: steps_range,
            run: |s| Outcome::Checked(check_nested(s)),
        },
        Claim {
            id: "measure.closed-form",
            anchor: "lambda(A_k) = 2^(k-1) w_k",
            instance: families_range,
            run: |s| Outcome::Checked(check_measure_closed_form(s)),
        },
        Claim {
            id: "measure.telescoping",
            anchor: "lambda(A_k) - lambda(A_{k+1}) = 2^(k-1) 2 eps_k",
            instance: steps_range,
            run: |s| Outcome::Checked(check_telescoping(s)),
        },
        Claim {
            id: "measure.lower-bound",
            anchor: "lambda(A_*) >= 1/3",
            instance: |s| format!("K=2..{}", s.max_level + 2),
            run: |s| Outcome::Checked(check_lower_bound(s)),
        },
        Claim {
            id: "attractor.nonempty",
            anchor: "0 and 1 lie in every A_k",
            instance: families_range,
            run: |s| Outcome::Checked(check_nonempty(s)),
        },
        Claim {
            id: "attractor.nowhere-dense",
            anchor: "each [a,b] in I_k contains the gap (m - eps_k, m + eps_k) of A_{k+1}",
            instance: steps_range,
            run: |s| Outcome::Checked(check_gaps(s)),
        },
        Claim {
            id: "attractor.compact",
            anchor: "A_* is compact",
            instance: |_| "A_*".to_string(),
            run: |_| Outcome::Unchecked("intersection of closed sets; not a finite computation"),
        },
        Claim {
            id: "attractor.perfect",
            anchor: "A_* is perfect",
            instance: |_| "A_*".to_string(),
            run: |_| Outcome::Unchecked("no isolated points; not a finite computation"),
        },
        Claim {
            id: "fk.increment",
            anchor: "f_k(b) - f_k(a) = w_{k+2} for [a,b] in I_{k+1}",
            instance: refined_range,
            run: |s| Outcome::Checked(check_increment(s)),
        },
        Claim {
            id: "fk.endpoints-fixed",
            anchor: "f_k(a) = f_{k-1}(a), f_k(b) = f_{k-1}(b) for [a,b] in I_k",
            instance: refined_range,
            run: |s| Outcome::Checked(check_endpoints_fixed(s)),
        },
        Claim {
            id: "fk.affine-on-members",
            anchor: "f_{k-1} is affine on each [a,b] in I_k",
            instance: steps_range,
            run: |s| Outcome::Checked(check_affine(s)),
        },
        Claim {
            id: "fk.strictly-increasing",
            anchor: "f_k is strictly increasing",
            instance: maps_range,
            run: |s| Outcome::Checked(check_increasing(s)),
        },
        Claim {
            id: "fk.lipschitz",
            anchor: "Lip(f_k) < 1/2",
            instance: maps_range,
            run: |s| Outcome::Checked(check_lipschitz(s)),
        },
        Claim {
            id: "fk.range",
            anchor: "f_k([0,1]) = [0,1/3]",
            instance: maps_range,
            run: |s| Outcome::Checked(check_range(s)),
        },
        Claim {
            id: "fk.image-member",
            anchor: "[f_{k-1}(a), f_{k-1}(b)] in I_{k+1} for [a,b] in I_k",
            instance: steps_range,
            run: |s| Outcome::Checked(check_image_member(s)),
        },
        Claim {
            id: "fk.image-cover",
            anchor: "each member of I_{k+1} is [f_{k-1}(c), f_{k-1}(d)] or its shift by 2/3, [c,d] in I_k",
            instance: steps_range,
            run: |s| Outcome::Checked(check_image_cover(s)),
        },
        Claim {
            id: "fk.junction",
            anchor: "f_k(m - eps_k) = f_{k-1}(a) + w_{k+2} for [a,b] in I_k",
            instance: refined_range,
            run: |s| Outcome::Checked(check_junction(s)),
        },
        Claim {
            id: "fk.cauchy",
            anchor: "sup |f_k - f_{k-1}| <= 2^-k",
            instance: refined_range,
            run: |s| Outcome::Checked(check_cauchy(s)),
        },
        Claim {
            id: "limit.endpoint-value",
            anchor: "f(a) = f_{k-1}(a) for endpoints a of members of I_k",
            instance: refined_range,
            run: |s| Outcome::Checked(check_endpoint_values(s)),
        },
        Claim {
            id: "attractor.self-similarity",
            anchor: "A_{k+1} = f(A_k) u g(A_k)",
            instance: refined_range,
            run: |s| Outcome::Checked(check_self_similarity(s)),
        },
    ]);
    table
}

/// Identifiers of the registered claims, in report order.
pub fn claim_ids() -> Vec<&'static str> {
    claims().iter().map(|c| c.id).collect()
}

/// Run every registered claim over levels up to `max_level` (maps) and
/// `max_level + 2` (interval families). Claims run on separate threads and
/// share the memoized construction; the report keeps table order.
pub fn run_full_verification(seq: &ParamSequence, max_level: usize) -> Result<VerificationReport, VerifyError> {
    if max_level == 0 {
        return Err(VerifyError::ZeroLevel);
    }
    if max_level + 2 > seq.depth() {
        return Err(VerifyError::InsufficientDepth {
            max_level,
            needed: max_level + 2,
            depth: seq.depth(),
        });
    }
    let c = Construction::new(seq.clone());
    let scope = Scope { c: &c, max_level };
    let table = claims();
    let outcomes: Vec<Outcome> = std::thread::scope(|ts| {
        let handles: Vec<_> = table
            .iter()
            .map(|claim| {
                let scope = &scope;
                ts.spawn(move || (claim.run)(scope))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("claim check panicked"))
            .collect()
    });
    let claims = table
        .iter()
        .zip(outcomes)
        .map(|(claim, outcome)| {
            let instance = (claim.instance)(&scope);
            let (status, witness) = match outcome {
                Outcome::Checked(Ok(())) => (Status::Pass, None),
                Outcome::Checked(Err(w)) => (Status::Fail, Some(w)),
                Outcome::Unchecked(note) => (Status::Unchecked, Some(Witness::note(instance.clone(), note))),
            };
            ClaimEntry {
                id: claim.id.to_string(),
                anchor: claim.anchor.to_string(),
                instance,
                status,
                witness,
            }
        })
        .collect();
    Ok(VerificationReport { claims })
}

fn member_at(k: usize, m: &ClosedInterval) -> String {
    format!("k={k}, [a,b]={m}")
}

fn check_cardinality(s: &Scope) -> Check {
    for k in s.family_levels() {
        let fam = s.family(k)?;
        relate(
            || format!("k={k}"),
            Rational::integer(fam.len() as i64),
            Relation::Eq,
            Rational::pow2(k as i32 - 1),
        )?;
    }
    Ok(())
}

fn check_disjoint(s: &Scope) -> Check {
    for k in s.family_levels() {
        let members = s.family(k)?.members();
        for m in members {
            require(
                || member_at(k, m),
                m.lo < m.hi && m.is_subset_of(&ClosedInterval::unit()),
                || "not a nondegenerate subinterval of [0,1]".into(),
            )?;
        }
        for pair in members.windows(2) {
            relate(
                || format!("k={k}, {} then {}", pair[0], pair[1]),
                pair[0].hi.clone(),
                Relation::Lt,
                pair[1].lo.clone(),
            )?;
        }
    }
    Ok(())
}

fn check_widths(s: &Scope) -> Check {
    for k in s.family_levels() {
        for m in s.family(k)?.members() {
            relate(|| member_at(k, m), m.width(), Relation::Eq, s.seq().w(k).clone())?;
        }
    }
    Ok(())
}

fn check_mirror(s: &Scope) -> Check {
    let third = Rational::new(1, 3);
    let two_thirds = Rational::new(2, 3);
    let left = ClosedInterval {
        lo: Rational::zero(),
        hi: third,
    };
    for k in 2..=s.max_level + 2 {
        let fam = s.family(k)?;
        let lower: Vec<&ClosedInterval> = fam.members().iter().filter(|m| m.is_subset_of(&left)).collect();
        relate(
            || format!("k={k}, members inside [0,1/3]"),
            Rational::integer(2 * lower.len() as i64),
            Relation::Eq,
            Rational::integer(fam.len() as i64),
        )?;
        for m in lower {
            let shifted = m.translate(&two_thirds);
            require(
                || member_at(k, m),
                fam.has_member(&shifted),
                || format!("{shifted} is not a member"),
            )?;
        }
    }
    Ok(())
}

fn check_nested(s: &Scope) -> Check {
    for k in 1..=s.max_level + 1 {
        let outer = s.family(k)?;
        let inner = s.family(k + 1)?;
        for m in inner.members() {
            let parent = outer.locate(&m.lo).map(|i| &outer.members()[i]);
            require(
                || member_at(k + 1, m),
                parent.is_some_and(|p| m.is_subset_of(p)),
                || format!("not inside a member of I_{k}"),
            )?;
        }
        relate(|| format!("k={k}"), inner.measure(), Relation::Lt, outer.measure())?;
    }
    Ok(())
}

fn check_measure_closed_form(s: &Scope) -> Check {
    for k in s.family_levels() {
        relate(
            || format!("k={k}"),
            s.family(k)?.measure(),
            Relation::Eq,
            Rational::pow2(k as i32 - 1) * s.seq().w(k),
        )?;
    }
    Ok(())
}

fn check_telescoping(s: &Scope) -> Check {
    for k in 1..=s.max_level + 1 {
        relate(
            || format!("k={k}"),
            s.family(k)?.measure() - s.family(k + 1)?.measure(),
            Relation::Eq,
            Rational::pow2(k as i32) * s.seq().eps(k),
        )?;
    }
    Ok(())
}

fn check_lower_bound(s: &Scope) -> Check {
    for k in 2..=s.max_level + 2 {
        let bounds = measure_bounds_with(s.c, k).map_err(|e| Witness::note(format!("K={k}"), e.to_string()))?;
        relate(|| format!("K={k}"), Rational::new(1, 3), Relation::Le, bounds.lower)?;
    }
    Ok(())
}

fn check_nonempty(s: &Scope) -> Check {
    for k in s.family_levels() {
        let fam = s.family(k)?;
        for x in [Rational::zero(), Rational::one()] {
            require(|| format!("k={k}, x={x}"), fam.contains(&x), || "not in A_k".into())?;
        }
    }
    Ok(())
}

fn check_gaps(s: &Scope) -> Check {
    for k in 1..=s.max_level + 1 {
        let eps = s.seq().eps(k);
        for m in s.family(k)?.members() {
            let mid = m.midpoint();
            relate(|| member_at(k, m), m.lo.clone(), Relation::Lt, &mid - eps)?;
            relate(|| member_at(k, m), &mid - eps, Relation::Lt, &mid + eps)?;
            relate(|| member_at(k, m), &mid + eps, Relation::Lt, m.hi.clone())?;
        }
    }
    Ok(())
}

fn check_increment(s: &Scope) -> Check {
    for k in 1..=s.max_level {
        for m in s.family(k + 1)?.members() {
            relate(
                || member_at(k + 1, m),
                s.eval(k, &m.hi)? - s.eval(k, &m.lo)?,
                Relation::Eq,
                s.seq().w(k + 2).clone(),
            )?;
        }
    }
    Ok(())
}

fn check_endpoints_fixed(s: &Scope) -> Check {
    for k in 1..=s.max_level {
        for m in s.family(k)?.members() {
            for x in [&m.lo, &m.hi] {
                relate(
                    || format!("k={k}, x={x}"),
                    s.eval(k, x)?,
                    Relation::Eq,
                    s.eval(k - 1, x)?,
                )?;
            }
        }
    }
    Ok(())
}

fn check_affine(s: &Scope) -> Check {
    for k in 1..=s.max_level + 1 {
        let prev = s.fk(k - 1)?;
        for m in s.family(k)?.members() {
            let inside = prev.points_in(&m.lo, &m.hi);
            require(
                || member_at(k, m),
                inside.len() == 2 && inside[0].x == m.lo && inside[1].x == m.hi,
                || format!("f_{} has {} breakpoints on the member", k - 1, inside.len()),
            )?;
        }
    }
    Ok(())
}

fn check_increasing(s: &Scope) -> Check {
    for k in 0..=s.max_level {
        for pair in s.fk(k)?.points().windows(2) {
            relate(
                || format!("k={k}, x={}", pair[1].x),
                pair[0].y.clone(),
                Relation::Lt,
                pair[1].y.clone(),
            )?;
        }
    }
    Ok(())
}

fn check_lipschitz(s: &Scope) -> Check {
    for k in 0..=s.max_level {
        relate(
            || format!("k={k}"),
            s.fk(k)?.lipschitz_constant(),
            Relation::Lt,
            Rational::new(1, 2),
        )?;
    }
    Ok(())
}

fn check_range(s: &Scope) -> Check {
    for k in 0..=s.max_level {
        relate(|| format!("k={k}, x=0"), s.eval(k, &Rational::zero())?, Relation::Eq, Rational::zero())?;
        relate(
            || format!("k={k}, x=1"),
            s.eval(k, &Rational::one())?,
            Relation::Eq,
            Rational::new(1, 3),
        )?;
    }
    Ok(())
}

fn image_of(s: &Scope, k: usize, m: &ClosedInterval) -> Result<ClosedInterval, Witness> {
    Ok(ClosedInterval {
        lo: s.eval(k - 1, &m.lo)?,
        hi: s.eval(k - 1, &m.hi)?,
    })
}

fn check_image_member(s: &Scope) -> Check {
    for k in 1..=s.max_level + 1 {
        let next = s.family(k + 1)?;
        for m in s.family(k)?.members() {
            let img = image_of(s, k, m)?;
            require(
                || member_at(k, m),
                next.has_member(&img),
                || format!("{img} is not a member of I_{}", k + 1),
            )?;
        }
    }
    Ok(())
}

fn check_image_cover(s: &Scope) -> Check {
    let two_thirds = Rational::new(2, 3);
    for k in 1..=s.max_level + 1 {
        let mut images = HashSet::new();
        for m in s.family(k)?.members() {
            let img = image_of(s, k, m)?;
            images.insert(img.translate(&two_thirds));
            images.insert(img);
        }
        for m in s.family(k + 1)?.members() {
            require(
                || member_at(k + 1, m),
                images.contains(m),
                || "not the image of a member of the previous family".into(),
            )?;
        }
    }
    Ok(())
}

fn check_junction(s: &Scope) -> Check {
    for k in 1..=s.max_level {
        let eps = s.seq().eps(k);
        for m in s.family(k)?.members() {
            relate(
                || member_at(k, m),
                s.eval(k, &(m.midpoint() - eps))?,
                Relation::Eq,
                s.eval(k - 1, &m.lo)? + s.seq().w(k + 2),
            )?;
        }
    }
    Ok(())
}

fn check_cauchy(s: &Scope) -> Check {
    for k in 1..=s.max_level {
        let d = sup_diff_at(s.fk(k)?, s.fk(k - 1)?);
        relate(
            || format!("k={k}, x={}", d.argmax),
            d.value,
            Relation::Le,
            Rational::pow2(-(k as i32)),
        )?;
    }
    Ok(())
}

fn check_endpoint_values(s: &Scope) -> Check {
    for k in 1..=s.max_level {
        for m in s.family(k)?.members() {
            for x in [&m.lo, &m.hi] {
                let expected = s.eval(k - 1, x)?;
                for l in k..=s.max_level {
                    relate(|| format!("k={k}, l={l}, x={x}"), s.eval(l, x)?, Relation::Eq, expected.clone())?;
                }
            }
        }
    }
    Ok(())
}

fn check_self_similarity(s: &Scope) -> Check {
    for k in 1..=s.max_level {
        let result = verify_self_similarity_with(s.c, k).map_err(|e| Witness::note(format!("k={k}"), e.to_string()))?;
        if !result.passed {
            let note = match (&result.mismatch, &result.error) {
                (Some(m), _) => format!(
                    "member {}: expected {}, found {}",
                    m.index,
                    show(&m.expected),
                    show(&m.found)
                ),
                (None, Some(e)) => e.clone(),
                (None, None) => "images differ".into(),
            };
            return Err(Witness::note(format!("k={k}"), note));
        }
    }
    Ok(())
}

fn show(iv: &Option<ClosedInterval>) -> String {
    iv.as_ref().map_or_else(|| "nothing".into(), ToString::to_string)
}
