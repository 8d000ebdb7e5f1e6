//! Argument model and dispatch for the `fatcantor` binary.
//!
//! Every numeric flag is an exact rational (`p/q` or an integer). Text
//! output shows exact values next to 12-digit decimals that are for display
//! only; JSON output carries exact values only.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fatcantor::attractor::{measure_bounds_with, MeasureBounds};
use fatcantor::limit::{build_g_value, eval_limit_with, Basis, CertifiedValue};
use fatcantor::params::ConstraintCheck;
use fatcantor::plf::merged_grid;
use fatcantor::similitude::{similitude_level_measures, validate_condition_11, ConditionCheck, LevelMeasure};
use fatcantor::{
    default_params, run_full_verification, validate_params, ClosedInterval, Construction, IntervalFamily,
    ParamSequence, Rational, SimilitudeIFS,
};

/// Largest depth accepted by commands that materialize `I_depth`
/// (`2^(depth-1)` intervals).
pub const MAX_DEPTH: usize = 22;

/// Largest number of intervals a similitude iteration may produce.
pub const MAX_SIMILITUDE_INTERVALS: u128 = 1 << 22;

#[derive(Debug, Parser)]
#[command(name = "fatcantor", version, about = "Exact fat Cantor attractor construction and checks")]
pub struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Write the artifact to PATH instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Widths w_k and half-gaps eps_k with their constraint checks.
    Params(DepthArg),
    /// Members and measure of I_k.
    Intervals {
        #[command(flatten)]
        depth: DepthArg,
        #[arg(long)]
        level: usize,
        /// Emit CSV rows lo,hi.
        #[arg(long, conflicts_with = "json")]
        csv: bool,
    },
    /// Two-sided bounds on the attractor measure for K = 2..depth.
    Measure(DepthArg),
    /// Certified value of f or g = f + 2/3 at a rational point.
    Eval {
        #[command(flatten)]
        depth: DepthArg,
        #[arg(long, value_name = "RAT", allow_hyphen_values = true)]
        x: Rational,
        /// Error allowed where no exact value is available [default: the
        /// finest the depth supports, 2^-(depth-2)].
        #[arg(long, value_name = "RAT", allow_hyphen_values = true)]
        tol: Option<Rational>,
        #[arg(long, value_enum, default_value_t = MapChoice::F)]
        map: MapChoice,
    },
    /// CSV samples of f_{k-1} and f_k for plotting (or f_k breakpoints as JSON).
    Plot {
        #[command(flatten)]
        depth: DepthArg,
        #[arg(long)]
        level: usize,
        /// Uniform sample points added to the breakpoint grid.
        #[arg(long, default_value_t = 0)]
        points: usize,
    },
    /// Gap/disjointness report and level measures for x -> a x + b systems.
    Similitude {
        /// Maps as "a1,b1;a2,b2;...".
        #[arg(long, allow_hyphen_values = true)]
        maps: String,
        #[command(flatten)]
        depth: DepthArg,
    },
    /// Run every registered claim; exit 1 if any fails.
    Verify {
        #[command(flatten)]
        depth: DepthArg,
        #[arg(long)]
        max_level: usize,
        /// Emit a JUnit XML report.
        #[arg(long, conflicts_with = "json")]
        junit: bool,
    },
}

#[derive(Debug, Args)]
pub struct DepthArg {
    #[arg(long)]
    pub depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapChoice {
    F,
    G,
}

/// A violated precondition; reported with exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// Rendered artifact plus the exit code it implies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub body: String,
    pub code: u8,
}

impl Output {
    fn ok(body: String) -> Self {
        Output { body, code: 0 }
    }
}

fn approx(r: &Rational) -> String {
    r.to_decimal(12)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn check_depth(depth: usize) -> Result<ParamSequence, UsageError> {
    if depth == 0 {
        return Err(usage("--depth must be at least 1"));
    }
    if depth > MAX_DEPTH {
        return Err(usage(format!("--depth must be at most {MAX_DEPTH}")));
    }
    default_params(depth).map_err(|e| usage(e.to_string()))
}

fn check_map_level(level: usize, depth: usize) -> Result<(), UsageError> {
    if level + 2 > depth {
        return Err(usage(format!(
            "building f_{level} needs --depth >= {} (level + 2), got {depth}",
            level + 2
        )));
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<Output, UsageError> {
    match &cli.command {
        Command::Params(d) => params(check_depth(d.depth)?, cli.json),
        Command::Intervals { depth, level, csv } => intervals(check_depth(depth.depth)?, *level, cli.json, *csv),
        Command::Measure(d) => measure(check_depth(d.depth)?, cli.json),
        Command::Eval { depth, x, tol, map } => eval(check_depth(depth.depth)?, x, tol.as_ref(), *map, cli.json),
        Command::Plot { depth, level, points } => plot(check_depth(depth.depth)?, *level, *points, cli.json),
        Command::Similitude { maps, depth } => similitude(maps, depth.depth, cli.json),
        Command::Verify { depth, max_level, junit } => {
            verify(check_depth(depth.depth)?, *max_level, cli.json, *junit)
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ParamRow {
    pub k: usize,
    pub w: Rational,
    pub eps: Rational,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub chooser: String,
    pub depth: usize,
    pub params: Vec<ParamRow>,
    pub valid: bool,
    pub checks: Vec<ConstraintCheck>,
}

const CHOOSER: &str = "half-minimum";

fn params(seq: ParamSequence, as_json: bool) -> Result<Output, UsageError> {
    let report = validate_params(&seq);
    let rows: Vec<ParamRow> = (1..=seq.depth())
        .map(|k| ParamRow {
            k,
            w: seq.w(k).clone(),
            eps: seq.eps(k).clone(),
        })
        .collect();
    let code = if report.passed() { 0 } else { 1 };
    if as_json {
        let doc = ParamsDoc {
            chooser: CHOOSER.into(),
            depth: seq.depth(),
            params: rows,
            valid: report.passed(),
            checks: report.entries,
        };
        return Ok(Output { body: json(&doc), code });
    }
    let mut out = String::new();
    let _ = writeln!(out, "# eps chooser: {CHOOSER} (half the smallest admissible upper bound)");
    let _ = writeln!(out, "# decimal columns are approximate, for display only");
    let _ = writeln!(out, "{:>3}  {:<28} {:<28} {:<16} {:<16}", "k", "w_k", "eps_k", "w_k ~", "eps_k ~");
    for row in &rows {
        let _ = writeln!(
            out,
            "{:>3}  {:<28} {:<28} {:<16} {:<16}",
            row.k,
            row.w.to_string(),
            row.eps.to_string(),
            approx(&row.w),
            approx(&row.eps)
        );
    }
    let failures: Vec<_> = report.failures().collect();
    if failures.is_empty() {
        let _ = writeln!(out, "validation: all {} constraint instances hold", report.entries.len());
    } else {
        let _ = writeln!(out, "validation: {} of {} instances FAIL", failures.len(), report.entries.len());
        for f in failures {
            let _ = writeln!(out, "  {f}");
        }
    }
    Ok(Output { body: out, code })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IntervalsDoc {
    pub level: usize,
    pub members: Vec<ClosedInterval>,
    pub measure: Rational,
}

fn intervals(seq: ParamSequence, level: usize, as_json: bool, csv: bool) -> Result<Output, UsageError> {
    if level == 0 || level > seq.depth() {
        return Err(usage(format!("--level must lie in 1..={} (the depth)", seq.depth())));
    }
    let c = Construction::new(seq);
    let fam: &IntervalFamily = c.family(level).map_err(|e| usage(e.to_string()))?;
    let doc = IntervalsDoc {
        level,
        members: fam.members().to_vec(),
        measure: fam.measure(),
    };
    if as_json {
        return Ok(Output::ok(json(&doc)));
    }
    let mut out = String::new();
    if csv {
        let _ = writeln!(out, "# I_{level}: {} members, measure {}", doc.members.len(), doc.measure);
        let _ = writeln!(out, "lo,hi");
        for m in &doc.members {
            let _ = writeln!(out, "{},{}", m.lo, m.hi);
        }
        return Ok(Output::ok(out));
    }
    let _ = writeln!(out, "I_{level}: {} members", doc.members.len());
    for m in &doc.members {
        let _ = writeln!(out, "  {m}");
    }
    let _ = writeln!(out, "measure {} (~ {}, approximate)", doc.measure, approx(&doc.measure));
    Ok(Output::ok(out))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MeasureDoc {
    pub depth: usize,
    pub rows: Vec<MeasureBounds>,
}

fn measure(seq: ParamSequence, as_json: bool) -> Result<Output, UsageError> {
    if seq.depth() < 2 {
        return Err(usage("measure needs --depth >= 2"));
    }
    let depth = seq.depth();
    let c = Construction::new(seq);
    let rows = (2..=depth)
        .map(|k| measure_bounds_with(&c, k))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    if as_json {
        return Ok(Output::ok(json(&MeasureDoc { depth, rows })));
    }
    let mut out = String::new();
    let _ = writeln!(out, "# lower <= lambda(A_*) <= upper; decimal columns are approximate, for display only");
    let _ = writeln!(
        out,
        "{:>3}  {:<24} {:<28} {:<28} {:<15} {:<15}",
        "K", "upper", "lower", "tail_bound", "upper ~", "lower ~"
    );
    for b in &rows {
        let _ = writeln!(
            out,
            "{:>3}  {:<24} {:<28} {:<28} {:<15} {:<15}",
            b.level,
            b.upper.to_string(),
            b.lower.to_string(),
            b.tail_bound.to_string(),
            approx(&b.upper),
            approx(&b.lower)
        );
    }
    Ok(Output::ok(out))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvalDoc {
    pub map: MapChoice,
    pub x: Rational,
    pub value: Rational,
    pub radius: Rational,
    pub exact: bool,
    /// Index of the approximant `f_level` that was evaluated.
    pub level: usize,
    pub basis: Basis,
}

fn eval(seq: ParamSequence, x: &Rational, tol: Option<&Rational>, map: MapChoice, as_json: bool) -> Result<Output, UsageError> {
    let finest = Rational::pow2(-(seq.depth().saturating_sub(2) as i32));
    let tol = tol.unwrap_or(&finest);
    if !tol.is_positive() {
        return Err(usage(format!("--tol must be positive, got {tol}")));
    }
    if x.is_negative() || x > &Rational::one() {
        return Err(usage(format!("--x must lie in [0, 1], got {x}")));
    }
    if seq.depth() < 2 {
        return Err(usage("eval needs --depth >= 2"));
    }
    let c = Construction::new(seq);
    let e = eval_limit_with(&c, x, tol).map_err(|e| usage(e.to_string()))?;
    let v: CertifiedValue = match map {
        MapChoice::F => e.value,
        MapChoice::G => build_g_value(&e.value),
    };
    let doc = EvalDoc {
        map,
        x: e.x,
        exact: v.is_exact(),
        value: v.value,
        radius: v.radius,
        level: e.level,
        basis: e.basis,
    };
    if as_json {
        return Ok(Output::ok(json(&doc)));
    }
    let name = match map {
        MapChoice::F => "f",
        MapChoice::G => "g",
    };
    let mut out = String::new();
    let _ = writeln!(out, "{name}({}) = {}", doc.x, doc.value);
    let _ = writeln!(out, "  approx  {} (display only)", approx(&doc.value));
    let _ = writeln!(out, "  radius  {}", doc.radius);
    let _ = writeln!(out, "  exact   {}", doc.exact);
    let why = match doc.basis {
        Basis::Ejected => format!("x leaves A_{}, so f = f_{} there", doc.level + 1, doc.level),
        Basis::Endpoint => format!("x is an endpoint of a member of I_{}", doc.level + 1),
        Basis::Approximate => format!("|f - f_{}| <= 2^-{}", doc.level, doc.level),
    };
    let _ = writeln!(out, "  level   {} ({why})", doc.level);
    Ok(Output::ok(out))
}

fn plot(seq: ParamSequence, level: usize, points: usize, as_json: bool) -> Result<Output, UsageError> {
    if level == 0 {
        return Err(usage("--level must be at least 1 (the plot compares f_{level-1} with f_level)"));
    }
    check_map_level(level, seq.depth())?;
    let c = Construction::new(seq);
    let fk = c.fk(level).map_err(|e| usage(e.to_string()))?;
    if as_json {
        return Ok(Output::ok(json(fk)));
    }
    let prev = c.fk(level - 1).map_err(|e| usage(e.to_string()))?;
    let mut grid = merged_grid(prev, fk);
    let breakpoints = grid.len();
    if points > 0 {
        let last = (points as i64 - 1).max(1);
        grid.extend((0..points as i64).map(|i| Rational::new(i, last)));
        grid.sort();
        grid.dedup();
    }
    let ys_prev = prev.eval_sorted(&grid).map_err(|e| usage(e.to_string()))?;
    let ys = fk.eval_sorted(&grid).map_err(|e| usage(e.to_string()))?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# exact grid: the {breakpoints} merged breakpoints of f_{} and f_{level} plus {points} uniform points i/{}; \
         values are 15-significant-digit decimals of exact rationals",
        level - 1,
        points.saturating_sub(1).max(1)
    );
    let _ = writeln!(out, "x,f_{}(x),f_{level}(x)", level - 1);
    for ((x, a), b) in grid.iter().zip(&ys_prev).zip(&ys) {
        let _ = writeln!(out, "{},{},{}", x.to_significant(15), a.to_significant(15), b.to_significant(15));
    }
    Ok(Output::ok(out))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SimilitudeDoc {
    pub maps: String,
    pub valid: bool,
    pub checks: Vec<ConditionCheck>,
    pub levels: Vec<LevelMeasure>,
}

fn similitude(maps: &str, depth: usize, as_json: bool) -> Result<Output, UsageError> {
    let ifs: SimilitudeIFS = maps.parse().map_err(|e| usage(format!("--maps: {e}")))?;
    if depth == 0 {
        return Err(usage("--depth must be at least 1"));
    }
    let count = ifs.maps().len() as u128;
    if count.checked_pow(depth as u32 - 1).map_or(true, |n| n > MAX_SIMILITUDE_INTERVALS) {
        return Err(usage(format!(
            "--depth {depth} with {count} maps exceeds {MAX_SIMILITUDE_INTERVALS} intervals"
        )));
    }
    let report = validate_condition_11(&ifs);
    let valid = report.passed();
    let levels = if valid {
        similitude_level_measures(&ifs, depth).map_err(|e| usage(e.to_string()))?
    } else {
        Vec::new()
    };
    let doc = SimilitudeDoc {
        maps: ifs.to_string(),
        valid,
        checks: report.checks,
        levels,
    };
    let code = if valid { 0 } else { 1 };
    if as_json {
        return Ok(Output { body: json(&doc), code });
    }
    let mut out = String::new();
    let _ = writeln!(out, "maps {}", doc.maps);
    for c in &doc.checks {
        let _ = writeln!(out, "  {c}");
    }
    if !valid {
        let _ = writeln!(out, "system rejected; no measures computed");
        return Ok(Output { body: out, code });
    }
    let _ = writeln!(out, "# lambda(A_k) = (sum |a_n|)^(k-1), confirmed by iteration; decimals approximate");
    let _ = writeln!(out, "{:>3}  {:<28} {:>10}  {:<15}", "k", "lambda(A_k)", "intervals", "~");
    for l in &doc.levels {
        let _ = writeln!(
            out,
            "{:>3}  {:<28} {:>10}  {:<15}",
            l.level,
            l.iterated.to_string(),
            l.intervals,
            approx(&l.iterated)
        );
    }
    Ok(Output { body: out, code })
}

fn verify(seq: ParamSequence, max_level: usize, as_json: bool, junit: bool) -> Result<Output, UsageError> {
    let report = run_full_verification(&seq, max_level).map_err(|e| usage(e.to_string()))?;
    let body = if as_json {
        let mut s = report.to_json();
        s.push('\n');
        s
    } else if junit {
        report.to_junit()
    } else {
        report.to_text()
    };
    Ok(Output {
        body,
        code: if report.passed() { 0 } else { 1 },
    })
}
