//! Continuous t-norms on `[0,1]` and the level-set helpers used by the
//! triangle-inequality arguments (`s ∗ s ≥ r`, folds of `1 − δ`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{Check, Report};

/// Default tolerance for the bisection helpers.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Associativity is checked up to this absolute slack: `(a∗b)∗c` and
/// `a∗(b∗c)` round differently for the product and Łukasiewicz formulas.
pub const ASSOCIATIVITY_SLACK: f64 = 1e-12;

/// A membership grade in `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Grade(f64);

impl Grade {
    pub const ZERO: Grade = Grade(0.0);
    pub const ONE: Grade = Grade(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Grade(value))
        } else {
            Err(Error::InvalidArgument(format!(
                "grade {value} outside [0,1]"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Grade> for f64 {
    fn from(g: Grade) -> f64 {
        g.0
    }
}

/// The builtin continuous t-norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    #[default]
    Product,
    Minimum,
    Lukasiewicz,
}

impl TNorm {
    pub const ALL: [TNorm; 3] = [TNorm::Product, TNorm::Minimum, TNorm::Lukasiewicz];

    pub fn name(self) -> &'static str {
        match self {
            TNorm::Product => "product",
            TNorm::Minimum => "minimum",
            TNorm::Lukasiewicz => "lukasiewicz",
        }
    }

    pub fn combine(self, a: Grade, b: Grade) -> Grade {
        Grade(self.apply(a.0, b.0))
    }

    /// Raw form of [`TNorm::combine`] for values already known to be grades.
    pub fn apply(self, a: f64, b: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        match self {
            TNorm::Product => a * b,
            TNorm::Minimum => a.min(b),
            TNorm::Lukasiewicz => {
                // Ordered operands keep the rounding symmetric and make the unit exact.
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                (lo - (1.0 - hi)).max(0.0)
            }
        }
    }

    /// `x ∗ x ∗ … ∗ x` with `depth` factors.
    pub fn fold(self, x: f64, depth: usize) -> f64 {
        (1..depth).fold(x, |acc, _| self.apply(x, acc))
    }
}

impl fmt::Display for TNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(TNorm::Product),
            "minimum" => Ok(TNorm::Minimum),
            "lukasiewicz" => Ok(TNorm::Lukasiewicz),
            other => Err(Error::InvalidArgument(format!("unknown t-norm `{other}`"))),
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )))
    }
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} = {v} must lie in (0,1)"
        )))
    }
}

/// Smallest `s` (to within `tol`) with `s ∗ s ≥ r`.
///
/// The returned `s` satisfies the bound while `s − tol` does not.
pub fn sqrt_level(norm: TNorm, r: f64, tol: f64) -> Result<f64> {
    check_open_unit("r", r)?;
    check_tol(tol)?;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if norm.apply(mid, mid) >= r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Largest `δ` (to within `tol`) such that folding `1 − δ` over `depth`
/// factors stays at or above `1 − λ`.
pub fn delta_for_lambda(norm: TNorm, lambda: f64, depth: usize, tol: f64) -> Result<f64> {
    check_open_unit("lambda", lambda)?;
    check_tol(tol)?;
    if depth < 2 {
        return Err(Error::InvalidArgument(format!(
            "depth {depth} must be at least 2"
        )));
    }
    let target = 1.0 - lambda;
    let holds = |delta: f64| norm.fold(1.0 - delta, depth) >= target;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} too coarse to resolve a positive delta for lambda = {lambda}"
        )));
    }
    Ok(lo)
}

/// Grid check of the t-norm axioms on `grid` equally spaced levels per axis.
pub fn verify_tnorm_axioms(norm: TNorm, grid: usize) -> Result<Report> {
    if grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid {grid} must be at least 2"
        )));
    }
    let levels: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    let op = |a: f64, b: f64| norm.apply(a, b);

    let mut comm = Check::new("commutativity");
    let mut unit = Check::new("unit");
    let mut bound = Check::new("bounded-by-min");
    for &a in &levels {
        unit.record(op(a, 1.0) == a && op(1.0, a) == a, || format!("a={a}"));
        for &b in &levels {
            comm.record(op(a, b) == op(b, a), || format!("a={a} b={b}"));
            bound.record(op(a, b) <= a.min(b), || format!("a={a} b={b}"));
        }
    }

    let mut assoc = Check::new("associativity");
    for &a in &levels {
        for &b in &levels {
            for &c in &levels {
                let l = op(op(a, b), c);
                let r = op(a, op(b, c));
                assoc.record((l - r).abs() <= ASSOCIATIVITY_SLACK, || {
                    format!("a={a} b={b} c={c}: {l} vs {r}")
                });
            }
        }
    }

    // a ≤ c, b ≤ d ⇒ a∗b ≤ c∗d; adjacent steps along each axis suffice on a grid
    // together with transitivity, but the full quadruple scan is cheap at these sizes.
    let mut mono = Check::new("monotonicity");
    for (i, &a) in levels.iter().enumerate() {
        for &c in &levels[i..] {
            for (j, &b) in levels.iter().enumerate() {
                for &d in &levels[j..] {
                    mono.record(op(a, b) <= op(c, d), || format!("a={a} b={b} c={c} d={d}"));
                }
            }
        }
    }

    let mut sup = Check::new("sup-condition");
    let mut prev = 0.0;
    let mut last = 0.0;
    for k in 1..=40 {
        let a = 1.0 - (0.5_f64).powi(k);
        let v = op(a, a);
        sup.record(v >= prev, || format!("a∗a decreased at a={a}"));
        prev = v;
        last = v;
    }
    sup.record(last >= 1.0 - 1e-9, || {
        format!("a∗a stalls at {last} as a→1")
    });

    let mut report = Report::new(format!("t-norm {norm}"));
    for c in [comm, assoc, unit, mono, bound, sup] {
        report.push(c);
    }
    Ok(report)
}
