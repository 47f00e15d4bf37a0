//! Moduli of class Φ: nondecreasing, right-continuous maps `φ: [0,∞) → [0,∞)`
//! whose iterates vanish. Also hosts the horizon `N(ε, λ)` used as the
//! iteration certificate by the solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{Check, Report};

/// Iterates must fall below this value for the decay check to pass.
pub const DECAY_THRESHOLD: f64 = 1e-6;
/// Default iteration cap for [`horizon`] and the decay check.
pub const DEFAULT_ITER_CAP: usize = 1_000_000;
/// Defaults used when a solver or checker validates its modulus.
pub const DEFAULT_CHECK_GRID: usize = 256;
pub const DEFAULT_CHECK_T_MAX: f64 = 10.0;

/// Crossing point of `t/(t+d)` with `1 − t` for a raw distance `d`:
/// `τ(d) = (√(d²+4d) − d)/2`, written in a cancellation-free form.
pub(crate) fn crossing(d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    2.0 * d / ((d * d + 4.0 * d).sqrt() + d)
}

/// Inverse of [`crossing`] on `[0,1)`: the distance whose crossing is `t`.
pub(crate) fn crossing_inverse(t: f64) -> f64 {
    t * t / (1.0 - t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum PhiConfig {
    Linear { k: f64 },
    Rational,
    Induced { k: f64, cap: f64 },
    Table { points: Vec<(f64, f64)> },
}

/// A candidate modulus. Construction validates parameters; membership in
/// class Φ is established by [`verify_phi_class`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhiConfig", into = "PhiConfig")]
pub enum PhiFunction {
    /// `φ(t) = k·t`.
    Linear { k: f64 },
    /// `φ(t) = t/(1+t)`.
    Rational,
    /// The modulus obtained by conjugating a metric `k`-contraction on a space
    /// of diameter `cap` through the crossing map; see
    /// [`crate::contraction::induce_phi`].
    Induced { k: f64, cap: f64 },
    /// Piecewise-linear interpolant through ordered breakpoints, zero before
    /// the first breakpoint and constant after the last one. Repeated
    /// abscissae encode jumps; the value at a jump is taken from the right.
    Table { points: Vec<(f64, f64)> },
}

impl TryFrom<PhiConfig> for PhiFunction {
    type Error = Error;

    fn try_from(c: PhiConfig) -> Result<Self> {
        match c {
            PhiConfig::Linear { k } => PhiFunction::linear(k),
            PhiConfig::Rational => Ok(PhiFunction::Rational),
            PhiConfig::Induced { k, cap } => PhiFunction::induced(k, cap),
            PhiConfig::Table { points } => PhiFunction::table(points),
        }
    }
}

impl From<PhiFunction> for PhiConfig {
    fn from(p: PhiFunction) -> Self {
        match p {
            PhiFunction::Linear { k } => PhiConfig::Linear { k },
            PhiFunction::Rational => PhiConfig::Rational,
            PhiFunction::Induced { k, cap } => PhiConfig::Induced { k, cap },
            PhiFunction::Table { points } => PhiConfig::Table { points },
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidK(k))
    }
}

impl PhiFunction {
    pub fn linear(k: f64) -> Result<Self> {
        check_k(k)?;
        Ok(PhiFunction::Linear { k })
    }

    pub fn induced(k: f64, cap: f64) -> Result<Self> {
        check_k(k)?;
        if !(cap.is_finite() && cap > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cap {cap} must be a positive finite diameter bound"
            )));
        }
        Ok(PhiFunction::Induced { k, cap })
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument(
                "table modulus needs at least one point".into(),
            ));
        }
        for &(t, v) in &points {
            if !(t.is_finite() && v.is_finite() && t >= 0.0 && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "table point ({t}, {v}) must be finite and nonnegative"
                )));
            }
        }
        if points.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(Error::InvalidArgument(
                "table abscissae must be nondecreasing".into(),
            ));
        }
        Ok(PhiFunction::Table { points })
    }

    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match *self {
            PhiFunction::Linear { k } => k * t,
            PhiFunction::Rational => t / (1.0 + t),
            PhiFunction::Induced { k, cap } => {
                let knee = crossing(cap);
                if t <= knee {
                    crossing(k * crossing_inverse(t))
                } else {
                    crossing(k * cap) + k * (t - knee)
                }
            }
            PhiFunction::Table { ref points } => eval_table(points, t),
        }
    }

    /// `φⁿ(t)` by repeated evaluation.
    pub fn iterate(&self, t: f64, n: usize) -> f64 {
        (0..n).fold(t, |acc, _| self.eval(acc))
    }

    /// Runs [`verify_phi_class`] with default parameters over `(0, t_max]`
    /// and turns a failed report into [`Error::PhiInvalid`].
    pub fn ensure_class(&self, t_max: f64) -> Result<()> {
        let report = verify_phi_class(self, DEFAULT_CHECK_GRID, t_max, DEFAULT_ITER_CAP)?;
        let failure = report.failed().next().map(|c| {
            format!(
                "{} fails: {}",
                c.name,
                c.witness.clone().unwrap_or_default()
            )
        });
        match failure {
            None => Ok(()),
            Some(msg) => Err(Error::PhiInvalid(msg)),
        }
    }
}

fn eval_table(points: &[(f64, f64)], t: f64) -> f64 {
    // Last breakpoint with abscissa ≤ t; equal abscissae resolve to the right value.
    let idx = points.partition_point(|&(x, _)| x <= t);
    if idx == 0 {
        return 0.0;
    }
    let (t0, v0) = points[idx - 1];
    match points.get(idx) {
        None => v0,
        Some(&(t1, v1)) => v0 + (v1 - v0) * (t - t0) / (t1 - t0),
    }
}

/// Least `N` with `φᴺ(t0) ≤ min(ε, λ)`.
pub fn horizon(phi: &PhiFunction, t0: f64, epsilon: f64, lambda: f64) -> Result<usize> {
    horizon_with_cap(phi, t0, epsilon, lambda, DEFAULT_ITER_CAP)
}

pub fn horizon_with_cap(
    phi: &PhiFunction,
    t0: f64,
    epsilon: f64,
    lambda: f64,
    cap: usize,
) -> Result<usize> {
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t0 = {t0} must be positive"
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} must lie in (0,1)"
        )));
    }
    let level = epsilon.min(lambda);
    let mut value = t0;
    let mut n = 0;
    while value > level {
        if n >= cap {
            return Err(Error::HorizonExceeded { cap });
        }
        value = phi.eval(value);
        n += 1;
    }
    Ok(n)
}

fn decays(phi: &PhiFunction, t: f64, iter_cap: usize) -> Option<f64> {
    let mut v = t;
    for _ in 0..iter_cap {
        if v < DECAY_THRESHOLD {
            return None;
        }
        v = phi.eval(v);
    }
    if v < DECAY_THRESHOLD {
        None
    } else {
        Some(v)
    }
}

/// Samples the class-Φ properties on `grid` points of `(0, t_max]`.
pub fn verify_phi_class(
    phi: &PhiFunction,
    grid: usize,
    t_max: f64,
    iter_cap: usize,
) -> Result<Report> {
    if grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid {grid} must be at least 2"
        )));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_max = {t_max} must be positive"
        )));
    }
    let ts: Vec<f64> = (1..=grid).map(|i| t_max * i as f64 / grid as f64).collect();

    let mut origin = Check::new("zero-at-origin");
    let at_zero = phi.eval(0.0);
    origin.record(at_zero == 0.0, || format!("phi(0) = {at_zero}"));

    let mut mono = Check::new("nondecreasing");
    let mut below = Check::new("below-identity");
    let mut prev = (0.0, at_zero);
    for &t in &ts {
        let v = phi.eval(t);
        mono.record(v >= prev.1, || {
            format!("phi({}) = {} > phi({t}) = {v}", prev.0, prev.1)
        });
        below.record(v < t, || format!("phi({t}) = {v} is not below t"));
        prev = (t, v);
    }

    let right = Check::structural("right-continuity");

    let mut decay = Check::new("iterates-vanish");
    // With monotonicity on the grid the largest point bounds every other orbit.
    let starts: &[f64] = if mono.passed { &ts[grid - 1..] } else { &ts };
    for &t in starts {
        let tail = decays(phi, t, iter_cap);
        decay.record(tail.is_none(), || {
            format!(
                "phi^{iter_cap}({t}) = {} not below {DECAY_THRESHOLD}",
                tail.unwrap_or(f64::NAN)
            )
        });
    }

    let mut report = Report::new(format!("{phi:?}"));
    for c in [origin, mono, below, right, decay] {
        report.push(c);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(PhiFunction::linear(0.5).unwrap().eval(8.0), 4.0);
        assert_eq!(PhiFunction::Rational.eval(1.0), 0.5);
        for phi in [
            PhiFunction::linear(0.3).unwrap(),
            PhiFunction::Rational,
            PhiFunction::induced(0.5, 1.0).unwrap(),
            PhiFunction::table(vec![(0.0, 0.0), (1.0, 0.5)]).unwrap(),
        ] {
            assert_eq!(phi.eval(0.0), 0.0, "{phi:?}");
        }
    }

    #[test]
    fn iterate_examples() {
        assert_eq!(PhiFunction::linear(0.5).unwrap().iterate(8.0, 3), 1.0);
        let r = PhiFunction::Rational.iterate(1.0, 4);
        assert!((r - 0.2).abs() < 1e-15, "{r}");
        assert_eq!(PhiFunction::Rational.iterate(5.0, 0), 5.0);
    }

    #[test]
    fn horizon_examples() {
        let lin = PhiFunction::linear(0.5).unwrap();
        assert_eq!(horizon(&lin, 2.0, 0.1, 0.1).unwrap(), 5);
        assert_eq!(horizon(&PhiFunction::Rational, 1.0, 0.2, 0.5).unwrap(), 4);
        assert_eq!(horizon(&lin, 0.05, 0.1, 0.2).unwrap(), 0);
    }

    #[test]
    fn horizon_cap_signals_non_decay() {
        let bad = PhiFunction::table(vec![(0.0, 0.0), (1.0, 1.0), (10.0, 10.0)]).unwrap();
        assert_eq!(
            horizon_with_cap(&bad, 2.0, 0.1, 0.1, 1000),
            Err(Error::HorizonExceeded { cap: 1000 })
        );
    }

    #[test]
    fn table_right_continuity_at_jumps() {
        let phi =
            PhiFunction::table(vec![(0.0, 0.0), (1.0, 0.25), (1.0, 0.5), (2.0, 0.5)]).unwrap();
        assert_eq!(phi.eval(1.0), 0.5);
        assert!((phi.eval(1.0 - 1e-12) - 0.25).abs() < 1e-9);
        assert_eq!(phi.eval(0.5), 0.125);
        assert_eq!(phi.eval(7.0), 0.5);
    }

    #[test]
    fn table_rejects_unsorted() {
        assert!(PhiFunction::table(vec![(1.0, 0.0), (0.5, 0.1)]).is_err());
        assert!(PhiFunction::table(vec![]).is_err());
        assert!(PhiFunction::table(vec![(0.0, -1.0)]).is_err());
    }

    #[test]
    fn builtins_are_class_phi() {
        for phi in [
            PhiFunction::linear(0.5).unwrap(),
            PhiFunction::Rational,
            PhiFunction::induced(0.5, 1.0).unwrap(),
            PhiFunction::induced(0.9, 3.0).unwrap(),
        ] {
            let report = verify_phi_class(&phi, 100, 10.0, DEFAULT_ITER_CAP).unwrap();
            assert!(report.passed(), "{phi:?}: {report:?}");
        }
    }

    #[test]
    fn expanding_table_fails_below_identity() {
        let phi = PhiFunction::table(vec![(0.0, 0.0), (1.0, 1.5)]).unwrap();
        assert_eq!(phi.eval(1.0), 1.5);
        let report = verify_phi_class(&phi, 10, 1.0, 1000).unwrap();
        let c = report.check("below-identity").unwrap();
        assert!(!c.passed);
        assert_eq!(c.violations, 10);
        assert!(phi.ensure_class(1.0).is_err());
    }

    #[test]
    fn linear_k_validation() {
        assert_eq!(PhiFunction::linear(1.0), Err(Error::InvalidK(1.0)));
        assert_eq!(PhiFunction::linear(0.0), Err(Error::InvalidK(0.0)));
        assert!(PhiFunction::induced(0.5, 0.0).is_err());
    }

    #[test]
    fn config_shapes() {
        let p: PhiFunction = serde_json::from_str(r#"{"kind":"linear","k":0.5}"#).unwrap();
        assert_eq!(p, PhiFunction::Linear { k: 0.5 });
        let p: PhiFunction = serde_json::from_str(r#"{"kind":"rational"}"#).unwrap();
        assert_eq!(p, PhiFunction::Rational);
        let p: PhiFunction =
            serde_json::from_str(r#"{"kind":"induced","k":0.5,"cap":1.0}"#).unwrap();
        assert_eq!(p, PhiFunction::Induced { k: 0.5, cap: 1.0 });
        let p: PhiFunction =
            serde_json::from_str(r#"{"kind":"table","points":[[0,0],[1,0.5]]}"#).unwrap();
        assert_eq!(p.eval(1.0), 0.5);
        assert!(serde_json::from_str::<PhiFunction>(r#"{"kind":"linear","k":2}"#).is_err());
        let back = serde_json::to_string(&PhiFunction::Induced { k: 0.5, cap: 1.0 }).unwrap();
        assert_eq!(back, r#"{"kind":"induced","k":0.5,"cap":1.0}"#);
    }
}
