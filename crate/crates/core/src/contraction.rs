//! Verification of contraction conditions of the form
//! `M(gx,gy,t) > 1 − t ⇒ M(fx,fy,φ(t)) > 1 − φ(t)`.
//!
//! For the standard fuzzy metric the antecedent holds exactly for
//! `t > τ(gx,gy)` and the consequent exactly for `φ(t) > τ(fx,fy)`, where
//! `τ` is the crossing computed by [`FuzzyMetric::threshold`]. Since `φ` is
//! nondecreasing and right-continuous, the whole `∀t` quantifier reduces to
//! probing `t = τ(gx,gy) + η` for small `η`. Pair sampling is the only
//! approximate part; a coarse `t`-grid spot check runs alongside.
//!
//! The Golet `g`-contraction is the case `φ = linear(k)`; the Hicks
//! contraction additionally takes `g` to be the identity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::fmspace::{standard_membership, FuzzyMetric, Point, Space, DEFAULT_THRESHOLD_TOL};
use crate::maps::{Bijection, MapSpec, PointMap};
use crate::phi::{PhiFunction, DEFAULT_CHECK_T_MAX};
use crate::report::{Check, Report};

/// Offsets above the antecedent threshold at which the reduction probes.
pub const ETA_PROBES: [f64; 3] = [1e-3, 1e-6, 1e-9];
/// Offset around the threshold for the raw spot check.
pub const SPOT_OFFSET: f64 = 1e-6;
/// Absolute slack for the metric-side inequality `d(fx,fy) ≤ ψ(d(gx,gy))`.
pub const METRIC_SLACK: f64 = 1e-12;
/// Counterexamples kept in a report after canonical sorting.
pub const MAX_COUNTEREXAMPLES: usize = 64;
const PER_PAIR_GRID_EXAMPLES: usize = 4;

/// Spot-check times: `0.05, 0.10, …, 2.00`.
pub fn spot_grid() -> Vec<f64> {
    (1..=40).map(|i| i as f64 * 0.05).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ThresholdReduction,
    TGrid,
    Metric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// A violating instance. For fuzzy checks `antecedent = M(gx,gy,t)` and
/// `consequent = M(fx,fy,φ(t))` (for set-valued maps the best `v` for the
/// offending `u`); for metric checks they are `d(gx,gy)` and `d(fx,fy)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub x: Point,
    pub y: Point,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Point>,
    pub t: f64,
    pub antecedent: f64,
    pub consequent: f64,
    pub source: Method,
}

impl Counterexample {
    fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.x
            .canonical_cmp(&other.x)
            .then_with(|| self.y.canonical_cmp(&other.y))
            .then_with(|| match (&self.u, &other.u) {
                (Some(a), Some(b)) => a.canonical_cmp(b),
                (a, b) => a.is_some().cmp(&b.is_some()),
            })
            .then_with(|| self.t.total_cmp(&other.t))
    }

    /// Recomputes a single-valued fuzzy counterexample and reports whether
    /// the violation reproduces.
    pub fn replays(
        &self,
        fm: &FuzzyMetric,
        f: &MapSpec,
        g: &Bijection,
        phi: &PhiFunction,
    ) -> Result<bool> {
        let space = fm.space();
        let (gx, gy) = (g.apply(space, &self.x)?, g.apply(space, &self.y)?);
        let (fx, fy) = (f.apply(space, &self.x)?, f.apply(space, &self.y)?);
        let s = phi.eval(self.t);
        let ant = fm.membership(&gx, &gy, self.t)?;
        let cons = fm.membership(&fx, &fy, s)?;
        Ok(ant == self.antecedent
            && cons == self.consequent
            && ant > 1.0 - self.t
            && !(cons > 1.0 - s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub verdict: Verdict,
    pub checked_pairs: usize,
    pub violating_pairs: usize,
    pub method: Method,
    pub counterexamples: Vec<Counterexample>,
}

impl ContractionReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub(crate) fn build(
        method: Method,
        checked_pairs: usize,
        violating_pairs: usize,
        mut counterexamples: Vec<Counterexample>,
    ) -> Self {
        counterexamples.sort_by(|a, b| a.canonical_cmp(b));
        counterexamples.truncate(MAX_COUNTEREXAMPLES);
        ContractionReport {
            verdict: if violating_pairs == 0 {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            checked_pairs,
            violating_pairs,
            method,
            counterexamples,
        }
    }
}

/// Pairs to test: every ordered pair of a finite space, otherwise the
/// ordered pairs of the space's corner points followed by seeded random pairs
/// up to `samples` in total.
pub fn sample_pairs(space: &Space, samples: usize, seed: u64) -> Vec<(Point, Point)> {
    if let Some(points) = space.points() {
        return points
            .iter()
            .flat_map(|x| points.iter().map(move |y| (x.clone(), y.clone())))
            .collect();
    }
    let corners = space.corners();
    let mut pairs: Vec<(Point, Point)> = corners
        .iter()
        .flat_map(|x| corners.iter().map(move |y| (x.clone(), y.clone())))
        .take(samples)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while pairs.len() < samples {
        let x = space.sample(&mut rng);
        let y = space.sample(&mut rng);
        pairs.push((x, y));
    }
    pairs
}

pub(crate) fn ensure_phi(phi: &PhiFunction, t_max: f64) -> Result<()> {
    phi.ensure_class(t_max.max(DEFAULT_CHECK_T_MAX))
}

/// Checks the fuzzy `(g,φ)`-contraction condition on sampled pairs.
pub fn check_g_phi(
    fm: &FuzzyMetric,
    f: &MapSpec,
    g: &Bijection,
    phi: &PhiFunction,
    samples: usize,
    seed: u64,
) -> Result<ContractionReport> {
    ensure_phi(phi, 2.0)?;
    let space = fm.space();
    g.validate(space)?;
    f.validate(space)?;

    let grid = spot_grid();
    let pairs = sample_pairs(space, samples, seed);
    let mut violating = 0;
    let mut examples = Vec::new();

    for (x, y) in &pairs {
        let (gx, gy) = (g.apply(space, x)?, g.apply(space, y)?);
        let (fx, fy) = (f.apply(space, x)?, f.apply(space, y)?);
        let d_g = fm.distance(&gx, &gy)?;
        let d_f = fm.distance(&fx, &fy)?;
        let tau_g = fm.threshold(&gx, &gy, DEFAULT_THRESHOLD_TOL)?;

        let probe = |t: f64, source: Method| -> Option<Counterexample> {
            let ant = standard_membership(d_g, t);
            if !(ant > 1.0 - t) {
                return None;
            }
            let s = phi.eval(t);
            let cons = standard_membership(d_f, s);
            (!(cons > 1.0 - s)).then(|| Counterexample {
                x: x.clone(),
                y: y.clone(),
                u: None,
                t,
                antecedent: ant,
                consequent: cons,
                source,
            })
        };

        let reduced = ETA_PROBES
            .iter()
            .find_map(|eta| probe(tau_g + eta, Method::ThresholdReduction));
        let spots: Vec<Counterexample> = [tau_g - SPOT_OFFSET, tau_g + SPOT_OFFSET]
            .into_iter()
            .filter(|t| *t > 0.0)
            .chain(grid.iter().copied())
            .filter_map(|t| probe(t, Method::TGrid))
            .take(PER_PAIR_GRID_EXAMPLES)
            .collect();

        if reduced.is_some() || !spots.is_empty() {
            violating += 1;
            examples.extend(reduced);
            examples.extend(spots);
        }
    }
    Ok(ContractionReport::build(
        Method::ThresholdReduction,
        pairs.len(),
        violating,
        examples,
    ))
}

/// Checks `d(fx,fy) ≤ ψ(d(gx,gy))` on sampled pairs of a metric space.
pub fn check_metric_phi(
    space: &Space,
    f: &MapSpec,
    g: &Bijection,
    psi: &PhiFunction,
    samples: usize,
    seed: u64,
) -> Result<ContractionReport> {
    ensure_phi(psi, space.diameter().unwrap_or(0.0))?;
    g.validate(space)?;
    f.validate(space)?;
    let pairs = sample_pairs(space, samples, seed);
    let mut examples = Vec::new();
    for (x, y) in &pairs {
        let d_g = space.distance(&g.apply(space, x)?, &g.apply(space, y)?)?;
        let d_f = space.distance(&f.apply(space, x)?, &f.apply(space, y)?)?;
        if d_f > psi.eval(d_g) + METRIC_SLACK * (1.0 + d_g + d_f) {
            examples.push(Counterexample {
                x: x.clone(),
                y: y.clone(),
                u: None,
                t: d_g,
                antecedent: d_g,
                consequent: d_f,
                source: Method::Metric,
            });
        }
    }
    let violating = examples.len();
    Ok(ContractionReport::build(
        Method::Metric,
        pairs.len(),
        violating,
        examples,
    ))
}

/// The modulus `φ` with `φ(τ(d)) = τ(k·d)` for `d ≤ cap`, where
/// `τ(d) = (√(d²+4d) − d)/2` is the crossing of `t/(t+d)` with `1 − t`.
///
/// Beyond `τ(cap)` it continues linearly with slope `k`. A metric
/// `k`-contraction (`d(fx,fy) ≤ k·d(gx,gy)`) on a space of diameter at most
/// `cap` is then a fuzzy `(g,φ)`-contraction for the standard fuzzy metric.
pub fn induce_phi(k: f64, cap: f64) -> Result<PhiFunction> {
    PhiFunction::induced(k, cap)
}

const CONTINUITY_T_GRID: [f64; 7] = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9];
const CONTINUITY_S_STEPS: i32 = 20;
const CONTINUITY_RANDOM_NEIGHBOURS: usize = 64;
const CONTINUITY_NEAR_STEPS: i32 = 40;

fn neighbours(space: &Space, x0: &Point, rng: &mut ChaCha8Rng) -> Vec<Point> {
    if let Some(points) = space.points() {
        return points;
    }
    let mut out: Vec<Point> = (0..CONTINUITY_RANDOM_NEIGHBOURS)
        .map(|_| space.sample(rng))
        .collect();
    let c = x0.coords().expect("continuum points carry coordinates");
    let scale = space.diameter().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    for j in 1..=CONTINUITY_NEAR_STEPS {
        let h = scale * 0.5f64.powi(j);
        for sign in [-1.0, 1.0] {
            let p = Point::Coords(c.iter().map(|v| v + sign * h).collect());
            if space.contains(&p).is_ok() {
                out.push(p);
            }
        }
    }
    out
}

/// Empirical fuzzy-continuity check of `f` from `fm_src` into `fm_dst`:
/// for each sampled `x₀` and `t` on a grid, searches `s ∈ {2⁻ᵏ}` with
/// `M_src(x₀,y,s) > 1 − s ⇒ M_dst(fx₀,fy,t) > 1 − t` over sampled `y`.
///
/// Finite spaces use every point as `x₀` and as `y`; continuum spaces use
/// `samples` random `x₀` with random and dyadically close neighbours.
pub fn check_fuzzy_continuity<F: PointMap + ?Sized>(
    fm_src: &FuzzyMetric,
    fm_dst: &FuzzyMetric,
    f: &F,
    samples: usize,
    seed: u64,
) -> Result<Report> {
    let space = fm_src.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Point> = match space.points() {
        Some(points) => points,
        None => (0..samples).map(|_| space.sample(&mut rng)).collect(),
    };
    let s_grid: Vec<f64> = (0..=CONTINUITY_S_STEPS).map(|k| 0.5f64.powi(k)).collect();
    let mut check = Check::new("fuzzy-continuity");

    for x0 in &starts {
        let fx0 = f.apply(space, x0)?;
        let ys = neighbours(space, x0, &mut rng);
        let mut dists = Vec::with_capacity(ys.len());
        for y in &ys {
            let fy = f.apply(space, y)?;
            dists.push((fm_src.distance(x0, y)?, fm_dst.distance(&fx0, &fy)?));
        }
        for &t in &CONTINUITY_T_GRID {
            let admissible = s_grid.iter().any(|&s| {
                dists.iter().all(|&(d_src, d_dst)| {
                    !(standard_membership(d_src, s) > 1.0 - s)
                        || standard_membership(d_dst, t) > 1.0 - t
                })
            });
            check.record(admissible, || {
                format!("no admissible s at x0 = {x0}, t = {t}")
            });
        }
    }
    let mut report = Report::new("fuzzy continuity");
    report.push(check);
    Ok(report)
}

impl From<ContractionReport> for Report {
    fn from(c: ContractionReport) -> Report {
        let mut check = Check::new("contraction");
        check.evaluated = c.checked_pairs;
        check.violations = c.violating_pairs;
        check.passed = c.passed();
        check.witness = c
            .counterexamples
            .first()
            .map(|e| format!("x = {}, y = {}, t = {}", e.x, e.y, e.t));
        let mut r = Report::new(format!("{:?}", c.method));
        r.push(check);
        r
    }
}
