use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metric::FuzzyMetric;
use super::point::Point;
use super::space::Space;
use crate::error::{Error, Result};
use crate::report::{Check, Report};
use crate::tnorm::TNorm;

/// Continuity tolerance for the shrinking-difference check.
pub const FM6_TOLERANCE: f64 = 1e-6;
/// Absolute slack on the t-norm triangle inequality for floating rounding.
pub const FM5_SLACK: f64 = 1e-12;

const T_LOG_RANGE: (f64, f64) = (-3.0, 2.0);
const FM6_STEPS: [f64; 4] = [1e-3, 1e-6, 1e-9, 1e-12];

/// A candidate membership function to be tested against the axioms.
///
/// [`FuzzyMetric`] is the only constructible fuzzy metric; the trait lets
/// test doubles and corrupted candidates go through the same checker.
pub trait CandidateMetric {
    fn space(&self) -> &Space;
    fn norm(&self) -> TNorm;
    fn membership(&self, x: &Point, y: &Point, t: f64) -> Result<f64>;
}

impl CandidateMetric for FuzzyMetric {
    fn space(&self) -> &Space {
        FuzzyMetric::space(self)
    }

    fn norm(&self) -> TNorm {
        FuzzyMetric::norm(self)
    }

    fn membership(&self, x: &Point, y: &Point, t: f64) -> Result<f64> {
        FuzzyMetric::membership(self, x, y, t)
    }
}

fn sample_time(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.gen_range(T_LOG_RANGE.0..T_LOG_RANGE.1))
}

/// Seeded sampled check of FM1–FM6 and monotonicity in `t`.
///
/// Every fourth sample forces `y = x` and every seventh `z = y`, so the
/// diagonal cases of FM3 and FM5 are exercised.
pub fn verify_fm_axioms<M: CandidateMetric + ?Sized>(
    m: &M,
    samples: usize,
    seed: u64,
) -> Result<Report> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let space = m.space();
    let norm = m.norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut fm1 = Check::new("FM1");
    let mut fm2 = Check::new("FM2");
    let mut fm3 = Check::new("FM3");
    let mut fm4 = Check::new("FM4");
    let mut fm5 = Check::new("FM5");
    let mut fm6 = Check::new("FM6");
    let mut mono = Check::new("nondecreasing-in-t");

    let t_grid: Vec<f64> = (0..=20)
        .map(|i| 10f64.powf(T_LOG_RANGE.0 + (T_LOG_RANGE.1 - T_LOG_RANGE.0) * i as f64 / 20.0))
        .collect();

    for i in 0..samples {
        let x = space.sample(&mut rng);
        let y = if i % 4 == 0 {
            x.clone()
        } else {
            space.sample(&mut rng)
        };
        let z = if i % 7 == 0 {
            y.clone()
        } else {
            space.sample(&mut rng)
        };
        let t = sample_time(&mut rng);
        let s = sample_time(&mut rng);

        let mxy = m.membership(&x, &y, t)?;
        let at_zero = m.membership(&x, &y, 0.0)?;
        fm1.record(at_zero == 0.0, || format!("M({x}, {y}, 0) = {at_zero}"));
        fm2.record(mxy > 0.0, || format!("M({x}, {y}, {t}) = {mxy}"));

        let same = x == y;
        fm3.record((mxy == 1.0) == same, || {
            format!("M({x}, {y}, {t}) = {mxy} with x == y: {same}")
        });

        let myx = m.membership(&y, &x, t)?;
        fm4.record(mxy == myx, || format!("M({x},{y},{t}) = {mxy} != {myx}"));

        let lhs = m.membership(&x, &z, t + s)?;
        let myz = m.membership(&y, &z, s)?;
        let rhs = norm.apply(mxy, myz);
        fm5.record(lhs >= rhs - FM5_SLACK, || {
            format!(
                "M({x},{z},{}) = {lhs} < M({x},{y},{t}) * M({y},{z},{s}) = {rhs}",
                t + s
            )
        });

        let mut last_gap = f64::INFINITY;
        let mut ok = true;
        for &dt in &FM6_STEPS {
            let up = (m.membership(&x, &y, t + dt)? - mxy).abs();
            let down = if t > dt {
                (mxy - m.membership(&x, &y, t - dt)?).abs()
            } else {
                0.0
            };
            let gap = up.max(down);
            ok &= gap <= last_gap;
            last_gap = gap;
        }
        ok &= last_gap < FM6_TOLERANCE;
        fm6.record(ok, || {
            format!("M({x},{y},·) jumps by {last_gap} near t = {t}")
        });

        let mut prev = 0.0;
        let mut nondecreasing = true;
        for &tg in &t_grid {
            let v = m.membership(&x, &z, tg)?;
            nondecreasing &= v >= prev;
            prev = v;
        }
        mono.record(nondecreasing, || {
            format!("M({x},{z},·) decreases on the t-grid")
        });
    }

    let mut report = Report::new(format!("fuzzy metric under {norm}"));
    for c in [fm1, fm2, fm3, fm4, fm5, fm6, mono] {
        report.push(c);
    }
    Ok(report)
}
