//! Picard iteration of `h = g⁻¹ ∘ f` for coincidence points `gz = fz`.
//!
//! The orbit `x_{n+1} = h(x_n)` is stopped once `n` reaches the horizon
//! `N(ε, λ)` of the modulus (seeded at `t0 > 1`, where the antecedent
//! `M^g(x,y,t0) > 1 − t0` holds for every pair), the trailing window is
//! Cauchy in `U_{ε,λ}` under `M^g`, and the residual `M(gz, fz, t) ≥ 1 − λ`
//! holds for every configured residual time `t ≥ ε`.

use serde::{Deserialize, Serialize};

use crate::contraction::ensure_phi;
use crate::error::{Error, Result};
use crate::fmspace::{FuzzyMetric, Point};
use crate::maps::{Bijection, InverseAfter, MapSpec, PointMap};
use crate::phi::{horizon, PhiFunction};

pub const DEFAULT_T0: f64 = 2.0;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_WINDOW: usize = 2;

fn default_t0() -> f64 {
    DEFAULT_T0
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub start: Point,
    pub epsilon: f64,
    pub lambda: f64,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Defaults to `{ε, 0.1, 1}` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_times: Option<Vec<f64>>,
    #[serde(default = "default_window")]
    pub window: usize,
}

impl SolverConfig {
    pub fn new(start: Point, epsilon: f64, lambda: f64) -> Self {
        SolverConfig {
            start,
            epsilon,
            lambda,
            t0: DEFAULT_T0,
            max_iter: DEFAULT_MAX_ITER,
            residual_times: None,
            window: DEFAULT_WINDOW,
        }
    }

    pub fn with_start(&self, start: Point) -> Self {
        SolverConfig {
            start,
            ..self.clone()
        }
    }

    pub fn residual_times(&self) -> Vec<f64> {
        self.residual_times
            .clone()
            .unwrap_or_else(|| vec![self.epsilon, 0.1, 1.0])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.t0.is_finite() && self.t0 > 1.0) {
            return bad(format!("t0 must exceed 1, got {}", self.t0));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad(format!("lambda must lie in (0,1), got {}", self.lambda));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if self.window < 2 {
            return bad(format!("window must be at least 2, got {}", self.window));
        }
        if self
            .residual_times()
            .iter()
            .any(|t| !(t.is_finite() && *t > 0.0))
        {
            return bad("residual times must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub index: usize,
    pub point: Point,
    /// `M^g(x_n, x_{n−1}, ε)`.
    pub successive_grade: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub t: f64,
    /// `M(gz, fz, t)`.
    pub grade: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub point: Point,
    pub iterations: usize,
    pub horizon_used: usize,
    pub converged: bool,
    pub residuals: Vec<Residual>,
    pub trace: Vec<IterationRecord>,
}

fn residuals(
    fm: &FuzzyMetric,
    f: &MapSpec,
    g: &Bijection,
    z: &Point,
    times: &[f64],
) -> Result<Vec<Residual>> {
    let space = fm.space();
    let (gz, fz) = (g.apply(space, z)?, f.apply(space, z)?);
    times
        .iter()
        .map(|&t| {
            Ok(Residual {
                t,
                grade: fm.membership(&gz, &fz, t)?,
            })
        })
        .collect()
}

/// Iterates `x_{n+1} = g⁻¹(f(x_n))` from `cfg.start`.
///
/// `fm` is the untransformed metric; the Cauchy test runs under `M^g`.
/// Running out of iterations is not an error: the result carries
/// `converged = false` together with the full trace.
pub fn solve_coincidence(
    fm: &FuzzyMetric,
    f: &MapSpec,
    g: &Bijection,
    phi: &PhiFunction,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let space = fm.space();
    let mg = fm.g_transform(g)?;
    f.validate(space)?;
    ensure_phi(phi, cfg.t0)?;
    space.contains(&cfg.start)?;

    let n_horizon = horizon(phi, cfg.t0, cfg.epsilon, cfg.lambda)?;
    let h = InverseAfter { f, g };
    let times = cfg.residual_times();

    let mut points = vec![cfg.start.clone()];
    let mut trace = Vec::new();
    let mut converged = false;

    for n in 1..=cfg.max_iter {
        let prev = &points[n - 1];
        let next = h.apply(space, prev)?;
        let grade = mg.membership(&next, prev, cfg.epsilon)?;
        trace.push(IterationRecord {
            index: n,
            point: next.clone(),
            successive_grade: grade,
        });
        points.push(next);

        if n >= n_horizon && n + 1 >= cfg.window {
            let window = &points[n + 1 - cfg.window..];
            if mg.is_cauchy_window(window, cfg.epsilon, cfg.lambda)? {
                let res = residuals(fm, f, g, &points[n], &times)?;
                let settled = res
                    .iter()
                    .filter(|r| r.t >= cfg.epsilon)
                    .all(|r| r.grade >= 1.0 - cfg.lambda);
                if settled {
                    converged = true;
                    break;
                }
            }
        }
    }

    let point = points.pop().expect("orbit holds the start point");
    Ok(SolveResult {
        residuals: residuals(fm, f, g, &point, &times)?,
        point,
        iterations: trace.len(),
        horizon_used: n_horizon,
        converged,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSolution {
    pub start: Point,
    pub point: Point,
    pub converged: bool,
    pub iterations: usize,
}

/// `M(f z_i, f z_j, φⁿ(t0))` at step `n` of the contraction argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionStep {
    pub n: usize,
    pub t: f64,
    pub grade: f64,
    pub above_level: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairAgreement {
    pub i: usize,
    pub j: usize,
    pub in_uniformity: bool,
    pub grade: f64,
    pub steps: Vec<ContractionStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub consistent: bool,
    pub solutions: Vec<ProbeSolution>,
    pub pairs: Vec<PairAgreement>,
}

/// Solves from every start and compares the returned points pairwise in
/// `U_{ε,λ}`. Consistent iff every run converged and every pair agrees.
pub fn uniqueness_probe(
    fm: &FuzzyMetric,
    f: &MapSpec,
    g: &Bijection,
    phi: &PhiFunction,
    cfg: &SolverConfig,
    starts: &[Point],
) -> Result<UniquenessReport> {
    if starts.len() < 2 {
        return Err(Error::InvalidArgument(
            "uniqueness probe needs at least two starts".into(),
        ));
    }
    let runs = starts
        .iter()
        .map(|s| solve_coincidence(fm, f, g, phi, &cfg.with_start(s.clone())))
        .collect::<Result<Vec<_>>>()?;
    let n_horizon = runs[0].horizon_used;
    let space = fm.space();

    let mut pairs = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (zi, zj) = (&runs[i].point, &runs[j].point);
            let (fi, fj) = (f.apply(space, zi)?, f.apply(space, zj)?);
            let steps = (0..=n_horizon)
                .map(|n| {
                    let t = phi.iterate(cfg.t0, n);
                    let grade = fm.membership(&fi, &fj, t)?;
                    Ok(ContractionStep {
                        n,
                        t,
                        grade,
                        above_level: grade > 1.0 - t,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            pairs.push(PairAgreement {
                i,
                j,
                in_uniformity: fm.in_uniformity(zi, zj, cfg.epsilon, cfg.lambda)?,
                grade: fm.membership(zi, zj, cfg.epsilon)?,
                steps,
            });
        }
    }
    let consistent = runs.iter().all(|r| r.converged) && pairs.iter().all(|p| p.in_uniformity);
    Ok(UniquenessReport {
        consistent,
        solutions: starts
            .iter()
            .zip(&runs)
            .map(|(s, r)| ProbeSolution {
                start: s.clone(),
                point: r.point.clone(),
                converged: r.converged,
                iterations: r.iterations,
            })
            .collect(),
        pairs,
    })
}
