//! Set-valued `(g,φ)`-contractions `T: A → 2^X` with finite images: the
//! contraction check, successor selection, the orbit solver for `x ∈ Tx`,
//! and fuzzy-closure membership.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contraction::{
    ensure_phi, spot_grid, ContractionReport, Counterexample, Method, ETA_PROBES, SPOT_OFFSET,
};
use crate::error::{Error, Result};
use crate::fmspace::{standard_membership, FuzzyMetric, Point, Space, DEFAULT_THRESHOLD_TOL};
use crate::maps::{Bijection, PointMap};
use crate::phi::{horizon, PhiFunction};
use crate::solver::SolverConfig;
use crate::tnorm::{delta_for_lambda, TNorm};

/// Config form: `{"kind":"setvalued","map":{"<point>":["<point>",...]}}`.
/// Keys are strings; they are bound to points of a space by
/// [`SetValuedMap::bind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "setvalued")]
pub struct SetValuedConfig {
    pub map: BTreeMap<String, Vec<Point>>,
}

/// A set-valued map with finite nonempty images on a finite domain `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetValuedMap {
    entries: Vec<(Point, Vec<Point>)>,
}

fn parse_key(space: &Space, key: &str) -> Result<Point> {
    if space.is_finite() {
        return Ok(Point::label(key));
    }
    key.split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Point::Coords)
        .map_err(|_| Error::UnknownPoint(key.to_owned()))
}

impl SetValuedMap {
    pub fn new(entries: Vec<(Point, Vec<Point>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidMap(
                "set-valued map needs a nonempty domain".into(),
            ));
        }
        for (x, img) in &entries {
            if img.is_empty() {
                return Err(Error::InvalidMap(format!("T({x}) is empty")));
            }
        }
        let mut entries = entries;
        entries.sort_by(|a, b| a.0.canonical_cmp(&b.0));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidMap("duplicate domain point".into()));
        }
        Ok(SetValuedMap { entries })
    }

    /// Resolves config keys against `space`: labels for finite spaces,
    /// comma-separated coordinates otherwise.
    pub fn bind(config: &SetValuedConfig, space: &Space) -> Result<Self> {
        let entries = config
            .map
            .iter()
            .map(|(k, v)| Ok((parse_key(space, k)?, v.clone())))
            .collect::<Result<Vec<_>>>()?;
        let map = SetValuedMap::new(entries)?;
        map.validate(space)?;
        Ok(map)
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        for (x, img) in &self.entries {
            space.contains(x)?;
            for p in img {
                space.contains(p)?;
            }
        }
        Ok(())
    }

    /// The domain `A` in canonical order.
    pub fn domain(&self) -> impl Iterator<Item = &Point> {
        self.entries.iter().map(|(x, _)| x)
    }

    pub fn image(&self, x: &Point) -> Option<&[Point]> {
        self.entries
            .iter()
            .find(|(k, _)| k == x)
            .map(|(_, v)| v.as_slice())
    }

    fn image_or_err(&self, x: &Point) -> Result<&[Point]> {
        self.image(x)
            .ok_or_else(|| Error::InvalidMap(format!("{x} is outside the domain of T")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairPlan {
    /// Every ordered pair of `g⁻¹(A)`.
    Exhaustive,
    Sampled {
        samples: usize,
        seed: u64,
    },
}

/// Best `v` for `u` at level `s`: maximal `M(u, v, s)`, ties to the
/// canonically smallest point.
fn best_successor<'a>(
    fm: &FuzzyMetric,
    u: &Point,
    image: &'a [Point],
    s: f64,
) -> Result<(&'a Point, f64)> {
    let mut best: Option<(&Point, f64)> = None;
    for v in image {
        let m = fm.membership(u, v, s)?;
        best = match best {
            Some((b, bm)) if bm > m || (bm == m && b.canonical_cmp(v).is_le()) => Some((b, bm)),
            _ => Some((v, m)),
        };
    }
    Ok(best.expect("images are nonempty"))
}

/// Checks `M^g(x,y,t) > 1 − t ⇒ ∀u ∈ T(gx) ∃v ∈ T(gy): M(u,v,φ(t)) > 1 − φ(t)`.
///
/// As in the single-valued checker the `t`-quantifier is reduced to probes
/// just above `τ(gx, gy)`; finiteness of `T(gy)` lets the best `v` serve every
/// `t` at once.
pub fn check_setvalued_contraction(
    fm: &FuzzyMetric,
    t_map: &SetValuedMap,
    g: &Bijection,
    phi: &PhiFunction,
    plan: PairPlan,
) -> Result<ContractionReport> {
    ensure_phi(phi, 2.0)?;
    let space = fm.space();
    g.validate(space)?;
    t_map.validate(space)?;

    let xs = t_map
        .domain()
        .map(|a| g.inverse_apply(space, a))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(Point, Point)> = match plan {
        PairPlan::Exhaustive => xs
            .iter()
            .flat_map(|x| xs.iter().map(move |y| (x.clone(), y.clone())))
            .collect(),
        PairPlan::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples)
                .map(|_| {
                    let i = rng.gen_range(0..xs.len());
                    let j = rng.gen_range(0..xs.len());
                    (xs[i].clone(), xs[j].clone())
                })
                .collect()
        }
    };

    let grid = spot_grid();
    let mut violating = 0;
    let mut examples = Vec::new();
    for (x, y) in &pairs {
        let (gx, gy) = (g.apply(space, x)?, g.apply(space, y)?);
        let (img_x, img_y) = (t_map.image_or_err(&gx)?, t_map.image_or_err(&gy)?);
        let d_g = fm.distance(&gx, &gy)?;
        let tau_g = fm.threshold(&gx, &gy, DEFAULT_THRESHOLD_TOL)?;

        let mut found = Vec::new();
        for u in img_x {
            let probe = |t: f64, source: Method| -> Result<Option<Counterexample>> {
                let ant = standard_membership(d_g, t);
                if !(ant > 1.0 - t) {
                    return Ok(None);
                }
                let s = phi.eval(t);
                let (_, best) = best_successor(fm, u, img_y, s)?;
                Ok((!(best > 1.0 - s)).then(|| Counterexample {
                    x: x.clone(),
                    y: y.clone(),
                    u: Some(u.clone()),
                    t,
                    antecedent: ant,
                    consequent: best,
                    source,
                }))
            };
            for eta in ETA_PROBES {
                if let Some(c) = probe(tau_g + eta, Method::ThresholdReduction)? {
                    found.push(c);
                    break;
                }
            }
            for t in [tau_g - SPOT_OFFSET, tau_g + SPOT_OFFSET]
                .into_iter()
                .filter(|t| *t > 0.0)
                .chain(grid.iter().copied())
            {
                if let Some(c) = probe(t, Method::TGrid)? {
                    found.push(c);
                    break;
                }
            }
        }
        if !found.is_empty() {
            violating += 1;
            examples.extend(found);
        }
    }
    Ok(ContractionReport::build(
        Method::ThresholdReduction,
        pairs.len(),
        violating,
        examples,
    ))
}

/// Picks `v ∈ T(g y)` with `M(u, v, φ(t)) > 1 − φ(t)`, maximizing the grade.
pub fn select_successor(
    fm: &FuzzyMetric,
    t_map: &SetValuedMap,
    g: &Bijection,
    phi: &PhiFunction,
    u: &Point,
    y: &Point,
    t: f64,
) -> Result<Point> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidTime(t));
    }
    let space = fm.space();
    let gy = g.apply(space, y)?;
    let s = phi.eval(t);
    let (v, grade) = best_successor(fm, u, t_map.image_or_err(&gy)?, s)?;
    if grade > 1.0 - s {
        Ok(v.clone())
    } else {
        Err(Error::NoAdmissibleSuccessor {
            u: u.to_string(),
            y: y.to_string(),
            t,
        })
    }
}

/// Evidence for one `(ε, λ)` level of a closure test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureEvidence {
    pub epsilon: f64,
    pub lambda: f64,
    /// Best approximant in the set and its grade `M(x, y, ε)`.
    pub witness: Point,
    pub grade: f64,
    pub holds: bool,
}

/// Per-level evidence for `y ∈ cl(set)`.
pub fn closure_evidence(
    fm: &FuzzyMetric,
    set: &[Point],
    y: &Point,
    levels: &[(f64, f64)],
) -> Result<Vec<ClosureEvidence>> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("closure of an empty set".into()));
    }
    if levels.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one (epsilon, lambda) level is required".into(),
        ));
    }
    levels
        .iter()
        .map(|&(epsilon, lambda)| {
            let (w, grade) = best_successor(fm, y, set, epsilon)?;
            Ok(ClosureEvidence {
                epsilon,
                lambda,
                witness: w.clone(),
                grade,
                holds: fm.in_uniformity(w, y, epsilon, lambda)?,
            })
        })
        .collect()
}

/// For every level `(ε, λ)` some `x` in the set has `M(x, y, ε) > 1 − λ`.
pub fn in_fuzzy_closure(
    fm: &FuzzyMetric,
    set: &[Point],
    y: &Point,
    levels: &[(f64, f64)],
) -> Result<bool> {
    Ok(closure_evidence(fm, set, y, levels)?
        .iter()
        .all(|e| e.holds))
}

/// Finite spaces are weakly demicompact: an orbit in a finite set has a
/// constant subsequence. Other spaces are never decided here.
pub fn check_demicompact_finite(space: &Space) -> bool {
    space.is_finite()
}

/// Closure levels tested at the limit: `(ε, λ)`, `(ε/10, λ/10)`, `(ε/100, λ/100)`.
pub fn closure_levels(epsilon: f64, lambda: f64) -> Vec<(f64, f64)> {
    [1.0, 0.1, 0.01]
        .iter()
        .map(|s| (epsilon * s, lambda * s))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitResult {
    pub point: Point,
    pub orbit: Vec<Point>,
    pub horizon_used: usize,
    pub converged: bool,
    /// Closure evidence for `x ∈ (T∘g)(x)`.
    pub member_check: Vec<ClosureEvidence>,
    pub in_tg_image: bool,
    /// `x ∈ T(x)`; coincides with the above only for `g = id`.
    pub in_t_image: bool,
}

/// Builds the orbit `x_{n+1} ∈ (T∘g)(x_n)` with
/// `M(x_{n+1}, x_n, φⁿ(t0)) > 1 − φⁿ(t0)` and tests its limit for `x ∈ (T∘g)(x)`.
///
/// `x₁` is the point of `(T∘g)(x₀)` nearest to `x₀`; later steps use
/// [`select_successor`] with `u = y = x_n`. Continuum spaces require the caller
/// to assert weak demicompactness.
pub fn solve_inclusion(
    fm: &FuzzyMetric,
    t_map: &SetValuedMap,
    g: &Bijection,
    phi: &PhiFunction,
    cfg: &SolverConfig,
    assume_demicompact: bool,
) -> Result<OrbitResult> {
    cfg.validate()?;
    let space = fm.space();
    if !check_demicompact_finite(space) && !assume_demicompact {
        return Err(Error::NotDemicompact);
    }
    g.validate(space)?;
    t_map.validate(space)?;
    ensure_phi(phi, cfg.t0)?;
    space.contains(&cfg.start)?;
    let n_horizon = horizon(phi, cfg.t0, cfg.epsilon, cfg.lambda)?;

    let g0 = g.apply(space, &cfg.start)?;
    let (x1, _) = best_successor(fm, &cfg.start, t_map.image_or_err(&g0)?, cfg.t0)?;
    let mut orbit = vec![cfg.start.clone(), x1.clone()];
    let mut converged = false;
    let mut level = cfg.t0;

    for n in 1..=cfg.max_iter {
        if n >= n_horizon && orbit.len() >= cfg.window {
            let window = &orbit[orbit.len() - cfg.window..];
            if fm.is_cauchy_window(window, cfg.epsilon, cfg.lambda)? {
                converged = true;
                break;
            }
        }
        if n == cfg.max_iter {
            break;
        }
        // level = φ^{n-1}(t0); the selected step satisfies the bound at φⁿ(t0)
        let xn = orbit[n].clone();
        let next = select_successor(fm, t_map, g, phi, &xn, &xn, level)?;
        orbit.push(next);
        level = phi.eval(level);
    }

    let point = orbit.last().expect("orbit is nonempty").clone();
    let levels = closure_levels(cfg.epsilon, cfg.lambda);
    let gx = g.apply(space, &point)?;
    let (member_check, in_tg_image) = match t_map.image(&gx) {
        Some(img) => {
            let ev = closure_evidence(fm, img, &point, &levels)?;
            let ok = ev.iter().all(|e| e.holds);
            (ev, ok)
        }
        None => (Vec::new(), false),
    };
    let in_t_image = match t_map.image(&point) {
        Some(img) => in_fuzzy_closure(fm, img, &point, &levels)?,
        None => false,
    };
    Ok(OrbitResult {
        point,
        orbit,
        horizon_used: n_horizon,
        converged,
        member_check,
        in_tg_image,
        in_t_image,
    })
}

/// The `δ` chain of the closure argument: `δ` with `(1−δ)∗(1−δ) ≥ 1−λ`,
/// `δ₁` with `(1−δ₁)∗(1−δ₁) ≥ 1−δ`, and `δ₂ = min(δ, δ₁)`, which gives
/// `(1−δ₂)∗((1−δ₂)∗(1−δ₂)) ≥ 1−λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaChain {
    pub delta: f64,
    pub delta1: f64,
    pub delta2: f64,
}

pub fn delta_chain(norm: TNorm, lambda: f64, tol: f64) -> Result<DeltaChain> {
    let delta = delta_for_lambda(norm, lambda, 2, tol)?;
    let delta1 = delta_for_lambda(norm, delta, 2, tol)?;
    Ok(DeltaChain {
        delta,
        delta1,
        delta2: delta.min(delta1),
    })
}
