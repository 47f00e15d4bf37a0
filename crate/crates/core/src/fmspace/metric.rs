use super::point::Point;
use super::space::Space;
use crate::error::{Error, Result};
use crate::maps::{Bijection, PointMap};
use crate::tnorm::TNorm;

/// Default bisection width for [`FuzzyMetric::threshold`].
pub const DEFAULT_THRESHOLD_TOL: f64 = 1e-12;

/// `t/(t+d)` with the conventions `M(·,·,0) = 0` and `M(x,x,t) = 1`.
pub fn standard_membership(d: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if d == 0.0 {
        1.0
    } else {
        t / (t + d)
    }
}

/// Crossing of `t ↦ t/(t+d)` with `t ↦ 1 − t`, located by bisection on `[0,1]`.
///
/// Returns the right end of the final bracket: the antecedent
/// `M(t) > 1 − t` holds at the returned value and fails `tol` below it.
pub fn threshold_for_distance(d: f64, tol: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if standard_membership(d, mid) > 1.0 - mid {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// The standard fuzzy metric of a space under a t-norm, optionally
/// precomposed with bijections (`M^g(x,y,t) = M(gx,gy,t)`).
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyMetric {
    space: Space,
    norm: TNorm,
    // Applied last-to-first: `[h, g]` evaluates `M(h(g x), h(g y), t)`.
    transforms: Vec<Bijection>,
}

impl FuzzyMetric {
    pub fn standard(space: Space, norm: TNorm) -> Self {
        FuzzyMetric {
            space,
            norm,
            transforms: Vec::new(),
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn norm(&self) -> TNorm {
        self.norm
    }

    pub fn transforms(&self) -> &[Bijection] {
        &self.transforms
    }

    /// Same space and t-norm without any transform.
    pub fn base(&self) -> FuzzyMetric {
        FuzzyMetric::standard(self.space.clone(), self.norm)
    }

    /// `M^g`. Fails with [`Error::NotBijective`] unless `g` is a structural
    /// bijection of the space.
    pub fn g_transform(&self, g: &Bijection) -> Result<FuzzyMetric> {
        g.validate(&self.space)?;
        let mut out = self.clone();
        out.transforms.push(g.clone());
        Ok(out)
    }

    fn image(&self, x: &Point) -> Result<Point> {
        self.space.contains(x)?;
        self.transforms
            .iter()
            .rev()
            .try_fold(x.clone(), |p, g| g.apply(&self.space, &p))
    }

    /// Distance between the transformed points.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        let (gx, gy) = (self.image(x)?, self.image(y)?);
        self.space.distance(&gx, &gy)
    }

    pub fn membership(&self, x: &Point, y: &Point, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidTime(t));
        }
        Ok(standard_membership(self.distance(x, y)?, t))
    }

    /// Membership in the basic entourage `U_{ε,λ}`: `M(x,y,ε) > 1 − λ`.
    pub fn in_uniformity(&self, x: &Point, y: &Point, epsilon: f64, lambda: f64) -> Result<bool> {
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
        Ok(self.membership(x, y, epsilon)? > 1.0 - lambda)
    }

    /// `τ(x,y)`: the antecedent `M(x,y,t) > 1 − t` holds exactly for `t > τ`.
    pub fn threshold(&self, x: &Point, y: &Point, tol: f64) -> Result<f64> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {tol} must be positive"
            )));
        }
        Ok(threshold_for_distance(self.distance(x, y)?, tol))
    }

    /// Every pair of the window lies in `U_{ε,λ}`.
    pub fn is_cauchy_window(&self, window: &[Point], epsilon: f64, lambda: f64) -> Result<bool> {
        if window.is_empty() {
            return Err(Error::InvalidArgument(
                "Cauchy window must be nonempty".into(),
            ));
        }
        for (i, x) in window.iter().enumerate() {
            for y in &window[i + 1..] {
                if !self.in_uniformity(x, y, epsilon, lambda)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}
