use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::point::Point;
use crate::error::{Error, Result};

/// Relative slack for the triangle inequality of finite distance tables,
/// which are typically rounded from real coordinates.
pub const TRIANGLE_SLACK: f64 = 1e-12;
/// Half-width of the sampling box used for unbounded Euclidean spaces.
pub const UNBOUNDED_SAMPLE_BOX: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceKind {
    Finite {
        points: Vec<String>,
        dist: Vec<Vec<f64>>,
    },
    Interval {
        lo: f64,
        hi: f64,
    },
    Euclidean {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bound: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpaceConfig {
    #[serde(flatten)]
    kind: SpaceKind,
    #[serde(default)]
    normalize: bool,
}

/// A metric space: a finite labelled set with a distance table, a closed
/// interval, or (optionally bounded) Euclidean space.
///
/// With `normalize` set, distances are mapped through `d ↦ 1 − e^{−d}`,
/// which bounds the metric by 1 and induces the same uniformity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceConfig", into = "SpaceConfig")]
pub struct Space {
    kind: SpaceKind,
    normalize: bool,
    index: HashMap<String, usize>,
}

impl TryFrom<SpaceConfig> for Space {
    type Error = Error;

    fn try_from(c: SpaceConfig) -> Result<Self> {
        Space::new(c.kind, c.normalize)
    }
}

impl From<Space> for SpaceConfig {
    fn from(s: Space) -> Self {
        SpaceConfig {
            kind: s.kind,
            normalize: s.normalize,
        }
    }
}

impl Space {
    pub fn new(kind: SpaceKind, normalize: bool) -> Result<Self> {
        let mut index = HashMap::new();
        match &kind {
            SpaceKind::Finite { points, dist } => {
                validate_table(points, dist)?;
                for (i, p) in points.iter().enumerate() {
                    if index.insert(p.clone(), i).is_some() {
                        return Err(Error::InvalidSpace(format!("duplicate label `{p}`")));
                    }
                }
            }
            SpaceKind::Interval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidSpace(format!(
                        "interval requires finite lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            SpaceKind::Euclidean { dim, bound } => {
                if *dim == 0 {
                    return Err(Error::InvalidSpace("euclidean dim must be positive".into()));
                }
                if let Some(b) = bound {
                    if !(b.is_finite() && *b > 0.0) {
                        return Err(Error::InvalidSpace(format!(
                            "euclidean bound {b} must be positive"
                        )));
                    }
                }
            }
        }
        Ok(Space {
            kind,
            normalize,
            index,
        })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Space::new(SpaceKind::Interval { lo, hi }, false)
    }

    pub fn euclidean(dim: usize, bound: Option<f64>) -> Result<Self> {
        Space::new(SpaceKind::Euclidean { dim, bound }, false)
    }

    pub fn finite(points: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        Space::new(SpaceKind::Finite { points, dist }, false)
    }

    /// Finite subset of the real line with `|x − y|` distances; labels are
    /// the shortest decimal rendering of each value.
    pub fn finite_reals(values: &[f64]) -> Result<Self> {
        let points = values.iter().map(|v| format!("{v}")).collect();
        let dist = values
            .iter()
            .map(|a| values.iter().map(|b| (a - b).abs()).collect())
            .collect();
        Space::finite(points, dist)
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn normalize(&self) -> bool {
        self.normalize
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, SpaceKind::Finite { .. })
    }

    /// Labels of a finite space, in declaration order.
    pub fn labels(&self) -> Option<&[String]> {
        match &self.kind {
            SpaceKind::Finite { points, .. } => Some(points),
            _ => None,
        }
    }

    pub fn points(&self) -> Option<Vec<Point>> {
        self.labels()
            .map(|ls| ls.iter().map(|l| Point::Label(l.clone())).collect())
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            SpaceKind::Finite { .. } => 0,
            SpaceKind::Interval { .. } => 1,
            SpaceKind::Euclidean { dim, .. } => dim,
        }
    }

    fn label_index(&self, p: &Point) -> Result<usize> {
        match p {
            Point::Label(l) => self
                .index
                .get(l)
                .copied()
                .ok_or_else(|| Error::UnknownPoint(l.clone())),
            Point::Coords(_) => Err(Error::UnknownPoint(p.to_string())),
        }
    }

    /// Checks that `p` is an element of the space.
    pub fn contains(&self, p: &Point) -> Result<()> {
        match &self.kind {
            SpaceKind::Finite { .. } => self.label_index(p).map(|_| ()),
            SpaceKind::Interval { lo, hi } => match p.coords() {
                Some([x]) if x.is_finite() && *lo <= *x && *x <= *hi => Ok(()),
                _ => Err(Error::PointOutOfSpace(p.to_string())),
            },
            SpaceKind::Euclidean { dim, bound } => match p.coords() {
                Some(c)
                    if c.len() == *dim
                        && c.iter()
                            .all(|x| x.is_finite() && bound.is_none_or(|b| x.abs() <= b)) =>
                {
                    Ok(())
                }
                _ => Err(Error::PointOutOfSpace(p.to_string())),
            },
        }
    }

    /// Underlying metric before the optional normalization.
    pub fn raw_distance(&self, x: &Point, y: &Point) -> Result<f64> {
        match &self.kind {
            SpaceKind::Finite { dist, .. } => {
                let (i, j) = (self.label_index(x)?, self.label_index(y)?);
                Ok(dist[i][j])
            }
            _ => {
                self.contains(x)?;
                self.contains(y)?;
                let (a, b) = (x.coords().unwrap(), y.coords().unwrap());
                if a.len() == 1 {
                    Ok((a[0] - b[0]).abs())
                } else {
                    Ok(a.iter()
                        .zip(b)
                        .map(|(p, q)| (p - q) * (p - q))
                        .sum::<f64>()
                        .sqrt())
                }
            }
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        let d = self.raw_distance(x, y)?;
        Ok(if self.normalize { -(-d).exp_m1() } else { d })
    }

    /// Upper bound on distances (after normalization); `None` when unbounded.
    pub fn diameter(&self) -> Option<f64> {
        let raw = match &self.kind {
            SpaceKind::Finite { dist, .. } => Some(
                dist.iter()
                    .flat_map(|r| r.iter().copied())
                    .fold(0.0, f64::max),
            ),
            SpaceKind::Interval { lo, hi } => Some(hi - lo),
            SpaceKind::Euclidean { dim, bound } => bound.map(|b| 2.0 * b * (*dim as f64).sqrt()),
        };
        if self.normalize {
            Some(raw.map_or(1.0, |d| -(-d).exp_m1()))
        } else {
            raw
        }
    }

    /// Moves a coordinate point that left a bounded space through rounding
    /// back onto its boundary.
    pub(crate) fn clamp(&self, p: Point) -> Point {
        match (&self.kind, p) {
            (SpaceKind::Interval { lo, hi }, Point::Coords(mut c)) => {
                for x in &mut c {
                    *x = x.clamp(*lo, *hi);
                }
                Point::Coords(c)
            }
            (SpaceKind::Euclidean { bound: Some(b), .. }, Point::Coords(mut c)) => {
                for x in &mut c {
                    *x = x.clamp(-*b, *b);
                }
                Point::Coords(c)
            }
            (_, p) => p,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match &self.kind {
            SpaceKind::Finite { points, .. } => {
                Point::Label(points[rng.gen_range(0..points.len())].clone())
            }
            SpaceKind::Interval { lo, hi } => Point::real(rng.gen_range(*lo..=*hi)),
            SpaceKind::Euclidean { dim, bound } => {
                let b = bound.unwrap_or(UNBOUNDED_SAMPLE_BOX);
                Point::Coords((0..*dim).map(|_| rng.gen_range(-b..=b)).collect())
            }
        }
    }

    /// Deterministic extreme points used to seed pair sampling.
    pub fn corners(&self) -> Vec<Point> {
        match &self.kind {
            SpaceKind::Finite { .. } => Vec::new(),
            SpaceKind::Interval { lo, hi } => vec![Point::real(*lo), Point::real(*hi)],
            SpaceKind::Euclidean { dim, bound } => {
                let b = bound.unwrap_or(UNBOUNDED_SAMPLE_BOX);
                vec![Point::Coords(vec![-b; *dim]), Point::Coords(vec![b; *dim])]
            }
        }
    }
}

fn validate_table(points: &[String], dist: &[Vec<f64>]) -> Result<()> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidSpace(
            "finite space needs at least one point".into(),
        ));
    }
    if dist.len() != n || dist.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidSpace(format!(
            "distance table must be {n}x{n}"
        )));
    }
    for i in 0..n {
        for j in 0..n {
            let d = dist[i][j];
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidSpace(format!(
                    "d({}, {}) = {d} must be finite and nonnegative",
                    points[i], points[j]
                )));
            }
            if (i == j) != (d == 0.0) {
                return Err(Error::InvalidSpace(format!(
                    "d({}, {}) = {d} violates identity of indiscernibles",
                    points[i], points[j]
                )));
            }
            if d != dist[j][i] {
                return Err(Error::InvalidSpace(format!(
                    "distance table is not symmetric at ({}, {})",
                    points[i], points[j]
                )));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let via = dist[i][k] + dist[k][j];
                if dist[i][j] > via + TRIANGLE_SLACK * via.max(1.0) {
                    return Err(Error::InvalidSpace(format!(
                        "triangle inequality fails: d({a},{b}) > d({a},{c}) + d({c},{b})",
                        a = points[i],
                        b = points[j],
                        c = points[k]
                    )));
                }
            }
        }
    }
    Ok(())
}
