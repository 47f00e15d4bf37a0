//! Single-valued self-maps `f` and bijections `g` of a space.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmspace::{Point, Space, SpaceKind};

/// Relative slack when matching affine images against interval endpoints.
const ENDPOINT_SLACK: f64 = 1e-12;

/// Anything that maps points of a space to points of the same space.
pub trait PointMap {
    fn apply(&self, space: &Space, x: &Point) -> Result<Point>;
}

fn affine_coords(space: &Space, x: &Point, a: f64, b: f64) -> Result<Point> {
    space.contains(x)?;
    match x {
        Point::Label(_) if a == 1.0 && b == 0.0 => Ok(x.clone()),
        Point::Label(l) => Err(Error::InvalidMap(format!(
            "affine map cannot act on label `{l}`"
        ))),
        Point::Coords(c) => Ok(space.clamp(Point::Coords(c.iter().map(|v| a * v + b).collect()))),
    }
}

fn lookup(table: &BTreeMap<String, String>, x: &Point) -> Result<Point> {
    let l = x
        .as_label()
        .ok_or_else(|| Error::InvalidMap(format!("table map cannot act on {x}")))?;
    table
        .get(l)
        .map(|v| Point::Label(v.clone()))
        .ok_or_else(|| Error::UnknownPoint(l.to_owned()))
}

fn check_table_covers(space: &Space, table: &BTreeMap<String, String>, what: &str) -> Result<()> {
    let labels = space
        .labels()
        .ok_or_else(|| Error::InvalidMap(format!("{what} table requires a finite space")))?;
    for l in labels {
        let v = table
            .get(l)
            .ok_or_else(|| Error::InvalidMap(format!("{what} table has no entry for `{l}`")))?;
        space.contains(&Point::Label(v.clone()))?;
    }
    if let Some(extra) = table.keys().find(|k| !labels.contains(*k)) {
        return Err(Error::UnknownPoint(extra.clone()));
    }
    Ok(())
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= ENDPOINT_SLACK * scale.max(1.0)
}

/// The map `f`: affine `x ↦ a·x + b` per coordinate, a constant, or a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapSpec {
    Affine { a: f64, b: f64 },
    Constant { c: Point },
    Table { map: BTreeMap<String, String> },
}

impl MapSpec {
    pub fn affine(a: f64, b: f64) -> Self {
        MapSpec::Affine { a, b }
    }

    pub fn constant(c: Point) -> Self {
        MapSpec::Constant { c }
    }

    pub fn table<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        MapSpec::Table {
            map: pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    /// Checks that the map sends the space into itself.
    pub fn validate(&self, space: &Space) -> Result<()> {
        match self {
            MapSpec::Affine { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidMap(format!("affine coefficients {a}, {b}")));
                }
                match space.kind() {
                    SpaceKind::Finite { .. } if *a == 1.0 && *b == 0.0 => Ok(()),
                    SpaceKind::Finite { .. } => Err(Error::InvalidMap(
                        "only the identity affine map acts on a finite space".into(),
                    )),
                    SpaceKind::Interval { lo, hi } => {
                        let scale = lo.abs().max(hi.abs());
                        for end in [a * lo + b, a * hi + b] {
                            if end < lo - ENDPOINT_SLACK * scale.max(1.0)
                                || end > hi + ENDPOINT_SLACK * scale.max(1.0)
                            {
                                return Err(Error::InvalidMap(format!(
                                    "affine map sends an endpoint to {end}, outside [{lo}, {hi}]"
                                )));
                            }
                        }
                        Ok(())
                    }
                    SpaceKind::Euclidean {
                        bound: Some(bd), ..
                    } => {
                        if a.abs() * bd + b.abs() > bd * (1.0 + ENDPOINT_SLACK) {
                            Err(Error::InvalidMap(format!(
                                "affine map leaves the box of half-width {bd}"
                            )))
                        } else {
                            Ok(())
                        }
                    }
                    SpaceKind::Euclidean { bound: None, .. } => Ok(()),
                }
            }
            MapSpec::Constant { c } => space.contains(c),
            MapSpec::Table { map } => check_table_covers(space, map, "map"),
        }
    }
}

impl PointMap for MapSpec {
    fn apply(&self, space: &Space, x: &Point) -> Result<Point> {
        match self {
            MapSpec::Affine { a, b } => affine_coords(space, x, *a, *b),
            MapSpec::Constant { c } => {
                space.contains(x)?;
                Ok(c.clone())
            }
            MapSpec::Table { map } => lookup(map, x),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum BijectionConfig {
    Identity,
    Affine { a: f64, b: f64 },
    Permutation { map: BTreeMap<String, String> },
}

/// The bijection `g`: affine with nonzero slope or a permutation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "BijectionConfig")]
pub enum Bijection {
    Affine { a: f64, b: f64 },
    Permutation { map: BTreeMap<String, String> },
}

impl TryFrom<BijectionConfig> for Bijection {
    type Error = Error;

    fn try_from(c: BijectionConfig) -> Result<Self> {
        match c {
            BijectionConfig::Identity => Ok(Bijection::identity()),
            BijectionConfig::Affine { a, b } => Bijection::affine(a, b),
            BijectionConfig::Permutation { map } => Ok(Bijection::Permutation { map }),
        }
    }
}

impl Bijection {
    pub fn identity() -> Self {
        Bijection::Affine { a: 1.0, b: 0.0 }
    }

    pub fn affine(a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::NotBijective(format!(
                "affine slope {a} must be nonzero and finite"
            )));
        }
        Ok(Bijection::Affine { a, b })
    }

    pub fn permutation<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Bijection::Permutation {
            map: pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Bijection::Affine { a, b } => *a == 1.0 && *b == 0.0,
            Bijection::Permutation { map } => map.iter().all(|(k, v)| k == v),
        }
    }

    /// Structural bijectivity on `space`: an affine map must carry the space
    /// onto itself, a permutation must be a bijection of the labels.
    pub fn validate(&self, space: &Space) -> Result<()> {
        let not_bij = |m: String| Err(Error::NotBijective(m));
        match self {
            Bijection::Affine { a, b } => {
                if *a == 0.0 || !a.is_finite() || !b.is_finite() {
                    return not_bij(format!("affine slope {a} must be nonzero and finite"));
                }
                match space.kind() {
                    SpaceKind::Finite { .. } if self.is_identity() => Ok(()),
                    SpaceKind::Finite { .. } => {
                        not_bij("a finite space needs a permutation table".into())
                    }
                    SpaceKind::Interval { lo, hi } => {
                        let (p, q) = (a * lo + b, a * hi + b);
                        let (p, q) = if p <= q { (p, q) } else { (q, p) };
                        let scale = lo.abs().max(hi.abs());
                        if close(p, *lo, scale) && close(q, *hi, scale) {
                            Ok(())
                        } else {
                            not_bij(format!("image [{p}, {q}] differs from [{lo}, {hi}]"))
                        }
                    }
                    SpaceKind::Euclidean {
                        bound: Some(bd), ..
                    } => {
                        if close(a.abs(), 1.0, 1.0) && close(*b, 0.0, *bd) {
                            Ok(())
                        } else {
                            not_bij(format!(
                                "affine map does not preserve the box of half-width {bd}"
                            ))
                        }
                    }
                    SpaceKind::Euclidean { bound: None, .. } => Ok(()),
                }
            }
            Bijection::Permutation { map } => {
                check_table_covers(space, map, "permutation")
                    .map_err(|e| Error::NotBijective(e.to_string()))?;
                let image: BTreeSet<&String> = map.values().collect();
                if image.len() != map.len() {
                    return not_bij("permutation table repeats an image".into());
                }
                Ok(())
            }
        }
    }

    pub fn inverse_apply(&self, space: &Space, y: &Point) -> Result<Point> {
        match self {
            Bijection::Affine { a, b } => match y {
                Point::Label(_) if self.is_identity() => {
                    space.contains(y)?;
                    Ok(y.clone())
                }
                Point::Label(l) => Err(Error::InverseUndefined(format!(
                    "affine inverse cannot act on label `{l}`"
                ))),
                Point::Coords(c) => {
                    space.contains(y)?;
                    Ok(space.clamp(Point::Coords(c.iter().map(|v| (v - b) / a).collect())))
                }
            },
            Bijection::Permutation { map } => {
                let l = y.as_label().ok_or_else(|| {
                    Error::InverseUndefined(format!("permutation inverse cannot act on {y}"))
                })?;
                map.iter()
                    .find(|(_, v)| v.as_str() == l)
                    .map(|(k, _)| Point::Label(k.clone()))
                    .ok_or_else(|| Error::InverseUndefined(format!("no preimage for `{l}`")))
            }
        }
    }
}

impl PointMap for Bijection {
    fn apply(&self, space: &Space, x: &Point) -> Result<Point> {
        match self {
            Bijection::Affine { a, b } => affine_coords(space, x, *a, *b),
            Bijection::Permutation { map } => lookup(map, x),
        }
    }
}

/// `h = g⁻¹ ∘ f`, whose fixed points are the coincidence points of `f` and `g`.
#[derive(Debug, Clone, Copy)]
pub struct InverseAfter<'a> {
    pub f: &'a MapSpec,
    pub g: &'a Bijection,
}

impl PointMap for InverseAfter<'_> {
    fn apply(&self, space: &Space, x: &Point) -> Result<Point> {
        let fx = self.f.apply(space, x)?;
        self.g.inverse_apply(space, &fx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Space {
        Space::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn affine_bijection_on_interval() {
        let g = Bijection::affine(-1.0, 1.0).unwrap();
        g.validate(&unit()).unwrap();
        assert_eq!(
            g.apply(&unit(), &Point::real(0.25)).unwrap(),
            Point::real(0.75)
        );
        assert_eq!(
            g.inverse_apply(&unit(), &Point::real(0.75)).unwrap(),
            Point::real(0.25)
        );
        assert!(matches!(
            Bijection::affine(2.0, 0.0).unwrap().validate(&unit()),
            Err(Error::NotBijective(_))
        ));
        assert!(matches!(
            Bijection::affine(0.0, 0.5),
            Err(Error::NotBijective(_))
        ));
    }

    #[test]
    fn permutation_validation() {
        let s = Space::finite_reals(&[0.0, 1.0, 2.0]).unwrap();
        let ok = Bijection::permutation([("0", "1"), ("1", "0"), ("2", "2")]);
        ok.validate(&s).unwrap();
        assert_eq!(
            ok.inverse_apply(&s, &Point::label("1")).unwrap(),
            Point::label("0")
        );
        let dup = Bijection::permutation([("0", "1"), ("1", "1"), ("2", "2")]);
        assert!(matches!(dup.validate(&s), Err(Error::NotBijective(_))));
        let partial = Bijection::permutation([("0", "0")]);
        assert!(matches!(partial.validate(&s), Err(Error::NotBijective(_))));
        assert!(Bijection::identity().validate(&s).is_ok());
        assert!(Bijection::affine(-1.0, 2.0).unwrap().validate(&s).is_err());
    }

    #[test]
    fn euclidean_bijections() {
        let free = Space::euclidean(2, None).unwrap();
        Bijection::affine(2.0, 3.0)
            .unwrap()
            .validate(&free)
            .unwrap();
        let boxed = Space::euclidean(2, Some(1.0)).unwrap();
        Bijection::affine(-1.0, 0.0)
            .unwrap()
            .validate(&boxed)
            .unwrap();
        assert!(Bijection::affine(0.5, 0.0)
            .unwrap()
            .validate(&boxed)
            .is_err());
    }

    #[test]
    fn map_validation() {
        MapSpec::affine(0.5, 0.0).validate(&unit()).unwrap();
        assert!(MapSpec::affine(2.0, 0.0).validate(&unit()).is_err());
        assert!(MapSpec::constant(Point::real(2.0))
            .validate(&unit())
            .is_err());
        let s = Space::finite_reals(&[0.0, 1.0]).unwrap();
        MapSpec::table([("0", "0"), ("1", "0")])
            .validate(&s)
            .unwrap();
        assert!(MapSpec::table([("0", "0")]).validate(&s).is_err());
        assert!(MapSpec::table([("0", "0"), ("1", "7")])
            .validate(&s)
            .is_err());
    }

    #[test]
    fn inverse_after_is_h() {
        let f = MapSpec::affine(0.5, 0.0);
        let g = Bijection::affine(-1.0, 1.0).unwrap();
        let h = InverseAfter { f: &f, g: &g };
        assert_eq!(
            h.apply(&unit(), &Point::real(0.0)).unwrap(),
            Point::real(1.0)
        );
        assert_eq!(
            h.apply(&unit(), &Point::real(1.0)).unwrap(),
            Point::real(0.5)
        );
    }

    #[test]
    fn config_shapes() {
        let g: Bijection = serde_json::from_str(r#"{"kind":"identity"}"#).unwrap();
        assert!(g.is_identity());
        let g: Bijection = serde_json::from_str(r#"{"kind":"affine","a":-1,"b":1}"#).unwrap();
        assert_eq!(g, Bijection::Affine { a: -1.0, b: 1.0 });
        assert!(serde_json::from_str::<Bijection>(r#"{"kind":"affine","a":0,"b":1}"#).is_err());
        let f: MapSpec = serde_json::from_str(r#"{"kind":"constant","c":0.25}"#).unwrap();
        assert_eq!(f, MapSpec::constant(Point::real(0.25)));
        let f: MapSpec = serde_json::from_str(r#"{"kind":"table","map":{"a":"b"}}"#).unwrap();
        assert!(matches!(f, MapSpec::Table { .. }));
    }
}
