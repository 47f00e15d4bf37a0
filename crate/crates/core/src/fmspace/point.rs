use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// An element of a space: a label in a finite space or a coordinate vector
/// in an interval / Euclidean space.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Label(String),
    Coords(Vec<f64>),
}

impl Point {
    pub fn label(s: impl Into<String>) -> Self {
        Point::Label(s.into())
    }

    pub fn real(x: f64) -> Self {
        Point::Coords(vec![x])
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Coords(c) => Some(c),
            Point::Label(_) => None,
        }
    }

    /// First coordinate, for one-dimensional spaces.
    pub fn as_real(&self) -> Option<f64> {
        self.coords().and_then(|c| c.first().copied())
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            Point::Label(s) => Some(s),
            Point::Coords(_) => None,
        }
    }

    /// Total order used to break ties deterministically: labels before
    /// coordinates, labels lexicographically, coordinates by `total_cmp`.
    pub fn canonical_cmp(&self, other: &Point) -> Ordering {
        match (self, other) {
            (Point::Label(a), Point::Label(b)) => a.cmp(b),
            (Point::Label(_), Point::Coords(_)) => Ordering::Less,
            (Point::Coords(_), Point::Label(_)) => Ordering::Greater,
            (Point::Coords(a), Point::Coords(b)) => a
                .iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or_else(|| a.len().cmp(&b.len())),
        }
    }

    /// Rendering with 17 significant digits per coordinate, used by traces.
    pub fn render_exact(&self) -> String {
        match self {
            Point::Label(s) => s.clone(),
            Point::Coords(c) => c
                .iter()
                .map(|x| render_f64(*x))
                .collect::<Vec<_>>()
                .join(","),
        }
    }
}

/// 17-significant-digit scientific rendering; round-trips every `f64`.
pub fn render_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Label(s) => f.write_str(s),
            Point::Coords(c) if c.len() == 1 => write!(f, "{}", c[0]),
            Point::Coords(c) => {
                f.write_str("(")?;
                for (i, x) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Point::Label(l) => s.serialize_str(l),
            Point::Coords(c) if c.len() == 1 => s.serialize_f64(c[0]),
            Point::Coords(c) => c.serialize(s),
        }
    }
}

struct PointVisitor;

impl<'de> Visitor<'de> for PointVisitor {
    type Value = Point;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a label string, a number, or an array of numbers")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Point, E> {
        Ok(Point::Label(v.to_owned()))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Point, E> {
        Ok(Point::real(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Point, E> {
        Ok(Point::real(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Point, E> {
        Ok(Point::real(v as f64))
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Point, A::Error> {
        let mut coords = Vec::new();
        while let Some(x) = seq.next_element::<f64>()? {
            coords.push(x);
        }
        if coords.is_empty() {
            return Err(de::Error::custom("coordinate vector must be nonempty"));
        }
        Ok(Point::Coords(coords))
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Point, D::Error> {
        d.deserialize_any(PointVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_three_shapes() {
        let p: Point = serde_json::from_str("\"a\"").unwrap();
        assert_eq!(p, Point::label("a"));
        let p: Point = serde_json::from_str("0.5").unwrap();
        assert_eq!(p, Point::real(0.5));
        let p: Point = serde_json::from_str("2").unwrap();
        assert_eq!(p, Point::real(2.0));
        let p: Point = serde_json::from_str("[1, 2.5]").unwrap();
        assert_eq!(p, Point::Coords(vec![1.0, 2.5]));
        assert!(serde_json::from_str::<Point>("[]").is_err());
        assert!(serde_json::from_str::<Point>("{}").is_err());
    }

    #[test]
    fn canonical_order() {
        assert!(Point::label("a").canonical_cmp(&Point::label("b")).is_lt());
        assert!(Point::label("z").canonical_cmp(&Point::real(0.0)).is_lt());
        assert!(Point::real(-1.0).canonical_cmp(&Point::real(0.0)).is_lt());
        assert!(Point::real(0.0).canonical_cmp(&Point::real(0.0)).is_eq());
    }

    #[test]
    fn exact_rendering_round_trips() {
        let x = 2.0 / 3.0;
        let s = render_f64(x);
        assert_eq!(s, "6.6666666666666663e-1");
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}
