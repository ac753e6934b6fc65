//! Objects of the base category: finite label sets, Euclidean spaces,
//! finite products, and the unit. [`Point`] is an element of one of these.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// A computable space.
///
/// `Prod(vec![])` never appears: [`Space::prod`] maps the empty product to
/// [`Space::Unit`]. Products are not flattened unless
/// [`Space::normalized`] is called.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "SpaceRepr")]
pub enum Space {
    Unit,
    Finite { labels: Vec<String> },
    Euclid { dim: usize },
    Prod { factors: Vec<Space> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SpaceRepr {
    Unit,
    Finite { labels: Vec<String> },
    Euclid { dim: usize },
    Prod { factors: Vec<Space> },
}

impl TryFrom<SpaceRepr> for Space {
    type Error = Error;

    fn try_from(r: SpaceRepr) -> Result<Space> {
        match r {
            SpaceRepr::Unit => Ok(Space::Unit),
            SpaceRepr::Finite { labels } => Space::finite(labels),
            SpaceRepr::Euclid { dim } => Ok(Space::Euclid { dim }),
            SpaceRepr::Prod { factors } => Ok(Space::prod(factors)),
        }
    }
}

impl Space {
    /// A finite space with the given labels, which must be pairwise distinct.
    pub fn finite<I, S>(labels: I) -> Result<Space>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Invalid(format!("duplicate label {l:?} in finite space")));
            }
        }
        Ok(Space::Finite { labels })
    }

    /// The finite space `{"0", "1", ..., "n-1"}`.
    pub fn range(n: usize) -> Space {
        Space::Finite {
            labels: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn euclid(dim: usize) -> Space {
        Space::Euclid { dim }
    }

    pub fn prod(factors: Vec<Space>) -> Space {
        if factors.is_empty() {
            Space::Unit
        } else {
            Space::Prod { factors }
        }
    }

    pub fn pair(a: Space, b: Space) -> Space {
        Space::Prod {
            factors: vec![a, b],
        }
    }

    /// Number of elements, or `None` when the space has a Euclidean component.
    pub fn cardinality(&self) -> Option<usize> {
        match self {
            Space::Unit => Some(1),
            Space::Finite { labels } => Some(labels.len()),
            Space::Euclid { .. } => None,
            Space::Prod { factors } => factors
                .iter()
                .try_fold(1usize, |acc, f| f.cardinality().and_then(|c| acc.checked_mul(c))),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.cardinality().is_some()
    }

    /// All elements in a canonical order (lexicographic over factors).
    pub fn enumerate(&self) -> Result<Vec<Point>> {
        match self {
            Space::Unit => Ok(vec![Point::Unit]),
            Space::Finite { labels } => Ok(labels.iter().map(|l| Point::label(l.clone())).collect()),
            Space::Euclid { dim } => Err(Error::NotEnumerable(format!("Euclidean space of dimension {dim}"))),
            Space::Prod { factors } => {
                let mut acc: Vec<Vec<Point>> = vec![Vec::new()];
                for f in factors {
                    let elems = f.enumerate()?;
                    let mut next = Vec::with_capacity(acc.len() * elems.len());
                    for prefix in &acc {
                        for e in &elems {
                            let mut v = prefix.clone();
                            v.push(e.clone());
                            next.push(v);
                        }
                    }
                    acc = next;
                }
                Ok(acc.into_iter().map(Point::Tuple).collect())
            }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (self, p) {
            (Space::Unit, Point::Unit) => true,
            (Space::Finite { labels }, Point::Label(l)) => labels.iter().any(|x| x == l),
            (Space::Euclid { dim }, Point::Vector(v)) => v.len() == *dim,
            (Space::Prod { factors }, Point::Tuple(xs)) => {
                factors.len() == xs.len() && factors.iter().zip(xs).all(|(f, x)| f.contains(x))
            }
            _ => false,
        }
    }

    /// Returns an error naming the space when `p` is not an element.
    pub fn check(&self, p: &Point, what: &str) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::IllTyped(format!("{what}: {p} is not an element of {self}")))
        }
    }

    /// Total real dimension when every component is Euclidean or unit.
    pub fn flat_dim(&self) -> Option<usize> {
        match self {
            Space::Unit => Some(0),
            Space::Euclid { dim } => Some(*dim),
            Space::Finite { .. } => None,
            Space::Prod { factors } => factors.iter().map(Space::flat_dim).sum(),
        }
    }

    /// The only element of a one-element space.
    pub fn unique_point(&self) -> Option<Point> {
        match self.cardinality() {
            Some(1) => self.enumerate().ok().and_then(|mut v| v.pop()),
            _ => None,
        }
    }

    /// Flattens nested products, drops unit factors and unwraps singleton
    /// products. Used only at explicit comparison points.
    pub fn normalized(&self) -> Space {
        match self {
            Space::Prod { factors } => {
                let mut flat = Vec::new();
                for f in factors {
                    match f.normalized() {
                        Space::Unit => {}
                        Space::Prod { factors } => flat.extend(factors),
                        other => flat.push(other),
                    }
                }
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    Space::prod(flat)
                }
            }
            other => other.clone(),
        }
    }

    /// Reads a point of this space from JSON. Unit is `null`, labels are
    /// strings, vectors are number arrays and tuples are arrays.
    pub fn point_from_json(&self, v: &Value) -> Result<Point> {
        let bad = || Error::Parse(format!("{v} is not a point of {self}"));
        match self {
            Space::Unit => match v {
                Value::Null => Ok(Point::Unit),
                _ => Err(bad()),
            },
            Space::Finite { .. } => {
                let p = match v {
                    Value::String(s) => Point::label(s.clone()),
                    Value::Number(n) => Point::label(n.to_string()),
                    _ => return Err(bad()),
                };
                self.check(&p, "json point")?;
                Ok(p)
            }
            Space::Euclid { dim } => {
                let arr = v.as_array().ok_or_else(bad)?;
                if arr.len() != *dim {
                    return Err(bad());
                }
                let xs = arr
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(bad))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(Point::Vector(xs))
            }
            Space::Prod { factors } => {
                let arr = v.as_array().ok_or_else(bad)?;
                if arr.len() != factors.len() {
                    return Err(bad());
                }
                let xs = factors
                    .iter()
                    .zip(arr)
                    .map(|(f, x)| f.point_from_json(x))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Point::Tuple(xs))
            }
        }
    }
}

impl Space {
    /// Reads a point from an object key: the label itself for label sets,
    /// JSON text otherwise.
    pub fn point_from_key(&self, key: &str) -> Result<Point> {
        match self {
            Space::Finite { .. } => self.point_from_json(&Value::String(key.to_string())),
            _ => self.point_from_json(&serde_json::from_str(key)?),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Unit => write!(f, "1"),
            Space::Finite { labels } => write!(f, "{{{}}}", labels.join(",")),
            Space::Euclid { dim } => write!(f, "R^{dim}"),
            Space::Prod { factors } => {
                write!(f, "(")?;
                for (i, s) in factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, " x ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// An element of a [`Space`].
///
/// Vectors compare, order and hash by the bit patterns of their entries, so
/// two vectors are equal only when they are bit-for-bit identical.
#[derive(Debug, Clone)]
pub enum Point {
    Unit,
    Label(String),
    Vector(Vec<f64>),
    Tuple(Vec<Point>),
}

impl Point {
    pub fn label(s: impl Into<String>) -> Point {
        Point::Label(s.into())
    }

    pub fn vector(xs: impl Into<Vec<f64>>) -> Point {
        Point::Vector(xs.into())
    }

    pub fn pair(a: Point, b: Point) -> Point {
        Point::Tuple(vec![a, b])
    }

    pub fn scalar(x: f64) -> Point {
        Point::Vector(vec![x])
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            Point::Label(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Point::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Point]> {
        match self {
            Point::Tuple(v) => Some(v),
            _ => None,
        }
    }

    /// Component `i` of a tuple.
    pub fn component(&self, i: usize) -> Result<&Point> {
        self.as_tuple()
            .and_then(|t| t.get(i))
            .ok_or_else(|| Error::IllTyped(format!("{self} has no component {i}")))
    }

    /// Concatenates all vector leaves in order. Units contribute nothing.
    pub fn flatten_reals(&self) -> Option<Vec<f64>> {
        let mut out = Vec::new();
        self.push_reals(&mut out).then_some(out)
    }

    fn push_reals(&self, out: &mut Vec<f64>) -> bool {
        match self {
            Point::Unit => true,
            Point::Label(_) => false,
            Point::Vector(v) => {
                out.extend_from_slice(v);
                true
            }
            Point::Tuple(xs) => xs.iter().all(|x| x.push_reals(out)),
        }
    }

    /// Inverse of [`Point::flatten_reals`] against a Euclid/Prod/Unit shape.
    pub fn from_reals(shape: &Space, xs: &[f64]) -> Result<Point> {
        let mut at = 0;
        let p = Self::take_reals(shape, xs, &mut at)?;
        if at != xs.len() {
            return Err(Error::Shape(format!("{} reals do not fit {shape}", xs.len())));
        }
        Ok(p)
    }

    fn take_reals(shape: &Space, xs: &[f64], at: &mut usize) -> Result<Point> {
        match shape {
            Space::Unit => Ok(Point::Unit),
            Space::Euclid { dim } => {
                let end = *at + dim;
                if end > xs.len() {
                    return Err(Error::Shape(format!("{} reals do not fit {shape}", xs.len())));
                }
                let v = xs[*at..end].to_vec();
                *at = end;
                Ok(Point::Vector(v))
            }
            Space::Prod { factors } => factors
                .iter()
                .map(|f| Self::take_reals(f, xs, at))
                .collect::<Result<Vec<_>>>()
                .map(Point::Tuple),
            Space::Finite { .. } => Err(Error::Shape(format!("{shape} has no real coordinates"))),
        }
    }

    /// Structural counterpart of [`Space::normalized`].
    pub fn normalized(&self) -> Point {
        match self {
            Point::Tuple(xs) => {
                let mut flat = Vec::new();
                for x in xs {
                    match x.normalized() {
                        Point::Unit => {}
                        Point::Tuple(ys) => flat.extend(ys),
                        other => flat.push(other),
                    }
                }
                match flat.len() {
                    0 => Point::Unit,
                    1 => flat.pop().unwrap(),
                    _ => Point::Tuple(flat),
                }
            }
            other => other.clone(),
        }
    }

    /// Object-key encoding, inverse to [`Space::point_from_key`].
    pub fn key(&self) -> String {
        match self {
            Point::Label(s) => s.clone(),
            other => other.to_json().to_string(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Point::Unit => Value::Null,
            Point::Label(s) => Value::String(s.clone()),
            Point::Vector(v) => Value::Array(v.iter().map(|x| serde_json::json!(x)).collect()),
            Point::Tuple(xs) => Value::Array(xs.iter().map(Point::to_json).collect()),
        }
    }

    /// Largest absolute coordinate difference between two points of the
    /// same shape; labels contribute 0 when equal and infinity otherwise.
    pub fn distance(&self, other: &Point) -> f64 {
        match (self, other) {
            (Point::Unit, Point::Unit) => 0.0,
            (Point::Label(a), Point::Label(b)) => {
                if a == b {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            (Point::Vector(a), Point::Vector(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
                .fold(0.0, f64::max),
            (Point::Tuple(a), Point::Tuple(b)) if a.len() == b.len() => {
                a.iter().zip(b).map(|(x, y)| x.distance(y)).fold(0.0, f64::max)
            }
            _ => f64::INFINITY,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Point::Unit => 0,
            Point::Label(_) => 1,
            Point::Vector(_) => 2,
            Point::Tuple(_) => 3,
        }
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Point::Unit, Point::Unit) => Ordering::Equal,
            (Point::Label(a), Point::Label(b)) => a.cmp(b),
            (Point::Vector(a), Point::Vector(b)) => {
                for (x, y) in a.iter().zip(b) {
                    match x.total_cmp(y) {
                        Ordering::Equal => {}
                        o => return o,
                    }
                }
                a.len().cmp(&b.len())
            }
            (Point::Tuple(a), Point::Tuple(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Point {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Point::Unit => {}
            Point::Label(s) => s.hash(state),
            Point::Vector(v) => {
                for x in v {
                    x.to_bits().hash(state);
                }
            }
            Point::Tuple(xs) => xs.hash(state),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Unit => write!(f, "*"),
            Point::Label(s) => write!(f, "{s}"),
            Point::Vector(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            Point::Tuple(xs) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_labels_rejected() {
        assert!(Space::finite(["a", "b", "a"]).is_err());
        assert!(Space::finite(["a", "b"]).is_ok());
    }

    #[test]
    fn cardinalities() {
        let a = Space::finite(["a", "b"]).unwrap();
        let s = Space::range(3);
        assert_eq!(a.cardinality(), Some(2));
        assert_eq!(Space::Unit.cardinality(), Some(1));
        assert_eq!(Space::pair(a.clone(), s.clone()).cardinality(), Some(6));
        assert_eq!(Space::pair(a, Space::euclid(2)).cardinality(), None);
        assert_eq!(Space::prod(vec![]), Space::Unit);
    }

    #[test]
    fn enumeration_matches_cardinality_and_membership() {
        let sp = Space::prod(vec![Space::range(2), Space::Unit, Space::range(3)]);
        let all = sp.enumerate().unwrap();
        assert_eq!(all.len(), 6);
        assert!(all.iter().all(|p| sp.contains(p)));
        assert!(Space::euclid(1).enumerate().is_err());
    }

    #[test]
    fn normalization_drops_units() {
        let sp = Space::pair(Space::range(3), Space::Unit);
        assert_eq!(sp.normalized(), Space::range(3));
        let p = Point::pair(Point::label("1"), Point::Unit);
        assert_eq!(p.normalized(), Point::label("1"));
        assert_eq!(Space::pair(Space::Unit, Space::Unit).normalized(), Space::Unit);
    }

    #[test]
    fn vector_points_compare_bitwise() {
        assert_ne!(Point::scalar(0.0), Point::scalar(-0.0));
        assert_eq!(Point::scalar(0.1 + 0.2), Point::scalar(0.1 + 0.2));
        assert_eq!(Point::scalar(1.0).distance(&Point::scalar(1.5)), 0.5);
    }

    #[test]
    fn reals_round_trip() {
        let shape = Space::pair(Space::euclid(2), Space::euclid(1));
        let p = Point::from_reals(&shape, &[1.0, 2.0, 3.0]).unwrap();
        assert!(shape.contains(&p));
        assert_eq!(p.flatten_reals().unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn json_schema() {
        let sp: Space = serde_json::from_str(r#"{"kind":"prod","factors":[{"kind":"finite","labels":["a","b"]},{"kind":"euclid","dim":2}]}"#).unwrap();
        assert_eq!(sp, Space::pair(Space::finite(["a", "b"]).unwrap(), Space::euclid(2)));
        let bad: std::result::Result<Space, _> = serde_json::from_str(r#"{"kind":"finite","labels":["a","a"]}"#);
        assert!(bad.is_err());
        let empty: Space = serde_json::from_str(r#"{"kind":"prod","factors":[]}"#).unwrap();
        assert_eq!(empty, Space::Unit);
        let p = sp.point_from_json(&serde_json::json!(["b", [0.5, 1.0]])).unwrap();
        assert_eq!(p, Point::pair(Point::label("b"), Point::vector(vec![0.5, 1.0])));
        assert_eq!(sp.point_from_json(&p.to_json()).unwrap(), p);
    }
}
