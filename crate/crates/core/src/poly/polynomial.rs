//! Polynomial interfaces: a space of positions and a direction space over
//! each position.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Map, Value};

use super::space::{Point, Space};
use crate::error::{Error, Result};

/// Direction family of a polynomial.
#[derive(Debug, Clone, PartialEq)]
pub enum Directions {
    /// The same direction space at every position (a monomial `A y^S`).
    Constant(Space),
    /// One direction space per position; positions must be finite.
    Table(BTreeMap<Point, Space>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    positions: Space,
    directions: Directions,
}

impl Polynomial {
    pub fn new(positions: Space, directions: Directions) -> Result<Polynomial> {
        if let Directions::Table(table) = &directions {
            let all = positions.enumerate().map_err(|_| {
                Error::Shape(format!("tabulated directions need finite positions, got {positions}"))
            })?;
            for i in &all {
                if !table.contains_key(i) {
                    return Err(Error::Shape(format!("direction table has no entry for position {i}")));
                }
            }
            if table.len() != all.len() {
                return Err(Error::Shape("direction table has entries outside the positions".into()));
            }
        }
        Ok(Polynomial { positions, directions })
    }

    /// `A y^S`.
    pub fn monomial(positions: Space, dirs: Space) -> Polynomial {
        Polynomial { positions, directions: Directions::Constant(dirs) }
    }

    /// `A y`.
    pub fn linear(positions: Space) -> Polynomial {
        Polynomial::monomial(positions, Space::Unit)
    }

    /// The identity interface `y`.
    pub fn y() -> Polynomial {
        Polynomial::monomial(Space::Unit, Space::Unit)
    }

    pub fn tabulated<I>(positions: Space, table: I) -> Result<Polynomial>
    where
        I: IntoIterator<Item = (Point, Space)>,
    {
        Polynomial::new(positions, Directions::Table(table.into_iter().collect()))
    }

    pub fn positions(&self) -> &Space {
        &self.positions
    }

    pub fn directions(&self) -> &Directions {
        &self.directions
    }

    /// `p[i]`, after checking that `i` is a position.
    pub fn directions_at(&self, i: &Point) -> Result<&Space> {
        self.positions.check(i, "position")?;
        Ok(match &self.directions {
            Directions::Constant(s) => s,
            Directions::Table(t) => &t[i],
        })
    }

    /// The constant direction space, if there is one.
    pub fn constant_directions(&self) -> Option<&Space> {
        match &self.directions {
            Directions::Constant(s) => Some(s),
            Directions::Table(_) => None,
        }
    }

    /// Every position has exactly one direction (`A y`).
    pub fn is_linear(&self) -> bool {
        match &self.directions {
            Directions::Constant(s) => s.cardinality() == Some(1),
            Directions::Table(t) => t.values().all(|s| s.cardinality() == Some(1)),
        }
    }

    /// Positions and all direction spaces are finite.
    pub fn is_finite(&self) -> bool {
        self.positions.is_finite()
            && match &self.directions {
                Directions::Constant(s) => s.is_finite(),
                Directions::Table(t) => t.values().all(Space::is_finite),
            }
    }

    /// `p ⊗ q`: positions and directions are pairwise products.
    pub fn tensor(&self, other: &Polynomial) -> Polynomial {
        let positions = Space::pair(self.positions.clone(), other.positions.clone());
        match (&self.directions, &other.directions) {
            (Directions::Constant(s), Directions::Constant(t)) => {
                Polynomial::monomial(positions, Space::pair(s.clone(), t.clone()))
            }
            _ => {
                let ps = self.positions.enumerate().expect("tabulated factor has finite positions");
                let qs = other.positions.enumerate().expect("tabulated factor has finite positions");
                let mut table = BTreeMap::new();
                for i in &ps {
                    for j in &qs {
                        let d = Space::pair(
                            self.directions_at(i).unwrap().clone(),
                            other.directions_at(j).unwrap().clone(),
                        );
                        table.insert(Point::pair(i.clone(), j.clone()), d);
                    }
                }
                Polynomial { positions, directions: Directions::Table(table) }
            }
        }
    }

    /// Structural normal form: flattened products with units dropped.
    pub fn normalized(&self) -> Polynomial {
        let directions = match &self.directions {
            Directions::Constant(s) => Directions::Constant(s.normalized()),
            Directions::Table(t) => {
                Directions::Table(t.iter().map(|(i, s)| (i.normalized(), s.normalized())).collect())
            }
        };
        Polynomial { positions: self.positions.normalized(), directions }
    }

    pub fn from_json(v: &Value) -> Result<Polynomial> {
        let positions: Space = serde_json::from_value(
            v.get("positions").cloned().ok_or_else(|| Error::Parse("polynomial needs \"positions\"".into()))?,
        )?;
        let dirs = v
            .get("directions")
            .and_then(Value::as_object)
            .filter(|o| o.len() == 1)
            .ok_or_else(|| Error::Parse("polynomial needs \"directions\": {constant|table}".into()))?;
        let (kind, body) = dirs.iter().next().unwrap();
        match kind.as_str() {
            "constant" => Ok(Polynomial::monomial(positions, serde_json::from_value(body.clone())?)),
            "table" => {
                let obj = body.as_object().ok_or_else(|| Error::Parse("direction table must be an object".into()))?;
                let table = obj
                    .iter()
                    .map(|(k, s)| {
                        let i = positions.point_from_key(k)?;
                        Ok((i, serde_json::from_value(s.clone())?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Polynomial::tabulated(positions, table)
            }
            other => Err(Error::Parse(format!("unknown direction kind {other:?}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        let positions = serde_json::to_value(&self.positions).expect("space serializes");
        let directions = match &self.directions {
            Directions::Constant(s) => json!({ "constant": s }),
            Directions::Table(t) => {
                let mut m = Map::new();
                for (i, s) in t {
                    m.insert(i.key(), serde_json::to_value(s).expect("space serializes"));
                }
                json!({ "table": m })
            }
        };
        json!({ "positions": positions, "directions": directions })
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.directions {
            Directions::Constant(s) => write!(f, "{} y^{}", self.positions, s),
            Directions::Table(t) => {
                write!(f, "Σ[")?;
                for (n, (i, s)) in t.iter().enumerate() {
                    if n > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{i}:y^{s}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_shapes() {
        let y = Polynomial::y();
        assert_eq!(y.positions(), &Space::Unit);
        assert_eq!(y.directions_at(&Point::Unit).unwrap(), &Space::Unit);
        let p = Polynomial::monomial(Space::finite(["a", "b"]).unwrap(), Space::finite(["s", "t", "u"]).unwrap());
        assert_eq!(p.positions().cardinality(), Some(2));
        for i in p.positions().enumerate().unwrap() {
            assert_eq!(p.directions_at(&i).unwrap().cardinality(), Some(3));
        }
        let r2 = Polynomial::linear(Space::euclid(2));
        assert!(r2.is_linear());
    }

    #[test]
    fn tensor_cardinalities() {
        let p = Polynomial::monomial(Space::range(2), Space::range(3));
        let q = Polynomial::monomial(Space::range(5), Space::range(7));
        let pq = p.tensor(&q);
        assert_eq!(pq.positions().cardinality(), Some(10));
        for i in pq.positions().enumerate().unwrap() {
            assert_eq!(pq.directions_at(&i).unwrap().cardinality(), Some(21));
        }
        assert_eq!(p.tensor(&Polynomial::y()).normalized(), p.normalized());
        assert_eq!(Polynomial::y().tensor(&Polynomial::y()).normalized(), Polynomial::y());
    }

    #[test]
    fn tabulated_needs_total_table() {
        let a = Space::finite(["a", "b"]).unwrap();
        assert!(Polynomial::tabulated(a.clone(), [(Point::label("a"), Space::range(2))]).is_err());
        let p = Polynomial::tabulated(a.clone(), [(Point::label("a"), Space::range(2)), (Point::label("b"), Space::Unit)])
            .unwrap();
        assert_eq!(Polynomial::from_json(&p.to_json()).unwrap(), p);
        let t = p.tensor(&Polynomial::monomial(Space::range(2), Space::range(3)));
        assert_eq!(t.directions_at(&Point::pair(Point::label("a"), Point::label("1"))).unwrap().cardinality(), Some(6));
    }

    #[test]
    fn json_constant() {
        let v = json!({"positions": {"kind": "finite", "labels": ["a"]}, "directions": {"constant": {"kind": "euclid", "dim": 2}}});
        let p = Polynomial::from_json(&v).unwrap();
        assert_eq!(p.constant_directions(), Some(&Space::euclid(2)));
        assert_eq!(Polynomial::from_json(&p.to_json()).unwrap(), p);
    }
}
