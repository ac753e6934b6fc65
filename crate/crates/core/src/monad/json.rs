//! JSON encoding of distributions:
//! `{"dirac": point}`, `{"categorical": {label: weight}}`,
//! `{"gaussian": {"mean": [..], "cov": [[..]]}}`.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use super::dist::Dist;
use crate::error::{Error, Result};
use crate::poly::Space;

impl Dist {
    /// Parses a distribution over `space`. Categorical keys are point labels,
    /// or JSON-encoded points when the space is not a label set.
    pub fn from_json(space: &Space, v: &Value) -> Result<Dist> {
        let obj = v
            .as_object()
            .filter(|o| o.len() == 1)
            .ok_or_else(|| Error::Parse(format!("distribution must be a one-key object, got {v}")))?;
        let (kind, body) = obj.iter().next().unwrap();
        match kind.as_str() {
            "dirac" => Ok(Dist::Dirac(space.point_from_json(body)?)),
            "categorical" => {
                let table = body
                    .as_object()
                    .ok_or_else(|| Error::Parse("categorical body must be an object".into()))?;
                let atoms = table
                    .iter()
                    .map(|(k, w)| {
                        let p = space.point_from_key(k)?;
                        let w = w.as_f64().ok_or_else(|| Error::Parse(format!("weight for {k} is not a number")))?;
                        Ok((p, w))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Dist::categorical(atoms)
            }
            "gaussian" => {
                let mean: Vec<f64> = serde_json::from_value(body.get("mean").cloned().unwrap_or(Value::Null))?;
                let cov: Vec<Vec<f64>> = serde_json::from_value(body.get("cov").cloned().unwrap_or(Value::Null))?;
                let n = mean.len();
                if cov.len() != n || cov.iter().any(|r| r.len() != n) {
                    return Err(Error::Shape(format!("covariance must be {n}x{n}")));
                }
                let cov = DMatrix::from_fn(n, n, |i, j| cov[i][j]);
                Dist::gaussian(space.clone(), DVector::from_vec(mean), cov)
            }
            other => Err(Error::Parse(format!("unknown distribution kind {other:?}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Dist::Dirac(p) => json!({ "dirac": p.to_json() }),
            Dist::Categorical(c) => {
                let mut m = Map::new();
                for (p, w) in c.atoms() {
                    m.insert(p.key(), json!(w));
                }
                json!({ "categorical": m })
            }
            Dist::Gaussian(g) => {
                let n = g.dim();
                let cov: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| g.cov()[(i, j)]).collect()).collect();
                json!({ "gaussian": { "mean": g.mean().as_slice(), "cov": cov } })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Point;

    #[test]
    fn round_trips() {
        let s = Space::finite(["a", "b"]).unwrap();
        let d = Dist::from_json(&s, &json!({"categorical": {"a": 0.25, "b": 0.75}})).unwrap();
        assert_eq!(d.weight(&Point::label("b")), 0.75);
        assert_eq!(Dist::from_json(&s, &d.to_json()).unwrap(), d);
        let e = Space::euclid(2);
        let g = Dist::from_json(&e, &json!({"gaussian": {"mean": [0.0, 1.0], "cov": [[1.0, 0.0], [0.0, 2.0]]}})).unwrap();
        assert_eq!(Dist::from_json(&e, &g.to_json()).unwrap(), g);
        assert!(Dist::from_json(&s, &json!({"dirac": "c"})).is_err());
        assert!(Dist::from_json(&s, &json!({"categorical": {"a": 0.5}})).is_err());
    }
}
