//! JSON system descriptions.
//!
//! A finite table system:
//!
//! ```json
//! { "name": "counter",
//!   "interface": {"positions": {"kind": "unit"}, "directions": {"constant": {"kind": "unit"}}},
//!   "states": {"kind": "finite", "labels": ["0", "1"]},
//!   "output": {"0": null, "1": null},
//!   "update": {"0": {"null": "1"}, "1": {"null": {"categorical": {"0": 0.5, "1": 0.5}}}},
//!   "init": {"dirac": "0"} }
//! ```
//!
//! Object keys are point labels, or JSON text for other points. Update
//! entries are either a point or a distribution. A vector field replaces the
//! tables by `"field": {"name": "linear", "a": [[-1.0]]}` (or `"controlled"`
//! with an extra `"b"` matrix) and `"h"`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde_json::Value;

use super::system::System;
use crate::error::{Error, Result};
use crate::monad::Dist;
use crate::poly::{all_sections, Effect, Point, Polynomial, Section, Space};

/// A parsed system together with its initial law and the sections to run
/// it under.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub name: String,
    pub system: System,
    pub init: Option<Dist>,
    pub sections: Vec<Section>,
}

const SECTION_LIMIT: usize = 4096;

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("missing field \"{key}\"")))
}

fn matrix(v: &Value) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = serde_json::from_value(v.clone())?;
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("matrix must be a non-empty rectangular array".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn dist_or_point(space: &Space, v: &Value) -> Result<Dist> {
    let is_dist = v
        .as_object()
        .is_some_and(|o| o.len() == 1 && ["dirac", "categorical", "gaussian"].iter().any(|k| o.contains_key(*k)));
    if is_dist {
        Dist::from_json(space, v)
    } else {
        Ok(Dist::Dirac(space.point_from_json(v)?))
    }
}

impl std::str::FromStr for SystemSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<SystemSpec> {
        SystemSpec::from_json(&serde_json::from_str(text)?)
    }
}

impl SystemSpec {
    pub fn from_json(v: &Value) -> Result<SystemSpec> {
        let name = v.get("name").and_then(Value::as_str).unwrap_or("system").to_string();
        let system = if let Some(f) = v.get("field") {
            vector_field(f, v)?
        } else {
            table_system(v)?
        };
        let init = v.get("init").map(|d| dist_or_point(system.states(), d)).transpose()?;
        let sections = match v.get("sections") {
            Some(list) => list
                .as_array()
                .ok_or_else(|| Error::Parse("\"sections\" must be an array".into()))?
                .iter()
                .map(|s| section(system.interface(), s))
                .collect::<Result<Vec<_>>>()?,
            None if system.interface().is_linear() => vec![Section::unique(system.interface())?],
            None => all_sections(system.interface(), SECTION_LIMIT)?,
        };
        Ok(SystemSpec { name, system, init, sections })
    }
}

fn section(p: &Polynomial, v: &Value) -> Result<Section> {
    if let Some(d) = v.get("constant") {
        let dirs = match p.constant_directions() {
            Some(s) => s.clone(),
            None => return Err(Error::Parse("constant sections need constant directions".into())),
        };
        return Section::constant(p, dirs.point_from_json(d)?);
    }
    let table = v
        .get("table")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Parse("a section is {\"constant\": d} or {\"table\": {...}}".into()))?;
    let mut out = BTreeMap::new();
    for (k, d) in table {
        let i = p.positions().point_from_key(k)?;
        let dir = p.directions_at(&i)?.point_from_json(d)?;
        out.insert(i, dir);
    }
    Section::from_table(p, out)
}

fn table_system(v: &Value) -> Result<System> {
    let interface = Polynomial::from_json(field(v, "interface")?)?;
    let states: Space = serde_json::from_value(field(v, "states")?.clone())?;
    let out_obj = field(v, "output")?
        .as_object()
        .ok_or_else(|| Error::Parse("\"output\" must be an object".into()))?;
    let upd_obj = field(v, "update")?
        .as_object()
        .ok_or_else(|| Error::Parse("\"update\" must be an object".into()))?;
    let mut output = BTreeMap::new();
    for (k, i) in out_obj {
        output.insert(states.point_from_key(k)?, interface.positions().point_from_json(i)?);
    }
    let mut update: BTreeMap<Point, BTreeMap<Point, Dist>> = BTreeMap::new();
    let mut stochastic = false;
    for (k, row) in upd_obj {
        let s = states.point_from_key(k)?;
        let i = output
            .get(&s)
            .ok_or_else(|| Error::Parse(format!("state {s} has an update but no output")))?;
        let dirs = interface.directions_at(i)?;
        let row = row.as_object().ok_or_else(|| Error::Parse(format!("update row for {s} must be an object")))?;
        let mut parsed = BTreeMap::new();
        for (dk, target) in row {
            let d = dirs.point_from_key(dk)?;
            let law = dist_or_point(&states, target)?;
            stochastic |= !law.is_dirac();
            parsed.insert(d, law);
        }
        update.insert(s, parsed);
    }
    for s in states.enumerate()? {
        let i = output.get(&s).ok_or_else(|| Error::Parse(format!("no output for state {s}")))?;
        let row = update.get(&s).ok_or_else(|| Error::Parse(format!("no update for state {s}")))?;
        for d in interface.directions_at(i)?.enumerate()? {
            if !row.contains_key(&d) {
                return Err(Error::Parse(format!("no update for state {s} and direction {d}")));
            }
        }
    }
    let effect = match v.get("effect") {
        Some(e) => serde_json::from_value(e.clone())?,
        None if stochastic => Effect::Stochastic,
        None => Effect::Deterministic,
    };
    let sys = System::discrete(
        interface,
        states,
        effect,
        move |s| output.get(s).cloned().ok_or_else(|| Error::IllTyped(format!("{s} is not a state"))),
        move |s, d| {
            update
                .get(s)
                .and_then(|r| r.get(d))
                .cloned()
                .ok_or_else(|| Error::IllTyped(format!("no update for ({s}, {d})")))
        },
    );
    sys.validate()?;
    Ok(sys)
}

fn vector_field(f: &Value, v: &Value) -> Result<System> {
    let h = field(v, "h")?.as_f64().ok_or_else(|| Error::Parse("\"h\" must be a number".into()))?;
    let name = field(f, "name")?.as_str().unwrap_or_default();
    let a = matrix(field(f, "a")?)?;
    if !a.is_square() {
        return Err(Error::Shape("field matrix \"a\" must be square".into()));
    }
    let n = a.nrows();
    let observe = |x: &Point| Ok(x.clone());
    match name {
        "linear" => System::from_vector_field(Polynomial::linear(Space::euclid(n)), n, h, observe, move |x, _| Ok(&a * x)),
        "controlled" => {
            let b = matrix(field(f, "b")?)?;
            if b.nrows() != n {
                return Err(Error::Shape(format!("input matrix \"b\" must have {n} rows")));
            }
            let m = b.ncols();
            let p = Polynomial::monomial(Space::euclid(n), Space::euclid(m));
            System::from_vector_field(p, n, h, observe, move |x, d| {
                let u = nalgebra::DVector::from_vec(d.flatten_reals().expect("real input"));
                Ok(&a * x + &b * u)
            })
        }
        other => Err(Error::Parse(format!("unknown field {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Time;
    use serde_json::json;

    #[test]
    fn parses_stochastic_table() {
        let v = json!({
            "name": "cell",
            "interface": {"positions": {"kind": "unit"}, "directions": {"constant": {"kind": "unit"}}},
            "states": {"kind": "finite", "labels": ["0", "1"]},
            "output": {"0": null, "1": null},
            "update": {"0": {"null": {"categorical": {"0": 0.9, "1": 0.1}}}, "1": {"null": {"categorical": {"0": 0.2, "1": 0.8}}}},
            "init": {"dirac": "0"}
        });
        let spec = SystemSpec::from_json(&v).unwrap();
        assert_eq!(spec.system.effect(), Effect::Stochastic);
        let cl = spec.system.closure(&spec.sections[0]).unwrap();
        assert!((cl.step(Time(2), &Point::label("0")).unwrap().weight(&Point::label("0")) - 0.83).abs() < 1e-12);
    }

    #[test]
    fn missing_rows_are_parse_errors() {
        let v = json!({
            "interface": {"positions": {"kind": "unit"}, "directions": {"constant": {"kind": "unit"}}},
            "states": {"kind": "finite", "labels": ["0", "1"]},
            "output": {"0": null, "1": null},
            "update": {"0": {"null": "1"}}
        });
        assert!(matches!(SystemSpec::from_json(&v), Err(Error::Parse(_))));
    }

    #[test]
    fn parses_vector_field() {
        let v = json!({"field": {"name": "linear", "a": [[-1.0]]}, "h": 0.001, "init": {"dirac": [1.0]}});
        let spec = SystemSpec::from_json(&v).unwrap();
        let cl = spec.system.closure(&spec.sections[0]).unwrap();
        let x = cl.step(Time(1000), &Point::vector(vec![1.0])).unwrap();
        assert!((x.as_dirac().unwrap().as_vector().unwrap()[0] - (-1.0f64).exp()).abs() < 1e-6);
    }
}
