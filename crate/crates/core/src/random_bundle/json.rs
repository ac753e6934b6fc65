//! JSON descriptions of measure-preserving systems:
//!
//! ```json
//! {"kind": "measure", "name": "swap",
//!  "space": {"kind": "finite", "labels": ["a", "b"]},
//!  "measure": {"categorical": {"a": 0.5, "b": 0.5}},
//!  "flow": {"a": "b", "b": "a"}}
//! ```
//!
//! The flow is one deterministic step. Parsing does not check measure
//! preservation, so that failing examples can be loaded and checked.

use std::collections::BTreeMap;

use serde_json::Value;

use super::measure::{MeasurePreservingSystem, ProbabilitySpace};
use crate::coalg::ClosedSystem;
use crate::error::{Error, Result};
use crate::monad::Dist;
use crate::poly::{Effect, Space, Time};

impl MeasurePreservingSystem {
    /// Parses a system; returns its name alongside.
    pub fn from_json(v: &Value) -> Result<(String, MeasurePreservingSystem)> {
        let get = |k: &str| v.get(k).ok_or_else(|| Error::Parse(format!("missing field \"{k}\"")));
        let name = v.get("name").and_then(Value::as_str).unwrap_or("measure").to_string();
        let space: Space = serde_json::from_value(get("space")?.clone())?;
        let measure = Dist::from_json(&space, get("measure")?)?;
        let flow_obj = get("flow")?
            .as_object()
            .ok_or_else(|| Error::Parse("\"flow\" must map each point to its successor".into()))?;
        let mut table = BTreeMap::new();
        for (k, target) in flow_obj {
            table.insert(space.point_from_key(k)?, space.point_from_json(target)?);
        }
        for p in space.enumerate()? {
            if !table.contains_key(&p) {
                return Err(Error::Parse(format!("flow has no successor for {p}")));
            }
        }
        let flow = ClosedSystem::generated(space.clone(), Effect::Deterministic, move |p| {
            table
                .get(p)
                .cloned()
                .map(Dist::Dirac)
                .ok_or_else(|| Error::IllTyped(format!("{p} is not in the flow table")))
        });
        let mp = MeasurePreservingSystem::candidate(ProbabilitySpace::new(space, measure)?, flow, vec![Time(1)])?;
        Ok((name, mp))
    }
}
