//! Sections of a polynomial: a choice of direction at every position.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::map::PolyMap;
use super::polynomial::{Directions, Polynomial};
use super::space::Point;
use crate::error::{Error, Result};

type AssignFn = dyn Fn(&Point) -> Result<Point> + Send + Sync;

#[derive(Clone)]
pub struct Section {
    of: Polynomial,
    assign: Arc<AssignFn>,
    name: String,
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Section({} of {})", self.name, self.of)
    }
}

impl Section {
    pub fn new<F>(of: Polynomial, name: impl Into<String>, assign: F) -> Section
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        Section { of, assign: Arc::new(assign), name: name.into() }
    }

    /// Feeds the same direction at every position.
    pub fn constant(of: &Polynomial, d: Point) -> Result<Section> {
        match of.directions() {
            Directions::Constant(s) => s.check(&d, "constant section direction")?,
            Directions::Table(t) => {
                for s in t.values() {
                    s.check(&d, "constant section direction")?;
                }
            }
        }
        let name = format!("const {d}");
        Ok(Section::new(of.clone(), name, move |_| Ok(d.clone())))
    }

    /// A section given by a table over finite positions.
    pub fn from_table(of: &Polynomial, table: BTreeMap<Point, Point>) -> Result<Section> {
        for i in of.positions().enumerate()? {
            let d = table
                .get(&i)
                .ok_or_else(|| Error::Shape(format!("section table has no entry for {i}")))?;
            of.directions_at(&i)?.check(d, "section direction")?;
        }
        let name = table.iter().map(|(i, d)| format!("{i}->{d}")).collect::<Vec<_>>().join(",");
        Ok(Section::new(of.clone(), format!("{{{name}}}"), move |i| {
            table.get(i).cloned().ok_or_else(|| Error::IllTyped(format!("{i} is not a position")))
        }))
    }

    /// The only section, when every direction space is a singleton (as for
    /// `y` and linear polynomials).
    pub fn unique(of: &Polynomial) -> Result<Section> {
        if !of.is_linear() {
            return Err(Error::Invalid(format!("{of} has more than one section")));
        }
        let p = of.clone();
        Ok(Section::new(of.clone(), "unique", move |i| {
            Ok(p.directions_at(i)?.unique_point().expect("singleton directions"))
        }))
    }

    pub fn of(&self) -> &Polynomial {
        &self.of
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `σ(i) ∈ p[i]`.
    pub fn at(&self, i: &Point) -> Result<Point> {
        let dirs = self.of.directions_at(i)?;
        let d = (self.assign)(i)?;
        dirs.check(&d, "section direction")?;
        Ok(d)
    }

    /// Tabulates the section over finite positions.
    pub fn table(&self) -> Result<BTreeMap<Point, Point>> {
        self.of.positions().enumerate()?.into_iter().map(|i| Ok((i.clone(), self.at(&i)?))).collect()
    }
}

/// Every section of a finite polynomial, in lexicographic order. Fails if
/// there are more than `limit`.
pub fn all_sections(p: &Polynomial, limit: usize) -> Result<Vec<Section>> {
    let positions = p.positions().enumerate()?;
    let choices = positions
        .iter()
        .map(|i| p.directions_at(i)?.enumerate())
        .collect::<Result<Vec<_>>>()?;
    let count = choices.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
    match count {
        Some(n) if n <= limit => {}
        _ => return Err(Error::NotEnumerable(format!("{p} has more than {limit} sections"))),
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; positions.len()];
    loop {
        let table = positions
            .iter()
            .zip(&idx)
            .zip(&choices)
            .map(|((i, &k), c)| (i.clone(), c[k].clone()))
            .collect();
        out.push(Section::from_table(p, table)?);
        let mut pos = positions.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `σ := φ^# ∘ φ₁*τ`, a section of the source of a deterministic `φ`.
pub fn pull_section(phi: &PolyMap, tau: &Section) -> Result<Section> {
    if !phi.is_deterministic() {
        return Err(Error::NotDeterministic("sections can only be pulled back along deterministic maps".into()));
    }
    if phi.target() != tau.of() {
        return Err(Error::Shape(format!("section of {} pulled along a map into {}", tau.of(), phi.target())));
    }
    let (phi2, tau2) = (phi.clone(), tau.clone());
    Ok(Section::new(phi.source().clone(), format!("pull({})", tau.name()), move |i| {
        phi2.backward_point(i, &tau2.at(&phi2.forward(i)?)?)
    }))
}
