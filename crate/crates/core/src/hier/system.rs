//! Hierarchical systems `p → q`: systems over the internal hom `[p, q]`,
//! whose outputs are polynomial morphisms and whose inputs are the
//! directions `Σᵢ q[f₁ i]` of the emitted morphism.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::monad::{Dist, FiniteKernel};
use crate::poly::{Point, PolyMap, Polynomial, Space, TimeMonoid};

pub(crate) type EmitFn = dyn Fn(&Point) -> Result<PolyMap> + Send + Sync;
pub(crate) type AbsorbFn = dyn Fn(&Point, &Point, &Point) -> Result<Dist> + Send + Sync;

/// A discrete-time system over `[p, q]`, given by its one-step components:
/// `emit(x)` is the morphism `p → q` output in state `x`, and
/// `absorb(x, i, d′)` updates the state given a position `i` of `p` and a
/// direction `d′ ∈ q[emit(x)₁(i)]`.
#[derive(Clone)]
pub struct HierSystem {
    pub(crate) source: Polynomial,
    pub(crate) target: Polynomial,
    pub(crate) states: Space,
    pub(crate) emit: Arc<EmitFn>,
    pub(crate) absorb: Arc<AbsorbFn>,
    /// The initial state law the system is meant to start from, if any.
    pub(crate) init: Option<Dist>,
}

impl fmt::Debug for HierSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HierSystem({} -> {}, states {})", self.source, self.target, self.states)
    }
}

impl HierSystem {
    pub fn new<E, A>(source: Polynomial, target: Polynomial, states: Space, emit: E, absorb: A) -> HierSystem
    where
        E: Fn(&Point) -> Result<PolyMap> + Send + Sync + 'static,
        A: Fn(&Point, &Point, &Point) -> Result<Dist> + Send + Sync + 'static,
    {
        HierSystem { source, target, states, emit: Arc::new(emit), absorb: Arc::new(absorb), init: None }
    }

    /// Attaches the intended initial law.
    pub fn with_init(mut self, init: Dist) -> Result<HierSystem> {
        if !init.is_over(&self.states) {
            return Err(Error::IllTyped(format!("initial law is not over {}", self.states)));
        }
        self.init = Some(init);
        Ok(self)
    }

    /// A stateless system that always emits `f`.
    pub fn constant(f: PolyMap) -> HierSystem {
        let (source, target) = (f.source().clone(), f.target().clone());
        HierSystem::new(source, target, Space::Unit, move |_| Ok(f.clone()), |_, _, _| Ok(Dist::Dirac(Point::Unit)))
            .with_init(Dist::Dirac(Point::Unit))
            .expect("unit law")
    }

    /// A stateless system `Ay → By` emitting a function `A → B`.
    pub fn function<F>(a: Space, b: Space, f: F) -> HierSystem
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        HierSystem::linear_map(Polynomial::linear(a), Polynomial::linear(b), f).expect("linear interfaces")
    }

    /// A stateless system between polynomials with trivial directions, such
    /// as tensor products of linear ones.
    pub fn linear_map<F>(p: Polynomial, q: Polynomial, f: F) -> Result<HierSystem>
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        Ok(HierSystem::constant(PolyMap::linear(p, q, f)?))
    }

    /// A system over monomials `Ay^S → By^T` from its lens presentation:
    /// forward output `o1(x, a)`, backward output `o2(x, a, t)` and update
    /// `u(x, a, t)`.
    pub fn from_lens_parts<O1, O2, U>(source: Polynomial, target: Polynomial, states: Space, o1: O1, o2: O2, u: U) -> Result<HierSystem>
    where
        O1: Fn(&Point, &Point) -> Result<Point> + Send + Sync + 'static,
        O2: Fn(&Point, &Point, &Point) -> Result<Point> + Send + Sync + 'static,
        U: Fn(&Point, &Point, &Point) -> Result<Dist> + Send + Sync + 'static,
    {
        if source.constant_directions().is_none() || target.constant_directions().is_none() {
            return Err(Error::Shape("lens presentations need monomial interfaces".into()));
        }
        let (o1, o2) = (Arc::new(o1), Arc::new(o2));
        let (p, q) = (source.clone(), target.clone());
        Ok(HierSystem::new(
            source,
            target,
            states,
            move |x| {
                let (o1, o2, x1, x2) = (o1.clone(), o2.clone(), x.clone(), x.clone());
                Ok(PolyMap::new(
                    p.clone(),
                    q.clone(),
                    move |a| o1(&x1, a),
                    move |a, t| Ok(Dist::Dirac(o2(&x2, a, t)?)),
                    crate::poly::Effect::Deterministic,
                ))
            },
            u,
        ))
    }

    /// Tabulates the lens presentation of a finite monomial system.
    pub fn lens_tables(&self) -> Result<LensTables> {
        let dirs = self
            .target
            .constant_directions()
            .ok_or_else(|| Error::Shape("lens presentations need monomial interfaces".into()))?;
        let mut tables = LensTables::default();
        for x in self.states.enumerate()? {
            let f = self.emit(&x)?;
            for a in self.source.positions().enumerate()? {
                tables.forward.insert((x.clone(), a.clone()), f.forward(&a)?);
                for t in dirs.enumerate()? {
                    let key = (x.clone(), a.clone(), t.clone());
                    tables.backward.insert(key.clone(), f.backward_point(&a, &t)?);
                    tables.update.insert(key, self.absorb(&x, &a, &t)?);
                }
            }
        }
        Ok(tables)
    }

    pub fn source(&self) -> &Polynomial {
        &self.source
    }

    pub fn target(&self) -> &Polynomial {
        &self.target
    }

    pub fn states(&self) -> &Space {
        &self.states
    }

    pub fn time(&self) -> TimeMonoid {
        TimeMonoid::DiscreteNat
    }

    pub fn init(&self) -> Option<&Dist> {
        self.init.as_ref()
    }

    /// The morphism emitted in state `x`.
    pub fn emit(&self, x: &Point) -> Result<PolyMap> {
        self.states.check(x, "state")?;
        let f = (self.emit)(x)?;
        if f.source() != &self.source || f.target() != &self.target {
            return Err(Error::Shape(format!(
                "emitted {} -> {} from a system {} -> {}",
                f.source(),
                f.target(),
                self.source,
                self.target
            )));
        }
        Ok(f)
    }

    /// The state update on input `(i, d′)`.
    pub fn absorb(&self, x: &Point, i: &Point, d: &Point) -> Result<Dist> {
        let f = self.emit(x)?;
        let j = f.forward(i)?;
        self.target.directions_at(&j)?.check(d, "backward input")?;
        let next = (self.absorb)(x, i, d)?;
        if !next.is_over(&self.states) {
            return Err(Error::IllTyped(format!("update from {x} left {}", self.states)));
        }
        Ok(next)
    }
}

/// The lens presentation `(β^o₁, β^o₂, β^u)` of a finite monomial system.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LensTables {
    pub forward: BTreeMap<(Point, Point), Point>,
    pub backward: BTreeMap<(Point, Point, Point), Point>,
    pub update: BTreeMap<(Point, Point, Point), Dist>,
}

/// `id_p`: trivial state, constantly emitting the identity.
pub fn id_hier(p: &Polynomial) -> HierSystem {
    HierSystem::constant(PolyMap::identity(p))
}

/// Independent product of finitely many finite laws, as a law over tuples.
pub fn product_law(laws: &[Dist]) -> Result<Dist> {
    let mut atoms: Vec<(Vec<Point>, f64)> = vec![(Vec::new(), 1.0)];
    for law in laws {
        let row = law
            .atoms()
            .ok_or_else(|| Error::Unsupported("product of laws that are not finitely supported".into()))?;
        let mut next = Vec::with_capacity(atoms.len() * row.len());
        for (xs, w) in &atoms {
            for (p, v) in &row {
                let mut ys = xs.clone();
                ys.push(p.clone());
                next.push((ys, w * v));
            }
        }
        atoms = next;
    }
    Dist::categorical(atoms.into_iter().map(|(xs, w)| (Point::Tuple(xs), w)))
}

fn index_of(points: &[Point], p: &Point) -> Result<usize> {
    points
        .iter()
        .position(|q| q == p)
        .ok_or_else(|| Error::IllTyped(format!("{p} is not in the enumerated space")))
}

impl HierSystem {
    /// A stochastic channel `c : X → 𝒫Y` as a system `Xy → Yy` by
    /// randomness pushback: the state is a function `X → Y`, drawn with law
    /// `⊗ₓ c(·|x)`; the emitted map applies it, and every update draws a
    /// fresh function.
    pub fn channel(c: &FiniteKernel) -> Result<HierSystem> {
        let xs = c.domain.enumerate()?;
        let states = Space::prod(vec![c.codomain.clone(); xs.len()]);
        let law = product_law(&xs.iter().map(|x| c.row(x).cloned()).collect::<Result<Vec<_>>>()?)?;
        let (p, q) = (Polynomial::linear(c.domain.clone()), Polynomial::linear(c.codomain.clone()));
        let redraw = law.clone();
        HierSystem::new(
            p.clone(),
            q.clone(),
            states,
            move |f| {
                let (f, xs) = (f.clone(), xs.clone());
                PolyMap::linear(p.clone(), q.clone(), move |x| {
                    f.as_tuple().expect("function table")[index_of(&xs, x).expect("input in domain")].clone()
                })
            },
            move |_, _, _| Ok(redraw.clone()),
        )
        .with_init(law)
    }

    /// A prior `π : 𝒫X` as a system `y → Xy`: the state is a draw from `π`,
    /// emitted as the constant map, and every update draws afresh.
    pub fn prior(space: Space, pi: Dist) -> Result<HierSystem> {
        if pi.atoms().is_none() || !pi.is_over(&space) {
            return Err(Error::Invalid(format!("prior is not a finite law over {space}")));
        }
        let q = Polynomial::linear(space.clone());
        let redraw = pi.clone();
        HierSystem::new(
            Polynomial::y(),
            q.clone(),
            space,
            move |x| {
                let x = x.clone();
                PolyMap::linear(Polynomial::y(), q.clone(), move |_| x.clone())
            },
            move |_, _, _| Ok(redraw.clone()),
        )
        .with_init(pi)
    }
}

type ChooseFn = dyn Fn(&PolyMap) -> Result<(Point, Point)> + Send + Sync;

/// A section of `[p, q]`: for each emitted morphism `f`, a position `i` of
/// `p` and a direction in `q[f₁ i]`.
#[derive(Clone)]
pub struct HierSection {
    name: String,
    choose: Arc<ChooseFn>,
}

impl fmt::Debug for HierSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HierSection({})", self.name)
    }
}

impl HierSection {
    pub fn new<F>(name: impl Into<String>, choose: F) -> HierSection
    where
        F: Fn(&PolyMap) -> Result<(Point, Point)> + Send + Sync + 'static,
    {
        HierSection { name: name.into(), choose: Arc::new(choose) }
    }

    /// Always feeds `(i, d′)`.
    pub fn constant(i: Point, d: Point) -> HierSection {
        HierSection::new(format!("const ({i}, {d})"), move |_| Ok((i.clone(), d.clone())))
    }

    /// Feeds position `i` and the only direction at its image, for targets
    /// with trivial directions.
    pub fn input(i: Point) -> HierSection {
        HierSection::new(format!("input {i}"), move |f| {
            let j = f.forward(&i)?;
            let d = f
                .target()
                .directions_at(&j)?
                .unique_point()
                .ok_or_else(|| Error::Shape(format!("{} has more than one direction at {j}", f.target())))?;
            Ok((i.clone(), d))
        })
    }

    /// Chooses among `options` by a hash of the emitted morphism's
    /// observable table (see [`crate::hier::fingerprint`]); `salt` gives
    /// different sections over the same options.
    pub fn adaptive(options: Vec<Point>, salt: u64) -> HierSection {
        HierSection::new(format!("adaptive #{salt}"), move |f| {
            let fp = super::trace::table_fingerprint(f)?.normalized();
            let mut h = DefaultHasher::new();
            salt.hash(&mut h);
            fp.hash(&mut h);
            let i = options[(h.finish() % options.len() as u64) as usize].clone();
            let j = f.forward(&i)?;
            let d = f
                .target()
                .directions_at(&j)?
                .unique_point()
                .ok_or_else(|| Error::Shape("adaptive sections need trivial target directions".into()))?;
            Ok((i, d))
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn choose(&self, f: &PolyMap) -> Result<(Point, Point)> {
        (self.choose)(f)
    }
}

/// Constant-input sections for each position of a finite linear source,
/// followed by `adaptive` hash-based ones.
pub fn linear_sections(source: &Polynomial, adaptive: usize) -> Result<Vec<HierSection>> {
    let inputs = source.positions().enumerate()?;
    let mut out: Vec<HierSection> = inputs.iter().cloned().map(HierSection::input).collect();
    if inputs.len() > 1 {
        out.extend((0..adaptive as u64).map(|salt| HierSection::adaptive(inputs.clone(), salt)));
    }
    Ok(out)
}
