//! Pushforward, Kleisli composition and extension, and the double strength
//! `dst`. Exact in two regimes: finitely supported laws, and Gaussians
//! pushed through affine maps or affine-Gaussian kernels.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::dist::{real_shape, Categorical, Dist, Gaussian};
use super::rng::Rng;
use crate::error::{Error, Result};
use crate::poly::{Point, Space};

/// `x ↦ A x + b` between real-valued spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub in_shape: Space,
    pub out_shape: Space,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl Affine {
    pub fn new(in_shape: Space, out_shape: Space, a: DMatrix<f64>, b: DVector<f64>) -> Result<Affine> {
        let n = in_shape
            .flat_dim()
            .ok_or_else(|| Error::Shape(format!("affine map from non-Euclidean {in_shape}")))?;
        let m = out_shape
            .flat_dim()
            .ok_or_else(|| Error::Shape(format!("affine map into non-Euclidean {out_shape}")))?;
        if a.nrows() != m || a.ncols() != n || b.len() != m {
            return Err(Error::Shape(format!(
                "affine map {in_shape} -> {out_shape} needs a {m}x{n} matrix and offset of length {m}"
            )));
        }
        Ok(Affine { in_shape, out_shape, a, b })
    }

    /// The scalar map `x ↦ a x + b` on `R^1`.
    pub fn scalar(a: f64, b: f64) -> Affine {
        Affine {
            in_shape: Space::euclid(1),
            out_shape: Space::euclid(1),
            a: DMatrix::from_element(1, 1, a),
            b: DVector::from_element(1, b),
        }
    }

    pub fn apply_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        let xs = reals_of(p, &self.in_shape)?;
        let y = self.apply_vec(&DVector::from_vec(xs));
        Point::from_reals(&self.out_shape, y.as_slice())
    }
}

fn reals_of(p: &Point, shape: &Space) -> Result<Vec<f64>> {
    let n = shape.flat_dim().unwrap_or(usize::MAX);
    p.flatten_reals()
        .filter(|xs| xs.len() == n)
        .ok_or_else(|| Error::Shape(format!("{p} is not a point of {shape}")))
}

/// Exact image of `d` under a function of points. Gaussians are rejected
/// because `f` carries no affine structure; see [`pushforward_affine`] and
/// [`pushforward_sampled`].
pub fn pushforward<F>(f: F, d: &Dist) -> Result<Dist>
where
    F: Fn(&Point) -> Point,
{
    match d {
        Dist::Dirac(p) => Ok(Dist::Dirac(f(p))),
        Dist::Categorical(c) => {
            Categorical::new(c.atoms().map(|(p, w)| (f(p), w))).map(Dist::from_categorical)
        }
        Dist::Gaussian(_) => Err(Error::NonlinearGaussian(
            "pushforward along an opaque function".into(),
        )),
    }
}

/// Fallible variant of [`pushforward`].
pub fn try_pushforward<F>(f: F, d: &Dist) -> Result<Dist>
where
    F: Fn(&Point) -> Result<Point>,
{
    match d {
        Dist::Dirac(p) => Ok(Dist::Dirac(f(p)?)),
        Dist::Categorical(c) => {
            let atoms = c
                .atoms()
                .map(|(p, w)| f(p).map(|q| (q, w)))
                .collect::<Result<Vec<_>>>()?;
            Categorical::new(atoms).map(Dist::from_categorical)
        }
        Dist::Gaussian(_) => Err(Error::NonlinearGaussian(
            "pushforward along an opaque function".into(),
        )),
    }
}

/// Pushforward along an affine map: `N(μ, Σ) ↦ N(Aμ + b, AΣAᵀ)`.
pub fn pushforward_affine(f: &Affine, d: &Dist) -> Result<Dist> {
    match d {
        Dist::Gaussian(g) => {
            if g.dim() != f.a.ncols() {
                return Err(Error::Shape(format!("Gaussian of dimension {} into {}", g.dim(), f.in_shape)));
            }
            let mean = f.apply_vec(g.mean());
            let cov = &f.a * g.cov() * f.a.transpose();
            Dist::gaussian(f.out_shape.clone(), mean, cov)
        }
        other => try_pushforward(|p| f.apply(p), other),
    }
}

/// Empirical approximation of a pushforward from `n` draws.
pub fn pushforward_sampled<F>(f: F, d: &Dist, n: usize, rng: &mut Rng) -> Result<Dist>
where
    F: Fn(&Point) -> Point,
{
    if n == 0 {
        return Err(Error::Invalid("sampling pushforward with zero samples".into()));
    }
    let w = 1.0 / n as f64;
    let atoms = (0..n).map(|_| (f(&d.sample(rng)), w)).collect::<Vec<_>>();
    Categorical::normalized(atoms).map(Dist::from_categorical)
}

/// The affine-Gaussian kernel `x ↦ N(A x + b, noise)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineGaussian {
    pub map: Affine,
    pub noise: DMatrix<f64>,
}

impl AffineGaussian {
    pub fn new(map: Affine, noise: DMatrix<f64>) -> Result<AffineGaussian> {
        let m = map.a.nrows();
        if noise.nrows() != m || noise.ncols() != m {
            return Err(Error::Shape(format!("noise covariance must be {m}x{m}")));
        }
        // validates symmetry and PSD
        Gaussian::new(map.out_shape.clone(), DVector::zeros(m), noise.clone())?;
        Ok(AffineGaussian { map, noise })
    }

    /// Scalar kernel `x ↦ N(a x + b, var)`.
    pub fn scalar(a: f64, b: f64, var: f64) -> Result<AffineGaussian> {
        AffineGaussian::new(Affine::scalar(a, b), DMatrix::from_element(1, 1, var))
    }
}

type KernelFn = dyn Fn(&Point) -> Result<Dist> + Send + Sync;

/// A Markov kernel `X → Dist Y`: a morphism of the Kleisli category.
#[derive(Clone)]
pub enum Kernel {
    /// An opaque kernel; exact on finitely supported inputs only.
    Map(Arc<KernelFn>),
    /// An affine-Gaussian kernel; exact on Gaussian inputs as well.
    Affine(AffineGaussian),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Map(_) => write!(f, "Kernel::Map(..)"),
            Kernel::Affine(k) => write!(f, "Kernel::Affine({k:?})"),
        }
    }
}

impl Kernel {
    pub fn new<F>(f: F) -> Kernel
    where
        F: Fn(&Point) -> Result<Dist> + Send + Sync + 'static,
    {
        Kernel::Map(Arc::new(f))
    }

    /// The monad unit η.
    pub fn unit() -> Kernel {
        Kernel::new(|p| Ok(Dist::Dirac(p.clone())))
    }

    /// `η ∘ f`: the Kleisli inclusion of a deterministic function.
    pub fn deterministic<F>(f: F) -> Kernel
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        Kernel::new(move |p| Ok(Dist::Dirac(f(p))))
    }

    /// A kernel given by a finite table of rows.
    pub fn from_table(rows: BTreeMap<Point, Dist>) -> Kernel {
        Kernel::new(move |p| {
            rows.get(p)
                .cloned()
                .ok_or_else(|| Error::IllTyped(format!("kernel table has no row for {p}")))
        })
    }

    pub fn apply(&self, p: &Point) -> Result<Dist> {
        match self {
            Kernel::Map(f) => f(p),
            Kernel::Affine(k) => {
                let xs = reals_of(p, &k.map.in_shape)?;
                let mean = k.map.apply_vec(&DVector::from_vec(xs));
                if k.noise.iter().all(|v| *v == 0.0) {
                    Ok(Dist::Dirac(Point::from_reals(&k.map.out_shape, mean.as_slice())?))
                } else {
                    Dist::gaussian(k.map.out_shape.clone(), mean, k.noise.clone())
                }
            }
        }
    }

    /// Kleisli extension `μ ∘ 𝒫(k)`: averages the kernel over `d`.
    pub fn extend(&self, d: &Dist) -> Result<Dist> {
        match d {
            Dist::Dirac(p) => self.apply(p),
            Dist::Categorical(c) => {
                // atoms often land on the same law (e.g. systems that redraw
                // their state), so equal neighbours are merged before mixing
                let mut parts: Vec<(f64, Dist)> = Vec::new();
                for (p, w) in c.atoms() {
                    let r = self.apply(p)?;
                    match parts.iter_mut().rev().take(MERGE_WINDOW).find(|(_, d)| *d == r) {
                        Some(slot) => slot.0 += w,
                        None => parts.push((w, r)),
                    }
                }
                mixture(parts)
            }
            Dist::Gaussian(g) => match self {
                Kernel::Affine(k) => {
                    if g.dim() != k.map.a.ncols() {
                        return Err(Error::Shape(format!(
                            "Gaussian of dimension {} fed to kernel on {}",
                            g.dim(),
                            k.map.in_shape
                        )));
                    }
                    let mean = k.map.apply_vec(g.mean());
                    let cov = &k.map.a * g.cov() * k.map.a.transpose() + &k.noise;
                    Dist::gaussian(k.map.out_shape.clone(), mean, cov)
                }
                Kernel::Map(_) => Err(Error::Unsupported(
                    "Kleisli extension of an opaque kernel over a Gaussian".into(),
                )),
            },
        }
    }
}

/// How many recent component laws a Kleisli extension compares against.
const MERGE_WINDOW: usize = 4;

/// Kleisli composite `k2 ∘K k1`, i.e. `x ↦ μ(𝒫k2 (k1 x))`.
///
/// Two affine-Gaussian kernels compose in closed form; otherwise the
/// composite extends `k2` over each output of `k1`.
pub fn kleisli_compose(k2: &Kernel, k1: &Kernel) -> Kernel {
    match (k2, k1) {
        (Kernel::Affine(g), Kernel::Affine(f)) if f.map.out_shape.flat_dim() == g.map.in_shape.flat_dim() => {
            let a = &g.map.a * &f.map.a;
            let b = &g.map.a * &f.map.b + &g.map.b;
            let noise = &g.map.a * &f.noise * g.map.a.transpose() + &g.noise;
            let noise = (&noise + noise.transpose()) * 0.5;
            Kernel::Affine(AffineGaussian {
                map: Affine {
                    in_shape: f.map.in_shape.clone(),
                    out_shape: g.map.out_shape.clone(),
                    a,
                    b,
                },
                noise,
            })
        }
        _ => {
            let (k2, k1) = (k2.clone(), k1.clone());
            Kernel::new(move |p| k2.extend(&k1.apply(p)?))
        }
    }
}

/// Kleisli extension as a free function.
pub fn kleisli_extend(k: &Kernel, d: &Dist) -> Result<Dist> {
    k.extend(d)
}

/// Convex combination of distributions. Exact when every component is
/// finitely supported, or when every component is the same Gaussian.
pub fn mixture(parts: Vec<(f64, Dist)>) -> Result<Dist> {
    if parts.is_empty() {
        return Err(Error::Invalid("empty mixture".into()));
    }
    if let [(w, d)] = parts.as_slice() {
        if *w == 1.0 {
            return Ok(d.clone());
        }
    }
    if parts.iter().all(|(_, d)| d.atoms().is_some()) {
        let mut atoms: BTreeMap<Point, f64> = BTreeMap::new();
        for (w, d) in &parts {
            for (p, v) in d.atoms().unwrap() {
                *atoms.entry(p).or_insert(0.0) += w * v;
            }
        }
        return Categorical::new(atoms).map(Dist::from_categorical);
    }
    let first = &parts[0].1;
    if parts.iter().all(|(_, d)| d == first) {
        return Ok(first.clone());
    }
    Err(Error::Unsupported("mixture of Gaussian components".into()))
}

/// Independent product ("double strength") of two distributions.
pub fn dst(d1: &Dist, d2: &Dist) -> Result<Dist> {
    match (d1, d2) {
        (Dist::Dirac(a), Dist::Dirac(b)) => Ok(Dist::Dirac(Point::pair(a.clone(), b.clone()))),
        (Dist::Gaussian(_), _) | (_, Dist::Gaussian(_)) => {
            let (s1, m1, c1) = gaussian_view(d1)?;
            let (s2, m2, c2) = gaussian_view(d2)?;
            let (n1, n2) = (m1.len(), m2.len());
            let mut mean = DVector::zeros(n1 + n2);
            mean.rows_mut(0, n1).copy_from(&m1);
            mean.rows_mut(n1, n2).copy_from(&m2);
            let mut cov = DMatrix::zeros(n1 + n2, n1 + n2);
            cov.view_mut((0, 0), (n1, n1)).copy_from(&c1);
            cov.view_mut((n1, n1), (n2, n2)).copy_from(&c2);
            Dist::gaussian(Space::pair(s1, s2), mean, cov)
        }
        _ => {
            let a = d1.atoms().unwrap();
            let b = d2.atoms().unwrap();
            let mut atoms = Vec::with_capacity(a.len() * b.len());
            for (p, w) in &a {
                for (q, v) in &b {
                    atoms.push((Point::pair(p.clone(), q.clone()), w * v));
                }
            }
            Categorical::new(atoms).map(Dist::from_categorical)
        }
    }
}

fn gaussian_view(d: &Dist) -> Result<(Space, DVector<f64>, DMatrix<f64>)> {
    match d {
        Dist::Gaussian(g) => Ok((g.shape().clone(), g.mean().clone(), g.cov().clone())),
        Dist::Dirac(p) => {
            let shape = real_shape(p)
                .ok_or_else(|| Error::Unsupported(format!("product of a Gaussian with a Dirac at {p}")))?;
            let xs = p.flatten_reals().unwrap();
            let n = xs.len();
            Ok((shape, DVector::from_vec(xs), DMatrix::zeros(n, n)))
        }
        Dist::Categorical(_) => Err(Error::Unsupported("product of a Gaussian with a categorical".into())),
    }
}

/// A finite stochastic channel given by one categorical row per input.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernel {
    pub domain: Space,
    pub codomain: Space,
    rows: BTreeMap<Point, Dist>,
}

impl FiniteKernel {
    /// Every element of the (finite) domain needs a row supported on the
    /// codomain.
    pub fn new(domain: Space, codomain: Space, rows: BTreeMap<Point, Dist>) -> Result<FiniteKernel> {
        let inputs = domain.enumerate()?;
        codomain.enumerate()?;
        for x in &inputs {
            let row = rows
                .get(x)
                .ok_or_else(|| Error::Invalid(format!("channel has no row for input {x}")))?;
            if row.atoms().is_none() || !row.is_over(&codomain) {
                return Err(Error::IllTyped(format!("row for {x} is not a finite law over {codomain}")));
            }
        }
        if rows.len() != inputs.len() {
            return Err(Error::Invalid("channel has rows for inputs outside its domain".into()));
        }
        Ok(FiniteKernel { domain, codomain, rows })
    }

    /// Builds a channel from a row-stochastic matrix, indexing both spaces in
    /// enumeration order.
    pub fn from_matrix(domain: Space, codomain: Space, m: &[Vec<f64>]) -> Result<FiniteKernel> {
        let xs = domain.enumerate()?;
        let ys = codomain.enumerate()?;
        if m.len() != xs.len() || m.iter().any(|r| r.len() != ys.len()) {
            return Err(Error::Shape(format!(
                "matrix does not have shape {}x{}",
                xs.len(),
                ys.len()
            )));
        }
        let rows = xs
            .iter()
            .zip(m)
            .map(|(x, r)| {
                let d = Dist::categorical(ys.iter().cloned().zip(r.iter().copied()))?;
                Ok((x.clone(), d))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        FiniteKernel::new(domain, codomain, rows)
    }

    pub fn row(&self, x: &Point) -> Result<&Dist> {
        self.rows
            .get(x)
            .ok_or_else(|| Error::IllTyped(format!("{x} is not an input of the channel")))
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Point, &Dist)> {
        self.rows.iter()
    }

    /// Row-stochastic matrix in enumeration order.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let ys = self.codomain.enumerate().expect("finite codomain");
        self.rows
            .values()
            .map(|d| ys.iter().map(|y| d.weight(y)).collect())
            .collect()
    }

    pub fn kernel(&self) -> Kernel {
        Kernel::from_table(self.rows.clone())
    }

    /// The channel is a function (every row a Dirac).
    pub fn is_deterministic(&self) -> bool {
        self.rows.values().all(Dist::is_dirac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(s: &str) -> Point {
        Point::label(s)
    }

    fn two_state() -> (Space, Kernel) {
        let s = Space::finite(["0", "1"]).unwrap();
        let k = FiniteKernel::from_matrix(s.clone(), s.clone(), &[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        (s, k.kernel())
    }

    #[test]
    fn pushforward_identity_and_collapse() {
        let d = Dist::categorical([(l("a"), 0.3), (l("b"), 0.7)]).unwrap();
        assert_eq!(pushforward(|p| p.clone(), &d).unwrap(), d);
        assert_eq!(pushforward(|_| l("c"), &d).unwrap(), Dist::Dirac(l("c")));
    }

    #[test]
    fn affine_pushforward_of_standard_normal() {
        let d = Dist::Gaussian(Gaussian::scalar(0.0, 1.0).unwrap());
        let out = pushforward_affine(&Affine::scalar(2.0, 1.0), &d).unwrap();
        let g = out.as_gaussian().unwrap();
        assert_eq!(g.mean()[0], 1.0);
        assert_eq!(g.cov()[(0, 0)], 4.0);
        assert!(matches!(pushforward(|p| p.clone(), &d), Err(Error::NonlinearGaussian(_))));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn chapman_kolmogorov_two_state() {
        let (s, k) = two_state();
        let k2 = kleisli_compose(&k, &k);
        // matrix-power oracle
        let m = [[0.9, 0.1], [0.2, 0.8]];
        let mut sq = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for r in 0..2 {
                    sq[i][j] += m[i][r] * m[r][j];
                }
            }
        }
        let pts = s.enumerate().unwrap();
        for (i, x) in pts.iter().enumerate() {
            let row = k2.apply(x).unwrap();
            for (j, y) in pts.iter().enumerate() {
                assert!((row.weight(y) - sq[i][j]).abs() < 1e-12);
            }
        }
        assert!((sq[0][0] - 0.83).abs() < 1e-12 && (sq[1][1] - 0.66).abs() < 1e-12);
    }

    #[test]
    fn extension_of_row_kernel() {
        let (s, k) = two_state();
        let u = Dist::uniform(&s.enumerate().unwrap()).unwrap();
        let out = k.extend(&u).unwrap();
        assert!((out.weight(&l("0")) - 0.55).abs() < 1e-12);
        assert!((out.weight(&l("1")) - 0.45).abs() < 1e-12);
        assert_eq!(Kernel::unit().extend(&u).unwrap(), u);
    }

    #[test]
    fn affine_gaussian_chain() {
        let (a, s2, b, t2) = (0.7, 0.3, -1.5, 0.2);
        let k1 = Kernel::Affine(AffineGaussian::scalar(a, 0.0, s2).unwrap());
        let k2 = Kernel::Affine(AffineGaussian::scalar(b, 0.0, t2).unwrap());
        let c = kleisli_compose(&k2, &k1);
        let out = c.apply(&Point::scalar(2.0)).unwrap();
        let g = out.as_gaussian().unwrap();
        assert!((g.mean()[0] - a * b * 2.0).abs() < 1e-15);
        assert!((g.cov()[(0, 0)] - (b * b * s2 + t2)).abs() < 1e-15);
        // extension over a Gaussian input
        let ext = k1.extend(&Dist::Gaussian(Gaussian::scalar(1.0, 4.0).unwrap())).unwrap();
        let g = ext.as_gaussian().unwrap();
        assert!((g.mean()[0] - a).abs() < 1e-15);
        assert!((g.cov()[(0, 0)] - (a * a * 4.0 + s2)).abs() < 1e-15);
    }

    #[test]
    fn opaque_kernel_rejects_gaussian_input() {
        let k = Kernel::deterministic(|p| p.clone());
        let g = Dist::Gaussian(Gaussian::scalar(0.0, 1.0).unwrap());
        assert!(matches!(k.extend(&g), Err(Error::Unsupported(_))));
    }

    #[test]
    fn dst_cases() {
        let d = dst(&Dist::Dirac(l("x")), &Dist::Dirac(l("y"))).unwrap();
        assert_eq!(d, Dist::Dirac(Point::pair(l("x"), l("y"))));
        let a = Dist::categorical([(l("a"), 0.5), (l("b"), 0.5)]).unwrap();
        let b = Dist::categorical([(l("c"), 0.2), (l("d"), 0.8)]).unwrap();
        let ab = dst(&a, &b).unwrap();
        assert!((ab.weight(&Point::pair(l("a"), l("c"))) - 0.1).abs() < 1e-15);
        assert!((ab.weight(&Point::pair(l("b"), l("d"))) - 0.4).abs() < 1e-15);
        let g = dst(
            &Dist::Gaussian(Gaussian::scalar(0.0, 1.0).unwrap()),
            &Dist::Gaussian(Gaussian::scalar(1.0, 2.0).unwrap()),
        )
        .unwrap();
        let g = g.as_gaussian().unwrap();
        assert_eq!(g.mean().as_slice(), &[0.0, 1.0]);
        assert_eq!(g.cov(), &DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])));
        assert!(dst(&a, &Dist::Gaussian(Gaussian::scalar(0.0, 1.0).unwrap())).is_err());
    }
}
