use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::poly::{Point, Space};

/// Tolerance on the total mass of a categorical distribution.
pub const MASS_TOL: f64 = 1e-12;
/// Smallest eigenvalue a covariance may have and still count as PSD.
pub const PSD_TOL: f64 = -1e-10;

/// A probability distribution in one of the exactly representable regimes.
///
/// `Dirac` is the monad unit. A categorical distribution with a single atom
/// is always stored as a `Dirac`.
#[derive(Debug, Clone, PartialEq)]
pub enum Dist {
    Dirac(Point),
    Categorical(Categorical),
    Gaussian(Gaussian),
}

/// Finitely supported distribution. Atoms have strictly positive weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    atoms: BTreeMap<Point, f64>,
}

/// Gaussian measure over a space whose components are all Euclidean.
/// The mean and covariance are laid out in [`Point::flatten_reals`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    shape: Space,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Categorical {
    /// Builds a categorical distribution, merging repeated atoms and dropping
    /// zero weights. Weights must be non-negative and sum to one.
    pub fn new<I>(atoms: I) -> Result<Categorical>
    where
        I: IntoIterator<Item = (Point, f64)>,
    {
        let c = Self::unchecked(atoms)?;
        let total: f64 = c.atoms.values().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Invalid(format!("categorical weights sum to {total}, not 1")));
        }
        Ok(c)
    }

    /// Like [`Categorical::new`] but rescales the weights to total mass one.
    pub fn normalized<I>(atoms: I) -> Result<Categorical>
    where
        I: IntoIterator<Item = (Point, f64)>,
    {
        let mut c = Self::unchecked(atoms)?;
        let total: f64 = c.atoms.values().sum();
        if total <= 0.0 {
            return Err(Error::Invalid("categorical weights have zero total mass".into()));
        }
        for w in c.atoms.values_mut() {
            *w /= total;
        }
        Ok(c)
    }

    fn unchecked<I>(atoms: I) -> Result<Categorical>
    where
        I: IntoIterator<Item = (Point, f64)>,
    {
        let mut list: Vec<(Point, f64)> = Vec::new();
        for (p, w) in atoms {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Invalid(format!("weight {w} on atom {p} is not a non-negative number")));
            }
            if w > 0.0 {
                list.push((p, w));
            }
        }
        // sorting first lets the map be bulk-built; inputs are often sorted
        list.sort_by(|a, b| a.0.cmp(&b.0));
        list.dedup_by(|later, kept| {
            let same = later.0 == kept.0;
            if same {
                kept.1 += later.1;
            }
            same
        });
        let map: BTreeMap<Point, f64> = list.into_iter().collect();
        if map.is_empty() {
            return Err(Error::Invalid("categorical distribution with empty support".into()));
        }
        Ok(Categorical { atoms: map })
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.atoms.iter().map(|(p, w)| (p, *w))
    }

    pub fn weight(&self, p: &Point) -> f64 {
        self.atoms.get(p).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.values().sum()
    }
}

impl Gaussian {
    /// `shape` must consist of Euclidean and unit components only; its real
    /// dimension must match the mean. The covariance must be symmetric PSD.
    pub fn new(shape: Space, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Gaussian> {
        let n = shape
            .flat_dim()
            .ok_or_else(|| Error::Shape(format!("Gaussian over non-Euclidean space {shape}")))?;
        if mean.len() != n || cov.nrows() != n || cov.ncols() != n {
            return Err(Error::Shape(format!(
                "Gaussian over {shape} needs mean of length {n} and a {n}x{n} covariance, got {} and {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        let scale = cov.amax().max(1.0);
        let asym = (&cov - cov.transpose()).amax();
        if asym > 1e-9 * scale {
            return Err(Error::Invalid(format!("covariance is not symmetric (max asymmetry {asym:e})")));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        if n > 0 {
            let min_eig = cov.clone().symmetric_eigen().eigenvalues.min();
            if min_eig < PSD_TOL * scale {
                return Err(Error::Invalid(format!("covariance is not PSD (smallest eigenvalue {min_eig:e})")));
            }
        }
        Ok(Gaussian { shape, mean, cov })
    }

    /// One-dimensional Gaussian `N(mean, var)` over `R^1`.
    pub fn scalar(mean: f64, var: f64) -> Result<Gaussian> {
        Gaussian::new(
            Space::euclid(1),
            DVector::from_element(1, mean),
            DMatrix::from_element(1, 1, var),
        )
    }

    pub fn shape(&self) -> &Space {
        &self.shape
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean_point(&self) -> Point {
        Point::from_reals(&self.shape, self.mean.as_slice()).expect("shape checked at construction")
    }

    /// Symmetric square root factor `L` with `L Lᵀ = cov`, tolerant of
    /// semidefinite covariances.
    pub fn sqrt_cov(&self) -> DMatrix<f64> {
        let n = self.dim();
        if n == 0 {
            return DMatrix::zeros(0, 0);
        }
        if let Some(ch) = self.cov.clone().cholesky() {
            return ch.l();
        }
        let eig = self.cov.clone().symmetric_eigen();
        let d = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        &eig.eigenvectors * DMatrix::from_diagonal(&d)
    }
}

/// Real-valued shape of a point built only from vectors, tuples and units.
pub(crate) fn real_shape(p: &Point) -> Option<Space> {
    match p {
        Point::Unit => Some(Space::Unit),
        Point::Label(_) => None,
        Point::Vector(v) => Some(Space::euclid(v.len())),
        Point::Tuple(xs) => xs.iter().map(real_shape).collect::<Option<Vec<_>>>().map(Space::prod),
    }
}

impl Dist {
    pub fn dirac(p: Point) -> Dist {
        Dist::Dirac(p)
    }

    /// Categorical distribution; a single-atom result collapses to `Dirac`.
    pub fn categorical<I>(atoms: I) -> Result<Dist>
    where
        I: IntoIterator<Item = (Point, f64)>,
    {
        Ok(Dist::from_categorical(Categorical::new(atoms)?))
    }

    pub fn uniform(points: &[Point]) -> Result<Dist> {
        if points.is_empty() {
            return Err(Error::Invalid("uniform distribution over an empty set".into()));
        }
        let w = 1.0 / points.len() as f64;
        Dist::categorical(points.iter().map(|p| (p.clone(), w)))
    }

    pub fn gaussian(shape: Space, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Dist> {
        Ok(Dist::Gaussian(Gaussian::new(shape, mean, cov)?))
    }

    pub(crate) fn from_categorical(c: Categorical) -> Dist {
        if c.atoms.len() == 1 {
            let (p, _) = c.atoms.into_iter().next().unwrap();
            Dist::Dirac(p)
        } else {
            Dist::Categorical(c)
        }
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self, Dist::Dirac(_))
    }

    /// The payload of a Dirac distribution.
    pub fn as_dirac(&self) -> Option<&Point> {
        match self {
            Dist::Dirac(p) => Some(p),
            _ => None,
        }
    }

    pub fn into_dirac(self, what: &str) -> Result<Point> {
        match self {
            Dist::Dirac(p) => Ok(p),
            other => Err(Error::NotDeterministic(format!("{what} returned {}", other.kind_name()))),
        }
    }

    pub fn as_gaussian(&self) -> Option<&Gaussian> {
        match self {
            Dist::Gaussian(g) => Some(g),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Dist::Dirac(_) => "dirac",
            Dist::Categorical(_) => "categorical",
            Dist::Gaussian(_) => "gaussian",
        }
    }

    /// Atoms with weights for finitely supported distributions.
    pub fn atoms(&self) -> Option<Vec<(Point, f64)>> {
        match self {
            Dist::Dirac(p) => Some(vec![(p.clone(), 1.0)]),
            Dist::Categorical(c) => Some(c.atoms().map(|(p, w)| (p.clone(), w)).collect()),
            Dist::Gaussian(_) => None,
        }
    }

    /// Probability of the atom `p` (zero for Gaussians).
    pub fn weight(&self, p: &Point) -> f64 {
        match self {
            Dist::Dirac(q) => {
                if p == q {
                    1.0
                } else {
                    0.0
                }
            }
            Dist::Categorical(c) => c.weight(p),
            Dist::Gaussian(_) => 0.0,
        }
    }

    /// Every point in the support lies in `space`. Gaussians are checked by
    /// shape.
    pub fn is_over(&self, space: &Space) -> bool {
        match self {
            Dist::Dirac(p) => space.contains(p),
            Dist::Categorical(c) => c.atoms().all(|(p, _)| space.contains(p)),
            Dist::Gaussian(g) => g.shape.normalized() == space.normalized() || g.shape == *space,
        }
    }

    /// Mean as a point, for distributions over real-valued spaces.
    pub fn mean_point(&self) -> Result<Point> {
        match self {
            Dist::Dirac(p) => Ok(p.clone()),
            Dist::Gaussian(g) => Ok(g.mean_point()),
            Dist::Categorical(c) => {
                let (first, _) = c.atoms().next().unwrap();
                let shape = real_shape(first)
                    .ok_or_else(|| Error::Unsupported("mean of a categorical over labels".into()))?;
                let n = shape.flat_dim().unwrap_or(0);
                let mut acc = vec![0.0; n];
                for (p, w) in c.atoms() {
                    let xs = p
                        .flatten_reals()
                        .filter(|xs| xs.len() == n)
                        .ok_or_else(|| Error::Shape(format!("atom {p} does not match {shape}")))?;
                    for (a, x) in acc.iter_mut().zip(xs) {
                        *a += w * x;
                    }
                }
                Point::from_reals(&shape, &acc)
            }
        }
    }

    /// Replaces the distribution by the Dirac at its mean. Distributions over
    /// labels are returned unchanged.
    pub fn mean_skeleton(&self) -> Dist {
        match self {
            Dist::Dirac(_) => self.clone(),
            _ => match self.mean_point() {
                Ok(p) => Dist::Dirac(p),
                Err(_) => self.clone(),
            },
        }
    }

    fn as_gaussian_view(&self) -> Option<(Space, DVector<f64>, DMatrix<f64>)> {
        match self {
            Dist::Gaussian(g) => Some((g.shape.clone(), g.mean.clone(), g.cov.clone())),
            Dist::Dirac(p) => {
                let shape = real_shape(p)?;
                let xs = p.flatten_reals()?;
                let n = xs.len();
                Some((shape, DVector::from_vec(xs), DMatrix::zeros(n, n)))
            }
            Dist::Categorical(_) => None,
        }
    }

    /// Discrepancy between two distributions.
    ///
    /// Finitely supported laws are compared by the largest difference in atom
    /// weight. Gaussians (and Diracs at real points, viewed as Gaussians with
    /// zero covariance) by the largest difference in mean or covariance
    /// entries. Diracs at real points compare by coordinates. Incomparable
    /// pairs are infinitely far apart.
    pub fn distance(&self, other: &Dist) -> f64 {
        match (self, other) {
            (Dist::Dirac(a), Dist::Dirac(b)) => {
                if a == b {
                    0.0
                } else if a.flatten_reals().is_some() && real_shape(a) == real_shape(b) {
                    a.distance(b)
                } else {
                    1.0
                }
            }
            (Dist::Gaussian(_), _) | (_, Dist::Gaussian(_)) => {
                match (self.as_gaussian_view(), other.as_gaussian_view()) {
                    (Some((sa, ma, ca)), Some((sb, mb, cb))) if sa.normalized() == sb.normalized() => {
                        (ma - mb).amax().max((ca - cb).amax())
                    }
                    _ => f64::INFINITY,
                }
            }
            _ => {
                let a = self.atoms().unwrap();
                let b = other.atoms().unwrap();
                let mut diff: BTreeMap<&Point, f64> = BTreeMap::new();
                for (p, w) in &a {
                    *diff.entry(p).or_insert(0.0) += w;
                }
                for (p, w) in &b {
                    *diff.entry(p).or_insert(0.0) -= w;
                }
                diff.values().fold(0.0, |m, d| m.max(d.abs()))
            }
        }
    }

    /// Applies [`Point::normalized`] to every atom.
    pub fn normalized_points(&self) -> Dist {
        match self {
            Dist::Dirac(p) => Dist::Dirac(p.normalized()),
            Dist::Categorical(c) => Dist::from_categorical(
                Categorical::unchecked(c.atoms().map(|(p, w)| (p.normalized(), w))).expect("non-empty"),
            ),
            Dist::Gaussian(g) => Dist::Gaussian(Gaussian {
                shape: g.shape.normalized(),
                mean: g.mean.clone(),
                cov: g.cov.clone(),
            }),
        }
    }
}
