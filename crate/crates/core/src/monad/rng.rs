//! Seeded, splittable randomness and sampling.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::dist::Dist;
use crate::poly::Point;

/// A deterministic random stream. The same seed always yields the same
/// draws; [`Rng::stream`] gives independent substreams of one seed.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn seed(seed: u64) -> Rng {
        Rng { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Substream `k` of `seed`.
    pub fn stream(seed: u64, k: u64) -> Rng {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(k);
        Rng { seed, inner }
    }

    /// A child generator determined by this generator's seed and `k`; the
    /// parent's own stream is not advanced.
    pub fn split(&self, k: u64) -> Rng {
        Rng::stream(self.seed, k.wrapping_add(1))
    }

    pub fn initial_seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random::<u64>()
    }
}

impl Dist {
    /// One draw from the distribution.
    pub fn sample(&self, rng: &mut Rng) -> Point {
        match self {
            Dist::Dirac(p) => p.clone(),
            Dist::Categorical(c) => {
                let u = rng.uniform();
                let mut acc = 0.0;
                let mut last = None;
                for (p, w) in c.atoms() {
                    acc += w;
                    if u < acc {
                        return p.clone();
                    }
                    last = Some(p);
                }
                last.expect("non-empty support").clone()
            }
            Dist::Gaussian(g) => {
                let z = nalgebra::DVector::from_fn(g.dim(), |_, _| rng.normal());
                let x = g.mean() + g.sqrt_cov() * z;
                Point::from_reals(g.shape(), x.as_slice()).expect("shape matches dimension")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monad::Gaussian;

    #[test]
    fn dirac_sample_is_its_point() {
        let mut rng = Rng::seed(9);
        assert_eq!(Dist::Dirac(Point::label("x")).sample(&mut rng), Point::label("x"));
    }

    #[test]
    fn same_seed_same_draws() {
        let d = Dist::Gaussian(Gaussian::scalar(0.0, 1.0).unwrap());
        let a: Vec<_> = {
            let mut r = Rng::seed(3);
            (0..10).map(|_| d.sample(&mut r)).collect()
        };
        let mut r = Rng::seed(3);
        let b: Vec<_> = (0..10).map(|_| d.sample(&mut r)).collect();
        assert_eq!(a, b);
        assert_ne!(Rng::stream(3, 1).next_u64(), Rng::stream(3, 2).next_u64());
    }

    #[test]
    fn categorical_frequency_within_binomial_bound() {
        let d = Dist::categorical([(Point::label("a"), 0.3), (Point::label("b"), 0.7)]).unwrap();
        let n = 100_000;
        let mut rng = Rng::seed(11);
        let hits = (0..n).filter(|_| d.sample(&mut rng) == Point::label("a")).count();
        let freq = hits as f64 / n as f64;
        let sd = (0.3f64 * 0.7 / n as f64).sqrt();
        assert!((freq - 0.3).abs() < 3.0 * sd, "freq {freq}");
    }

    #[test]
    fn gaussian_moments_match() {
        let d = Dist::Gaussian(Gaussian::scalar(1.0, 4.0).unwrap());
        let n = 100_000;
        let mut rng = Rng::seed(5);
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng).flatten_reals().unwrap()[0]).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((m - 1.0).abs() < 3.0 * (4.0 / n as f64).sqrt());
        // sd of the sample variance of a normal is var*sqrt(2/(n-1))
        assert!((v - 4.0).abs() < 3.0 * 4.0 * (2.0 / (n - 1) as f64).sqrt());
    }
}
