//! The probability monad: finitely supported and Gaussian laws, Kleisli
//! structure, independent products and seeded sampling.

mod dist;
mod json;
mod kernel;
mod rng;

pub use dist::{Categorical, Dist, Gaussian, MASS_TOL, PSD_TOL};
pub use kernel::{
    dst, kleisli_compose, kleisli_extend, mixture, pushforward, pushforward_affine, pushforward_sampled,
    try_pushforward, Affine, AffineGaussian, FiniteKernel, Kernel,
};
pub use rng::Rng;
