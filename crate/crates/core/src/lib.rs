//! Open dynamical systems as coalgebras over polynomial interfaces.
//!
//! The crate is organised bottom-up: [`poly`] (spaces, polynomials, lenses),
//! [`monad`] (distributions and kernels), [`coalg`] (open systems and their
//! closures), [`random_bundle`] (measure-preserving, random and bundle
//! systems), [`hier`] (hierarchical morphism-emitting systems) and
//! [`laplace`] (Gaussian predictive-processing systems).

// negated comparisons are how NaN parameters are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coalg;
pub mod error;
pub mod hier;
pub mod laplace;
pub mod monad;
pub mod poly;
pub mod random_bundle;
pub mod report;

pub use error::{Error, Result};
