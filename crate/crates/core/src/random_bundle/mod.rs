//! Measure-preserving systems, open random dynamical systems, open bundle
//! systems, and an Ornstein–Uhlenbeck sampler.

mod bundle;
mod json;
mod measure;
mod ou;
mod rds;

pub use bundle::{check_bundle, rebase_bundle, reindex_bundle, BundleSystem};
pub use measure::{check_measure_preserving, MeasurePreservingSystem, MpMorphism, ProbabilitySpace};
pub use ou::{ou_csv, ou_path};
pub use rds::{check_random_system, rebase_rds, reindex_rds, RandomSystem};
