//! Predictive processing by gradient descent on the Laplace free energy,
//! assembled into hierarchical systems.

mod channel;
mod energy;
mod json;
mod system;

pub use channel::*;
pub use energy::*;
pub use json::*;
pub use system::*;
