//! Hierarchical systems: systems whose interface is an internal hom
//! `[p, q]`, composed sequentially and in parallel, compared by traces.

mod bayes;
mod bisim;
mod comonoid;
mod compose;
mod hibi;
mod system;
mod trace;

pub use bayes::*;
pub use bisim::*;
pub use comonoid::*;
pub use compose::*;
pub use hibi::*;
pub use system::*;
pub use trace::*;
