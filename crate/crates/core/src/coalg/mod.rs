//! Open dynamical systems over polynomial interfaces, their closures and
//! law checks.

mod closure;
mod field;
mod json;
mod ncoalg;
mod reindex;
mod system;

pub use closure::{check_closed_flow, check_flow, pairs_up_to, trace, trace_sampled, ClosedSystem, Trace};
pub use json::SystemSpec;
pub use ncoalg::CoalgebraTable;
pub use reindex::{check_opindexing, is_system_morphism, reindex};
pub use system::{Dynamics, System};
