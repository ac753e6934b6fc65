//! Spaces, polynomial interfaces, their morphisms and sections, and time.

mod map;
mod polynomial;
mod section;
mod space;
mod time;

pub use map::{compose_map, tensor_map, Effect, PolyMap};
pub use polynomial::{Directions, Polynomial};
pub use section::{all_sections, pull_section, Section};
pub use space::{Point, Space};
pub use time::{Time, TimeMonoid};
