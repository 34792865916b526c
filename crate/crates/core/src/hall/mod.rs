//! Basic commutators, Hall normal forms in free nilpotent quotients, and
//! maps induced on those quotients.

mod basis;
mod collect;
mod induced;
mod magnus;

pub use basis::{witt_count, BasicCommutator, HallBasis, Shape, HARD_CLASS_CAP};
pub use collect::NilpotentElement;
pub use induced::InducedMap;
