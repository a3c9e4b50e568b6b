//! The (max,+) semiring over scalars and dense matrices.

mod element;
mod graph;
mod implicit;
mod matrix;

pub use element::{Epsilon, Finite, MaxPlus};
pub use graph::{longest_path, topological_order};
pub use implicit::solve_implicit;
pub use matrix::Matrix;
