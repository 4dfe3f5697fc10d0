//! Truncated half-space grids, sampled fields, the test-function library
//! and the Monte Carlo oracle.

mod funcs;
mod grid;
pub mod mc;

pub use funcs::{sample, test_library, FuncSpec};
pub use grid::{build_grid, fmt17, quadrature, Field, GridSpec, HalfSpaceGrid, SymmetryHint, MAX_NODES};
pub use mc::{mc_integral, McEstimate, Region};
