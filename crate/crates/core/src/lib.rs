//! Exact computation of dyadic maximal transforms on finite grids, together with the
//! variation, boundary geometry and level-set cube decompositions used to study how the
//! dyadic maximal operator acts on functions of bounded variation.
//!
//! Functions are constant on the unit cells of a base cube `[0, 2^K)^d` and carry exact
//! rational values, so every comparison `f_Q > λ` is decided without rounding.

pub mod cube;
pub mod decomp;
pub mod domain;
pub mod error;
pub mod exact;
pub mod grid;
pub mod io;
pub mod maxop;
pub mod variation;

pub use cube::{CubeId, Shape};
pub use domain::Domain;
pub use error::{Error, Result};
pub use exact::Rational;
pub use grid::{breakpoints, superlevel_set, truncate, CellSet, GridFunction};
pub use maxop::{brute_force_maximal, maximal_transform, AverageTree, CubeFamily, Selector};
pub use variation::{coarea, perimeter, variation, VariationMode};
