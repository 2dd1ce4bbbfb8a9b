//! Quadrature, interpolation and bracketed root finding.

mod grid;
mod interp;
mod quadrature;
mod roots;

pub use grid::{Grid, SampledFunction};
pub use interp::{interpolate, MonotoneCubic};
pub use quadrature::{integrate, CellQuadrature, GaussLegendre, DEFAULT_ORDER};
pub use roots::{bisect, find_roots};

/// Default tolerance for adaptive quadrature.
pub const QUAD_TOL: f64 = 1e-10;
/// Default bracket width for root refinement.
pub const ROOT_TOL: f64 = 1e-10;
/// Default number of grid points.
pub const GRID_N: usize = 401;
