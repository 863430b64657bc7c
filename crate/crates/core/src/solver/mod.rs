//! Explicit finite differences for the degenerate Cauchy problem, free
//! boundary tracking and periodic stationary states.

pub mod cauchy;
pub mod field;
pub mod front;
pub mod grid;
pub mod stationary;
pub mod step;

pub use cauchy::{run_cauchy, CauchyRun, Trajectory};
pub use field::Field;
pub use front::{front_speed, locate_front, locate_front_with, FreeBoundaryTrace, Front};
pub use grid::Grid1D;
pub use stationary::{
    default_start, solve_periodic_stationary, solve_periodic_stationary_with, Direction,
    StationaryProfile,
};
pub use step::{step, Boundary, Integrator, SolverConfig};
