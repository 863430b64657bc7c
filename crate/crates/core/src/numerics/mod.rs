//! Small numerical kernels shared by the solvers.

pub mod fit;
pub mod ode;
pub mod quad;
pub mod roots;
