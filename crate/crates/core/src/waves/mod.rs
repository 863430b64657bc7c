//! Traveling-wave constructions: phase-plane shooting, compact
//! subsolutions, ground states and compactly supported periodic waves.

pub mod compact;
pub mod phase;
pub mod ptw;
pub mod sharp;
pub mod spreading;

pub use compact::{find_compact_subsolution, find_ground_state, GroundState, ShootResult};
pub use phase::{
    ode_residual, shoot_from_saddle, shoot_tw, Outcome, PhaseSample, ShootOptions, Shot, TwProblem,
};
pub use ptw::{build_compact_ptw, CompactPtw, PtwOptions};
pub use sharp::{find_sharp_speed, find_sharp_speed_with, SharpWave};
pub use spreading::{
    check_spreading_condition, check_spreading_with, default_subsolution, SpreadingVerdict,
};
