//! Diagnostics along free boundaries, exponential fits and the
//! super/sub-solution certification of convergence to the wave.

pub mod certify;
pub mod darcy;
pub mod fit;
pub mod fm;
pub mod intersect;
pub mod midline;
pub mod ratios;
pub mod shift;
pub mod spread;
pub mod supersub;

pub use certify::{
    certify, certify_side, CertificationReport, Gates, LeftInputs, PipelineOptions, Side,
    SideReport,
};
pub use darcy::darcy_residual;
pub use fit::{fit_exponential, fit_tail, FitResult};
pub use fm::{fm_error_profile, shift_floor, FmOptions, FmReport};
pub use intersect::{intersection_count, overlap_cells};
pub use midline::{midline_convergence, MidlineReport};
pub use ratios::{check_monotone_ratios, RatioReport};
pub use shift::{front_shift_estimate, ShiftReport};
pub use spread::{plateau_data, run_from_data, run_spreading, SpreadOptions, SpreadingRun};
pub use supersub::{
    barrier_residual, check_supersub, wave_derivatives, Barrier, BarrierReport, CertifyOptions,
    CertifyReport, ResidualStats, SandwichReport, SuperSubParams,
};
