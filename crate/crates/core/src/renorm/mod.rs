//! Periodic traveling sharp waves as limits of the solution from Heaviside
//! data, renormalized at the times its front crosses whole periods.

pub mod crossings;
pub mod extract;
pub mod heaviside;

pub use crossings::{crossing_times, CrossingTimes};
pub use extract::{
    extract_wave, left_limit, time_monotonicity, verify_periodicity, ExtractOptions, TailReport,
    WaveProfile,
};
pub use heaviside::{run_heaviside, CrossingRecord, HeavisideRun, RenormConfig};

use crate::error::Result;
use crate::model::ProblemSpec;
use crate::solver::StationaryProfile;

/// Heaviside run, crossing times and the extracted wave in one call.
pub fn build_wave(
    spec: &ProblemSpec,
    p0: &StationaryProfile,
    cfg: &RenormConfig,
    opts: &ExtractOptions,
) -> Result<(HeavisideRun, WaveProfile)> {
    let run = run_heaviside(spec, p0, cfg)?;
    let ct = crossing_times(&run.trace, run.period, 0.1 * run.dx)?;
    let w = extract_wave(spec, &run, &ct, opts)?;
    Ok((run, w))
}
