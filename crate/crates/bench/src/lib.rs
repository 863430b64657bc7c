//! Fixtures shared by the benchmarks.

use sharpwave::analysis::{plateau_data, SpreadOptions};
use sharpwave::solver::{
    default_start, solve_periodic_stationary_with, Direction, Field, StationaryProfile,
};
use sharpwave::{demos, ProblemSpec};

pub fn spec(name: &str) -> ProblemSpec {
    demos::spec(name)
        .expect("bundled demo")
        .expect("demo parses")
}

pub fn stationary(spec: &ProblemSpec, cells: usize) -> StationaryProfile {
    solve_periodic_stationary_with(
        spec,
        default_start(spec, Direction::FromBelow),
        Direction::FromBelow,
        cells,
        1e-10,
    )
    .expect("stationary state")
}

/// Plateau data of the heterogeneous bistable demo on a 40 period window.
pub fn hetbi_plateau(cells: usize) -> (ProblemSpec, Field) {
    let spec = spec("hetbi");
    let p0 = stationary(&spec, cells);
    let opts = SpreadOptions {
        plateau_periods: 4,
        half_periods: 20,
        ..Default::default()
    };
    let u0 = plateau_data(&p0, spec.period(), &opts).expect("plateau data");
    (spec, u0)
}
