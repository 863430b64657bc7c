//! Evolution from compactly supported data on a symmetric window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::solver::{
    run_cauchy, Boundary, CauchyRun, Field, Grid1D, SolverConfig, StationaryProfile, Trajectory,
};
use crate::waves::{check_spreading_condition, SpreadingVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadOptions {
    /// Initial data is `p0` on `[-plateau L, plateau L]` and zero outside.
    pub plateau_periods: usize,
    /// Periods on each side of the origin.
    pub half_periods: usize,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub trace_every: f64,
    pub cfl: f64,
}

impl Default for SpreadOptions {
    fn default() -> Self {
        Self {
            plateau_periods: 3,
            half_periods: 32,
            t_end: 40.0,
            snapshot_every: 0.05,
            trace_every: 0.01,
            cfl: 0.45,
        }
    }
}

impl SpreadOptions {
    /// A plateau one period wider than the compact subsolution and a window
    /// that a front of speed `c_hint` does not leave before `t_end`.
    pub fn for_spec(spec: &ProblemSpec, t_end: f64, c_hint: f64) -> Result<Self> {
        let sub = crate::waves::default_subsolution(spec)?;
        let plateau = (sub.l / spec.period()).ceil() as usize + 1;
        let travel = (1.2 * c_hint * t_end / spec.period()).ceil() as usize;
        Ok(Self {
            plateau_periods: plateau,
            half_periods: plateau + travel + 4,
            t_end,
            ..Default::default()
        })
    }
}

#[derive(Debug, Clone)]
pub struct SpreadingRun {
    pub run: CauchyRun,
    pub verdict: SpreadingVerdict,
    pub cells_per_period: usize,
}

impl SpreadingRun {
    pub fn grid(&self) -> Grid1D {
        self.run.trajectory.snapshots[0].grid
    }

    /// The reflected run `u(-x, t)`, a solution for the mirrored spec.
    pub fn mirrored(&self) -> Result<SpreadingRun> {
        let snapshots = self
            .run
            .trajectory
            .snapshots
            .iter()
            .map(|f| {
                f.mirrored()
                    .ok_or_else(|| Error::Precondition("mirroring needs a symmetric grid".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let run = CauchyRun {
            trajectory: Trajectory { snapshots },
            trace: self.run.trace.mirrored(5),
            steps: self.run.steps,
        };
        Ok(SpreadingRun {
            run,
            verdict: self.verdict,
            cells_per_period: self.cells_per_period,
        })
    }
}

/// Plateau data `p0 1_{|x| <= a L}` on the aligned symmetric grid.
pub fn plateau_data(p0: &StationaryProfile, period: f64, opts: &SpreadOptions) -> Result<Field> {
    let cells = p0.cells();
    let g = Grid1D::periodic_aligned(period, cells, opts.half_periods, opts.half_periods)?;
    let a = opts.plateau_periods as f64 * period;
    let u: Vec<f64> = (0..g.n_cells)
        .map(|i| {
            if g.x(i).abs() <= a {
                p0.at_phase(g.phase(i, cells, period))
            } else {
                0.0
            }
        })
        .collect();
    Ok(Field::new(g, u, 0.0))
}

/// Runs from plateau data after checking the sufficient spreading condition.
/// Data for which spreading is not guaranteed is rejected.
pub fn run_spreading(
    spec: &ProblemSpec,
    p0: &StationaryProfile,
    opts: &SpreadOptions,
) -> Result<SpreadingRun> {
    let u0 = plateau_data(p0, spec.period(), opts)?;
    let verdict = check_spreading_condition(spec, &u0)?;
    if !verdict.is_guaranteed() {
        return Err(Error::NotSpreading(
            "initial data does not dominate the compact subsolution".into(),
        ));
    }
    evolve(spec, u0, verdict, p0.cells(), opts)
}

/// Runs from arbitrary data on an aligned symmetric grid and records the
/// spreading verdict without acting on it.
pub fn run_from_data(
    spec: &ProblemSpec,
    u0: Field,
    cells_per_period: usize,
    opts: &SpreadOptions,
) -> Result<SpreadingRun> {
    let verdict = check_spreading_condition(spec, &u0).unwrap_or(SpreadingVerdict::Undetermined);
    evolve(spec, u0, verdict, cells_per_period, opts)
}

fn evolve(
    spec: &ProblemSpec,
    u0: Field,
    verdict: SpreadingVerdict,
    cells_per_period: usize,
    opts: &SpreadOptions,
) -> Result<SpreadingRun> {
    let cfg = SolverConfig {
        cfl: opts.cfl,
        t_end: opts.t_end,
        snapshot_every: Some(opts.snapshot_every),
        trace_every: Some(opts.trace_every),
        ..Default::default()
    };
    let run = run_cauchy(spec, u0, &cfg, Boundary::ZERO)?;
    Ok(SpreadingRun {
        run,
        verdict,
        cells_per_period,
    })
}
