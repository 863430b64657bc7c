//! Evolution from `u0 = p0(x) H(-x)` on a window that follows the front by
//! whole periods, recording frames at every period-crossing time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::solver::cauchy::{check_edges, record_front};
use crate::solver::{
    Boundary, Direction, Field, FreeBoundaryTrace, Grid1D, Integrator, StationaryProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormConfig {
    pub cfl: f64,
    /// Time between front samples.
    pub trace_every: f64,
    /// Periods of the extracted window left and right of the front.
    pub left_periods: usize,
    pub right_periods: usize,
    /// Periods kept behind the front before the clamped left edge.
    pub clamp_periods: usize,
    /// Empty periods kept ahead of the front.
    pub ahead_periods: usize,
    /// Crossings to record before stopping.
    pub crossings: usize,
    /// Frames per period, fixed from the first crossing increment.
    pub frames_per_period: usize,
    pub t_max: f64,
}

impl Default for RenormConfig {
    fn default() -> Self {
        Self {
            cfl: 0.45,
            trace_every: 0.002,
            left_periods: 8,
            right_periods: 2,
            clamp_periods: 16,
            ahead_periods: 6,
            crossings: 24,
            frames_per_period: 32,
            t_max: 1e4,
        }
    }
}

/// Density on the recording window `[(n - left - 1) L, (n + right + 1) L]`
/// at the times `t_n + j dt_frame`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub n: usize,
    pub t: f64,
    pub frames: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeavisideRun {
    pub period: f64,
    pub cells_per_period: usize,
    pub dx: f64,
    pub left_periods: usize,
    pub right_periods: usize,
    pub dt_frame: f64,
    pub trace: FreeBoundaryTrace,
    pub records: Vec<CrossingRecord>,
    /// Largest density seen during the run.
    pub u_max: f64,
    pub steps: u64,
    pub p0: StationaryProfile,
}

impl HeavisideRun {
    /// Cells per recorded frame.
    pub fn frame_cells(&self) -> usize {
        (self.left_periods + self.right_periods + 2) * self.cells_per_period
    }
}

struct Pending {
    record: usize,
    next_j: usize,
}

fn window_slice(
    field: &Field,
    n: usize,
    run_left: usize,
    run_right: usize,
    period: f64,
    cells: usize,
) -> Result<Vec<f64>> {
    let g = &field.grid;
    let start = n as f64 - (run_left + 1) as f64;
    let s = ((start * period - g.x0) / g.dx).round();
    let len = (run_left + run_right + 2) * cells;
    if s < 0.0 || s as usize + len > g.n_cells {
        return Err(Error::WindowTooSmall { t: field.t });
    }
    let s = s as usize;
    Ok(field.u[s..s + len].to_vec())
}

/// Runs until `cfg.crossings` levels `r = nL` have been crossed and the
/// frames after the last one cover the next increment.
pub fn run_heaviside(
    spec: &ProblemSpec,
    p0: &StationaryProfile,
    cfg: &RenormConfig,
) -> Result<HeavisideRun> {
    if p0.direction != Direction::FromBelow {
        return Err(Error::Precondition(
            "p0 must be the minimal stationary state (from below)".into(),
        ));
    }
    if cfg.ahead_periods < 4 || cfg.clamp_periods < cfg.left_periods + 2 {
        return Err(Error::Config(
            "renorm window: ahead_periods >= 4 and clamp_periods >= left + 2 required".into(),
        ));
    }
    let period = spec.period();
    let cells = p0.cells();
    let grid = Grid1D::periodic_aligned(period, cells, cfg.clamp_periods, cfg.ahead_periods)?;
    let u0: Vec<f64> = (0..grid.n_cells)
        .map(|i| {
            if grid.x(i) < 0.0 {
                p0.at_phase(grid.phase(i, cells, period))
            } else {
                0.0
            }
        })
        .collect();
    let ghost = p0.at_phase(cells - 1);
    let bc = Boundary::Dirichlet {
        left: ghost,
        right: 0.0,
    };
    let floor = 1e-12 * spec.kappa_hi();
    let mut it = Integrator::new(spec, Field::new(grid, u0, 0.0), cfg.cfl, bc);
    let mut trace = FreeBoundaryTrace::default();
    record_front(spec, &it.field, floor, &mut trace);
    let mut prev = it.field.clone();
    let mut records: Vec<CrossingRecord> = Vec::new();
    let mut pending: Vec<Pending> = Vec::new();
    let mut dt_frame: Option<f64> = None;
    let mut next_level = 1usize;
    let mut k_trace = 1u64;
    let mut u_max = it.max_u();
    let mut steps = 0u64;
    let (left, right) = (cfg.left_periods, cfg.right_periods);
    loop {
        if records.len() > cfg.crossings && pending.iter().all(|p| p.record + 1 == records.len()) {
            // Only the newest crossing is still collecting; it is not needed.
            records.pop();
            break;
        }
        if it.t() > cfg.t_max {
            return Err(Error::Data(format!(
                "front crossed only {} periods by t = {}",
                next_level - 1,
                cfg.t_max
            )));
        }
        let next_trace = k_trace as f64 * cfg.trace_every;
        let next_frame = pending
            .iter()
            .map(|p| records[p.record].t + p.next_j as f64 * dt_frame.unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min);
        let stop = next_trace.min(next_frame);
        it.step_until(stop)?;
        u_max = u_max.max(it.max_u());
        let t = it.t();
        if t >= next_frame {
            let df = dt_frame.unwrap_or(0.0);
            let mut done = Vec::new();
            for (k, p) in pending.iter_mut().enumerate() {
                let rec = &records[p.record];
                let tf = rec.t + p.next_j as f64 * df;
                if tf <= t {
                    let slice = window_slice(&it.field, rec.n, left, right, period, cells)?;
                    let end = records.get(p.record + 1).map(|r| r.t);
                    records[p.record].frames.push(slice);
                    p.next_j += 1;
                    if let Some(te) = end {
                        if records[p.record].t + (p.next_j as f64 - 1.0) * df >= te + df {
                            done.push(k);
                        }
                    }
                }
            }
            for k in done.into_iter().rev() {
                pending.remove(k);
            }
        }
        if t < next_trace {
            continue;
        }
        record_front(spec, &it.field, floor, &mut trace);
        k_trace += 1;
        check_edges(&it.field, bc, floor)?;
        let level = next_level as f64 * period;
        let m = trace.len();
        if m >= 2 && trace.r[m - 1] >= level && trace.r[m - 2] < level {
            // Interpolate the crossing, then redo the interval so that the
            // first frame lands on it exactly.
            let (ta, tb) = (trace.t[m - 2], trace.t[m - 1]);
            let (ra, rb) = (trace.r[m - 2], trace.r[m - 1]);
            let tn = ta + (tb - ta) * (level - ra) / (rb - ra);
            steps += it.steps();
            it = Integrator::new(spec, prev.clone(), cfg.cfl, bc);
            trace.pop();
            k_trace -= 1;
            while it.t() < tn {
                it.step_until(tn)?;
            }
            let mut rec = CrossingRecord {
                n: next_level,
                t: tn,
                frames: Vec::new(),
            };
            if records.len() == 1 {
                dt_frame = Some((tn - records[0].t) / cfg.frames_per_period as f64);
            }
            if dt_frame.is_some() {
                rec.frames.push(window_slice(
                    &it.field, next_level, left, right, period, cells,
                )?);
                pending.push(Pending {
                    record: records.len(),
                    next_j: 1,
                });
            }
            records.push(rec);
            next_level += 1;
            continue;
        }
        // Keep the front well inside the grid.
        let r_now = trace.r[m - 1];
        if it.field.grid.x_end() - r_now < 3.0 * period {
            let shift = (cfg.ahead_periods - 3) * cells;
            let g = it.field.grid;
            let mut u = it.field.u[shift..].to_vec();
            u.resize(g.n_cells, 0.0);
            let ng = Grid1D::new(g.x0 + (shift as f64) * g.dx, g.dx, g.n_cells)?;
            let f = Field::new(ng, u, it.t());
            steps += it.steps();
            it = Integrator::new(spec, f, cfg.cfl, bc);
        }
        prev = it.field.clone();
    }
    steps += it.steps();
    trace.finalize(5);
    Ok(HeavisideRun {
        period,
        cells_per_period: cells,
        dx: grid.dx,
        left_periods: left,
        right_periods: right,
        dt_frame: dt_frame.unwrap_or(0.0),
        trace,
        records,
        u_max,
        steps,
        p0: p0.clone(),
    })
}
