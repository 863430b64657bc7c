//! Time integration of the Cauchy problem with snapshots and a front trace.

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::solver::field::Field;
use crate::solver::front::{
    locate_front_with, pressure_slope_left, pressure_slope_right, FreeBoundaryTrace,
};
use crate::solver::step::{Boundary, Integrator, SolverConfig};

/// Solutions beyond this multiple of `kappa^0` abort the run.
pub const BLOWUP_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Field>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|f| f.t).collect()
    }

    pub fn last(&self) -> Option<&Field> {
        self.snapshots.last()
    }
}

#[derive(Debug, Clone)]
pub struct CauchyRun {
    pub trajectory: Trajectory,
    pub trace: FreeBoundaryTrace,
    pub steps: u64,
}

pub(crate) fn record_front(
    spec: &ProblemSpec,
    field: &Field,
    floor: f64,
    trace: &mut FreeBoundaryTrace,
) {
    if let Some(front) = locate_front_with(spec, field, floor) {
        let (vx, degraded) = pressure_slope_right(spec, field, &front);
        let (vl, degraded_l) = pressure_slope_left(spec, field, &front);
        trace.push_both(field.t, front.l, front.r, vl, vx, degraded || degraded_l);
    }
}

/// Checks that the support has not reached a zero-Dirichlet edge.
pub(crate) fn check_edges(field: &Field, bc: Boundary, floor: f64) -> Result<()> {
    if let Boundary::Dirichlet { left, right } = bc {
        let n = field.u.len();
        if (right == 0.0 && field.u[n - 1] > floor) || (left == 0.0 && field.u[0] > floor) {
            return Err(Error::WindowTooSmall { t: field.t });
        }
    }
    Ok(())
}

/// Runs from `init` to `cfg.t_end`. Snapshots land exactly on multiples of
/// `cfg.snapshot_every` after the initial time.
pub fn run_cauchy(
    spec: &ProblemSpec,
    init: Field,
    cfg: &SolverConfig,
    bc: Boundary,
) -> Result<CauchyRun> {
    cfg.check()?;
    let floor = cfg.floor_for(spec);
    let t0 = init.t;
    if !(cfg.t_end >= t0) {
        return Err(Error::Config(format!(
            "solver.t_end = {} precedes the initial time {t0}",
            cfg.t_end
        )));
    }
    let mut trace = FreeBoundaryTrace::default();
    let mut traj = Trajectory::default();
    record_front(spec, &init, floor, &mut trace);
    traj.snapshots.push(init.clone());
    let mut it = Integrator::new(spec, init, cfg.cfl, bc);
    let blowup = BLOWUP_FACTOR * spec.kappa_hi();
    let mut k_snap = 1u64;
    let mut k_trace = 1u64;
    while it.t() < cfg.t_end {
        let next_snap = cfg
            .snapshot_every
            .map(|d| t0 + k_snap as f64 * d)
            .unwrap_or(f64::INFINITY);
        let next_trace = cfg
            .trace_every
            .map(|d| t0 + k_trace as f64 * d)
            .unwrap_or(f64::INFINITY);
        let stop = cfg.t_end.min(next_snap).min(next_trace);
        match cfg.dt_fixed {
            Some(dt) => {
                let dt = dt.min(stop - it.t());
                it.step(dt)?;
                if (it.t() - stop).abs() < 1e-12 * stop.abs().max(1.0) {
                    it.field.t = stop;
                }
            }
            None => {
                it.step_until(stop)?;
            }
        }
        if it.max_u() > blowup {
            return Err(Error::Blowup {
                max_u: it.max_u(),
                t: it.t(),
            });
        }
        check_edges(&it.field, bc, floor)?;
        let t = it.t();
        let at_trace = cfg.trace_every.is_none() || t >= next_trace;
        if at_trace {
            record_front(spec, &it.field, floor, &mut trace);
            if t >= next_trace {
                k_trace += 1;
            }
        }
        if t >= next_snap {
            traj.snapshots.push(it.field.clone());
            k_snap += 1;
        }
    }
    if traj.snapshots.last().map(|f| f.t) != Some(it.t()) {
        traj.snapshots.push(it.field.clone());
    }
    trace.finalize(5);
    Ok(CauchyRun {
        trajectory: traj,
        trace,
        steps: it.steps(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiffusionLaw, Reaction, ReactionKind};
    use crate::solver::grid::Grid1D;

    fn pme() -> ProblemSpec {
        ProblemSpec::new(
            DiffusionLaw::power_law(2.0).unwrap(),
            Reaction::new(ReactionKind::Monostable, "0*u", "1", 1.0, 0.0, None).unwrap(),
        )
    }

    fn barenblatt(x: f64, t: f64) -> f64 {
        (t.powf(-1.0 / 3.0) * (1.0 - x * x / (12.0 * t.powf(2.0 / 3.0)))).max(0.0)
    }

    #[test]
    fn tracks_barenblatt() {
        let s = pme();
        let g = Grid1D::new(-6.0, 0.05, 240).unwrap();
        let init = Field::from_fn(g, 1.0, |x| barenblatt(x, 1.0));
        let cfg = SolverConfig {
            t_end: 3.0,
            snapshot_every: Some(1.0),
            trace_every: Some(0.1),
            ..Default::default()
        };
        let run = run_cauchy(&s, init, &cfg, Boundary::ZERO).unwrap();
        assert_eq!(run.trajectory.times(), vec![1.0, 2.0, 3.0]);
        let last = run.trajectory.last().unwrap();
        let err = (0..g.n_cells)
            .map(|i| (last.u[i] - barenblatt(g.x(i), 3.0)).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.05, "L-inf error {err}");
        let r_exact = 12f64.sqrt() * 3f64.powf(1.0 / 3.0);
        let r_end = *run.trace.r.last().unwrap();
        assert!(
            (r_end - r_exact).abs() < 0.05,
            "r = {r_end}, exact {r_exact}"
        );
    }

    #[test]
    fn window_overflow_is_reported() {
        let s = pme();
        let g = Grid1D::new(-4.0, 0.05, 160).unwrap();
        let init = Field::from_fn(g, 1.0, |x| barenblatt(x, 1.0));
        let cfg = SolverConfig {
            t_end: 10.0,
            ..Default::default()
        };
        assert!(matches!(
            run_cauchy(&s, init, &cfg, Boundary::ZERO),
            Err(Error::WindowTooSmall { .. })
        ));
    }
}
