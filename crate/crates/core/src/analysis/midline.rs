use serde::{Deserialize, Serialize};

use crate::analysis::fit::{fit_exponential, FitResult};
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::solver::{StationaryProfile, Trajectory};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MidlineReport {
    /// Speed of the expanding interval `|x| <= c t`.
    pub c: f64,
    pub times: Vec<f64>,
    /// `max_{|x| <= ct} |u - p|` at every snapshot.
    pub errors: Vec<f64>,
    /// Fit over snapshots with `t >= fit_from`.
    pub fit: FitResult,
    pub fit_from: f64,
}

/// Convergence to the periodic state `p` inside `|x| <= ct`. Fails with
/// `NotSpreading` when the last snapshot does not exceed `theta` on the
/// whole interval, i.e. when the solution is not spreading.
pub fn midline_convergence(
    spec: &ProblemSpec,
    traj: &Trajectory,
    p: &StationaryProfile,
    c: f64,
    fit_from: f64,
) -> Result<MidlineReport> {
    let first = traj
        .snapshots
        .first()
        .ok_or_else(|| Error::Data("empty trajectory".into()))?;
    let g = first.grid;
    let cells = p.cells();
    let period = spec.period();
    let theta = spec.reaction.theta().max(0.0);
    let mut times = Vec::new();
    let mut errors = Vec::new();
    for f in &traj.snapshots {
        let half = c * f.t;
        let mut e: f64 = 0.0;
        for i in 0..g.n_cells {
            if g.x(i).abs() <= half {
                e = e.max((f.u[i] - p.at_phase(g.phase(i, cells, period))).abs());
            }
        }
        times.push(f.t);
        errors.push(e);
    }
    let last = traj.last().expect("nonempty");
    let c_last = c * last.t;
    let low = (0..g.n_cells)
        .filter(|&i| g.x(i).abs() <= c_last)
        .map(|i| last.u[i])
        .fold(f64::INFINITY, f64::min);
    if !(low > theta) {
        return Err(Error::NotSpreading(format!(
            "min u = {low} on |x| <= {c_last} at t = {}",
            last.t
        )));
    }
    let (ts, es): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&errors)
        .filter(|(&t, _)| t >= fit_from)
        .map(|(&t, &e)| (t, e))
        .unzip();
    let fit = fit_exponential(&ts, &es)?;
    Ok(MidlineReport {
        c,
        times,
        errors,
        fit,
        fit_from,
    })
}
