//! Exponential envelope of the distance between a spreading solution and
//! the shifted wave behind the right front.

use serde::{Deserialize, Serialize};

use crate::analysis::fit::{fit_exponential, FitResult, MIN_SAMPLES};
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::renorm::WaveProfile;
use crate::solver::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmOptions {
    /// Cells next to the front excluded from `E`.
    pub front_cells: usize,
    /// The spatial profile is taken at the last snapshot whose error still
    /// exceeds the plateau by this many decades.
    pub profile_decades: f64,
}

impl Default for FmOptions {
    fn default() -> Self {
        Self {
            front_cells: 2,
            profile_decades: 3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FmReport {
    pub t_star: f64,
    pub t_profile: f64,
    /// Decay of `E` in `z = R(t + t*) - x` at `t_profile`, fitted from the
    /// maximum of the profile to the left end of the window.
    pub omega1: FitResult,
    /// Decay of `sup_{x >= 0} E(., t)` in time after removing its plateau.
    pub omega2: FitResult,
    pub plateau: f64,
    pub k: f64,
    /// Fraction of sampled points with `E <= 2K (e^{-omega1 z} + e^{-omega2 t}) + plateau`.
    pub envelope_fraction: f64,
    /// True when the sup error never rises above its plateau.
    pub below_floor: bool,
    pub times: Vec<f64>,
    pub sup_error: Vec<f64>,
}

/// Samples `(z, E)` per snapshot after `t_from`, on `x >= 0` inside the wave
/// window and at least `front_cells` cells behind the front.
fn error_rows(
    spec: &ProblemSpec,
    traj: &Trajectory,
    w: &WaveProfile,
    t_star: f64,
    t_from: f64,
    front_cells: usize,
) -> (Vec<f64>, Vec<Vec<(f64, f64)>>) {
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for f in traj.snapshots.iter().filter(|f| f.t >= t_from) {
        let g = f.grid;
        let s = f.t + t_star;
        let r = w.r_eval(s);
        let zmin = front_cells as f64 * g.dx;
        let row: Vec<(f64, f64)> = (0..g.n_cells)
            .filter_map(|i| {
                let x = g.x(i);
                let z = r - x;
                if x < 0.0 || z < zmin {
                    return None;
                }
                let v = w.eval(x, s)?;
                Some((z, (f.u[i] - spec.density(v)).abs()))
            })
            .collect();
        if !row.is_empty() {
            times.push(f.t);
            rows.push(row);
        }
    }
    (times, rows)
}

/// `E(x, t) = |u(x, t) - U(x, t + t*)|` with `U = psi(V)` behind the right
/// front, and its two-term exponential envelope.
pub fn fm_error_profile(
    spec: &ProblemSpec,
    traj: &Trajectory,
    w: &WaveProfile,
    t_star: f64,
    t_from: f64,
    opts: &FmOptions,
) -> Result<FmReport> {
    let (times, rows) = error_rows(spec, traj, w, t_star, t_from, opts.front_cells);
    if times.len() < 8 {
        return Err(Error::Data(
            "too few snapshots for the error envelope".into(),
        ));
    }
    let sup_error: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|e| e.1).fold(0.0, f64::max))
        .collect();
    // Plateau: the median sup error over the last tenth.
    let tail = (sup_error.len() / 10).max(1);
    let body = sup_error.len() - tail;
    let mut last = sup_error[body..].to_vec();
    last.sort_by(|a, b| a.total_cmp(b));
    let plateau = last[last.len() / 2];
    let below_floor = sup_error[..body].iter().all(|&e| e <= 10.0 * plateau);
    let level = plateau * 10f64.powf(opts.profile_decades);
    let k_prof = (0..body)
        .rev()
        .find(|&k| sup_error[k] >= level)
        .unwrap_or(0);
    // The temporal rate uses the samples that stand above the plateau.
    let k_fit = (0..body)
        .rev()
        .find(|&k| sup_error[k] >= 10.0 * plateau)
        .unwrap_or(body - 1)
        .max(MIN_SAMPLES);
    let reduced: Vec<f64> = sup_error.iter().map(|&e| e - plateau).collect();
    let omega2 = fit_exponential(&times[..k_fit], &reduced[..k_fit])?;
    let row = &rows[k_prof];
    let z_left = w.left_periods as f64 * w.period;
    let z_peak = row
        .iter()
        .filter(|p| p.0 >= w.period)
        .fold((w.period, 0.0), |m, p| if p.1 > m.1 { *p } else { m })
        .0;
    let (zs, es): (Vec<f64>, Vec<f64>) = row
        .iter()
        .filter(|p| p.0 >= z_peak && p.0 <= z_left - 0.5 * w.period)
        .copied()
        .unzip();
    let omega1 = fit_exponential(&zs, &es)?;
    let k = omega1.m.max(omega2.m);
    let mut inside = 0usize;
    let mut total = 0usize;
    for (row, &t) in rows.iter().zip(&times) {
        for &(z, e) in row {
            let bound = 2.0 * k * ((-omega1.delta * z).exp() + (-omega2.delta * t).exp()) + plateau;
            total += 1;
            if e <= bound {
                inside += 1;
            }
        }
    }
    Ok(FmReport {
        t_star,
        t_profile: times[k_prof],
        omega1,
        omega2,
        plateau,
        k,
        envelope_fraction: inside as f64 / total.max(1) as f64,
        below_floor,
        times,
        sup_error,
    })
}

/// Front residual floor below which the shift is considered settled.
pub fn shift_floor(dx: f64) -> f64 {
    1e-3 * dx
}
