//! Renormalized sequence `v_n(x,t) = v(x + nL, t + t_n)` and its limit.

use serde::{Deserialize, Serialize};

use crate::analysis::fit::{fit_exponential, FitResult};
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::renorm::crossings::CrossingTimes;
use crate::renorm::heaviside::HeavisideRun;
use crate::solver::StationaryProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractOptions {
    /// Sup-norm gap between consecutive iterates (pressure) declaring convergence.
    pub tol_renorm: f64,
    pub n_min: usize,
    /// Increase of the sequence tolerated, in units of `kappa^0`.
    pub monotone_tol: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            tol_renorm: 1e-3,
            n_min: 12,
            monotone_tol: 1e-3,
        }
    }
}

/// A periodic traveling sharp wave on the window `[-left L, right L]` and
/// the time interval `[0, 2T)`, with the front at the origin at `t = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveProfile {
    pub period: f64,
    /// Time period `T`.
    pub t_period: f64,
    /// `L / T`.
    pub c_star: f64,
    pub dx: f64,
    pub cells_per_period: usize,
    pub left_periods: usize,
    pub right_periods: usize,
    /// Frame times: `j dt` below `T`, then `T + j dt` below `2T`.
    pub times: Vec<f64>,
    /// Frames in the first half.
    pub half: usize,
    /// Pressure `V` at cell centres `x_i = -left L + (i + 1/2) dx`.
    pub v: Vec<Vec<f64>>,
    pub r_t: Vec<f64>,
    pub r: Vec<f64>,
    pub rprime: Vec<f64>,
    /// `|R' + V_x(R-)|` from the trace.
    pub darcy: Vec<f64>,
    /// `min R'` over `[0, T]`.
    pub delta_meas: f64,
    /// Average of `V` over the leftmost period and `[0, T)`.
    pub q: Vec<f64>,
    /// `sup |v_{n+1} - v_n|` for consecutive recorded crossings.
    pub gaps: Vec<f64>,
    /// Crossing index used for `V`.
    pub n: usize,
    pub monotone_excess: f64,
    pub crossings: CrossingTimes,
    /// `T` from the regression slope through `(t_n, nL)`.
    pub t_regression: f64,
}

impl WaveProfile {
    pub fn n_cells(&self) -> usize {
        self.v.first().map_or(0, |f| f.len())
    }

    pub fn x(&self, i: usize) -> f64 {
        -(self.left_periods as f64) * self.period + (i as f64 + 0.5) * self.dx
    }

    pub fn x0(&self) -> f64 {
        -(self.left_periods as f64) * self.period
    }

    /// Time step between frames.
    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Linear interpolation of frame `k` in `x`; `None` left of the
    /// window, 0 right of it.
    pub fn sample(&self, k: usize, x: f64) -> Option<f64> {
        let s = (x - self.x0()) / self.dx - 0.5;
        let n = self.n_cells();
        if s < -0.5 {
            return None;
        }
        if s >= n as f64 - 1.0 {
            return Some(if s <= n as f64 - 0.5 {
                self.v[k][n - 1]
            } else {
                0.0
            });
        }
        let i = s.max(0.0).floor() as usize;
        let w = s - i as f64;
        Some(self.v[k][i] * (1.0 - w.max(0.0)) + self.v[k][i + 1] * w.max(0.0))
    }

    /// `V(x, t)` for any `t >= 0` through `V(x, t + kT) = V(x - kL, t)`,
    /// linear in time between frames of the first half.
    pub fn eval(&self, x: f64, t: f64) -> Option<f64> {
        let k = (t / self.t_period).floor();
        let s = t - k * self.t_period;
        let xs = x - k * self.period;
        let dt = self.dt();
        let j = ((s / dt).floor() as usize).min(self.half - 1);
        let w = ((s - self.times[j]) / dt).clamp(0.0, 1.0);
        let a = self.sample(j, xs)?;
        let b = if j + 1 < self.half {
            self.sample(j + 1, xs)?
        } else {
            // First frame of the second half is V(., T + 0) = V(. - L, 0).
            self.sample(self.half, xs)?
        };
        Some(a * (1.0 - w) + b * w)
    }

    /// `R(t)` for any `t >= 0`, extended by `R(t + kT) = R(t) + kL`.
    pub fn r_eval(&self, t: f64) -> f64 {
        let k = (t / self.t_period).floor();
        let s = t - k * self.t_period;
        crate::numerics::fit::interp_sorted(&self.r_t, &self.r, s) + k * self.period
    }
}

/// Builds the sequence from the recorded crossings, checks that it is
/// decreasing up to `monotone_tol kappa^0` and that the last gap is below
/// `tol_renorm`, and assembles `V` from the last complete pair.
pub fn extract_wave(
    spec: &ProblemSpec,
    run: &HeavisideRun,
    ct: &CrossingTimes,
    opts: &ExtractOptions,
) -> Result<WaveProfile> {
    let recs: Vec<_> = run
        .records
        .iter()
        .filter(|r| !r.frames.is_empty())
        .collect();
    if recs.len() < 2 || recs[recs.len() - 2].n < opts.n_min {
        return Err(Error::NotConverged { gaps: Vec::new() });
    }
    let df = run.dt_frame;
    let cells = run.cells_per_period;
    let mut gaps = Vec::new();
    let mut excess: f64 = f64::NEG_INFINITY;
    let mut excess_at = 0;
    for w in recs.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Each record covers its own increment plus one frame.
        let jn = a.frames.len().min(b.frames.len()) - 1;
        let mut gap: f64 = 0.0;
        for j in 0..jn {
            for (ua, ub) in a.frames[j].iter().zip(&b.frames[j]) {
                gap = gap.max((spec.pressure(*ub) - spec.pressure(*ua)).abs());
                if ub - ua > excess {
                    excess = ub - ua;
                    excess_at = b.n;
                }
            }
        }
        gaps.push(gap);
    }
    if excess > opts.monotone_tol * spec.kappa_hi() {
        return Err(Error::NonMonotone {
            n: excess_at,
            excess,
        });
    }
    let last_gap = *gaps.last().expect("at least one pair");
    if !(last_gap < opts.tol_renorm) {
        return Err(Error::NotConverged { gaps });
    }
    let (a, b) = (recs[recs.len() - 2], recs[recs.len() - 1]);
    let t_period = b.t - a.t;
    let half = (0..a.frames.len())
        .take_while(|&j| (j as f64) * df < t_period * (1.0 - 1e-9))
        .count();
    let second = (0..b.frames.len())
        .take_while(|&j| (j as f64) * df < t_period * (1.0 - 1e-9))
        .count();
    let len = (run.left_periods + run.right_periods) * cells;
    let to_v = |f: &[f64]| -> Vec<f64> { f.iter().map(|&u| spec.pressure(u)).collect() };
    let mut times = Vec::new();
    let mut v = Vec::new();
    for j in 0..half {
        times.push(j as f64 * df);
        v.push(to_v(&a.frames[j][cells..cells + len]));
    }
    for j in 0..second {
        times.push(t_period + j as f64 * df);
        v.push(to_v(&b.frames[j][..len]));
    }
    // Front of the pair from the trace, with slopes over about two cell
    // crossings to average out the grid ripple.
    let mut trace = run.trace.clone();
    let c_guess = run.period / t_period;
    let w = ((2.0 * run.dx / c_guess) / (trace.t[1] - trace.t[0]).max(1e-12))
        .round()
        .max(5.0) as usize;
    trace.finalize(w);
    let shift = a.n as f64 * run.period;
    let (mut r_t, mut r, mut rprime, mut darcy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut delta_meas = f64::INFINITY;
    for i in 0..trace.len() {
        let s = trace.t[i] - a.t;
        if s < -1e-12 || s > 2.0 * t_period {
            continue;
        }
        r_t.push(s.max(0.0));
        r.push(trace.r[i] - shift);
        rprime.push(trace.rprime[i]);
        darcy.push(trace.darcy_residual[i]);
        if s <= t_period {
            delta_meas = delta_meas.min(trace.rprime[i]);
        }
    }
    let mut q = vec![0.0; cells];
    for f in &v[..half] {
        for j in 0..cells {
            q[j] += f[j] / half as f64;
        }
    }
    let from = ct.n.first().copied().unwrap_or(1).max(opts.n_min / 2);
    let c_reg = ct.regression_speed(from).unwrap_or(f64::NAN);
    Ok(WaveProfile {
        period: run.period,
        t_period,
        c_star: run.period / t_period,
        dx: run.dx,
        cells_per_period: cells,
        left_periods: run.left_periods,
        right_periods: run.right_periods,
        times,
        half,
        v,
        r_t,
        r,
        rprime,
        darcy,
        delta_meas,
        q,
        gaps,
        n: a.n,
        monotone_excess: excess,
        crossings: ct.clone(),
        t_regression: run.period / c_reg,
    })
}

/// `sup |V(x - L, t) - V(x, t + T)|` over the frames of the first half and
/// the matching frames of the second.
pub fn verify_periodicity(w: &WaveProfile) -> f64 {
    let cells = w.cells_per_period;
    let second = w.v.len() - w.half;
    let mut res: f64 = 0.0;
    for j in 0..w.half.min(second) {
        let (a, b) = (&w.v[j], &w.v[w.half + j]);
        for i in cells..a.len() {
            res = res.max((a[i - cells] - b[i]).abs());
        }
    }
    res
}

/// Minimum over sampled interior points with `V > floor` of the forward
/// difference `V_t`, and the number of such points where it is not positive.
pub fn time_monotonicity(w: &WaveProfile, floor: f64) -> (f64, usize, usize) {
    let dt = w.dt();
    let mut worst = f64::INFINITY;
    let mut bad = 0;
    let mut total = 0;
    for k in 0..w.half.saturating_sub(1) {
        for (a, b) in w.v[k].iter().zip(&w.v[k + 1]) {
            if *a > floor {
                let vt = (b - a) / dt;
                worst = worst.min(vt);
                total += 1;
                if !(vt > 0.0) {
                    bad += 1;
                }
            }
        }
    }
    (worst, bad, total)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailReport {
    /// `min (Psi(p) - V)` over the left half of the window and `[0, T)`.
    pub min_gap: f64,
    /// `log(Psi(p) - V) ~ log M* + delta* x` fitted over the left periods.
    pub fit: FitResult,
    /// Smallest `R^2` over the frames.
    pub worst_r2: f64,
    /// `max |q - Psi(p)|` over one period.
    pub q_error: f64,
}

/// Fits the exponential approach of `V` to `Psi(p)` as `x -> -inf` over
/// `periods` periods starting at the left edge of the window.
pub fn left_limit(
    spec: &ProblemSpec,
    w: &WaveProfile,
    p: &StationaryProfile,
    periods: usize,
) -> Result<TailReport> {
    let cells = w.cells_per_period;
    if p.cells() != cells {
        return Err(Error::Precondition(
            "stationary profile and wave use different grids".into(),
        ));
    }
    let psi_p: Vec<f64> = p.pressure(spec);
    let n = w.n_cells();
    let half_x = n / 2;
    let mut min_gap = f64::INFINITY;
    let mut deltas = Vec::new();
    let mut ms = Vec::new();
    let mut worst_r2: f64 = 1.0;
    let mut first: Option<FitResult> = None;
    let phase = |i: usize| (i + (w.left_periods * cells)) % cells;
    for k in 0..w.half {
        let f = &w.v[k];
        for i in 0..half_x {
            min_gap = min_gap.min(psi_p[phase(i)] - f[i]);
        }
        let m = (periods * cells).min(n);
        let xs: Vec<f64> = (0..m).map(|i| -w.x(i)).collect();
        let gs: Vec<f64> = (0..m).map(|i| psi_p[phase(i)] - f[i]).collect();
        let fit = fit_exponential(&xs, &gs)?;
        worst_r2 = worst_r2.min(fit.r2);
        deltas.push(fit.delta);
        ms.push(fit.m);
        first.get_or_insert(fit);
    }
    if !(min_gap > 0.0) {
        return Err(Error::Data(format!(
            "ordering violated: min (Psi(p) - V) = {min_gap:e}"
        )));
    }
    let mut fit = first.expect("at least one frame");
    fit.delta = deltas.iter().sum::<f64>() / deltas.len() as f64;
    fit.m = ms.iter().sum::<f64>() / ms.len() as f64;
    fit.r2 = worst_r2;
    let q_error = (0..cells)
        .map(|j| (w.q[j] - psi_p[j]).abs())
        .fold(0.0, f64::max);
    Ok(TailReport {
        min_gap,
        fit,
        worst_r2,
        q_error,
    })
}
