//! Super- and subsolutions `alpha(t) V(x, t + beta(t))` built from the
//! periodic wave, and the sandwich of a spreading solution between them.
//!
//! With `sigma = +1` (super) or `-1` (sub):
//! `alpha = 1 + sigma alpha0 e^{-delta t}` and
//! `t + beta = t + n T + sigma (beta0 / delta) (1 - e^{-delta t})`.

use serde::{Deserialize, Serialize};

use crate::analysis::ratios::RatioReport;
use crate::analysis::spread::SpreadingRun;
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::renorm::WaveProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Barrier {
    Super,
    Sub,
}

impl Barrier {
    fn sigma(self) -> f64 {
        match self {
            Barrier::Super => 1.0,
            Barrier::Sub => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperSubParams {
    pub kind: Barrier,
    pub alpha0: f64,
    pub beta0: f64,
    pub delta: f64,
    /// Whole periods of initial shift `n T`.
    pub n: i64,
}

impl SuperSubParams {
    pub fn alpha(&self, t: f64) -> f64 {
        1.0 + self.kind.sigma() * self.alpha0 * (-self.delta * t).exp()
    }

    pub fn alpha_dot(&self, t: f64) -> f64 {
        -self.kind.sigma() * self.delta * self.alpha0 * (-self.delta * t).exp()
    }

    /// Time argument `t + beta(t)` of the wave.
    pub fn shifted(&self, t: f64, t_period: f64) -> f64 {
        t + self.n as f64 * t_period
            + self.kind.sigma() * (self.beta0 / self.delta) * (1.0 - (-self.delta * t).exp())
    }

    pub fn shifted_dot(&self, t: f64) -> f64 {
        1.0 + self.kind.sigma() * self.beta0 * (-self.delta * t).exp()
    }

    /// Limit of `t + beta(t) - t` as `t -> inf`.
    pub fn asymptotic_shift(&self, t_period: f64) -> f64 {
        self.n as f64 * t_period + self.kind.sigma() * self.beta0 / self.delta
    }
}

/// Time and space derivatives of `V` on the frames of the first half, with a
/// mask of the cells where all stencils lie strictly inside the support.
#[derive(Debug, Clone)]
pub struct WaveDerivs {
    pub vt: Vec<Vec<f64>>,
    pub vx: Vec<Vec<f64>>,
    pub vxx: Vec<Vec<f64>>,
    pub valid: Vec<Vec<bool>>,
}

/// Cells between a stencil point and the front that must stay positive.
const FRONT_GUARD: usize = 3;

pub fn wave_derivatives(w: &WaveProfile, floor: f64) -> WaveDerivs {
    let half = w.half;
    let n = w.n_cells();
    let dt = w.dt();
    let dx = w.dx;
    let v = &w.v;
    let (mut vt, mut vx, mut vxx, mut valid) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 0..half {
        let stencil: [usize; 3] = if k == 0 {
            [0, 1, 2]
        } else if k + 1 == half {
            [k - 2, k - 1, k]
        } else {
            [k - 1, k, k + 1]
        };
        let mut t_row = vec![0.0; n];
        let mut x_row = vec![0.0; n];
        let mut xx_row = vec![0.0; n];
        let mut ok = vec![false; n];
        for i in 1..n.saturating_sub(FRONT_GUARD) {
            let inside =
                stencil.iter().all(|&s| v[s][i + FRONT_GUARD] > floor) && v[k][i - 1] > floor;
            if !inside {
                continue;
            }
            ok[i] = true;
            t_row[i] = if k == 0 {
                (-3.0 * v[0][i] + 4.0 * v[1][i] - v[2][i]) / (2.0 * dt)
            } else if k + 1 == half {
                (3.0 * v[k][i] - 4.0 * v[k - 1][i] + v[k - 2][i]) / (2.0 * dt)
            } else {
                (v[k + 1][i] - v[k - 1][i]) / (2.0 * dt)
            };
            x_row[i] = (v[k][i + 1] - v[k][i - 1]) / (2.0 * dx);
            xx_row[i] = (v[k][i + 1] - 2.0 * v[k][i] + v[k][i - 1]) / (dx * dx);
        }
        vt.push(t_row);
        vx.push(x_row);
        vxx.push(xx_row);
        valid.push(ok);
    }
    WaveDerivs { vt, vx, vxx, valid }
}

/// `(V, V_t, V_x, V_xx)` at window cell `i` and time `s`, both already
/// reduced to the first period. `None` when a stencil touches the front or
/// leaves the window.
fn local(w: &WaveProfile, d: &WaveDerivs, i: isize, s: f64) -> Option<[f64; 4]> {
    let half = w.half;
    let n = w.n_cells() as isize;
    let cells = w.cells_per_period as isize;
    let dt = w.dt();
    let j = ((s / dt).floor().max(0.0) as usize).min(half - 1);
    let (k2, i2, wt) = if j + 1 < half {
        (j + 1, i, (s - w.times[j]) / dt)
    } else {
        // D(x, T) = D(x - L, 0).
        (0, i - cells, (s - w.times[j]) / (w.t_period - w.times[j]))
    };
    let wt = wt.clamp(0.0, 1.0);
    let get = |k: usize, i: isize| -> Option<[f64; 4]> {
        if i < 0 || i >= n {
            return None;
        }
        let i = i as usize;
        if !d.valid[k][i] {
            return None;
        }
        Some([w.v[k][i], d.vt[k][i], d.vx[k][i], d.vxx[k][i]])
    };
    let a = get(j, i)?;
    let b = get(k2, i2)?;
    Some([0, 1, 2, 3].map(|m| a[m] * (1.0 - wt) + b[m] * wt))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    /// Extremes of `N[v]` over the evaluated points.
    pub min: f64,
    pub max: f64,
    /// Worst signed value with the favourable sign removed, split into the
    /// region `D` behind `R - z0` and the front region `E`.
    pub worst_d: f64,
    pub worst_e: f64,
    pub violations: usize,
    pub total: usize,
}

impl ResidualStats {
    pub fn violation_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.violations as f64 / self.total as f64
        }
    }
}

/// Sample grid for residual evaluation: cells `x_i >= 0` of the spreading
/// grid and times `tau` in `[0, tau_end]`.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    pub x0: f64,
    pub dx: f64,
    pub cells: usize,
    pub taus: Vec<f64>,
}

fn window_index(w: &WaveProfile, x: f64) -> Option<isize> {
    let s = (x - w.x0()) / w.dx - 0.5;
    let i = s.round();
    if (s - i).abs() > 1e-6 {
        return None;
    }
    Some(i as isize)
}

/// `N[v] = v_t - B(v) v_xx - v_x^2 - h(x, v)` for `v = alpha V(x, t + beta)`.
/// Points closer than `z0` to the front are tagged as region `E`. A point
/// violates the inequality when `sigma N[v] < -tol`.
pub fn barrier_residual(
    spec: &ProblemSpec,
    w: &WaveProfile,
    d: &WaveDerivs,
    p: &SuperSubParams,
    samples: &SampleGrid,
    z0: f64,
    tol: f64,
) -> ResidualStats {
    let sigma = p.kind.sigma();
    let mut st = ResidualStats {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        worst_d: f64::INFINITY,
        worst_e: f64::INFINITY,
        violations: 0,
        total: 0,
    };
    for &tau in &samples.taus {
        let big_s = p.shifted(tau, w.t_period);
        let a = p.alpha(tau);
        let a_dot = p.alpha_dot(tau);
        let s_dot = p.shifted_dot(tau);
        let k = (big_s / w.t_period).floor();
        let s = big_s - k * w.t_period;
        let r = w.r_eval(big_s);
        for c in 0..samples.cells {
            let x = samples.x0 + (c as f64 + 0.5) * samples.dx;
            if x < 0.0 || x > r {
                continue;
            }
            let Some(i) = window_index(w, x - k * w.period) else {
                continue;
            };
            let Some([v, vt, vx, vxx]) = local(w, d, i, s) else {
                continue;
            };
            let val = a * v;
            let n_v = a_dot * v + a * s_dot * vt
                - spec.b_of(val) * a * vxx
                - a * a * vx * vx
                - spec.h_of(x, val);
            let signed = sigma * n_v;
            st.min = st.min.min(n_v);
            st.max = st.max.max(n_v);
            if x <= r - z0 {
                st.worst_d = st.worst_d.min(signed);
            } else {
                st.worst_e = st.worst_e.min(signed);
            }
            st.total += 1;
            if signed < -tol {
                st.violations += 1;
            }
        }
    }
    st
}

/// Smallest `z0` with `V >= level` on `[x_min, R(t) - z0]` for every frame of
/// the first half, where `x_min` is the left edge of the window.
pub fn plateau_distance(w: &WaveProfile, level: f64) -> f64 {
    let mut z0: f64 = 0.0;
    for k in 0..w.half {
        let r = w.r_eval(w.times[k]);
        let first_low = w.v[k].iter().position(|&v| v < level);
        if let Some(i) = first_low {
            z0 = z0.max(r - w.x(i) + w.dx);
        }
    }
    z0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// The comparison starts once the right front has advanced this many
    /// periods beyond its initial position.
    pub match_periods: f64,
    /// Tolerance on the residual sign in units of the largest residual of
    /// `V` itself on the same sample points.
    pub tol_factor: f64,
    /// Largest admissible fraction of sign violations.
    pub max_violation_fraction: f64,
    /// Tolerance of the pointwise sandwich in pressure.
    pub tol_sandwich: f64,
    /// Samples of `tau` per wave period.
    pub taus_per_period: usize,
    /// Safety factor on the fitted `alpha0`.
    pub alpha_margin: f64,
    pub max_doublings: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            match_periods: 4.0,
            tol_factor: 1.0,
            max_violation_fraction: 1e-3,
            tol_sandwich: 1e-6,
            taus_per_period: 8,
            alpha_margin: 1.1,
            max_doublings: 40,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarrierReport {
    pub params: SuperSubParams,
    pub stats: ResidualStats,
    /// Doublings of `beta0` needed.
    pub doublings: usize,
    pub ordered_at_match: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub checked: usize,
    pub violations: usize,
    /// Largest excess `v - v1` or `v2 - v` seen, negative when strict.
    pub worst: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifyReport {
    /// Time `T'` at which the comparison starts.
    pub t_match: f64,
    pub lambda0: f64,
    pub z0: f64,
    /// Residual of `V` itself on the sample points.
    pub base: ResidualStats,
    pub tol_res: f64,
    pub upper: BarrierReport,
    pub lower: BarrierReport,
    pub sandwich: SandwichReport,
    /// `[s2, s1]` containing the asymptotic shift `t*`.
    pub shift_window: (f64, f64),
}

impl CertifyReport {
    pub fn certified(&self, opts: &CertifyOptions) -> bool {
        let ok = |b: &BarrierReport| {
            b.ordered_at_match
                && b.stats.violation_fraction() <= opts.max_violation_fraction
                && b.params.beta0 > b.params.alpha0
        };
        ok(&self.upper) && ok(&self.lower) && self.sandwich.violations == 0
    }
}

/// Pressure of the spreading solution at snapshot `k`, cell `c`.
fn v_at(spec: &ProblemSpec, sr: &SpreadingRun, k: usize, c: usize) -> f64 {
    spec.pressure(sr.run.trajectory.snapshots[k].u[c])
}

/// `V(x, S)` or `None` left of the window.
fn wave_at(w: &WaveProfile, x: f64, s: f64) -> Option<f64> {
    w.eval(x, s)
}

/// Builds both barriers from the state at the matching time, enlarges
/// `beta0` until the residual has the right sign, and checks the sandwich at
/// all later snapshots on `x >= 0` inside the wave window.
pub fn check_supersub(
    spec: &ProblemSpec,
    w: &WaveProfile,
    sr: &SpreadingRun,
    ratios: &RatioReport,
    delta_sub: f64,
    opts: &CertifyOptions,
) -> Result<CertifyReport> {
    if sr.cells_per_period != w.cells_per_period {
        return Err(Error::Precondition(
            "spreading run and wave use different grids".into(),
        ));
    }
    if !(ratios.lambda0 > 0.0) {
        return Err(Error::RatioGate {
            lambda0: ratios.lambda0,
        });
    }
    let traj = &sr.run.trajectory;
    let trace = &sr.run.trace;
    let grid = sr.grid();
    let r_start = trace
        .r
        .first()
        .copied()
        .ok_or_else(|| Error::Data("empty front trace".into()))?;
    let target = r_start + opts.match_periods * w.period;
    let k_match = traj
        .snapshots
        .iter()
        .position(|f| trace.r_at(f.t).is_some_and(|r| r >= target))
        .ok_or_else(|| Error::Data(format!("front never reached {target}")))?;
    let t_match = traj.snapshots[k_match].t;
    let r_match = trace.r_at(t_match).expect("trace covers snapshots");
    let t_end = traj.last().expect("nonempty").t;
    let floor = 1e-12 * spec.kappa_hi();
    let d = wave_derivatives(w, spec.pressure(floor));
    let z0 = plateau_distance(w, spec.pressure(spec.kappa_lo()) - 0.5 * ratios.eps0);
    let per = w.t_period / opts.taus_per_period as f64;
    let taus: Vec<f64> = (0..)
        .map(|k| k as f64 * per)
        .take_while(|&t| t <= t_end - t_match)
        .collect();
    let samples = SampleGrid {
        x0: grid.x0,
        dx: grid.dx,
        cells: grid.n_cells,
        taus,
    };
    let l = w.period;
    let cells_x: Vec<usize> = (0..grid.n_cells).filter(|&c| grid.x(c) >= 0.0).collect();

    let base_params = SuperSubParams {
        kind: Barrier::Super,
        alpha0: 0.0,
        beta0: 0.0,
        delta: 1.0,
        n: 0,
    };
    let base = barrier_residual(spec, w, &d, &base_params, &samples, z0, f64::INFINITY);
    let tol_res = opts.tol_factor * base.min.abs().max(base.max.abs());

    // Initial ordering at the matching time fixes n and alpha0.
    let ratio_bounds = |n: i64| -> (f64, f64) {
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for &c in &cells_x {
            let x = grid.x(c);
            let Some(vw) = wave_at(w, x, n as f64 * w.t_period) else {
                continue;
            };
            let v = v_at(spec, sr, k_match, c);
            if vw > 0.0 {
                hi = hi.max(v / vw);
                lo = lo.min(v / vw);
            } else if v > 0.0 {
                hi = f64::INFINITY;
            }
        }
        (hi, lo)
    };
    let n1 = (r_match / l).ceil() as i64 + 1;
    let (hi1, _) = ratio_bounds(n1);
    let alpha1 = (opts.alpha_margin * (hi1 - 1.0)).max(1e-3);
    let delta1 = (0.5 * ratios.lambda0).min(1.0);
    let mut n2 = ((r_match / l).floor() as i64 - 2).max(0);
    let mut lo2 = ratio_bounds(n2).1;
    while !(lo2 > 0.0) && n2 > 0 {
        n2 -= 1;
        lo2 = ratio_bounds(n2).1;
    }
    let alpha2 = (1.0 - lo2.min(1.0) / opts.alpha_margin).clamp(1e-3, 1.0 - 1e-6);
    let delta2 = delta_sub.min(0.5 * ratios.lambda0).min(1.0);

    let grow = |kind: Barrier, alpha0: f64, delta: f64, n: i64| -> BarrierReport {
        let mut params = SuperSubParams {
            kind,
            alpha0,
            beta0: 2.0 * alpha0,
            delta,
            n,
        };
        let mut stats = barrier_residual(spec, w, &d, &params, &samples, z0, tol_res);
        let mut doublings = 0;
        while stats.violation_fraction() > opts.max_violation_fraction
            && doublings < opts.max_doublings
        {
            params.beta0 *= 2.0;
            doublings += 1;
            stats = barrier_residual(spec, w, &d, &params, &samples, z0, tol_res);
        }
        BarrierReport {
            params,
            stats,
            doublings,
            ordered_at_match: true,
        }
    };
    let mut upper = grow(Barrier::Super, alpha1, delta1, n1);
    let mut lower = grow(Barrier::Sub, alpha2, delta2, n2);
    upper.ordered_at_match = hi1.is_finite();
    lower.ordered_at_match = lo2 > 0.0;

    let mut sandwich = SandwichReport {
        checked: 0,
        violations: 0,
        worst: f64::NEG_INFINITY,
    };
    for k in k_match..traj.snapshots.len() {
        let t = traj.snapshots[k].t;
        let tau = t - t_match;
        let (p1, p2) = (&upper.params, &lower.params);
        let (s1, s2) = (p1.shifted(tau, w.t_period), p2.shifted(tau, w.t_period));
        let (a1, a2) = (p1.alpha(tau), p2.alpha(tau));
        for &c in &cells_x {
            let x = grid.x(c);
            let v = v_at(spec, sr, k, c);
            let mut bad = false;
            if let Some(vw) = wave_at(w, x, s1) {
                if v > 0.0 || vw > 0.0 {
                    let e = v - a1 * vw;
                    sandwich.worst = sandwich.worst.max(e);
                    bad |= e > opts.tol_sandwich;
                    sandwich.checked += 1;
                }
            }
            if let Some(vw) = wave_at(w, x, s2) {
                if v > 0.0 || vw > 0.0 {
                    let e = a2 * vw - v;
                    sandwich.worst = sandwich.worst.max(e);
                    bad |= e > opts.tol_sandwich;
                    sandwich.checked += 1;
                }
            }
            if bad {
                sandwich.violations += 1;
            }
        }
    }
    let s1 = upper.params.asymptotic_shift(w.t_period) - t_match;
    let s2 = lower.params.asymptotic_shift(w.t_period) - t_match;
    Ok(CertifyReport {
        t_match,
        lambda0: ratios.lambda0,
        z0,
        base,
        tol_res,
        upper,
        lower,
        sandwich,
        shift_window: (s2, s1),
    })
}
