//! Sub-cell free-boundary location from the pressure profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::numerics::fit::line_fit;
use crate::solver::field::Field;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Front {
    pub l: f64,
    pub r: f64,
    pub i_l: usize,
    pub i_r: usize,
}

/// Cells whose pressure is below this fraction of the pressure drop into
/// them are treated as numerical precursors of the front.
pub const PRECURSOR_RATIO: f64 = 0.1;

/// Extrapolates the pressure linearly to zero from the two cells just
/// behind the discrete transition layer at each end. The explicit scheme
/// leaves a few super-exponentially small cells ahead of the front; those
/// are skipped first. Extrapolating from the smooth interior is exact on
/// linear pressure and avoids the cell-crossing ripple of the outermost
/// cells. Falls back to the outer cell edge when the adjacent pressure does
/// not decrease towards the edge, and never places the front beyond the
/// first empty cell centre.
pub fn locate_front_with(spec: &ProblemSpec, field: &Field, floor: f64) -> Option<Front> {
    let (lo, hi) = field.support(floor)?;
    let g = &field.grid;
    let dx = g.dx;
    let p = |i: usize| spec.pressure(field.u[i]);
    let mut i_r = hi;
    while i_r > lo {
        let den = p(i_r - 1) - p(i_r);
        if den > 0.0 && p(i_r) < PRECURSOR_RATIO * den {
            i_r -= 1;
        } else {
            break;
        }
    }
    let mut i_l = lo;
    while i_l < i_r {
        let den = p(i_l + 1) - p(i_l);
        if den > 0.0 && p(i_l) < PRECURSOR_RATIO * den {
            i_l += 1;
        } else {
            break;
        }
    }
    let r = {
        let k = i_r.saturating_sub(FRONT_LAYER).max(lo);
        let x = g.x(k);
        let vr = p(k);
        let vin = if k > lo { p(k - 1) } else { 0.0 };
        let den = vin - vr;
        if den <= 0.0 {
            g.x(i_r) + 0.5 * dx
        } else {
            (x + vr * dx / den).min(g.x(hi) + dx)
        }
    };
    let l = {
        let k = (i_l + FRONT_LAYER).min(i_r).min(hi);
        let x = g.x(k);
        let vl = p(k);
        let vin = if k < hi { p(k + 1) } else { 0.0 };
        let den = vin - vl;
        if den <= 0.0 {
            g.x(i_l) - 0.5 * dx
        } else {
            (x - vl * dx / den).max(g.x(lo) - dx)
        }
    };
    Some(Front { l, r, i_l, i_r })
}

/// `locate_front_with` using the default floor `1e-12 kappa^0`.
pub fn locate_front(spec: &ProblemSpec, field: &Field) -> Option<(f64, f64)> {
    locate_front_with(spec, field, 1e-12 * spec.kappa_hi()).map(|f| (f.l, f.r))
}

/// Cells next to the front carrying the discrete transition layer; the
/// gradient stencil starts behind them.
pub const FRONT_LAYER: usize = 2;

/// One-sided pressure gradient `v_x(r-)` from the quadratic through three
/// positive cells behind the front layer, extrapolated to `r`. The flag is
/// set when the support is too short and a shorter stencil is used.
pub fn pressure_slope_right(spec: &ProblemSpec, field: &Field, front: &Front) -> (f64, bool) {
    let g = &field.grid;
    let dx = g.dx;
    let p = |k: usize| spec.pressure(field.u[k]);
    let width = front.i_r - front.i_l;
    let skip = FRONT_LAYER.min(width.saturating_sub(2));
    let i = front.i_r - skip;
    if i >= front.i_l + 2 {
        let (v0, v1, v2) = (p(i - 2), p(i - 1), p(i));
        let d1 = (v2 - v1) / dx;
        let d2 = (v2 - 2.0 * v1 + v0) / (dx * dx);
        let mid = g.x(i) - 0.5 * dx;
        (d1 + d2 * (front.r - mid), skip < FRONT_LAYER)
    } else if i > front.i_l {
        ((p(i) - p(i - 1)) / dx, true)
    } else {
        (-p(i) / (0.5 * dx), true)
    }
}

/// Mirror of `pressure_slope_right` at the left front, `v_x(l+)`.
pub fn pressure_slope_left(spec: &ProblemSpec, field: &Field, front: &Front) -> (f64, bool) {
    let g = &field.grid;
    let dx = g.dx;
    let p = |k: usize| spec.pressure(field.u[k]);
    let width = front.i_r - front.i_l;
    let skip = FRONT_LAYER.min(width.saturating_sub(2));
    let i = front.i_l + skip;
    if i + 2 <= front.i_r {
        let (v0, v1, v2) = (p(i), p(i + 1), p(i + 2));
        let d1 = (v1 - v0) / dx;
        let d2 = (v2 - 2.0 * v1 + v0) / (dx * dx);
        let mid = g.x(i) + 0.5 * dx;
        (d1 + d2 * (front.l - mid), skip < FRONT_LAYER)
    } else if i < front.i_r {
        ((p(i + 1) - p(i)) / dx, true)
    } else {
        (p(i) / (0.5 * dx), true)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundaryTrace {
    pub t: Vec<f64>,
    pub l: Vec<f64>,
    pub r: Vec<f64>,
    /// `v_x(r-)` at each sample.
    pub vx_r: Vec<f64>,
    /// `v_x(l+)`, NaN where not recorded.
    #[serde(default)]
    pub vx_l: Vec<f64>,
    pub degraded: Vec<bool>,
    pub rprime: Vec<f64>,
    pub darcy_residual: Vec<f64>,
}

impl FreeBoundaryTrace {
    pub fn push(&mut self, t: f64, l: f64, r: f64, vx_r: f64, degraded: bool) {
        self.push_both(t, l, r, f64::NAN, vx_r, degraded);
    }

    pub fn push_both(&mut self, t: f64, l: f64, r: f64, vx_l: f64, vx_r: f64, degraded: bool) {
        self.t.push(t);
        self.l.push(l);
        self.r.push(r);
        self.vx_l.push(vx_l);
        self.vx_r.push(vx_r);
        self.degraded.push(degraded);
    }

    /// Drops the newest sample.
    pub fn pop(&mut self) {
        self.t.pop();
        self.l.pop();
        self.r.pop();
        self.vx_l.pop();
        self.vx_r.pop();
        self.degraded.pop();
    }

    /// The trace of the reflected solution `u(-x, t)`, finalized with window `w`.
    pub fn mirrored(&self, w: usize) -> Self {
        let mut m = Self {
            t: self.t.clone(),
            l: self.r.iter().map(|r| -r).collect(),
            r: self.l.iter().map(|l| -l).collect(),
            vx_r: self.vx_l.iter().map(|v| -v).collect(),
            vx_l: self.vx_r.iter().map(|v| -v).collect(),
            degraded: self.degraded.clone(),
            ..Default::default()
        };
        m.finalize(w);
        m
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Fills `rprime` and `darcy_residual` with windowed slopes of width `w`.
    pub fn finalize(&mut self, w: usize) {
        let n = self.t.len();
        self.rprime = (0..n)
            .map(|i| windowed_slope(&self.t, &self.r, i, w))
            .collect();
        self.darcy_residual = (0..n)
            .map(|i| (self.rprime[i] + self.vx_r[i]).abs())
            .collect();
    }

    /// Sample index of the time nearest to `t`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        if self.t.is_empty() || t < self.t[0] || t > self.t[self.t.len() - 1] {
            return None;
        }
        let j = self.t.partition_point(|&s| s < t);
        if j == 0 {
            return Some(0);
        }
        if j >= self.t.len() {
            return Some(self.t.len() - 1);
        }
        Some(if (self.t[j] - t) < (t - self.t[j - 1]) {
            j
        } else {
            j - 1
        })
    }

    /// Linear interpolation of `r` at `t`.
    pub fn r_at(&self, t: f64) -> Option<f64> {
        if self.t.is_empty() || t < self.t[0] || t > self.t[self.t.len() - 1] {
            return None;
        }
        Some(crate::numerics::fit::interp_sorted(&self.t, &self.r, t))
    }
}

/// Least-squares slope over the `w` samples centred on `i` (clipped at the ends).
fn windowed_slope(t: &[f64], y: &[f64], i: usize, w: usize) -> f64 {
    let n = t.len();
    if n < 2 {
        return 0.0;
    }
    let half = (w.max(2)) / 2;
    let mut a = i.saturating_sub(half);
    let mut b = (i + half).min(n - 1);
    if b - a < 1 {
        if a > 0 {
            a -= 1;
        } else {
            b = (b + 1).min(n - 1);
        }
    }
    line_fit(&t[a..=b], &y[a..=b])
        .map(|f| f.slope)
        .unwrap_or(0.0)
}

/// Front speed at `t` from a window of `w` trace samples.
pub fn front_speed(trace: &FreeBoundaryTrace, t: f64, w: usize) -> Result<f64> {
    let i = trace
        .index_of(t)
        .ok_or_else(|| Error::Data(format!("t = {t} outside the trace")))?;
    Ok(windowed_slope(&trace.t, &trace.r, i, w))
}
