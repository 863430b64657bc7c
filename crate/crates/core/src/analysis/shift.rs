use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::roots::golden_section;
use crate::renorm::WaveProfile;
use crate::solver::FreeBoundaryTrace;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftReport {
    pub t_star: f64,
    /// Window `[s2, s1]` searched.
    pub window: (f64, f64),
    /// Root mean square of `r(t) - R(t + t*)` over the fitted tail.
    pub rms: f64,
    /// Mean `|r(t) - R(t + t*)|` over each of the last wave periods.
    pub by_period: Vec<f64>,
}

impl ShiftReport {
    /// Residuals decrease over the last periods or stay below `floor`.
    pub fn settled(&self, floor: f64) -> bool {
        self.by_period
            .windows(2)
            .all(|p| p[1] <= p[0] * 1.05 || p[1] <= floor)
    }
}

const SCAN: usize = 64;

/// Least-squares `t*` with `r(t) ~ R(t + t*)` over trace samples with
/// `t >= t_from`: a coarse scan over the window, then golden section around
/// the best cell.
pub fn front_shift_estimate(
    trace: &FreeBoundaryTrace,
    w: &WaveProfile,
    window: (f64, f64),
    t_from: f64,
    periods: usize,
) -> Result<ShiftReport> {
    let idx: Vec<usize> = (0..trace.len()).filter(|&i| trace.t[i] >= t_from).collect();
    if idx.len() < 4 {
        return Err(Error::Data(format!(
            "too few front samples after t = {t_from}"
        )));
    }
    let (a, b) = (window.0.min(window.1), window.0.max(window.1));
    let cost = |s: f64| -> f64 {
        idx.iter()
            .map(|&i| (trace.r[i] - w.r_eval(trace.t[i] + s)).powi(2))
            .sum::<f64>()
            / idx.len() as f64
    };
    let h = (b - a) / SCAN as f64;
    let best = (0..=SCAN)
        .map(|k| a + k as f64 * h)
        .map(|s| (s, cost(s)))
        .fold((a, f64::INFINITY), |m, q| if q.1 < m.1 { q } else { m });
    let (t_star, c) = golden_section(
        cost,
        (best.0 - h).max(a),
        (best.0 + h).min(b),
        1e-10 * (1.0 + b - a),
    );
    let t_end = trace.t[trace.len() - 1];
    let mut by_period = Vec::new();
    for k in (0..periods).rev() {
        let hi = t_end - k as f64 * w.t_period;
        let lo = hi - w.t_period;
        let sel: Vec<f64> = (0..trace.len())
            .filter(|&i| trace.t[i] > lo && trace.t[i] <= hi)
            .map(|i| (trace.r[i] - w.r_eval(trace.t[i] + t_star)).abs())
            .collect();
        if !sel.is_empty() {
            by_period.push(sel.iter().sum::<f64>() / sel.len() as f64);
        }
    }
    Ok(ShiftReport {
        t_star,
        window: (a, b),
        rms: c.sqrt(),
        by_period,
    })
}
