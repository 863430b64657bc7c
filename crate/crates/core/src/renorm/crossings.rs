use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fit::line_fit;
use crate::solver::FreeBoundaryTrace;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossingTimes {
    pub period: f64,
    pub n: Vec<usize>,
    /// `t_n` with `r(t_n) = nL`.
    pub t: Vec<f64>,
    /// `s_n = t_{n+1} - t_n`.
    pub s: Vec<f64>,
    /// `L / s_n`.
    pub cbar: Vec<f64>,
}

impl CrossingTimes {
    pub fn from_times(period: f64, n: Vec<usize>, t: Vec<f64>) -> Self {
        let s: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let cbar = s.iter().map(|&d| period / d).collect();
        Self {
            period,
            n,
            t,
            s,
            cbar,
        }
    }

    /// Largest relative decrease `(s_n - s_{n+1}) / s_n` over `n >= from`.
    pub fn worst_decrease(&self, from: usize) -> f64 {
        self.s
            .windows(2)
            .enumerate()
            .filter(|(i, _)| self.n[*i] >= from)
            .map(|(_, w)| (w[0] - w[1]) / w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Speed from the least-squares line through `(t_n, nL)` for `n >= from`.
    pub fn regression_speed(&self, from: usize) -> Option<f64> {
        let (ts, xs): (Vec<f64>, Vec<f64>) = self
            .n
            .iter()
            .zip(&self.t)
            .filter(|(&n, _)| n >= from)
            .map(|(&n, &t)| (t, n as f64 * self.period))
            .unzip();
        line_fit(&ts, &xs).map(|f| f.slope)
    }

    /// Relative spread of the last three `cbar` values.
    pub fn tail_spread(&self) -> f64 {
        let k = self.cbar.len();
        if k < 3 {
            return f64::INFINITY;
        }
        let last = &self.cbar[k - 3..];
        let hi = last.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = last.iter().copied().fold(f64::INFINITY, f64::min);
        (hi - lo) / lo
    }
}

/// First times at which `r` reaches each level `nL`, `n >= 1`, by linear
/// interpolation between trace samples. Decreases of `r` larger than `tol`
/// after the first crossing are rejected.
pub fn crossing_times(trace: &FreeBoundaryTrace, period: f64, tol: f64) -> Result<CrossingTimes> {
    let mut n = Vec::new();
    let mut t = Vec::new();
    let mut level = 1usize;
    let mut high = f64::NEG_INFINITY;
    for i in 1..trace.len() {
        let (ra, rb) = (trace.r[i - 1], trace.r[i]);
        if !t.is_empty() && rb < high - tol {
            return Err(Error::Data(format!(
                "front retreated by {:e} at t = {}",
                high - rb,
                trace.t[i]
            )));
        }
        high = high.max(rb);
        while rb >= level as f64 * period && ra < level as f64 * period {
            let x = level as f64 * period;
            let (ta, tb) = (trace.t[i - 1], trace.t[i]);
            n.push(level);
            t.push(ta + (tb - ta) * (x - ra) / (rb - ra));
            level += 1;
        }
    }
    Ok(CrossingTimes::from_times(period, n, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_front_gives_equal_increments() {
        let mut tr = FreeBoundaryTrace::default();
        for k in 0..=500 {
            let t = k as f64 * 0.01;
            tr.push(t, -1.0, 0.8 * t, -0.8, false);
        }
        let ct = crossing_times(&tr, 0.5, 1e-9).unwrap();
        assert_eq!(ct.n, (1..=8).collect::<Vec<_>>());
        for (k, &tn) in ct.t.iter().enumerate() {
            assert!((tn - (k + 1) as f64 * 0.5 / 0.8).abs() < 1e-12);
        }
        assert!(ct.s.iter().all(|&s| (s - 0.625).abs() < 1e-12));
        assert!((ct.regression_speed(1).unwrap() - 0.8).abs() < 1e-12);
        assert!(ct.tail_spread() < 1e-10);
    }

    #[test]
    fn retreat_is_a_data_error() {
        let mut tr = FreeBoundaryTrace::default();
        for (t, r) in [(0.0, 0.0), (1.0, 1.5), (2.0, 1.0)] {
            tr.push(t, 0.0, r, 0.0, false);
        }
        assert!(matches!(
            crossing_times(&tr, 1.0, 1e-3),
            Err(Error::Data(_))
        ));
    }
}
