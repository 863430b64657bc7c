use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fit::line_fit;

/// `e(t) ~ M exp(-delta t)` fitted on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub m: f64,
    pub delta: f64,
    /// Coefficient of determination of the log-linear fit.
    pub r2: f64,
    /// Residual standard error on the log scale.
    pub std_err: f64,
    /// Abscissa range of the samples used.
    pub range: (f64, f64),
    pub used: usize,
    /// Samples dropped because they were not positive.
    pub excluded: usize,
    /// False when the fitted decay over the range is below `1e-3` in log.
    pub decaying: bool,
}

pub const MIN_SAMPLES: usize = 6;

pub fn fit_exponential(times: &[f64], errors: &[f64]) -> Result<FitResult> {
    if times.len() != errors.len() {
        return Err(Error::Data("fit_exponential: length mismatch".into()));
    }
    let (ts, ls): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e > 0.0 && e.is_finite())
        .map(|(&t, &e)| (t, e.ln()))
        .unzip();
    let excluded = times.len() - ts.len();
    if ts.len() < MIN_SAMPLES {
        return Err(Error::Data(format!(
            "fit_exponential needs {MIN_SAMPLES} positive samples, got {}",
            ts.len()
        )));
    }
    let f = line_fit(&ts, &ls)
        .ok_or_else(|| Error::Data("fit_exponential: degenerate abscissae".into()))?;
    let n = ts.len();
    let sse: f64 = ts
        .iter()
        .zip(&ls)
        .map(|(&t, &l)| (l - f.intercept - f.slope * t).powi(2))
        .sum();
    let lo = ts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult {
        m: f.intercept.exp(),
        delta: -f.slope,
        r2: f.r2,
        std_err: if n > 2 {
            (sse / (n - 2) as f64).sqrt()
        } else {
            0.0
        },
        range: (lo, hi),
        used: n,
        excluded,
        decaying: -f.slope * (hi - lo) > 1e-3,
    })
}

/// `fit_exponential` on the last half of the samples.
pub fn fit_tail(times: &[f64], errors: &[f64]) -> Result<FitResult> {
    let k = times.len() / 2;
    fit_exponential(&times[k..], &errors[k..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_pure_exponential() {
        let t: Vec<f64> = (0..40).map(|k| 0.25 * k as f64).collect();
        let e: Vec<f64> = t.iter().map(|&t| 3.0 * (-0.7 * t).exp()).collect();
        let f = fit_exponential(&t, &e).unwrap();
        assert!((f.m - 3.0).abs() < 1e-10 && (f.delta - 0.7).abs() < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-10);
        assert!(f.decaying);
    }

    #[test]
    fn constant_errors_are_flagged() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let f = fit_exponential(&t, &[0.5; 10]).unwrap();
        assert!(f.delta.abs() < 1e-12);
        assert!(!f.decaying);
    }

    #[test]
    fn nonpositive_samples_are_excluded() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let mut e: Vec<f64> = t.iter().map(|&t| (-t).exp()).collect();
        e[3] = 0.0;
        e[7] = -1.0;
        let f = fit_exponential(&t, &e).unwrap();
        assert_eq!(f.excluded, 2);
        assert!((f.delta - 1.0).abs() < 1e-10);
        assert!(fit_exponential(&t[..5], &e[..5]).is_err());
    }
}
