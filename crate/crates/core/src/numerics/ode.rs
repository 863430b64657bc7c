//! Dormand–Prince 5(4) with adaptive step control.
//!
//! The observer sees every accepted step and may stop integration early.
//! Integration runs backwards when `t_end < t0`.

use std::ops::ControlFlow;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            h_max: f64::INFINITY,
            h_init: 1e-4,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeStatus {
    /// Reached `t_end`.
    Done,
    /// The observer requested a stop.
    Stopped,
    /// The right-hand side produced a non-finite value.
    Blowup,
    /// Step size underflow or step budget exhausted.
    Failed,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t_end`. Returns the status and
/// the final state.
pub fn integrate<const N: usize, F, O>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut observer: O,
) -> (OdeStatus, f64, [f64; N])
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N]) -> ControlFlow<()>,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut h = opts
        .h_init
        .min(opts.h_max)
        .min((t_end - t0).abs().max(1e-300));
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y);
    if !finite(&k[0]) {
        return (OdeStatus::Blowup, t, y);
    }
    let mut steps = 0usize;
    while dir * (t_end - t) > 0.0 {
        if steps >= opts.max_steps {
            return (OdeStatus::Failed, t, y);
        }
        steps += 1;
        if h > (t_end - t).abs() {
            h = (t_end - t).abs();
        }
        let hs = dir * h;
        for s in 1..7 {
            let mut ys = y;
            for (i, v) in ys.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                *v += hs * acc;
            }
            k[s] = f(t + C[s] * hs, &ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] = y[i] + hs * d5;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((hs * (d5 - d4)).abs() / sc);
        }
        if !finite(&y5) || !finite(&k[6]) || !err.is_finite() {
            h *= 0.25;
            if h < 1e-14 * t.abs().max(1.0) {
                return (OdeStatus::Blowup, t, y);
            }
            continue;
        }
        if err <= 1.0 {
            t = if (t_end - (t + hs)) * dir <= 0.0 {
                t_end
            } else {
                t + hs
            };
            y = y5;
            k[0] = k[6];
            if observer(t, &y).is_break() {
                return (OdeStatus::Stopped, t, y);
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(opts.h_max);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < 1e-14 * t.abs().max(1.0) {
                return (OdeStatus::Failed, t, y);
            }
        }
    }
    (OdeStatus::Done, t, y)
}

fn finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let (st, _, y) = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            two_pi,
            &OdeOptions::default(),
            |_, _| ControlFlow::Continue(()),
        );
        assert_eq!(st, OdeStatus::Done);
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8);
    }

    #[test]
    fn backward_exponential() {
        let (_, t, y) = integrate(
            |_, y: &[f64; 1]| [y[0]],
            1.0,
            [1.0],
            0.0,
            &OdeOptions::default(),
            |_, _| ControlFlow::Continue(()),
        );
        assert_eq!(t, 0.0);
        assert!((y[0] - (-1f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn observer_stops() {
        let (st, t, _) = integrate(
            |_, _: &[f64; 1]| [1.0],
            0.0,
            [0.0],
            10.0,
            &OdeOptions {
                h_max: 0.1,
                ..Default::default()
            },
            |_, y| {
                if y[0] > 1.0 {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        );
        assert_eq!(st, OdeStatus::Stopped);
        assert!(t > 1.0 && t < 1.2);
    }

    #[test]
    fn riccati_blowup_is_detected() {
        let (st, _, _) = integrate(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            0.0,
            [1.0],
            2.0,
            &OdeOptions::default(),
            |_, _| ControlFlow::Continue(()),
        );
        assert_ne!(st, OdeStatus::Done);
    }
}
