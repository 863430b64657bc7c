//! Compactly supported pulsating wave in the moving frame `z = x - ct`:
//! the time-periodic limit of `w_t = [A(w)]_zz + c w_z + F(z + ct, w)` on
//! `(-l, l)` with zero Dirichlet ends, started from `w = kappa_0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtwOptions {
    pub dz: f64,
    /// Stroboscopic tolerance on `sup_z |w(z, t + L/c) - w(z, t)|`.
    pub tol: f64,
    pub max_periods: usize,
    /// Stored frames per period.
    pub frames: usize,
    pub cfl: f64,
}

impl Default for PtwOptions {
    fn default() -> Self {
        Self {
            dz: 0.05,
            tol: 1e-6,
            max_periods: 400,
            frames: 16,
            cfl: 0.45,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompactPtw {
    pub c: f64,
    pub l: f64,
    /// Time period `L / c`.
    pub period: f64,
    /// Cell centres in `z`.
    pub z: Vec<f64>,
    /// `frames[k]` is `W(z, t_k)` with `t_k = k period / (frames.len() - 1)`.
    pub frames: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    pub residual: f64,
    /// Stroboscopic residual after every period.
    pub history: Vec<f64>,
    /// `min_t -[Psi(W)]_z(l - 0, t)` from the last interior cell.
    pub boundary_slope: f64,
}

impl CompactPtw {
    /// Linear interpolation of frame `k` at `z`, zero outside `(-l, l)`.
    pub fn at(&self, k: usize, z: f64) -> f64 {
        let dz = self.z[1] - self.z[0];
        let s = (z - self.z[0]) / dz;
        let n = self.z.len();
        if s < -0.5 || s > n as f64 - 0.5 {
            return 0.0;
        }
        let w = &self.frames[k];
        let get = |i: isize| {
            if i < 0 || i >= n as isize {
                0.0
            } else {
                w[i as usize]
            }
        };
        let i = s.floor();
        let f = s - i;
        get(i as isize) * (1.0 - f) + get(i as isize + 1) * f
    }
}

/// One explicit step: conservative diffusion, upwind advection (information
/// travels from the right for `c > 0`) and the source at `x = z + ct`.
#[allow(clippy::too_many_arguments)]
fn advance(
    spec: &ProblemSpec,
    c: f64,
    z: &[f64],
    w: &mut [f64],
    a: &mut [f64],
    next: &mut [f64],
    t: f64,
    dt: f64,
    dz: f64,
) {
    let n = w.len();
    a[0] = 0.0;
    a[n + 1] = 0.0;
    for i in 0..n {
        a[i + 1] = spec.law.a(w[i]);
    }
    let lam = dt / (dz * dz);
    let nu = c * dt / dz;
    for i in 0..n {
        let right = if i + 1 < n { w[i + 1] } else { 0.0 };
        let lap = a[i + 2] - 2.0 * a[i + 1] + a[i];
        let src = if w[i] > 0.0 {
            spec.source(z[i] + c * t, w[i])
        } else {
            0.0
        };
        next[i] = (w[i] + lam * lap + nu * (right - w[i]) + dt * src).max(0.0);
    }
    w.copy_from_slice(next);
}

fn source_slope_bound(spec: &ProblemSpec) -> f64 {
    let r = &spec.reaction;
    let top = 1.05 * spec.kappa_hi();
    let mut g: f64 = 0.0;
    for i in 0..64 {
        let x = r.period() * i as f64 / 64.0;
        for j in 0..=256 {
            g = g.max(r.source_u(x, top * j as f64 / 256.0).abs());
        }
    }
    g
}

pub fn build_compact_ptw(
    spec: &ProblemSpec,
    c: f64,
    l: f64,
    opts: &PtwOptions,
) -> Result<CompactPtw> {
    if !(c > 0.0) {
        return Err(Error::Precondition(format!(
            "pulsating wave speed must be positive, got {c}"
        )));
    }
    let n = (2.0 * l / opts.dz).round() as usize;
    if n < 8 {
        return Err(Error::Config(format!(
            "half-width {l} too small for dz = {}",
            opts.dz
        )));
    }
    let dz = 2.0 * l / n as f64;
    let z: Vec<f64> = (0..n).map(|i| -l + (i as f64 + 0.5) * dz).collect();
    let period = spec.period() / c;
    let k0 = spec.kappa_lo();
    let top = spec.kappa_hi().max(k0);
    let g = source_slope_bound(spec);
    let dt_max = opts.cfl * dz * dz / (2.0 * spec.law.a1(1.05 * top) + c * dz + g * dz * dz);
    let per_frame = (period / opts.frames as f64 / dt_max).ceil() as usize;
    let dt = period / (opts.frames * per_frame) as f64;
    let mut w = vec![k0; n];
    let mut a = vec![0.0; n + 2];
    let mut next = vec![0.0; n];
    let mut history = Vec::new();
    let mut t = 0.0;
    for _ in 0..opts.max_periods {
        let start = w.clone();
        let mut frames = vec![w.clone()];
        let mut times = vec![t];
        for k in 1..=opts.frames {
            for _ in 0..per_frame {
                advance(spec, c, &z, &mut w, &mut a, &mut next, t, dt, dz);
                t += dt;
            }
            // Keep the period phase exact by snapping at frame boundaries.
            t = times[0] + k as f64 * period / opts.frames as f64;
            frames.push(w.clone());
            times.push(t);
        }
        let res = start
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        history.push(res);
        if res < opts.tol {
            let boundary_slope = frames
                .iter()
                .map(|f| spec.pressure(f[n - 1]) / (0.5 * dz))
                .fold(f64::INFINITY, f64::min);
            let t0 = times[0];
            return Ok(CompactPtw {
                c,
                l,
                period,
                z,
                frames,
                times: times.iter().map(|s| s - t0).collect(),
                residual: res,
                history,
                boundary_slope,
            });
        }
    }
    Err(Error::NotConverged { gaps: history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiffusionLaw, Reaction, ReactionKind};
    use crate::solver::{solve_periodic_stationary, Direction};
    use crate::waves::{find_compact_subsolution, TwProblem};

    fn spec(amp: f64) -> ProblemSpec {
        let kappa = format!("1 + {amp}*sin(2*pi*x)");
        ProblemSpec::new(
            DiffusionLaw::power_law(2.0).unwrap(),
            Reaction::new(ReactionKind::Monostable, "u", &kappa, 1.0, 0.0, None).unwrap(),
        )
    }

    #[test]
    fn homogeneous_wave_is_steady_in_frame() {
        let s = spec(0.0);
        let w = build_compact_ptw(&s, 0.2, 3.0, &PtwOptions::default()).unwrap();
        let first = &w.frames[0];
        for f in &w.frames {
            let d = f
                .iter()
                .zip(first)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(d < 1e-5, "frame drift {d}");
        }
    }

    #[test]
    fn sandwiched_between_subsolution_and_stationary_state() {
        let s = spec(0.05);
        let c = 0.1;
        let tw = TwProblem::from_spec(&s);
        let sub = find_compact_subsolution(&tw, c, 0.5 * tw.kappa0).unwrap();
        let l = sub.l + 1.0;
        let w = build_compact_ptw(&s, c, l, &PtwOptions::default()).unwrap();
        let p = solve_periodic_stationary(&s, Direction::FromBelow, 50).unwrap();
        for (k, f) in w.frames.iter().enumerate() {
            let t = w.times[k];
            for (i, &z) in w.z.iter().enumerate() {
                assert!(f[i] + 1e-3 >= sub.phi_at(z), "below phi at z={z}");
                assert!(f[i] <= p.at(z + c * t) + 1e-3, "above p at z={z}, t={t}");
            }
        }
        assert!(w.boundary_slope > c);
    }

    #[test]
    fn wider_support_approaches_stationary_state() {
        let s = spec(0.05);
        let c = 0.1;
        let p = solve_periodic_stationary(&s, Direction::FromBelow, 50).unwrap();
        let gap = |l: f64| {
            let w = build_compact_ptw(&s, c, l, &PtwOptions::default()).unwrap();
            let mut worst: f64 = 0.0;
            for (k, f) in w.frames.iter().enumerate() {
                for (i, &z) in w.z.iter().enumerate() {
                    if z.abs() <= 1.0 {
                        worst = worst.max((f[i] - p.at(z + c * w.times[k])).abs());
                    }
                }
            }
            worst
        };
        let (g1, g2) = (gap(3.0), gap(6.0));
        assert!(g2 < g1, "{g1} -> {g2}");
    }
}
