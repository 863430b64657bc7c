//! Compactly supported subsolutions `phi(x - ct; c)` of the homogeneous
//! problem and Type II ground states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::roots::brent;
use crate::waves::phase::{ode_residual, shoot_tw, Outcome, PhaseSample, ShootOptions, TwProblem};

/// A compact profile on `[-l, l]` traveling at speed `c`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShootResult {
    pub c: f64,
    /// Samples ordered by `z`, centred so the support is `[-l, l]`.
    pub profile: Vec<PhaseSample>,
    pub l: f64,
    /// `[Psi(phi)]'(l - 0)`, the last sampled pressure slope.
    pub sigma: f64,
    pub peak: f64,
}

impl ShootResult {
    /// Linear interpolation of `phi`, zero outside the support.
    pub fn phi_at(&self, z: f64) -> f64 {
        let p = &self.profile;
        if z <= p[0].z || z >= p[p.len() - 1].z {
            return 0.0;
        }
        let j = p.partition_point(|s| s.z < z);
        let (a, b) = (&p[j - 1], &p[j]);
        let w = (z - a.z) / (b.z - a.z);
        a.phi * (1.0 - w) + b.phi * w
    }

    pub fn residual(&self, tw: &TwProblem) -> f64 {
        ode_residual(tw, self.c, &self.profile, 1e-3)
    }
}

/// Joins the two half trajectories leaving the peak `(phi_m, 0)`.
fn build_from_peak(tw: &TwProblem, c: f64, phi_m: f64, opts: &ShootOptions) -> Option<ShootResult> {
    let right = shoot_tw(tw, c, phi_m, 0.0, true, opts);
    if right.outcome != Outcome::Steep || !(right.last().q < -c) {
        return None;
    }
    let left = shoot_tw(tw, c, phi_m, 0.0, false, opts);
    if left.outcome != Outcome::Steep {
        return None;
    }
    let mut profile: Vec<PhaseSample> = left.samples.iter().skip(1).rev().copied().collect();
    profile.extend_from_slice(&right.samples);
    let z_lo = profile[0].z;
    let z_hi = profile[profile.len() - 1].z;
    let mid = 0.5 * (z_lo + z_hi);
    for s in profile.iter_mut() {
        s.z -= mid;
    }
    Some(ShootResult {
        c,
        l: 0.5 * (z_hi - z_lo),
        sigma: right.last().q,
        peak: phi_m,
        profile,
    })
}

/// Searches peak values in `(d, kappa_0)` for a compact profile whose
/// right boundary slope is steeper than `-c`.
pub fn find_compact_subsolution(tw: &TwProblem, c: f64, d: f64) -> Result<ShootResult> {
    let k0 = tw.kappa0;
    if !(c >= 0.0) {
        return Err(Error::Precondition(format!(
            "subsolution speed must be >= 0, got {c}"
        )));
    }
    if !(d > 0.0 && d < k0) {
        return Err(Error::Precondition(format!(
            "d = {d} must lie in (0, kappa_0 = {k0})"
        )));
    }
    let opts = ShootOptions {
        dz_max: 0.002,
        z_max: 50.0,
        ..Default::default()
    };
    // Midpoint first, then dyadic refinements towards both ends.
    let mut fractions = vec![0.5];
    let mut step = 0.25;
    while step > 1.0 / 64.0 {
        let mut s = step;
        while s < 1.0 {
            if !fractions.iter().any(|&f: &f64| (f - s).abs() < 1e-12) {
                fractions.push(s);
            }
            s += 2.0 * step;
        }
        step *= 0.5;
    }
    for f in fractions {
        let phi_m = d + (k0 - d) * f;
        if let Some(r) = build_from_peak(tw, c, phi_m, &opts) {
            return Ok(r);
        }
    }
    Err(Error::Infeasible(format!(
        "no compact subsolution with c = {c} and peak above {d}"
    )))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundState {
    /// Samples of `U^0` on `[b1, b2]`, symmetric about 0.
    pub profile: Vec<PhaseSample>,
    pub b1: f64,
    pub b2: f64,
    /// Pressure slopes at the two endpoint samples.
    pub slopes: (f64, f64),
    /// `[A(U^0)]'` at the endpoints implied by the first integral.
    pub flux: f64,
    pub peak: f64,
}

/// Type II ground state of a bistable `g0`: the peak is the zero of the
/// potential `G(u) = int_0^u A' g0` above `theta`, located by bisection on
/// the shot type (steep above, turning below) and polished with Brent on
/// `G`. The profile follows the first integral
/// `phi^2 Q^2 / 2 + G(phi) = 0`, which keeps the approach to the ends exact.
pub fn find_ground_state(tw: &TwProblem, theta: f64) -> Result<GroundState> {
    let k0 = tw.kappa0;
    let total = tw.potential(k0);
    if !(total > 0.0) {
        return Err(Error::Infeasible(format!(
            "int_0^kappa_0 A' g0 = {total:e} is not positive"
        )));
    }
    let opts = ShootOptions {
        dz_max: 0.05,
        z_max: 200.0,
        ..Default::default()
    };
    let steep = |phi_m: f64| shoot_tw(tw, 0.0, phi_m, 0.0, true, &opts).outcome == Outcome::Steep;
    let (mut lo, mut hi) = (theta.max(1e-9 * k0), k0 * (1.0 - 1e-9));
    if steep(lo) || !steep(hi) {
        return Err(Error::Shooting(format!(
            "no change of shot type on ({lo}, {hi})"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if steep(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let peak = brent(
        |u| tw.potential(u),
        lo - 1e-6 * k0,
        hi + 1e-6 * k0,
        1e-15,
        200,
    )
    .unwrap_or(0.5 * (lo + hi));
    // Right half from the first integral, sampled geometrically towards 0.
    let n = 4000;
    let phi_end = 1e-14 * peak;
    let mut half = Vec::with_capacity(n + 1);
    let mut z = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let s = i as f64 / n as f64;
        // Dense near the peak and geometric near the end.
        let phi = if s < 0.5 {
            peak * (1.0 - 0.98 * (2.0 * s).powi(2))
        } else {
            0.02 * peak * (phi_end / (0.02 * peak)).powf(2.0 * (s - 0.5))
        };
        let q = slope_on_manifold(tw, peak, phi);
        if let Some((phi0, q0)) = prev {
            z += dz(tw, phi0, q0, phi, q, peak);
        }
        half.push(PhaseSample {
            z,
            phi,
            p: tw.law.pressure(phi),
            q,
        });
        prev = Some((phi, q));
    }
    let mut profile: Vec<PhaseSample> = half
        .iter()
        .skip(1)
        .rev()
        .map(|s| PhaseSample {
            z: -s.z,
            q: -s.q,
            ..*s
        })
        .collect();
    profile.extend_from_slice(&half);
    let b2 = half[half.len() - 1].z;
    let g_peak = tw.potential(peak);
    Ok(GroundState {
        b1: -b2,
        b2,
        slopes: (profile[0].q, half[half.len() - 1].q),
        flux: (2.0 * g_peak.max(0.0)).sqrt(),
        peak,
        profile,
    })
}

/// `Q(phi) = -sqrt(2 (G(peak) - G(phi))) / phi` on the right half, with
/// `G(peak) = 0` taken as exact so that small `phi` avoid cancellation.
fn slope_on_manifold(tw: &TwProblem, peak: f64, phi: f64) -> f64 {
    if phi >= peak {
        return 0.0;
    }
    let ag = |r: f64| tw.law.a1(r) * tw.g0(r);
    let e = if phi < 0.5 * peak {
        -crate::numerics::quad::integrate(ag, 0.0, phi, 1e-300, 1e-13).unwrap_or(0.0)
    } else {
        crate::numerics::quad::integrate(ag, phi, peak, 1e-300, 1e-13).unwrap_or(0.0)
    };
    -(2.0 * e.max(0.0)).sqrt() / phi
}

/// `z` increment between two samples: `dz = A'(phi) dphi / (phi Q)`,
/// integrated by Gauss-Legendre on the density, with the square-root
/// singularity at the peak removed analytically.
fn dz(tw: &TwProblem, phi0: f64, q0: f64, phi1: f64, q1: f64, peak: f64) -> f64 {
    if q0 == 0.0 {
        // Near the peak phi Q ~ -sqrt(2 k (peak - phi)) with k = A' g0.
        let k = tw.law.a1(peak) * tw.g0(peak);
        let a = tw.law.a1(peak);
        return a * (2.0 * (peak - phi1) / k).sqrt();
    }
    let _ = q1;
    let f = |phi: f64| {
        let q = slope_on_manifold(tw, peak, phi);
        tw.law.a1(phi) / (phi * q.abs())
    };
    // 5-point Gauss-Legendre on [phi1, phi0].
    const X: [f64; 5] = [
        0.0,
        -0.5384693101056831,
        0.5384693101056831,
        -0.906179845938664,
        0.906179845938664,
    ];
    const W: [f64; 5] = [
        0.5688888888888889,
        0.47862867049936647,
        0.47862867049936647,
        0.23692688505618908,
        0.23692688505618908,
    ];
    let (m, h) = (0.5 * (phi0 + phi1), 0.5 * (phi0 - phi1));
    (0..5).map(|i| W[i] * f(m + h * X[i])).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DiffusionLaw;
    use crate::waves::sharp::find_sharp_speed;
    use std::sync::Arc;

    fn logistic() -> TwProblem {
        TwProblem::new(
            DiffusionLaw::power_law(2.0).unwrap(),
            Arc::new(|u| u * (1.0 - u)),
            Arc::new(|u| 1.0 - 2.0 * u),
            1.0,
        )
    }

    fn bistable(theta: f64) -> TwProblem {
        TwProblem::new(
            DiffusionLaw::power_law(2.0).unwrap(),
            Arc::new(move |u| u * (u - theta) * (1.0 - u)),
            Arc::new(move |u| -3.0 * u * u + 2.0 * (1.0 + theta) * u - theta),
            1.0,
        )
    }

    #[test]
    fn stationary_subsolution_is_symmetric() {
        let tw = logistic();
        let r = find_compact_subsolution(&tw, 0.0, 0.9).unwrap();
        assert!(r.peak > 0.9 && r.peak < 1.0);
        assert!(r.sigma < 0.0);
        for &z in &[0.2, 0.5 * r.l, 0.9 * r.l] {
            assert!((r.phi_at(z) - r.phi_at(-z)).abs() < 1e-6);
        }
        assert!(r.residual(&tw) < 1e-6, "residual {}", r.residual(&tw));
    }

    #[test]
    fn moving_subsolution_satisfies_boundary_condition() {
        let tw = logistic();
        let r = find_compact_subsolution(&tw, 0.2, 0.5).unwrap();
        assert!(r.sigma < -r.c);
        assert!(r.profile.iter().all(|s| s.phi > 0.0));
        assert!(r.residual(&tw) < 1e-6, "residual {}", r.residual(&tw));
    }

    #[test]
    fn speed_above_sharp_speed_is_infeasible() {
        let tw = logistic();
        let c = find_sharp_speed(&tw).unwrap().c;
        assert!(matches!(
            find_compact_subsolution(&tw, 1.1 * c, 0.5),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn ground_state_of_bistable() {
        let tw = bistable(0.2);
        let g = find_ground_state(&tw, 0.2).unwrap();
        assert!(g.peak > 0.2 && g.peak < 1.0);
        assert!(tw.potential(g.peak).abs() < 1e-12);
        assert!(
            g.slopes.0.abs() < 1e-6 && g.slopes.1.abs() < 1e-6,
            "{:?}",
            g.slopes
        );
        assert!(g.flux < 1e-6);
        assert!((g.b1 + g.b2).abs() < 1e-12);
        let n = g.profile.len();
        for i in 0..n / 2 {
            assert!((g.profile[i].phi - g.profile[n - 1 - i].phi).abs() < 1e-14);
        }
        assert!(ode_residual(&tw, 0.0, &g.profile, 1e-3) < 1e-4);
    }

    #[test]
    fn ground_state_needs_positive_flux() {
        assert!(matches!(
            find_ground_state(&bistable(0.8), 0.8),
            Err(Error::Infeasible(_))
        ));
    }
}
