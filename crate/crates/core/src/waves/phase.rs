//! Phase plane of the homogeneous traveling-wave equation
//! `[A(phi)]'' + c phi' + g0(phi) = 0`.
//!
//! With `Q = [Psi(phi)]'` and the time change `dz = A'(phi) d tau` the
//! equation becomes the regular system
//!
//! ```text
//! phi_tau = phi Q
//! Q_tau   = -Q (Q + c) - A'(phi) g0(phi) / phi
//! z_tau   = A'(phi)
//! ```
//!
//! whose equilibria on `phi = 0` are `Q = 0` and `Q = -c`. The saddle at
//! `(kappa_0, 0)` has eigenvalues solving `l^2 + c l + A'(kappa_0) g0'(kappa_0) = 0`.

use std::ops::ControlFlow;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::{DiffusionLaw, ProblemSpec};
use crate::numerics::ode::{integrate, OdeOptions, OdeStatus};
use crate::numerics::quad;

pub type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The homogeneous data `(A, g0, kappa_0)` of the traveling-wave ODE.
#[derive(Clone)]
pub struct TwProblem {
    pub law: DiffusionLaw,
    g0: Scalar,
    g0_prime: Scalar,
    pub kappa0: f64,
}

impl std::fmt::Debug for TwProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TwProblem")
            .field("law", &self.law.name())
            .field("kappa0", &self.kappa0)
            .finish()
    }
}

impl TwProblem {
    pub fn new(law: DiffusionLaw, g0: Scalar, g0_prime: Scalar, kappa0: f64) -> Self {
        Self {
            law,
            g0,
            g0_prime,
            kappa0,
        }
    }

    /// Uses the homogeneous lower bound `g0` of the reaction.
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        let r = Arc::new(spec.reaction.clone());
        let r2 = r.clone();
        Self {
            law: spec.law.clone(),
            g0: Arc::new(move |u| r.g0(u)),
            g0_prime: Arc::new(move |u| r2.g0_prime(u)),
            kappa0: spec.kappa_lo(),
        }
    }

    /// The same problem with `g0` replaced by `s * g0`.
    pub fn scaled(&self, s: f64) -> Self {
        let g = self.g0.clone();
        let gp = self.g0_prime.clone();
        Self {
            law: self.law.clone(),
            g0: Arc::new(move |u| s * g(u)),
            g0_prime: Arc::new(move |u| s * gp(u)),
            kappa0: self.kappa0,
        }
    }

    pub fn g0(&self, u: f64) -> f64 {
        (self.g0)(u)
    }

    pub fn g0_prime(&self, u: f64) -> f64 {
        (self.g0_prime)(u)
    }

    /// `A'(phi) g0(phi) / phi`, continuous at 0.
    fn k(&self, phi: f64) -> f64 {
        if phi <= 0.0 {
            0.0
        } else {
            self.law.a1(phi) * self.g0(phi) / phi
        }
    }

    /// `G(u) = int_0^u A'(r) g0(r) dr`.
    pub fn potential(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        quad::integrate(|r| self.law.a1(r) * self.g0(r), 0.0, u, 1e-15, 1e-12).unwrap_or(f64::NAN)
    }

    /// Positive eigenvalue of the saddle `(kappa_0, 0)` in the `tau` time.
    pub fn saddle_eigenvalue(&self, c: f64) -> f64 {
        let b0 = self.law.a1(self.kappa0);
        let gp = self.g0_prime(self.kappa0);
        0.5 * (-c + (c * c - 4.0 * b0 * gp).sqrt())
    }

    /// Spatial rate at which a profile leaving the saddle approaches `kappa_0`.
    pub fn tail_rate(&self, c: f64) -> f64 {
        self.saddle_eigenvalue(c) / self.law.a1(self.kappa0)
    }

    fn rhs(&self, c: f64, y: &[f64; 3]) -> [f64; 3] {
        let phi = y[0].max(0.0);
        let q = y[1];
        [phi * q, -q * (q + c) - self.k(phi), self.law.a1(phi)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    pub z: f64,
    pub phi: f64,
    /// `Psi(phi)`.
    pub p: f64,
    /// `[Psi(phi)]'`.
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// `Q` changed sign: the profile has an interior extremum.
    Turned,
    /// Reached `phi = 0` steeper than the Darcy slope `-max(c, 0)`.
    Steep,
    /// Approaches `phi = 0` flatter than the Darcy slope, or does not reach
    /// it within the admissible length.
    Flat,
    /// Left `(0, 2 kappa_0)` upwards.
    Escaped,
    /// The integrator gave up.
    Failed,
}

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    /// Stop when `phi` falls below `phi_tiny * kappa_0`.
    pub phi_tiny: f64,
    /// Largest step in `z`; controls the sample density.
    pub dz_max: f64,
    /// Largest admissible support length.
    pub z_max: f64,
    pub rtol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            phi_tiny: 1e-12,
            dz_max: 0.05,
            z_max: 1e3,
            rtol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Shot {
    pub c: f64,
    pub samples: Vec<PhaseSample>,
    pub outcome: Outcome,
}

impl Shot {
    pub fn last(&self) -> &PhaseSample {
        self.samples.last().expect("a shot has at least one sample")
    }
}

/// Integrates the phase-plane system from `(phi0, q0)` at `z = 0`, forward
/// in `z` when `forward` is set and backward otherwise, until `phi`
/// reaches zero or the trajectory turns.
pub fn shoot_tw(
    tw: &TwProblem,
    c: f64,
    phi0: f64,
    q0: f64,
    forward: bool,
    opts: &ShootOptions,
) -> Shot {
    let k0 = tw.kappa0;
    let phi_small = 1e-4 * k0;
    let phi_tiny = opts.phi_tiny * k0;
    let target = -c.max(0.0);
    let dir = if forward { 1.0 } else { -1.0 };
    let b_max = tw.law.a1(2.0 * k0.max(phi0));
    let ode = OdeOptions {
        rtol: opts.rtol,
        atol: 1e-14,
        h_max: opts.dz_max / b_max,
        h_init: 1e-3 * opts.dz_max / b_max,
        max_steps: 2_000_000,
    };
    let mut samples = vec![PhaseSample {
        z: 0.0,
        phi: phi0,
        p: tw.law.pressure(phi0),
        q: q0,
    }];
    let mut outcome = Outcome::Failed;
    let mut n = 0usize;
    let (status, _, _) = integrate(
        |_, y: &[f64; 3]| tw.rhs(c, y),
        0.0,
        [phi0, q0, 0.0],
        dir * 1e9,
        &ode,
        |_, y| {
            n += 1;
            let (phi, q, z) = (y[0], y[1], y[2]);
            if !(phi > 0.0) || !q.is_finite() {
                outcome = Outcome::Steep;
                return ControlFlow::Break(());
            }
            samples.push(PhaseSample {
                z,
                phi,
                p: tw.law.pressure(phi),
                q,
            });
            // Slope towards the boundary being integrated.
            let s = dir * q;
            if n > 1 && s > 0.0 {
                outcome = Outcome::Turned;
                return ControlFlow::Break(());
            }
            if phi > 2.0 * k0.max(phi0) {
                outcome = Outcome::Escaped;
                return ControlFlow::Break(());
            }
            if z.abs() > opts.z_max {
                // Settled near an interior equilibrium without reaching zero.
                outcome = Outcome::Flat;
                return ControlFlow::Break(());
            }
            if phi < phi_small {
                if forward {
                    let q_tau = -q * (q + c) - tw.k(phi);
                    if q > target && q_tau > 0.0 && c > 0.0 {
                        outcome = Outcome::Flat;
                        return ControlFlow::Break(());
                    }
                    if phi < phi_tiny {
                        outcome = if q < target {
                            Outcome::Steep
                        } else {
                            Outcome::Flat
                        };
                        return ControlFlow::Break(());
                    }
                } else if phi < phi_tiny {
                    outcome = Outcome::Steep;
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        },
    );
    match status {
        OdeStatus::Stopped => {}
        // Reaching `phi = 0` in finite time with `Q -> -inf` shows up as a
        // step-size collapse very close to the axis.
        OdeStatus::Failed | OdeStatus::Blowup
            if samples.last().is_some_and(|s| s.phi < phi_small) =>
        {
            outcome = Outcome::Steep;
        }
        _ => outcome = Outcome::Failed,
    }
    Shot {
        c,
        samples,
        outcome,
    }
}

/// Leaves the saddle `(kappa_0, 0)` along its unstable direction towards
/// smaller `phi`, offset by `eps * kappa_0`.
pub fn shoot_from_saddle(tw: &TwProblem, c: f64, eps: f64, opts: &ShootOptions) -> Shot {
    let lam = tw.saddle_eigenvalue(c);
    shoot_tw(tw, c, tw.kappa0 * (1.0 - eps), -eps * lam, true, opts)
}

/// Max-norm residual of `[A(phi)]'' + c phi' + g0(phi)` on the samples with
/// `phi > floor * max phi`, in the cell-averaged form
/// `([A(phi)]'_b - [A(phi)]'_a + c (phi_b - phi_a)) / dz + mean g0`,
/// where `[A(phi)]' = phi Q` is exact on the samples. Consecutive samples
/// closer than `1e-4` in `z` are merged so that integrator round-off is not
/// amplified by tiny cells near the ends.
pub fn ode_residual(tw: &TwProblem, c: f64, samples: &[PhaseSample], floor: f64) -> f64 {
    const H_MIN: f64 = 1e-4;
    let peak = samples.iter().map(|s| s.phi).fold(0.0, f64::max);
    let inside: Vec<&PhaseSample> = samples.iter().filter(|s| s.phi > floor * peak).collect();
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i + 1 < inside.len() {
        let a = inside[i];
        let mut j = i + 1;
        let mut g_int = 0.0;
        while j < inside.len() {
            let (p, q) = (inside[j - 1], inside[j]);
            g_int += 0.5 * (tw.g0(p.phi) + tw.g0(q.phi)) * (q.z - p.z);
            if q.z - a.z >= H_MIN {
                break;
            }
            j += 1;
        }
        if j >= inside.len() {
            break;
        }
        let b = inside[j];
        let h = b.z - a.z;
        let d = (b.phi * b.q - a.phi * a.q + c * (b.phi - a.phi)) / h;
        worst = worst.max((d + g_int / h).abs());
        i = j;
    }
    worst
}
