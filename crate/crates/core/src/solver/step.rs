//! Explicit conservative scheme for `u_t = [A(u)]_xx + F(x,u)` on cells.
//!
//! With `dt (2 max A' / dx^2 + max |F_u|) <= CFL < 1/2` the update matrix
//! is nonnegative and diagonally dominant, so the discrete solution map is
//! order preserving and does not increase the number of sign changes of the
//! difference of two solutions advanced with the same steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::expr::Expr;
use crate::model::ProblemSpec;
use crate::solver::field::Field;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Fraction of the stability bound used for each step, in `(0, 1)`.
    pub cfl: f64,
    /// Cells at or below this value count as empty for support detection.
    /// `None` means `1e-12 * kappa^0`.
    pub floor: Option<f64>,
    pub t_end: f64,
    /// Time between stored snapshots; `None` stores only the endpoints.
    pub snapshot_every: Option<f64>,
    /// Time between free-boundary trace samples; `None` samples every step.
    pub trace_every: Option<f64>,
    /// Use this step instead of the adaptive bound (must satisfy it).
    pub dt_fixed: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl: 0.45,
            floor: None,
            t_end: 1.0,
            snapshot_every: None,
            trace_every: None,
            dt_fixed: None,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!(
                "solver.cfl must lie in (0,1), got {}",
                self.cfl
            )));
        }
        if let Some(f) = self.floor {
            if !(f >= 0.0) {
                return Err(Error::Config(format!("solver.floor must be >= 0, got {f}")));
            }
        }
        Ok(())
    }

    pub fn floor_for(&self, spec: &ProblemSpec) -> f64 {
        self.floor.unwrap_or(1e-12 * spec.kappa_hi())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    /// Fixed ghost values beyond each end.
    Dirichlet {
        left: f64,
        right: f64,
    },
    Periodic,
}

impl Boundary {
    pub const ZERO: Boundary = Boundary::Dirichlet {
        left: 0.0,
        right: 0.0,
    };
}

/// Upper bound of `|F_u|` over one period and `u in [0, u_top]`.
fn source_slope_bound(spec: &ProblemSpec, u_top: f64) -> f64 {
    let r = &spec.reaction;
    let nx = if r.is_homogeneous() { 1 } else { 64 };
    let nu = 256;
    let mut g: f64 = 0.0;
    for i in 0..nx {
        let x = r.period() * i as f64 / nx as f64;
        for j in 0..=nu {
            let u = u_top * j as f64 / nu as f64;
            g = g.max(r.source_u(x, u).abs());
        }
    }
    g
}

/// Mutable state of one explicit simulation.
pub struct Integrator<'a> {
    spec: &'a ProblemSpec,
    cfl: f64,
    bc: Boundary,
    pub field: Field,
    /// `f(x_i, .)` per cell, or a single entry when `f` does not depend on `x`.
    f_cell: Vec<Expr>,
    kappa: Vec<f64>,
    a_buf: Vec<f64>,
    g_max: f64,
    u_top: f64,
    u_max: f64,
    steps: u64,
}

impl<'a> Integrator<'a> {
    pub fn new(spec: &'a ProblemSpec, field: Field, cfl: f64, bc: Boundary) -> Self {
        let xs = field.grid.centers();
        let kappa = xs.iter().map(|&x| spec.reaction.kappa(x)).collect();
        let f_cell = if spec.reaction.f_expr().depends_on_x() {
            xs.iter().map(|&x| spec.reaction.f_at(x)).collect()
        } else {
            vec![spec.reaction.f_expr().clone()]
        };
        let u_max = field.max();
        let ghost_max = match bc {
            Boundary::Dirichlet { left, right } => left.max(right),
            Boundary::Periodic => 0.0,
        };
        let u_top = 1.05 * spec.kappa_hi().max(u_max).max(ghost_max);
        let g_max = source_slope_bound(spec, u_top);
        let n = field.u.len();
        Self {
            spec,
            cfl,
            bc,
            field,
            f_cell,
            kappa,
            a_buf: vec![0.0; n + 2],
            g_max,
            u_top,
            u_max,
            steps: 0,
        }
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    pub fn t(&self) -> f64 {
        self.field.t
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn max_u(&self) -> f64 {
        self.u_max
    }

    /// Largest admissible step for the current state at the configured CFL.
    pub fn stable_dt(&self) -> f64 {
        self.bound(self.cfl)
    }

    fn bound(&self, cfl: f64) -> f64 {
        let dx = self.field.grid.dx;
        let mut top = self.u_max;
        if let Boundary::Dirichlet { left, right } = self.bc {
            top = top.max(left).max(right);
        }
        let diff = 2.0 * self.spec.law.a1(top);
        cfl * dx * dx / (diff + self.g_max * dx * dx + f64::MIN_POSITIVE)
    }

    /// Range of cells that can change during the next step.
    fn active_range(&self) -> Option<(usize, usize)> {
        let n = self.field.u.len();
        if let Boundary::Periodic = self.bc {
            return Some((0, n - 1));
        }
        let (gl, gr) = match self.bc {
            Boundary::Dirichlet { left, right } => (left > 0.0, right > 0.0),
            Boundary::Periodic => unreachable!(),
        };
        let lo = self.field.u.iter().position(|&v| v > 0.0);
        let hi = self.field.u.iter().rposition(|&v| v > 0.0);
        let (mut a, mut b) = match (lo, hi) {
            (Some(l), Some(h)) => (l.saturating_sub(1), (h + 1).min(n - 1)),
            _ => {
                if !gl && !gr {
                    return None;
                }
                (if gl { 0 } else { n - 1 }, if gr { n - 1 } else { 0 })
            }
        };
        if gl {
            a = 0;
        }
        if gr {
            b = n - 1;
        }
        Some((a.min(b), a.max(b)))
    }

    /// Advances by exactly `dt`. Fails without modifying the state when `dt`
    /// exceeds the stability bound with CFL one half.
    #[allow(clippy::needless_range_loop)]
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let limit = self.bound(0.5);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                dt,
                required: self.stable_dt(),
            });
        }
        let Some((lo, hi)) = self.active_range() else {
            self.field.t += dt;
            self.steps += 1;
            return Ok(());
        };
        let law = &self.spec.law;
        let n = self.field.u.len();
        let dx = self.field.grid.dx;
        let lam = dt / (dx * dx);
        let u = &mut self.field.u;
        // a_buf[k] holds A(u_{k-1}); index 0 and n+1 are ghosts.
        let a_lo = lo.saturating_sub(1);
        let a_hi = (hi + 1).min(n - 1);
        for i in a_lo..=a_hi {
            self.a_buf[i + 1] = law.a(u[i]);
        }
        match self.bc {
            Boundary::Dirichlet { left, right } => {
                self.a_buf[0] = law.a(left);
                self.a_buf[n + 1] = law.a(right);
            }
            Boundary::Periodic => {
                self.a_buf[0] = self.a_buf[n];
                self.a_buf[n + 1] = self.a_buf[1];
            }
        }
        let mut u_max: f64 = 0.0;
        for i in lo..=hi {
            let ui = u[i];
            let lap = self.a_buf[i + 2] - 2.0 * self.a_buf[i + 1] + self.a_buf[i];
            let f = if self.f_cell.len() == 1 {
                &self.f_cell[0]
            } else {
                &self.f_cell[i]
            };
            let src = if ui > 0.0 {
                f.eval(0.0, ui) * (self.kappa[i] - ui)
            } else {
                0.0
            };
            let next = ui + lam * lap + dt * src;
            let next = if next > 0.0 { next } else { 0.0 };
            u[i] = next;
            u_max = u_max.max(next);
        }
        // Cells outside the active range are zero.
        self.u_max = u_max;
        if self.u_max > self.u_top {
            self.u_top = 1.05 * self.u_max;
            self.g_max = source_slope_bound(self.spec, self.u_top);
        }
        self.field.t += dt;
        self.steps += 1;
        Ok(())
    }

    /// One step of size `min(stable_dt, t_stop - t)`; returns the step used.
    pub fn step_until(&mut self, t_stop: f64) -> Result<f64> {
        let remaining = t_stop - self.field.t;
        let dt = self.stable_dt();
        // Avoid leaving a sliver of a step.
        let dt = if remaining <= dt * 1.000001 {
            remaining
        } else {
            dt
        };
        self.step(dt)?;
        if (self.field.t - t_stop).abs() <= 1e-12 * t_stop.abs().max(1.0) {
            self.field.t = t_stop;
        }
        Ok(dt)
    }
}

/// A single explicit step returning the new field.
pub fn step(spec: &ProblemSpec, field: &Field, dt: f64, bc: Boundary) -> Result<Field> {
    let mut it = Integrator::new(spec, field.clone(), 0.45, bc);
    it.step(dt)?;
    Ok(it.field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiffusionLaw, Reaction, ReactionKind};
    use crate::solver::grid::Grid1D;

    fn logistic() -> ProblemSpec {
        ProblemSpec::new(
            DiffusionLaw::power_law(2.0).unwrap(),
            Reaction::new(ReactionKind::Monostable, "u", "1", 1.0, 0.0, None).unwrap(),
        )
    }

    #[test]
    fn zero_stays_zero() {
        let s = logistic();
        let g = Grid1D::new(-1.0, 0.05, 40).unwrap();
        let mut it = Integrator::new(&s, Field::zeros(g, 0.0), 0.45, Boundary::ZERO);
        for _ in 0..100 {
            let dt = it.stable_dt().min(1e-3);
            it.step(dt).unwrap();
        }
        assert!(it.field.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn kappa_is_stationary() {
        let s = logistic();
        let g = Grid1D::new(0.0, 1.0 / 16.0, 16).unwrap();
        let f = Field::new(g, vec![1.0; 16], 0.0);
        let mut it = Integrator::new(&s, f, 0.45, Boundary::Periodic);
        for _ in 0..200 {
            let dt = it.stable_dt();
            it.step(dt).unwrap();
        }
        assert!(it.field.u.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn oversize_step_rejected_with_bound() {
        let s = logistic();
        let g = Grid1D::new(0.0, 0.01, 100).unwrap();
        let f = Field::new(g, vec![0.5; 100], 0.0);
        let before = f.clone();
        let mut it = Integrator::new(&s, f, 0.45, Boundary::Periodic);
        match it.step(1.0) {
            Err(Error::Cfl { required, .. }) => assert!(required < 1e-4),
            other => panic!("expected CFL rejection, got {other:?}"),
        }
        assert_eq!(it.field, before);
    }

    #[test]
    fn mass_conserved_without_reaction() {
        let s = ProblemSpec::new(
            DiffusionLaw::power_law(2.0).unwrap(),
            Reaction::new(ReactionKind::Monostable, "0*u", "1", 1.0, 0.0, None).unwrap(),
        );
        let g = Grid1D::new(-2.0, 0.02, 200).unwrap();
        let f = Field::from_fn(g, 0.0, |x| (1.0 - x * x).max(0.0));
        let m0: f64 = f.u.iter().sum();
        let mut it = Integrator::new(&s, f, 0.45, Boundary::ZERO);
        while it.t() < 0.2 {
            it.step_until(0.2).unwrap();
        }
        let m1: f64 = it.field.u.iter().sum();
        assert!(((m1 - m0) / m0).abs() < 1e-12);
        assert_eq!(it.t(), 0.2);
    }
}
