//! Periodic stationary solutions obtained as long-time limits from constant data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::solver::field::Field;
use crate::solver::grid::Grid1D;
use crate::solver::step::{Boundary, Integrator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    FromBelow,
    FromAbove,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryProfile {
    pub period: f64,
    /// Values at cell centres `(j + 1/2) L / N`, `j = 0..N`.
    pub p: Vec<f64>,
    /// `max |[A(p)]_xx + F(x,p)|` of the discrete operator.
    pub residual: f64,
    pub direction: Direction,
    /// False when the evolution was not monotone in time beyond round-off.
    pub monotone: bool,
    pub worst_violation: f64,
    pub t_elapsed: f64,
}

impl StationaryProfile {
    pub fn cells(&self) -> usize {
        self.p.len()
    }

    /// Periodic linear interpolation.
    pub fn at(&self, x: f64) -> f64 {
        let n = self.p.len();
        let dx = self.period / n as f64;
        let s = (x / dx - 0.5).rem_euclid(n as f64);
        let i = s.floor() as usize % n;
        let w = s - s.floor();
        self.p[i] * (1.0 - w) + self.p[(i + 1) % n] * w
    }

    /// `p(-x)`, the stationary state of the mirrored spec.
    pub fn mirrored(&self) -> Self {
        let mut m = self.clone();
        m.p.reverse();
        m
    }

    /// Value in the cell with phase index `j`.
    pub fn at_phase(&self, j: usize) -> f64 {
        self.p[j % self.p.len()]
    }

    pub fn pressure(&self, spec: &ProblemSpec) -> Vec<f64> {
        self.p.iter().map(|&u| spec.pressure(u)).collect()
    }

    pub fn min(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.p.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn residual(spec: &ProblemSpec, grid: &Grid1D, u: &[f64]) -> f64 {
    let n = u.len();
    let dx2 = grid.dx * grid.dx;
    let a: Vec<f64> = u.iter().map(|&v| spec.law.a(v)).collect();
    (0..n)
        .map(|i| {
            let lap = (a[(i + 1) % n] - 2.0 * a[i] + a[(i + n - 1) % n]) / dx2;
            (lap + spec.source(grid.x(i), u[i])).abs()
        })
        .fold(0.0, f64::max)
}

/// Default starting constants: `(kappa_0 + theta)/2` from below and
/// `kappa^0 + 1` from above.
pub fn default_start(spec: &ProblemSpec, direction: Direction) -> f64 {
    match direction {
        Direction::FromBelow => 0.5 * (spec.kappa_lo() + spec.reaction.theta()),
        Direction::FromAbove => spec.kappa_hi() + 1.0,
    }
}

/// Evolves constant data on one period with periodic boundary conditions
/// until the discrete residual drops below `tol`.
pub fn solve_periodic_stationary_with(
    spec: &ProblemSpec,
    init_const: f64,
    direction: Direction,
    cells: usize,
    tol: f64,
) -> Result<StationaryProfile> {
    let grid = Grid1D::new(0.0, spec.period() / cells as f64, cells)?;
    let field = Field::new(grid, vec![init_const; cells], 0.0);
    let mut it = Integrator::new(spec, field, 0.45, Boundary::Periodic);
    let scale = init_const.abs().max(spec.kappa_hi());
    let slack = 10.0 * f64::EPSILON * scale;
    let mut worst: f64 = 0.0;
    let mut prev = it.field.u.clone();
    let t_max = 1e5;
    let mut res = residual(spec, &grid, &prev);
    let mut k = 0u64;
    while res >= tol {
        if it.t() > t_max {
            return Err(Error::Data(format!(
                "stationary iteration did not settle by t = {t_max} (residual {res:e})"
            )));
        }
        let dt = it.stable_dt();
        it.step(dt)?;
        for (a, b) in it.field.u.iter().zip(&prev) {
            let d = match direction {
                Direction::FromBelow => b - a,
                Direction::FromAbove => a - b,
            };
            worst = worst.max(d);
        }
        prev.copy_from_slice(&it.field.u);
        k += 1;
        if k.is_multiple_of(64) {
            res = residual(spec, &grid, &prev);
        }
    }
    res = residual(spec, &grid, &prev);
    Ok(StationaryProfile {
        period: spec.period(),
        p: prev,
        residual: res,
        direction,
        monotone: worst <= slack,
        worst_violation: worst,
        t_elapsed: it.t(),
    })
}

pub fn solve_periodic_stationary(
    spec: &ProblemSpec,
    direction: Direction,
    cells: usize,
) -> Result<StationaryProfile> {
    solve_periodic_stationary_with(spec, default_start(spec, direction), direction, cells, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiffusionLaw, Reaction, ReactionKind};

    fn spec(f: &str, kappa: &str, theta: f64, kind: ReactionKind) -> ProblemSpec {
        ProblemSpec::new(
            DiffusionLaw::power_law(2.0).unwrap(),
            Reaction::new(kind, f, kappa, 1.0, theta, None).unwrap(),
        )
    }

    #[test]
    fn homogeneous_limit_is_kappa() {
        let s = spec("u", "1", 0.0, ReactionKind::Monostable);
        let p = solve_periodic_stationary(&s, Direction::FromBelow, 16).unwrap();
        assert!(p.p.iter().all(|&v| (v - 1.0).abs() < 1e-9));
        assert!(p.monotone);
    }

    #[test]
    fn heterogeneous_profile_within_bounds() {
        let s = spec("u", "1+0.1*sin(2*pi*x)", 0.0, ReactionKind::Monostable);
        let p = solve_periodic_stationary(&s, Direction::FromBelow, 32).unwrap();
        assert!(p.residual < 1e-8);
        assert!(p.min() >= s.kappa_lo() - 1e-9 && p.max() <= s.kappa_hi() + 1e-9);
        assert!(p.monotone);
        let q = solve_periodic_stationary(&s, Direction::FromAbove, 32).unwrap();
        let gap =
            p.p.iter()
                .zip(&q.p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        assert!(gap < 1e-6);
    }

    #[test]
    fn periodic_interpolation() {
        let p = StationaryProfile {
            period: 1.0,
            p: vec![0.0, 1.0, 2.0, 3.0],
            residual: 0.0,
            direction: Direction::FromBelow,
            monotone: true,
            worst_violation: 0.0,
            t_elapsed: 0.0,
        };
        assert_eq!(p.at(0.125), 0.0);
        assert_eq!(p.at(0.25), 0.5);
        assert_eq!(p.at(1.125), 0.0);
        assert_eq!(p.at(-0.125), 3.0);
        assert_eq!(p.at(-0.25), 2.5);
        assert_eq!(p.at(0.0), 1.5);
    }
}
