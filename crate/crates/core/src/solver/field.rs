use serde::{Deserialize, Serialize};

use crate::model::ProblemSpec;
use crate::solver::grid::Grid1D;

/// Grid-sampled density at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: Grid1D,
    pub u: Vec<f64>,
    pub t: f64,
}

impl Field {
    pub fn new(grid: Grid1D, u: Vec<f64>, t: f64) -> Self {
        assert_eq!(grid.n_cells, u.len(), "field length must match the grid");
        Self { grid, u, t }
    }

    pub fn zeros(grid: Grid1D, t: f64) -> Self {
        Self::new(grid, vec![0.0; grid.n_cells], t)
    }

    pub fn from_fn(grid: Grid1D, t: f64, f: impl Fn(f64) -> f64) -> Self {
        let u = (0..grid.n_cells).map(|i| f(grid.x(i)).max(0.0)).collect();
        Self::new(grid, u, t)
    }

    /// First and last cell above `floor`.
    pub fn support(&self, floor: f64) -> Option<(usize, usize)> {
        let lo = self.u.iter().position(|&v| v > floor)?;
        let hi = self.u.iter().rposition(|&v| v > floor)?;
        Some((lo, hi))
    }

    pub fn pressure(&self, spec: &ProblemSpec) -> Vec<f64> {
        self.u.iter().map(|&u| spec.pressure(u)).collect()
    }

    pub fn max(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `u(-x)` on a grid symmetric about the origin, `None` otherwise.
    pub fn mirrored(&self) -> Option<Field> {
        let g = &self.grid;
        if (g.x0 + 0.5 * g.n_cells as f64 * g.dx).abs() > 1e-9 * g.dx {
            return None;
        }
        let u = self.u.iter().rev().copied().collect();
        Some(Field::new(*g, u, self.t))
    }

    /// Linear interpolation of `u` at `x` (0 outside the grid).
    pub fn sample(&self, x: f64) -> f64 {
        let g = &self.grid;
        let s = (x - g.x0) / g.dx - 0.5;
        if s < -0.5 || s > g.n_cells as f64 - 0.5 {
            return 0.0;
        }
        let i = s.floor();
        let w = s - i;
        let at = |k: f64| -> f64 {
            if k < 0.0 || k >= g.n_cells as f64 {
                0.0
            } else {
                self.u[k as usize]
            }
        };
        at(i) * (1.0 - w) + at(i + 1.0) * w
    }
}
