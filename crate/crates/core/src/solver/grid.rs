use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell-centred grid: cell `i` is centred at `x0 + (i + 1/2) dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x0: f64,
    pub dx: f64,
    pub n_cells: usize,
}

impl Grid1D {
    pub fn new(x0: f64, dx: f64, n_cells: usize) -> Result<Self> {
        if !(dx > 0.0) || n_cells == 0 {
            return Err(Error::Config(format!(
                "invalid grid: dx={dx}, n_cells={n_cells}"
            )));
        }
        Ok(Self { x0, dx, n_cells })
    }

    /// Grid covering `[-left L, right L]` with `cells_per_period` cells per
    /// period, so that cell boundaries fall on multiples of `L`.
    pub fn periodic_aligned(
        period: f64,
        cells_per_period: usize,
        left: usize,
        right: usize,
    ) -> Result<Self> {
        if cells_per_period < 4 {
            return Err(Error::Config(format!(
                "cells_per_period must be >= 4, got {cells_per_period}"
            )));
        }
        let dx = period / cells_per_period as f64;
        Self::new(
            -(left as f64) * period,
            dx,
            (left + right) * cells_per_period,
        )
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x0 + self.n_cells as f64 * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.x(i)).collect()
    }

    /// Index of the cell containing `x`, if inside the grid.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let s = (x - self.x0) / self.dx;
        if s < 0.0 || s >= self.n_cells as f64 {
            None
        } else {
            Some(s.floor() as usize)
        }
    }

    /// Number of whole cells per `period`, when it is an integer to 1e-12.
    pub fn cells_per(&self, period: f64) -> Option<usize> {
        let q = period / self.dx;
        let r = q.round();
        (r >= 1.0 && ((q - r) / r).abs() < 1e-12).then_some(r as usize)
    }

    /// Phase index of cell `i` within a period of `cells` cells, given that
    /// `x0` is a multiple of the period.
    pub fn phase(&self, i: usize, cells: usize, period: f64) -> usize {
        let offset = (self.x0 / period).round() as i64 * cells as i64;
        (i as i64 + offset).rem_euclid(cells as i64) as usize
    }
}
