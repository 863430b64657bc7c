//! Sufficient condition for spreading: initial data dominating a stationary
//! compact subsolution somewhere.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::ProblemSpec;
use crate::solver::Field;
use crate::waves::compact::{find_compact_subsolution, ShootResult};
use crate::waves::phase::TwProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum SpreadingVerdict {
    /// `u0 >= phi(. - center)` on the whole support of the shifted profile.
    Guaranteed {
        center: f64,
    },
    Undetermined,
}

impl SpreadingVerdict {
    pub fn is_guaranteed(&self) -> bool {
        matches!(self, SpreadingVerdict::Guaranteed { .. })
    }
}

/// Stationary (`c = 0`) subsolution with peak above `(theta + kappa_0) / 2`.
pub fn default_subsolution(spec: &ProblemSpec) -> Result<ShootResult> {
    let tw = TwProblem::from_spec(spec);
    let d = 0.5 * (spec.reaction.theta() + tw.kappa0);
    find_compact_subsolution(&tw, 0.0, d)
}

/// Slides `sub` over every cell centre of `u0` and reports the first
/// placement where it is dominated at all cells of its support.
pub fn check_spreading_with(u0: &Field, sub: &ShootResult) -> SpreadingVerdict {
    let g = &u0.grid;
    if u0.max() < sub.peak {
        return SpreadingVerdict::Undetermined;
    }
    let half = (sub.l / g.dx).ceil() as usize + 1;
    let n = g.n_cells;
    for k in 0..n {
        let xc = g.x(k);
        if xc - sub.l < g.x0 || xc + sub.l > g.x_end() {
            continue;
        }
        let lo = k.saturating_sub(half);
        let hi = (k + half).min(n - 1);
        if (lo..=hi).all(|i| u0.u[i] >= sub.phi_at(g.x(i) - xc)) {
            return SpreadingVerdict::Guaranteed { center: xc };
        }
    }
    SpreadingVerdict::Undetermined
}

pub fn check_spreading_condition(spec: &ProblemSpec, u0: &Field) -> Result<SpreadingVerdict> {
    let sub = default_subsolution(spec)?;
    Ok(check_spreading_with(u0, &sub))
}
