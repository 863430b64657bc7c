use crate::model::ProblemSpec;
use crate::solver::front::{locate_front_with, pressure_slope_right};
use crate::solver::Field;

/// `|r' + v_x(r-)|` with the one-sided second-order pressure gradient
/// behind the front placed at `r`. The flag is set when fewer than three
/// positive cells are available and a first-order stencil is used.
pub fn darcy_residual(
    spec: &ProblemSpec,
    field: &Field,
    r: f64,
    rprime: f64,
) -> Option<(f64, bool)> {
    let mut front = locate_front_with(spec, field, 1e-12 * spec.kappa_hi())?;
    front.r = r;
    let (vx, degraded) = pressure_slope_right(spec, field, &front);
    Some(((rprime + vx).abs(), degraded))
}
