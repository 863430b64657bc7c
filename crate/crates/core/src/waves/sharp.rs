//! Speed of the homogeneous sharp traveling wave by bisection on the type
//! of the trajectory leaving the saddle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waves::phase::{shoot_from_saddle, Outcome, PhaseSample, ShootOptions, TwProblem};

pub const SADDLE_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SharpWave {
    pub c: f64,
    /// Final bracket `[lo, hi]` with a steep connection at `lo` and a flat
    /// or turning one at `hi`.
    pub bracket: (f64, f64),
    /// Profile with the front at `z = 0`.
    pub profile: Vec<PhaseSample>,
    /// Decay rate of `kappa_0 - phi` as `z -> -inf`.
    pub tail_rate: f64,
}

fn is_above(tw: &TwProblem, c: f64, opts: &ShootOptions) -> Result<bool> {
    let shot = shoot_from_saddle(tw, c, SADDLE_OFFSET, opts);
    match shot.outcome {
        Outcome::Steep => Ok(false),
        Outcome::Flat | Outcome::Turned => Ok(true),
        o => Err(Error::Shooting(format!(
            "trajectory at c = {c} ended as {o:?}"
        ))),
    }
}

/// Bisection to `tol` on the speed separating steep from flat or turning
/// connections. A negative result means the front retreats.
pub fn find_sharp_speed_with(tw: &TwProblem, tol: f64) -> Result<SharpWave> {
    let g_k0 = tw.g0_prime(tw.kappa0);
    if !(g_k0 < 0.0) {
        return Err(Error::Precondition(format!(
            "g0'(kappa_0) = {g_k0} must be negative"
        )));
    }
    let opts = ShootOptions::default();
    let (mut lo, mut hi);
    if is_above(tw, 0.0, &opts)? {
        hi = 0.0;
        lo = -1.0;
        while is_above(tw, lo, &opts)? {
            hi = lo;
            lo *= 2.0;
            if lo < -1e6 {
                return Err(Error::Shooting(
                    "no steep connection for any negative speed".into(),
                ));
            }
        }
    } else {
        lo = 0.0;
        hi = 1.0;
        while !is_above(tw, hi, &opts)? {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::Shooting(
                    "no flat connection for any positive speed".into(),
                ));
            }
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if is_above(tw, mid, &opts)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let fine = ShootOptions {
        dz_max: 0.01,
        ..opts
    };
    let shot = shoot_from_saddle(tw, lo, SADDLE_OFFSET, &fine);
    let z_end = shot.last().z;
    let profile = shot
        .samples
        .iter()
        .map(|s| PhaseSample {
            z: s.z - z_end,
            ..*s
        })
        .collect();
    Ok(SharpWave {
        c,
        bracket: (lo, hi),
        profile,
        tail_rate: tw.tail_rate(c),
    })
}

pub fn find_sharp_speed(tw: &TwProblem) -> Result<SharpWave> {
    find_sharp_speed_with(tw, 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DiffusionLaw;
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
    fn logistic_speed_is_one() {
        let w = find_sharp_speed(&logistic()).unwrap();
        assert!((w.c - 1.0).abs() < 1e-6, "c = {}", w.c);
    }

    #[test]
    fn speed_scales_with_source() {
        let tw = logistic();
        let c1 = find_sharp_speed(&tw).unwrap().c;
        let c4 = find_sharp_speed(&tw.scaled(4.0)).unwrap().c;
        assert!((c4 - 2.0 * c1).abs() < 1e-5, "{c1} {c4}");
    }

    #[test]
    fn bistable_speed_sign_follows_flux() {
        let fwd = bistable(0.2);
        assert!(fwd.potential(1.0) > 0.0);
        assert!(find_sharp_speed(&fwd).unwrap().c > 0.0);
        let back = bistable(0.9);
        assert!(back.potential(1.0) < 0.0);
        assert!(find_sharp_speed(&back).unwrap().c < 0.0);
    }

    #[test]
    fn ordered_sources_give_ordered_speeds() {
        let a = bistable(0.3);
        let b = bistable(0.2);
        let ca = find_sharp_speed(&a).unwrap().c;
        let cb = find_sharp_speed(&b).unwrap().c;
        assert!(ca <= cb + 1e-6);
    }
}
