use serde::{Deserialize, Serialize};

use crate::model::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    /// `-max d/dv (h(x,v) / (v B(v)))` over `J_eps` and one period.
    pub lambda0: f64,
    /// `B(v)/v` nondecreasing on the sampled `(0, Psi(kappa^0) + eps0]`.
    pub b_over_v_nondecreasing: bool,
    /// `B(v)/v` strictly increasing on the samples.
    pub b_over_v_increasing: bool,
    pub eps0: f64,
    /// `J_eps = [Psi(kappa_0) - eps0, Psi(kappa^0) + eps0]`.
    pub j_eps: (f64, f64),
}

impl RatioReport {
    pub fn passes(&self) -> bool {
        self.lambda0 > 0.0 && self.b_over_v_nondecreasing
    }
}

const NV: usize = 200;
const NX: usize = 64;

pub fn check_monotone_ratios(spec: &ProblemSpec, eps0: f64) -> RatioReport {
    let lo = (spec.pressure(spec.kappa_lo()) - eps0).max(1e-6);
    let hi = spec.pressure(spec.kappa_hi()) + eps0;
    let l = spec.period();
    let g = |x: f64, v: f64| spec.h_of(x, v) / (v * spec.b_of(v));
    let mut worst = f64::NEG_INFINITY;
    for i in 0..NX {
        let x = l * i as f64 / NX as f64;
        for j in 0..=NV {
            let v = lo + (hi - lo) * j as f64 / NV as f64;
            let dv = 1e-5 * v.max(1e-3);
            worst = worst.max((g(x, v + dv) - g(x, v - dv)) / (2.0 * dv));
        }
    }
    let ratio = |v: f64| spec.b_of(v) / v;
    let mut nondec = true;
    let mut inc = true;
    let mut prev = ratio(hi * 1e-4);
    for j in 1..=NV {
        let v = hi * (1e-4 + (1.0 - 1e-4) * j as f64 / NV as f64);
        let r = ratio(v);
        if r < prev - 1e-12 * prev.abs() {
            nondec = false;
        }
        if !(r > prev) {
            inc = false;
        }
        prev = r;
    }
    RatioReport {
        lambda0: -worst,
        b_over_v_nondecreasing: nondec,
        b_over_v_increasing: inc,
        eps0,
        j_eps: (lo, hi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiffusionLaw, Reaction, ReactionKind};

    fn spec(
        law: DiffusionLaw,
        f: &str,
        kappa: &str,
        kind: ReactionKind,
        theta: f64,
    ) -> ProblemSpec {
        ProblemSpec::new(
            law,
            Reaction::new(kind, f, kappa, 1.0, theta, None).unwrap(),
        )
    }

    #[test]
    fn power_law_ratio_is_constant() {
        let s = spec(
            DiffusionLaw::power_law(2.0).unwrap(),
            "u",
            "1",
            ReactionKind::Monostable,
            0.0,
        );
        let r = check_monotone_ratios(&s, 0.1);
        assert!(r.b_over_v_nondecreasing);
        assert!(!r.b_over_v_increasing);
        // h/(vB) = kappa/v - 1/2, so lambda0 = min kappa / v^2 on J_eps.
        let v_hi = 2.0 + 0.1;
        assert!(
            (r.lambda0 - 1.0 / (v_hi * v_hi)).abs() < 1e-6,
            "{}",
            r.lambda0
        );
    }

    #[test]
    fn power_sum_ratio_increases() {
        let s = spec(
            DiffusionLaw::power_sum(2.0, 3.0).unwrap(),
            "u",
            "1",
            ReactionKind::Monostable,
            0.0,
        );
        let r = check_monotone_ratios(&s, 0.1);
        assert!(r.b_over_v_increasing);
    }

    #[test]
    fn wide_band_with_heterogeneous_growth_fails() {
        // Strongly varying f makes h/(vB) increase somewhere on J_eps.
        let s = spec(
            DiffusionLaw::power_law(2.0).unwrap(),
            "u*(1 + 0.9*sin(2*pi*x))*(u - 0.05)^2 / 0.1",
            "1 + 0.9*sin(2*pi*x)",
            ReactionKind::Monostable,
            0.0,
        );
        let r = check_monotone_ratios(&s, 0.1);
        assert!(r.lambda0 <= 0.0, "{}", r.lambda0);
    }
}
