//! Diffusion nonlinearities `A(u)` and the pressure transform built on them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad;

/// Built-in families plus a user-supplied law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `A(u) = u^m`
    PowerLaw {
        m: f64,
    },
    /// `A(u) = u^m + u^n`
    PowerSum {
        m: f64,
        n: f64,
    },
    /// `A(u) = u^m ln(1+u)`
    PowerLog {
        m: f64,
    },
    Custom,
}

pub type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Evaluators for a custom law: `A, A', A'', A'''`.
#[derive(Clone)]
pub struct CustomLaw {
    pub name: String,
    pub a: [Scalar; 4],
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLaw")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct DiffusionLaw {
    family: Family,
    custom: Option<CustomLaw>,
    a_star: f64,
}

impl DiffusionLaw {
    pub fn power_law(m: f64) -> Result<Self> {
        if !(m > 1.0) {
            return Err(Error::Config(format!("power_law needs m > 1, got {m}")));
        }
        Ok(Self::with_family(Family::PowerLaw { m }))
    }

    pub fn power_sum(m: f64, n: f64) -> Result<Self> {
        if !(m > 1.0 && n > m) {
            return Err(Error::Config(format!(
                "power_sum needs 1 < m < n, got m={m}, n={n}"
            )));
        }
        Ok(Self::with_family(Family::PowerSum { m, n }))
    }

    pub fn power_log(m: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::Config(format!("power_log needs m > 0, got {m}")));
        }
        Ok(Self::with_family(Family::PowerLog { m }))
    }

    /// A law given by explicit evaluators of `A` and its first three
    /// derivatives. No admissibility is assumed; see `validate`.
    pub fn custom(custom: CustomLaw) -> Self {
        let mut law = Self {
            family: Family::Custom,
            custom: Some(custom),
            a_star: f64::NAN,
        };
        law.a_star = law.extrapolate_a_star().0;
        law
    }

    pub fn from_family(family: Family) -> Result<Self> {
        match family {
            Family::PowerLaw { m } => Self::power_law(m),
            Family::PowerSum { m, n } => Self::power_sum(m, n),
            Family::PowerLog { m } => Self::power_log(m),
            Family::Custom => Err(Error::Config(
                "custom laws cannot be built from a family tag".into(),
            )),
        }
    }

    fn with_family(family: Family) -> Self {
        let mut law = Self {
            family,
            custom: None,
            a_star: f64::NAN,
        };
        law.a_star = law.extrapolate_a_star().0;
        law
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn name(&self) -> String {
        match (&self.family, &self.custom) {
            (Family::PowerLaw { m }, _) => format!("u^{m}"),
            (Family::PowerSum { m, n }, _) => format!("u^{m}+u^{n}"),
            (Family::PowerLog { m }, _) => format!("u^{m}ln(1+u)"),
            (Family::Custom, Some(c)) => c.name.clone(),
            (Family::Custom, None) => "custom".into(),
        }
    }

    /// Degeneracy exponent `lim r A''(r)/A'(r)` as `r -> 0+`.
    pub fn a_star(&self) -> f64 {
        self.a_star
    }

    /// Evaluates `A^(k)(u)` for `k = 0..=3`.
    pub fn deriv(&self, k: usize, u: f64) -> f64 {
        if u <= 0.0 {
            return match &self.custom {
                Some(c) => (c.a[k])(0.0),
                None => 0.0,
            };
        }
        match self.family {
            Family::PowerLaw { m } => falling(m, k) * pow(u, m - k as f64),
            Family::PowerSum { m, n } => {
                falling(m, k) * pow(u, m - k as f64) + falling(n, k) * pow(u, n - k as f64)
            }
            Family::PowerLog { m } => power_log_deriv(m, k, u),
            Family::Custom => (self.custom.as_ref().expect("custom law").a[k])(u),
        }
    }

    pub fn a(&self, u: f64) -> f64 {
        self.deriv(0, u)
    }

    pub fn a1(&self, u: f64) -> f64 {
        self.deriv(1, u)
    }

    pub fn a2(&self, u: f64) -> f64 {
        self.deriv(2, u)
    }

    pub fn a3(&self, u: f64) -> f64 {
        self.deriv(3, u)
    }

    /// Closed-form pressure, when the family has one.
    pub fn pressure_closed_form(&self, u: f64) -> Option<f64> {
        let u = u.max(0.0);
        match self.family {
            Family::PowerLaw { m } => Some(m * u.powf(m - 1.0) / (m - 1.0)),
            Family::PowerSum { m, n } => {
                Some(m * u.powf(m - 1.0) / (m - 1.0) + n * u.powf(n - 1.0) / (n - 1.0))
            }
            _ => None,
        }
    }

    /// `Psi(u) = int_0^u A'(r)/r dr` by quadrature in `s = ln r` with the
    /// power-law tail below `r_lo` integrated analytically.
    pub fn pressure_quadrature(&self, u: f64) -> Result<f64> {
        if u <= 0.0 {
            return Ok(0.0);
        }
        let r_lo = 1e-10 * u.min(1.0);
        if !(self.a_star > 0.0) {
            return Err(Error::Quadrature { law: self.name() });
        }
        let tail = self.a1(r_lo) / self.a_star;
        let body = quad::integrate(|s: f64| self.a1(s.exp()), r_lo.ln(), u.ln(), 1e-15, 1e-13)
            .ok_or_else(|| Error::Quadrature { law: self.name() })?;
        let v = tail + body;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Quadrature { law: self.name() })
        }
    }

    pub fn try_pressure(&self, u: f64) -> Result<f64> {
        if u <= 0.0 {
            return Ok(0.0);
        }
        match self.pressure_closed_form(u) {
            Some(v) => Ok(v),
            None => self.pressure_quadrature(u),
        }
    }

    /// Pressure `Psi(u)`; NaN when the law is not integrable at 0.
    pub fn pressure(&self, u: f64) -> f64 {
        self.try_pressure(u).unwrap_or(f64::NAN)
    }

    /// `psi = Psi^{-1}` by safeguarded Newton on a geometrically grown bracket.
    pub fn inverse_pressure(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if let Family::PowerLaw { m } = self.family {
            return ((m - 1.0) * v / m).powf(1.0 / (m - 1.0));
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.pressure(hi) < v {
            lo = hi;
            hi *= 2.0;
            if hi > 1e150 {
                return f64::NAN;
            }
        }
        // Initial guess from the local power law near the bracket.
        let mut u = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = self.pressure(u) - v;
            if g == 0.0 {
                return u;
            }
            if g > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let slope = self.a1(u) / u;
            let mut next = u - g / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() <= 1e-15 * u.max(1e-300) || hi - lo <= 1e-15 * hi {
                return next;
            }
            u = next;
        }
        u
    }

    /// `B(v) = A'(psi(v))`.
    pub fn b_of(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if let Family::PowerLaw { m } = self.family {
            return (m - 1.0) * v;
        }
        self.a1(self.inverse_pressure(v))
    }

    /// `r A''(r)/A'(r)` at `r = 10^-k`, `k = 4..=8`, and its Richardson limit.
    /// Returns `(limit, stability)` where stability is the relative change
    /// between the two finest extrapolants.
    pub fn extrapolate_a_star(&self) -> (f64, f64) {
        let g = |r: f64| r * self.a2(r) / self.a1(r);
        let seq: Vec<f64> = (4..=8).map(|k| g(10f64.powi(-k))).collect();
        // Leading correction is O(r); successive r shrink by a factor 10.
        let rich: Vec<f64> = seq.windows(2).map(|w| (10.0 * w[1] - w[0]) / 9.0).collect();
        let n = rich.len();
        let limit = rich[n - 1];
        let stability = ((rich[n - 1] - rich[n - 2]) / limit).abs();
        if limit.is_finite() {
            (limit, stability)
        } else {
            (seq[seq.len() - 1], f64::INFINITY)
        }
    }
}

/// `u^e` with an integer fast path.
#[inline]
fn pow(u: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 16.0 {
        u.powi(e as i32)
    } else {
        u.powf(e)
    }
}

/// `m (m-1) ... (m-k+1)`
fn falling(m: f64, k: usize) -> f64 {
    (0..k).map(|j| m - j as f64).product()
}

fn power_log_deriv(m: f64, k: usize, u: f64) -> f64 {
    let l = u.ln_1p();
    let p = 1.0 + u;
    let pw = |e: f64| u.powf(e);
    match k {
        0 => pw(m) * l,
        1 => m * pw(m - 1.0) * l + pw(m) / p,
        2 => m * (m - 1.0) * pw(m - 2.0) * l + 2.0 * m * pw(m - 1.0) / p - pw(m) / (p * p),
        3 => {
            m * (m - 1.0) * (m - 2.0) * pw(m - 3.0) * l + 3.0 * m * (m - 1.0) * pw(m - 2.0) / p
                - 3.0 * m * pw(m - 1.0) / (p * p)
                + 2.0 * pw(m) / (p * p * p)
        }
        _ => unreachable!("only derivatives up to order three"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn power_law_pressure_values() {
        let l2 = DiffusionLaw::power_law(2.0).unwrap();
        let l3 = DiffusionLaw::power_law(3.0).unwrap();
        assert!(rel(l2.pressure_quadrature(1.0).unwrap(), 2.0) < 1e-9);
        assert!(rel(l3.pressure_quadrature(1.0).unwrap(), 1.5) < 1e-9);
        assert_eq!(l2.pressure(0.0), 0.0);
        assert!(rel(l2.inverse_pressure(2.0), 1.0) < 1e-12);
        assert!(rel(l2.inverse_pressure(0.5), 0.25) < 1e-12);
    }

    #[test]
    fn a_star_per_family() {
        let cases = [
            (DiffusionLaw::power_law(2.5).unwrap(), 1.5),
            (DiffusionLaw::power_sum(2.0, 3.0).unwrap(), 1.0),
            (DiffusionLaw::power_log(2.0).unwrap(), 2.0),
        ];
        for (law, want) in cases {
            let (a, stab) = law.extrapolate_a_star();
            assert!(rel(a, want) < 1e-3, "{} -> {a}", law.name());
            assert!(stab < 1e-3);
        }
    }

    #[test]
    fn power_log_derivatives_match_differences() {
        let law = DiffusionLaw::power_log(1.5).unwrap();
        for &u in &[0.01, 0.3, 1.0, 2.5] {
            for k in 0..3 {
                let h = 1e-5 * u;
                let fd = (law.deriv(k, u + h) - law.deriv(k, u - h)) / (2.0 * h);
                assert!(rel(fd, law.deriv(k + 1, u)) < 1e-6, "k={k} u={u}");
            }
        }
    }

    #[test]
    fn power_sum_closed_form_matches_quadrature() {
        let law = DiffusionLaw::power_sum(2.0, 3.5).unwrap();
        for &u in &[1e-4, 0.1, 1.0, 2.0] {
            let q = law.pressure_quadrature(u).unwrap();
            let c = law.pressure_closed_form(u).unwrap();
            assert!(rel(q, c) < 1e-8, "u={u}: {q} vs {c}");
        }
    }

    #[test]
    fn inverse_roundtrip_power_log() {
        let law = DiffusionLaw::power_log(1.0).unwrap();
        for &v in &[1e-6, 1e-3, 0.5, 3.0] {
            let u = law.inverse_pressure(v);
            assert!(rel(law.pressure(u), v) < 1e-10);
        }
    }

    #[test]
    fn power_law_b_is_linear() {
        let law = DiffusionLaw::power_law(3.0).unwrap();
        assert!(rel(law.b_of(0.7), 1.4) < 1e-14);
        assert_eq!(law.b_of(0.0), 0.0);
        let psum = DiffusionLaw::power_sum(2.0, 3.0).unwrap();
        let v = 0.4;
        assert!(rel(psum.b_of(v), psum.a1(psum.inverse_pressure(v))) < 1e-14);
    }
}
