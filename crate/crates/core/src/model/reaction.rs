//! Periodic reaction data `f(x,u)`, `kappa(x)` and the homogeneous lower
//! bound `g0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::expr::Expr;
use crate::numerics::fit::interp_sorted;
use crate::numerics::roots::golden_section;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionKind {
    Monostable,
    Bistable,
    Combustion,
    Multistable,
}

impl ReactionKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "monostable" => Some(Self::Monostable),
            "bistable" => Some(Self::Bistable),
            "combustion" => Some(Self::Combustion),
            "multistable" => Some(Self::Multistable),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Monostable => "monostable",
            Self::Bistable => "bistable",
            Self::Combustion => "combustion",
            Self::Multistable => "multistable",
        }
    }
}

/// Samples of `x` per period used for envelopes and validators.
pub const X_SAMPLES: usize = 64;

#[derive(Debug, Clone)]
pub enum LowerBound {
    /// `g0(u) = f(u)(kappa - u)`, valid when neither f nor kappa depends on x.
    Exact,
    /// A user-supplied expression in `u`.
    Expr(Expr),
    /// Pointwise minimum over `X_SAMPLES` x-points, piecewise linear in u.
    Table { u: Vec<f64>, g: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct Reaction {
    kind: ReactionKind,
    f: Expr,
    f_u: Expr,
    kappa: Expr,
    period: f64,
    theta: f64,
    kappa_lo: f64,
    kappa_hi: f64,
    g0: LowerBound,
    homogeneous: bool,
}

impl Reaction {
    /// Builds the reaction and computes the extrema of `kappa` over one
    /// period. `g0` defaults to the exact homogeneous source or, for
    /// heterogeneous data, to the sampled lower envelope.
    pub fn new(
        kind: ReactionKind,
        f: &str,
        kappa: &str,
        period: f64,
        theta: f64,
        g0: Option<&str>,
    ) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Config(format!(
                "reaction.L must be positive, got {period}"
            )));
        }
        if !(theta >= 0.0) {
            return Err(Error::Config(format!(
                "reaction.theta must be nonnegative, got {theta}"
            )));
        }
        let f = Expr::parse(f)?;
        let kappa = Expr::parse(kappa)?;
        if kappa.depends_on_u() {
            return Err(Error::Config("reaction.kappa may depend on x only".into()));
        }
        let f_u = f.diff_u();
        let homogeneous = !f.depends_on_x() && !kappa.depends_on_x();
        let (kappa_lo, kappa_hi) = extrema(&kappa, period);
        let mut r = Self {
            kind,
            f,
            f_u,
            kappa,
            period,
            theta,
            kappa_lo,
            kappa_hi,
            g0: LowerBound::Exact,
            homogeneous,
        };
        r.g0 = match g0 {
            Some(src) => {
                let e = Expr::parse(src)?;
                if e.depends_on_x() {
                    return Err(Error::Config("reaction.g0 may depend on u only".into()));
                }
                LowerBound::Expr(e)
            }
            None if homogeneous => LowerBound::Exact,
            None => r.envelope_table(),
        };
        Ok(r)
    }

    fn envelope_table(&self) -> LowerBound {
        let k0 = self.kappa_lo;
        let top = 2.0 * self.kappa_hi;
        let mut breaks = vec![0.0];
        if self.theta > 0.0 && self.theta < k0 {
            breaks.push(self.theta);
        }
        breaks.push(k0);
        breaks.push(top);
        let per = 512;
        let mut us = Vec::new();
        for w in breaks.windows(2) {
            for j in 0..per {
                us.push(w[0] + (w[1] - w[0]) * j as f64 / per as f64);
            }
        }
        us.push(top);
        let g = us
            .iter()
            .map(|&u| {
                if u == 0.0 {
                    return 0.0;
                }
                let m = (0..X_SAMPLES)
                    .map(|i| self.source(self.period * i as f64 / X_SAMPLES as f64, u))
                    .fold(f64::INFINITY, f64::min);
                if u == k0 {
                    m.min(0.0)
                } else {
                    m
                }
            })
            .collect();
        LowerBound::Table { u: us, g }
    }

    pub fn kind(&self) -> ReactionKind {
        self.kind
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn kappa_lo(&self) -> f64 {
        self.kappa_lo
    }

    pub fn kappa_hi(&self) -> f64 {
        self.kappa_hi
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn f_expr(&self) -> &Expr {
        &self.f
    }

    pub fn kappa_expr(&self) -> &Expr {
        &self.kappa
    }

    pub fn lower_bound(&self) -> &LowerBound {
        &self.g0
    }

    pub fn f(&self, x: f64, u: f64) -> f64 {
        self.f.eval(x, u)
    }

    /// `f(x, .)` with the `x`-dependence evaluated once.
    pub fn f_at(&self, x: f64) -> Expr {
        self.f.at_x(x)
    }

    pub fn f_u(&self, x: f64, u: f64) -> f64 {
        self.f_u.eval(x, u)
    }

    pub fn kappa(&self, x: f64) -> f64 {
        self.kappa.eval(x, 0.0)
    }

    /// `F(x,u) = f(x,u)(kappa(x) - u)`.
    pub fn source(&self, x: f64, u: f64) -> f64 {
        self.f.eval(x, u) * (self.kappa.eval(x, 0.0) - u)
    }

    /// `dF/du`.
    pub fn source_u(&self, x: f64, u: f64) -> f64 {
        let k = self.kappa.eval(x, 0.0);
        self.f_u.eval(x, u) * (k - u) - self.f.eval(x, u)
    }

    pub fn g0(&self, u: f64) -> f64 {
        match &self.g0 {
            LowerBound::Exact => self.source(0.0, u),
            LowerBound::Expr(e) => e.eval(0.0, u),
            LowerBound::Table { u: us, g } => {
                let n = us.len();
                if u > us[n - 1] {
                    let s = (g[n - 1] - g[n - 2]) / (us[n - 1] - us[n - 2]);
                    g[n - 1] + s * (u - us[n - 1])
                } else {
                    interp_sorted(us, g, u)
                }
            }
        }
    }

    /// `g0'(u)` by central differences.
    pub fn g0_prime(&self, u: f64) -> f64 {
        match &self.g0 {
            LowerBound::Exact => self.source_u(0.0, u),
            _ => {
                let h = 1e-6 * self.kappa_hi;
                (self.g0(u + h) - self.g0(u - h)) / (2.0 * h)
            }
        }
    }

    /// The mirrored reaction `x -> -x`.
    pub fn mirrored(&self) -> Result<Self> {
        let f = substitute_neg_x(self.f.source());
        let k = substitute_neg_x(self.kappa.source());
        let g0 = match &self.g0 {
            LowerBound::Expr(e) => Some(e.source().to_string()),
            _ => None,
        };
        Self::new(self.kind, &f, &k, self.period, self.theta, g0.as_deref())
    }
}

/// Replaces the variable `x` by `(-x)` textually, respecting identifiers.
fn substitute_neg_x(src: &str) -> String {
    let mut out = String::with_capacity(src.len() + 8);
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word == "x" {
                out.push_str("(-x)");
            } else {
                out.push_str(&word);
            }
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            // keep exponents such as 1e-3 intact
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric()
                    || chars[i] == '.'
                    || ((chars[i] == '-' || chars[i] == '+') && matches!(chars[i - 1], 'e' | 'E')))
            {
                i += 1;
            }
            out.extend(&chars[start..i]);
            continue;
        }
        out.push(c);
        i += 1;
    }
    out
}

/// Min and max of `kappa` over one period: dense sampling then golden refinement.
fn extrema(kappa: &Expr, period: f64) -> (f64, f64) {
    if !kappa.depends_on_x() {
        let k = kappa.eval(0.0, 0.0);
        return (k, k);
    }
    let n = 2048;
    let h = period / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| kappa.eval(x, 0.0)).collect();
    let (mut imin, mut imax) = (0, 0);
    for i in 0..n {
        if vals[i] < vals[imin] {
            imin = i;
        }
        if vals[i] > vals[imax] {
            imax = i;
        }
    }
    let (_, lo) = golden_section(
        |x| kappa.eval(x, 0.0),
        xs[imin] - h,
        xs[imin] + h,
        1e-12 * period,
    );
    let (_, hi) = golden_section(
        |x| -kappa.eval(x, 0.0),
        xs[imax] - h,
        xs[imax] + h,
        1e-12 * period,
    );
    (lo.min(vals[imin]), (-hi).max(vals[imax]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_extrema() {
        let r = Reaction::new(
            ReactionKind::Monostable,
            "u",
            "1+0.1*sin(2*pi*x)",
            1.0,
            0.0,
            None,
        )
        .unwrap();
        assert!((r.kappa_lo() - 0.9).abs() < 1e-12);
        assert!((r.kappa_hi() - 1.1).abs() < 1e-12);
        assert!(!r.is_homogeneous());
    }

    #[test]
    fn homogeneous_g0_is_exact() {
        let r = Reaction::new(ReactionKind::Monostable, "u", "1", 1.0, 0.0, None).unwrap();
        assert!(r.is_homogeneous());
        assert_eq!(r.g0(0.5), 0.25);
        assert!((r.g0_prime(1.0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn envelope_is_a_lower_bound_with_zeros() {
        let r = Reaction::new(
            ReactionKind::Bistable,
            "u*(u-0.2)",
            "1+0.05*cos(2*pi*x)",
            1.0,
            0.2,
            None,
        )
        .unwrap();
        assert_eq!(r.g0(0.0), 0.0);
        assert_eq!(r.g0(r.kappa_lo()), 0.0);
        for i in 0..64 {
            let x = i as f64 / 64.0;
            for j in 0..=200 {
                let u = 2.0 * r.kappa_hi() * j as f64 / 200.0;
                assert!(r.g0(u) <= r.source(x, u) + 1e-6);
            }
        }
    }

    #[test]
    fn mirror_substitution() {
        assert_eq!(
            substitute_neg_x("1+0.05*sin(2*pi*x)"),
            "1+0.05*sin(2*pi*(-x))"
        );
        assert_eq!(substitute_neg_x("exp(x)*1e-3"), "exp((-x))*1e-3");
        let r = Reaction::new(
            ReactionKind::Monostable,
            "u",
            "1+0.1*sin(2*pi*x)",
            1.0,
            0.0,
            None,
        )
        .unwrap();
        let m = r.mirrored().unwrap();
        assert!((m.kappa(0.3) - r.kappa(-0.3)).abs() < 1e-15);
    }

    #[test]
    fn source_derivative() {
        let r = Reaction::new(
            ReactionKind::Bistable,
            "u*(u-0.2)",
            "1+0.05*cos(2*pi*x)",
            1.0,
            0.2,
            None,
        )
        .unwrap();
        let (x, u) = (0.37, 0.61);
        let h = 1e-6;
        let fd = (r.source(x, u + h) - r.source(x, u - h)) / (2.0 * h);
        assert!((fd - r.source_u(x, u)).abs() < 1e-8);
    }
}
