//! Full equation data and the pressure-variable evaluators.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::model::law::{DiffusionLaw, Family};
use crate::model::reaction::{LowerBound, Reaction};

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub law: DiffusionLaw,
    pub reaction: Reaction,
}

impl ProblemSpec {
    pub fn new(law: DiffusionLaw, reaction: Reaction) -> Self {
        Self { law, reaction }
    }

    pub fn period(&self) -> f64 {
        self.reaction.period()
    }

    pub fn kappa_lo(&self) -> f64 {
        self.reaction.kappa_lo()
    }

    pub fn kappa_hi(&self) -> f64 {
        self.reaction.kappa_hi()
    }

    /// `Psi(u)`.
    pub fn pressure(&self, u: f64) -> f64 {
        self.law.pressure(u)
    }

    /// `psi(v)`.
    pub fn density(&self, v: f64) -> f64 {
        self.law.inverse_pressure(v)
    }

    pub fn b_of(&self, v: f64) -> f64 {
        self.law.b_of(v)
    }

    /// `h(x,v) = F(x,psi(v)) / psi'(v)` with `psi' = psi/B`.
    pub fn h_of(&self, x: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let u = self.density(v);
        self.reaction.source(x, u) * self.law.b_of(v) / u
    }

    /// `F(x,u)`.
    pub fn source(&self, x: f64, u: f64) -> f64 {
        self.reaction.source(x, u)
    }

    /// The spec with `x -> -x`, used for leftward waves.
    pub fn mirrored(&self) -> Result<Self> {
        Ok(Self {
            law: self.law.clone(),
            reaction: self.reaction.mirrored()?,
        })
    }

    /// Canonical description of the equation data. Keys are sorted by the
    /// map implementation, so serialisation is stable.
    pub fn canonical(&self) -> Value {
        let diffusion = match self.law.family() {
            Family::PowerLaw { m } => json!({"family": "power_law", "m": m}),
            Family::PowerSum { m, n } => json!({"family": "power_sum", "m": m, "n": n}),
            Family::PowerLog { m } => json!({"family": "power_log", "m": m}),
            Family::Custom => json!({"family": "custom", "name": self.law.name()}),
        };
        let r = &self.reaction;
        let mut reaction = json!({
            "kind": r.kind().as_str(),
            "L": r.period(),
            "theta": r.theta(),
            "f": r.f_expr().source(),
            "kappa": r.kappa_expr().source(),
        });
        if let LowerBound::Expr(e) = r.lower_bound() {
            reaction["g0"] = Value::String(e.source().to_string());
        }
        json!({"diffusion": diffusion, "reaction": reaction})
    }

    /// Hex SHA-256 of the canonical description plus the resolution.
    pub fn hash(&self, cells_per_period: usize) -> String {
        let mut doc = self.canonical();
        doc["cells_per_period"] = json!(cells_per_period);
        let text = serde_json::to_string(&doc).expect("canonical json");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reaction::ReactionKind;

    fn logistic() -> ProblemSpec {
        let law = DiffusionLaw::power_law(2.0).unwrap();
        let r = Reaction::new(ReactionKind::Monostable, "u", "1", 1.0, 0.0, None).unwrap();
        ProblemSpec::new(law, r)
    }

    #[test]
    fn h_reference_value() {
        // u = 0.5, B = 1, F = 0.25, psi' = 0.5
        let s = logistic();
        assert!((s.h_of(0.0, 1.0) - 0.5).abs() < 1e-14);
        assert_eq!(s.h_of(0.0, 0.0), 0.0);
    }

    #[test]
    fn h_slope_at_zero() {
        let s = logistic();
        let v = 1e-7;
        let slope = s.h_of(0.3, v) / v;
        // kappa f_u(0) A* = 1
        assert!((slope - 1.0).abs() < 1e-3);
    }

    #[test]
    fn hash_is_stable_and_resolution_sensitive() {
        let s = logistic();
        assert_eq!(s.hash(32), logistic().hash(32));
        assert_ne!(s.hash(32), s.hash(64));
        assert_eq!(s.hash(32).len(), 64);
    }
}
