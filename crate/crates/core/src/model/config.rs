//! Loading problem data from JSON documents.
//!
//! ```json
//! {
//!   "diffusion": {"family": "power_law", "m": 2},
//!   "reaction": {"kind": "monostable", "L": 1, "theta": 0, "f": "u", "kappa": "1"}
//! }
//! ```

use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::law::DiffusionLaw;
use crate::model::reaction::{Reaction, ReactionKind};
use crate::model::spec::ProblemSpec;

/// Looks up a dotted path, failing with the path in the message.
pub fn lookup<'a>(doc: &'a Value, path: &str) -> Result<&'a Value> {
    let mut cur = doc;
    for key in path.split('.') {
        cur = cur
            .get(key)
            .ok_or_else(|| Error::Config(format!("missing key `{path}`")))?;
    }
    Ok(cur)
}

pub fn get_f64(doc: &Value, path: &str) -> Result<f64> {
    lookup(doc, path)?
        .as_f64()
        .ok_or_else(|| Error::Config(format!("key `{path}` must be a number")))
}

pub fn get_str<'a>(doc: &'a Value, path: &str) -> Result<&'a str> {
    lookup(doc, path)?
        .as_str()
        .ok_or_else(|| Error::Config(format!("key `{path}` must be a string")))
}

pub fn opt_f64(doc: &Value, path: &str) -> Result<Option<f64>> {
    match lookup(doc, path) {
        Ok(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::Config(format!("key `{path}` must be a number"))),
        Err(_) => Ok(None),
    }
}

pub fn opt_str<'a>(doc: &'a Value, path: &str) -> Result<Option<&'a str>> {
    match lookup(doc, path) {
        Ok(v) => v
            .as_str()
            .map(Some)
            .ok_or_else(|| Error::Config(format!("key `{path}` must be a string"))),
        Err(_) => Ok(None),
    }
}

pub fn law_from_json(doc: &Value) -> Result<DiffusionLaw> {
    match get_str(doc, "diffusion.family")? {
        "power_law" => DiffusionLaw::power_law(get_f64(doc, "diffusion.m")?),
        "power_sum" => {
            DiffusionLaw::power_sum(get_f64(doc, "diffusion.m")?, get_f64(doc, "diffusion.n")?)
        }
        "power_log" => DiffusionLaw::power_log(get_f64(doc, "diffusion.m")?),
        other => Err(Error::Config(format!(
            "unknown diffusion.family {other:?} (expected power_law, power_sum or power_log)"
        ))),
    }
}

pub fn reaction_from_json(doc: &Value) -> Result<Reaction> {
    let kind_s = get_str(doc, "reaction.kind")?;
    let kind = ReactionKind::parse(kind_s)
        .ok_or_else(|| Error::Config(format!("unknown reaction.kind {kind_s:?}")))?;
    let period = get_f64(doc, "reaction.L")?;
    let theta = opt_f64(doc, "reaction.theta")?.unwrap_or(0.0);
    let f = get_str(doc, "reaction.f")?;
    let kappa = get_str(doc, "reaction.kappa")?;
    let g0 = opt_str(doc, "reaction.g0")?;
    Reaction::new(kind, f, kappa, period, theta, g0)
}

/// Reads the `diffusion` and `reaction` sections.
pub fn spec_from_json(doc: &Value) -> Result<ProblemSpec> {
    Ok(ProblemSpec::new(
        law_from_json(doc)?,
        reaction_from_json(doc)?,
    ))
}

pub fn spec_from_str(text: &str) -> Result<ProblemSpec> {
    let doc: Value = serde_json::from_str(text)?;
    spec_from_json(&doc)
}
