//! Bundled scenarios: Barenblatt validation, homogeneous logistic,
//! heterogeneous monostable and heterogeneous bistable.

use crate::error::Result;
use crate::model::config::spec_from_str;
use crate::model::ProblemSpec;

pub const BARENBLATT: &str = include_str!("../demos/barenblatt.json");
pub const LOGISTIC: &str = include_str!("../demos/logistic.json");
pub const HETMONO: &str = include_str!("../demos/hetmono.json");
pub const HETBI: &str = include_str!("../demos/hetbi.json");

pub const ALL: [(&str, &str); 4] = [
    ("barenblatt", BARENBLATT),
    ("logistic", LOGISTIC),
    ("hetmono", HETMONO),
    ("hetbi", HETBI),
];

pub fn get(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn spec(name: &str) -> Option<Result<ProblemSpec>> {
    get(name).map(spec_from_str)
}
