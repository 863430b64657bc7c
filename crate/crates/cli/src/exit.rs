use std::fmt;

use sharpwave::Error;

pub const OK: i32 = 0;
pub const OTHER: i32 = 1;
pub const CONFIG: i32 = 2;
pub const EXTRACTION: i32 = 3;
pub const RATIO_GATE: i32 = 4;
pub const HASH: i32 = 5;
pub const NOT_SPREADING: i32 = 6;

/// Failures with a dedicated exit status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Extraction(String),
    Hash(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config: {m}"),
            Failure::Extraction(m) => write!(f, "extraction: {m}"),
            Failure::Hash(m) => write!(f, "spec hash mismatch: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

pub fn code(err: &anyhow::Error) -> i32 {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return match f {
            Failure::Config(_) => CONFIG,
            Failure::Extraction(_) => EXTRACTION,
            Failure::Hash(_) => HASH,
        };
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Expr { .. } | Error::Json(_)) => CONFIG,
        Some(Error::NotConverged { .. } | Error::NonMonotone { .. }) => EXTRACTION,
        Some(Error::RatioGate { .. }) => RATIO_GATE,
        Some(Error::NotSpreading(_)) => NOT_SPREADING,
        _ => OTHER,
    }
}
