//! Equation data: diffusion laws, reactions, the pressure transform and
//! assumption validators.

pub mod config;
pub mod expr;
pub mod law;
pub mod reaction;
pub mod spec;
pub mod validate;

pub use expr::Expr;
pub use law::{CustomLaw, DiffusionLaw, Family};
pub use reaction::{LowerBound, Reaction, ReactionKind};
pub use spec::ProblemSpec;
pub use validate::{validate, Check, ValidationReport};
