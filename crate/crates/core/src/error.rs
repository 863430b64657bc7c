use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("expression {src:?}: {msg}")]
    Expr { src: String, msg: String },
    #[error("pressure quadrature did not converge for law {law}")]
    Quadrature { law: String },
    #[error("time step {dt:e} exceeds the stability bound {required:e}")]
    Cfl { dt: f64, required: f64 },
    #[error("blow-up guard: max u = {max_u} at t = {t}")]
    Blowup { max_u: f64, t: f64 },
    #[error("front reached the domain edge at t = {t}; enlarge the window")]
    WindowTooSmall { t: f64 },
    #[error("extraction did not converge after {} crossings (last gap {:e})", .gaps.len(), .gaps.last().copied().unwrap_or(f64::NAN))]
    NotConverged { gaps: Vec<f64> },
    #[error("renormalized sequence not monotone: increase {excess:e} at n = {n}; refine the grid")]
    NonMonotone { n: usize, excess: f64 },
    #[error("shooting: {0}")]
    Shooting(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("not spreading: {0}")]
    NotSpreading(String),
    #[error("(H)-surrogate failed: lambda0 = {lambda0}")]
    RatioGate { lambda0: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not supported: {0}")]
    Unsupported(String),
    #[error("data: {0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
