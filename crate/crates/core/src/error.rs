use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha(w) is undefined at w = -1")]
    PoleAtMinusOne,
    #[error("beta(z) is undefined at z = -i")]
    PoleAtMinusI,
    #[error("boundary function does not decay: declared limit at infinity is {0}")]
    NonDecayingInput(f64),
    #[error("rational function evaluated at its pole {0}")]
    EvalAtPole(String),
    #[error("quadrature did not converge: value {value:e}, estimated error {est_error:e}")]
    NoConvergence { value: f64, est_error: f64 },
    #[error("singularity at {location} of order {order} is not p-integrable for p = {p} (p*l >= 1)")]
    NonIntegrableSingularity { location: f64, order: u32, p: f64 },
    #[error("polynomial degree cap {cap} reached with sup error {sup_err:e} above tolerance {tol:e}")]
    DegreeOverflow { cap: usize, sup_err: f64, tol: f64 },
    #[error("residual schedule stalled at stage {stage}: {residual:e} did not halve from {earlier:e}")]
    ScheduleStall { stage: usize, residual: f64, earlier: f64 },
    #[error("boundary ratio h(w)/(1+w)^(N+1) is unbounded near w = -1 (max {max:e})")]
    UnboundedRatio { max: f64 },
    #[error("no split parameter met the bound: best ratio {best:e} > bound {bound:e}")]
    BoundNotMet { best: f64, bound: f64 },
    #[error("rational function is not in L^p: {0}")]
    NotInLp(String),
    #[error("point lies on the real axis")]
    OnRealAxis,
    #[error("subharmonic bound violated at {point}: |f| = {value:e} > {bound:e}")]
    BoundViolated { point: String, value: f64, bound: f64 },
    #[error("spatial window too small: edge value {edge:e} exceeds {threshold:e}")]
    WindowTooSmall { edge: f64, threshold: f64 },
    #[error("interior point height {0} is below the refusal threshold")]
    TooCloseToBoundary(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
