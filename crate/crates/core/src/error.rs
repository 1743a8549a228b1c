use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {vertex} does not exist at time {t}")]
    VertexOutOfRange { vertex: u64, t: u64 },

    #[error("the reference sampler needs the explicit weight array; build the state with weights enabled")]
    WeightsNotMaintained,

    #[error("horizon {t_max} exceeds the supported limit {limit}")]
    HorizonTooLarge { t_max: u64, limit: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shift {0} must be strictly greater than -1")]
    InvalidShift(f64),

    #[error("fit window [{t_lo}, {t_hi}] holds {points} usable snapshots, need at least {needed}")]
    DegenerateWindow { t_lo: u64, t_hi: u64, points: usize, needed: usize },

    #[error("no crossover for vertex {i} within {cap} iterations")]
    IterationCap { i: u64, cap: u64 },

    #[error("mean ratio hit the fixed point exactly for vertex {i} at t = {t}")]
    FixedPointTie { i: u64, t: u64 },

    #[error("recursion reconstruction residual {residual:e} at t = {t}")]
    ReconstructionResidual { t: u64, residual: f64 },

    #[error("iterate {value} escaped the bound {bound} at step {step}")]
    IterateEscaped { step: u64, value: f64, bound: f64 },

    #[error("ODE step {step} too large: halved-step solution differs by {diff:e}")]
    StepTooLarge { step: f64, diff: f64 },

    #[error("dense path for vertex {vertex} ends at t = {end}, window needs t = {needed}")]
    PathTooShort { vertex: u64, end: u64, needed: u64 },
}
