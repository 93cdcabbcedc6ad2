use thiserror::Error;

/// Errors shared by all maxbound modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("boundary index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("evaluation level m={m} must exceed the start value x0={x0}")]
    LevelBelowStart { m: f64, x0: f64 },

    #[error("level m={m} is below the path start {x0}")]
    LevelBelowPathStart { m: f64, x0: f64 },

    #[error("boundary values are not ordered at m={m}: component {index}")]
    UnorderedBoundaries { m: f64, index: usize },

    #[error("top boundary value {value} does not lie strictly below m={m}")]
    BoundaryAboveLevel { m: f64, value: f64 },

    #[error("unbounded-below sentinel appears after a finite boundary value")]
    SentinelNotLeading,

    #[error("boundary component {index} is not non-decreasing near m={m}")]
    NotMonotone { m: f64, index: usize },

    #[error("boundary touches the diagonal near z={z} (z - xi(z) = {gap})")]
    Tangency { z: f64, gap: f64 },

    #[error("step budget {cap} exceeded in stage {stage}")]
    StepBudgetExceeded { stage: usize, cap: u64 },

    #[error("integrability condition fails: zeta slope {slope}, phi growth {growth}")]
    IntegrabilityFailed { slope: f64, growth: f64 },

    #[error("truncation tail {tail} exceeds {limit} of the running estimate {estimate}")]
    TailBudgetExceeded { tail: f64, estimate: f64, limit: f64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment invariants violated: {0}")]
    MomentInvariant(String),

    #[error("moment of order {p} is infinite for slope alpha={alpha}")]
    InfiniteMoment { p: f64, alpha: f64 },

    #[error("no sign change found for the fixed-point function: g({lo})={g_lo}, g({hi})={g_hi}")]
    NoSignChange { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("boundary vectors coincide on the validation grid")]
    BoundariesEqual,

    #[error("comparison inconclusive at the configured path budget: {0}")]
    Inconclusive(String),

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
