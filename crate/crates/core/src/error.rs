use thiserror::Error;

/// Everything that can go wrong across the toolkit.
///
/// Verdict-style failures that a caller may want to branch on (a path that
/// leaves the gapped set, a localizer that is not certifiably invertible) are
/// ordinary variants here; [`Error::code`] gives a stable machine-readable tag.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not self-adjoint: asymmetry {asymmetry:e} exceeds tolerance {tolerance:e}")]
    NotSelfAdjoint { asymmetry: f64, tolerance: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix has {zeros} eigenvalue(s) within tolerance {tolerance:e} of zero")]
    SingularAtTolerance { zeros: usize, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("conjugating matrix is singular (smallest singular value {min_singular:e})")]
    SingularConjugator { min_singular: f64 },

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("element is not odd for the grading: anticommutator residual {residual:e}")]
    NotOdd { residual: f64 },

    #[error("path leaves the gapped set at sample {sample} (t = {t})")]
    GapViolation { sample: usize, t: f64 },

    #[error("path step {step} has norm {step_norm:e}, guard is {guard:e}")]
    StepTooLarge { step: usize, step_norm: f64, guard: f64 },

    #[error("path samples have inconsistent shapes: {0}")]
    ShapeMismatch(String),

    #[error("target level {target} is below block size {block_size}")]
    LevelTooSmall { target: usize, block_size: usize },

    #[error("matrix is not invertible (smallest singular value {min_singular:e})")]
    NotInvertible { min_singular: f64 },

    #[error("no direction avoids the eigenvalue arguments (widest gap {widest_gap:e} rad)")]
    NoGapFound { widest_gap: f64 },

    #[error("element is not {delta}-gapped")]
    NotGapped { delta: f64 },

    #[error("localizer is not invertible at kappa = {kappa}, s = {s} (min |eigenvalue| {min_abs_eig:e})")]
    SingularLocalizer { kappa: f64, s: f64, min_abs_eig: f64 },

    #[error("localizer signatures disagree across the sampled region: {0:?}")]
    InconsistentSignature(Vec<i64>),

    #[error("localizer signature {signature} is not divisible by {divisor}")]
    NotDivisible { signature: i64, divisor: i64 },

    #[error("winding number {m} is too large for truncation level {n}")]
    WindingTooLarge { m: i64, n: usize },

    #[error("delta must lie in (0, 1), got {0}")]
    BadDelta(f64),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable identifier used in machine-readable error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::NotSelfAdjoint { .. } => "NotSelfAdjoint",
            Error::NonFinite { .. } => "NonFinite",
            Error::SingularAtTolerance { .. } => "SingularAtTolerance",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::SingularConjugator { .. } => "SingularConjugator",
            Error::ModeMismatch(_) => "ModeMismatch",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NotOdd { .. } => "NotOdd",
            Error::GapViolation { .. } => "GapViolation",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::LevelTooSmall { .. } => "LevelTooSmall",
            Error::NotInvertible { .. } => "NotInvertible",
            Error::NoGapFound { .. } => "NoGapFound",
            Error::NotGapped { .. } => "NotGapped",
            Error::SingularLocalizer { .. } => "SingularLocalizer",
            Error::InconsistentSignature(_) => "InconsistentSignature",
            Error::NotDivisible { .. } => "NotDivisible",
            Error::WindingTooLarge { .. } => "WindingTooLarge",
            Error::BadDelta(_) => "BadDelta",
            Error::Parse(_) => "Parse",
        }
    }

    /// True for failures that mean "the check ran and the answer is no",
    /// as opposed to malformed input.
    pub fn is_verdict(&self) -> bool {
        matches!(
            self,
            Error::GapViolation { .. }
                | Error::StepTooLarge { .. }
                | Error::NotGapped { .. }
                | Error::SingularLocalizer { .. }
                | Error::SingularAtTolerance { .. }
                | Error::NotInvertible { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
